"""
automaton: validate a Markovian automaton, or print its spectral analysis
"""

import logging

from cli.output import emit, fmt, key_values
from core.errors import AutomatonError
from core.markov import (
    automaton_from_reference,
    format_probability,
    spectral_summary,
    threshold_predictions,
)
from core.odt_report import ODTReportGenerator
from core.words import letter_char

log = logging.getLogger(__name__)


def register(subparsers, common):
    parser = subparsers.add_parser("automaton", parents=[common], help="Markovian automata")
    actions = parser.add_subparsers(dest="action", metavar="ACTION", required=True)

    p = actions.add_parser("validate", parents=[common], help="check an automaton file or preset")
    p.add_argument("automaton", help="JSON file, uniform:<r>, psl2:geodesic or psl2:quasigeodesic")
    p.set_defaults(handler=run_validate)

    p = actions.add_parser("analyze", parents=[common], help="spectral analysis and threshold predictions")
    p.add_argument("automaton")
    p.add_argument("--lambda", dest="lambdas", action="append", metavar="P/Q",
                   help="small-cancellation parameter for the C'(λ) prediction (repeatable)")
    p.add_argument("--odt", metavar="PATH", help="also write an ODT report")
    p.set_defaults(handler=run_analyze)


def run_validate(args, ctx) -> int:
    try:
        a = automaton_from_reference(args.automaton)
    except AutomatonError as exc:
        emit(ctx, [f"invalid: {v}" for v in exc.violations] or [f"invalid: {exc}"],
             {"valid": False, "violations": [str(v) for v in exc.violations] or [str(exc)]})
        return exc.exit_code
    emit(ctx, f"valid: {a.name} (rank {a.rank}, {len(a.states)} states, {len(a.transitions)} transitions)",
         {"valid": True, "name": a.name, "rank": a.rank, "states": len(a.states),
          "transitions": len(a.transitions)})
    return 0


def run_analyze(args, ctx) -> int:
    settings = ctx.settings
    a = automaton_from_reference(args.automaton)
    summary = spectral_summary(a, tolerance=settings.spectral_tolerance,
                               max_iterations=settings.spectral_max_iterations,
                               cycle_cap=settings.cycle_cap)
    predictions = threshold_predictions(a, args.lambdas or ["1/6"])

    heavy = summary.prefix_heavy
    lines = key_values([
        ("automaton", a.name),
        ("irreducible", summary.irreducible),
        ("ergodic", summary.ergodic),
        ("period", summary.period),
        ("alpha_[2]", summary.alpha2),
        ("alpha_[3]", summary.alpha3),
    ])
    if summary.stationary_by_state:
        lines.append("stationary: " + " ".join(f"{s}={fmt(m)}" for s, m in summary.stationary_by_state.items()))
    else:
        lines.append("stationary: -")
    lines.extend(key_values([
        ("degeneracy", summary.degeneracy),
        ("cyclically reduced density", summary.cyclic_density),
    ]))
    for label, params in (("cycles", heavy.cycles), ("spectral", heavy.spectral)):
        if params is not None:
            lines.append(f"prefix-heavy ({label}): C={fmt(params.C)} alpha={fmt(params.alpha)}")
        elif label == "cycles" and heavy.cycles_error:
            lines.append(f"prefix-heavy ({label}): unavailable ({heavy.cycles_error})")
        else:
            lines.append(f"prefix-heavy ({label}): unavailable")
    for prop, value in predictions.general.items():
        line = f"threshold {prop}: {format_probability(value)} (alpha_[2]-density)"
        sharp = (predictions.uniform_sharp or {}).get(prop)
        if sharp is not None:
            line += f", {format_probability(sharp)} (alpha-density)"
        lines.append(line)

    data = {
        "automaton": a.name,
        "irreducible": summary.irreducible,
        "ergodic": summary.ergodic,
        "period": summary.period,
        "alpha2": summary.alpha2,
        "alpha3": summary.alpha3,
        "alpha2_residual": summary.alpha2_residual,
        "stationary": summary.stationary_by_state,
        "stationary_local": None if summary.stationary is None else {
            f"{s}/{'-' if x is None else letter_char(x)}": float(m)
            for (s, x), m in zip(summary.local_states, summary.stationary)
        },
        "degeneracy": summary.degeneracy,
        "cyclic_density": summary.cyclic_density,
        "prefix_heavy": {
            "cycles": heavy.cycles,
            "spectral": heavy.spectral,
            "cycles_error": heavy.cycles_error,
        },
        "thresholds": {
            "general": {k: format_probability(v) for k, v in predictions.general.items()},
            "uniform_sharp": None if predictions.uniform_sharp is None else {
                k: format_probability(v) for k, v in predictions.uniform_sharp.items()
            },
        },
    }
    emit(ctx, lines, data)

    if args.odt and not ODTReportGenerator.create_automaton_report(a, summary, predictions, args.odt):
        log.warning("ODT report was not written")
        return 3
    return 0
