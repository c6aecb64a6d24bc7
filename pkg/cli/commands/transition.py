"""
transition: locate the density where a property's frequency crosses 1/2
"""

from cli.output import emit
from core.errors import UsageError
from core.experiments import PROPERTY_NAMES, PropertySpec, estimate_transition


def register(subparsers, common):
    p = subparsers.add_parser("transition", parents=[common], help="estimate a phase transition")
    p.add_argument("--property", required=True, choices=PROPERTY_NAMES)
    p.add_argument("--param", help="property parameter (λ for cprime, bound rule, ...)")
    p.add_argument("--automaton", default="uniform:2")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", required=True,
                   help="densities: comma list (0.1,0.2) or start:stop:step (0.05:0.45:0.05)")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--cyclic", action="store_true", help="sample cyclically reduced words")
    p.add_argument("--workers", type=int)
    p.set_defaults(handler=run)


def parse_grid(text: str):
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            count = int(round((stop - start) / step)) + 1
            return [round(start + i * step, 12) for i in range(count)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"invalid density grid {text!r}") from exc


def run(args, ctx) -> int:
    grid = parse_grid(args.grid)
    if not grid:
        raise UsageError("empty density grid")
    spec = PropertySpec(name=args.property, param=args.param)
    estimate = estimate_transition(
        spec, args.automaton, args.n, grid, trials=args.trials,
        master_seed=ctx.resolve_seed(),
        word_mode="cyclically_reduced" if args.cyclic else "reduced",
        settings=ctx.settings, workers=args.workers,
    )
    lines = [f"d={d:.4g} frequency={f:.4g}" for d, f in estimate.points]
    lines.append(str(estimate))
    emit(ctx, lines, {
        "property": spec.label,
        "n": args.n,
        "points": [list(p) for p in estimate.points],
        "crossing": estimate.crossing,
        "bracket": list(estimate.bracket) if estimate.bracket else None,
    })
    return 0
