"""
check: evaluate one property of a tuple file
"""

from cli.output import emit
from core.cancellation import as_lambda, find_cprime_violation
from core.errors import UsageError
from core.presentations import abelianization
from core.stallings import is_malnormal, stallings_graph
from core.tuples import (
    CertificateResult,
    has_central_tree_property,
    load_tuple_file,
    malnormality_certificate,
    stats,
)

PROPERTIES = ("ctp", "cprime", "malnormal-cert", "malnormal-exact", "abelianization")


def register(subparsers, common):
    p = subparsers.add_parser("check", parents=[common], help="evaluate a property of a tuple file")
    p.add_argument("--property", required=True, choices=PROPERTIES)
    p.add_argument("--lambda", dest="lam", metavar="P/Q", help="parameter of cprime")
    p.add_argument("--input", required=True, metavar="TUPLE", help="tuple file, one word per line")
    p.add_argument("-r", "--rank", type=int, help="alphabet rank (default: highest letter)")
    p.set_defaults(handler=run)


def _verdict(ctx, holds: bool, lines, data) -> int:
    data["holds"] = holds
    emit(ctx, lines, data)
    return 0 if holds else 10


def run(args, ctx) -> int:
    h = load_tuple_file(args.input, args.rank)
    prop = args.property

    if prop == "ctp":
        s = stats(h)
        holds = has_central_tree_property(h)
        return _verdict(ctx, holds, [f"Lcp={s.lcp} Min={s.min_length}",
                                     f"central tree property: {'holds' if holds else 'fails'}"],
                        {"property": prop, "lcp": s.lcp, "min": s.min_length, "max": s.max_length, "nbr": s.nbr})

    if prop == "cprime":
        if not args.lam:
            raise UsageError("cprime needs --lambda P/Q")
        lam = as_lambda(args.lam)
        violation = find_cprime_violation(h, lam)
        if violation is None:
            return _verdict(ctx, True, [f"C'({lam}): holds"], {"property": prop, "lambda": str(lam)})
        rot, partner = violation.rotation, violation.partner
        lines = [
            f"C'({lam}): fails",
            f"piece {violation.piece} (length {violation.piece_length}, word length {violation.word_length})",
            f"rotation word={rot.word} sign={rot.sign:+d} shift={rot.shift}",
            f"partner  word={partner.word} sign={partner.sign:+d} shift={partner.shift}",
        ]
        return _verdict(ctx, False, lines, {
            "property": prop, "lambda": str(lam), "piece": violation.piece,
            "word_length": violation.word_length,
            "rotation": rot._asdict(), "partner": partner._asdict(),
        })

    if prop == "malnormal-cert":
        result = malnormality_certificate(h)
        holds = result is CertificateResult.CERTIFIED
        return _verdict(ctx, holds, [f"malnormality certificate: {result.value}"],
                        {"property": prop, "certificate": result.value})

    if prop == "malnormal-exact":
        g = stallings_graph(h)
        holds = is_malnormal(g, pair_cap=ctx.settings.fiber_pair_cap)
        return _verdict(ctx, holds, [f"malnormal: {'yes' if holds else 'no'} ({g.vertex_count} vertices)"],
                        {"property": prop, "vertices": g.vertex_count})

    result = abelianization(h)
    emit(ctx, str(result), {"property": prop, **result.to_dict()})
    return 0
