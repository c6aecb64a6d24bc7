"""
member: membership queries against a saved Stallings graph
"""

from cli.output import emit
from core.stallings import contains, load_graph
from core.words import reduce_text


def register(subparsers, common):
    p = subparsers.add_parser("member", parents=[common], help="test words for membership in a subgroup")
    p.add_argument("--graph", required=True, metavar="JSON", help="graph written by 'stallings --out'")
    p.add_argument("words", nargs="+", metavar="WORD")
    p.set_defaults(handler=run)


def run(args, ctx) -> int:
    g = load_graph(args.graph)
    results = {}
    for text in args.words:
        results[text] = contains(g, reduce_text(text, g.alphabet_rank))
    emit(ctx, [f"{w}: {'member' if ok else 'not a member'}" for w, ok in results.items()], results)
    return 0 if all(results.values()) else 10
