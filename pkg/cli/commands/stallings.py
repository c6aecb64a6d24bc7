"""
stallings: fold a tuple file into its Stallings graph
"""

from pathlib import Path

from cli.output import emit
from core.stallings import rank, save_graph, stallings_graph, to_dot
from core.tuples import load_tuple_file


def register(subparsers, common):
    p = subparsers.add_parser("stallings", parents=[common], help="fold a tuple into a Stallings graph")
    p.add_argument("--input", required=True, metavar="TUPLE")
    p.add_argument("-r", "--rank", type=int)
    p.add_argument("--out", metavar="JSON", help="write the graph as JSON")
    p.add_argument("--dot", metavar="PATH", help="write the graph as Graphviz DOT")
    p.set_defaults(handler=run)


def run(args, ctx) -> int:
    h = load_tuple_file(args.input, args.rank)
    g = stallings_graph(h)
    if args.out:
        save_graph(g, args.out)
    if args.dot:
        Path(args.dot).write_text(to_dot(g), encoding="utf-8")
    emit(ctx, f"vertices={g.vertex_count} edges={g.edge_count} rank={rank(g)}",
         {"vertices": g.vertex_count, "edges": g.edge_count, "rank": rank(g)})
    return 0
