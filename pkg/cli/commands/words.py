"""
words: reduce, cyclic-reduce and count
"""

from cli.output import emit
from core.words import (
    count_cyclically_reduced,
    count_reduced,
    count_reduced_at_most,
    cyclic_reduce,
    reduce_text,
)


def register(subparsers, common):
    parser = subparsers.add_parser("words", parents=[common], help="word arithmetic")
    actions = parser.add_subparsers(dest="action", metavar="ACTION", required=True)

    p = actions.add_parser("reduce", parents=[common], help="print the reduced form")
    p.add_argument("word")
    p.add_argument("-r", "--rank", type=int, help="alphabet rank (default: highest letter)")
    p.set_defaults(handler=run_reduce)

    p = actions.add_parser("cyclic-reduce", parents=[common], help="print 'core conjugator'")
    p.add_argument("word")
    p.add_argument("-r", "--rank", type=int)
    p.set_defaults(handler=run_cyclic_reduce)

    p = actions.add_parser("count", parents=[common], help="count reduced words of length n")
    p.add_argument("-r", "--rank", type=int, required=True)
    p.add_argument("-n", "--length", type=int, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--cyclic", action="store_true", help="count cyclically reduced words")
    group.add_argument("--at-most", action="store_true", help="count lengths 1..n")
    p.set_defaults(handler=run_count)


def run_reduce(args, ctx) -> int:
    w = reduce_text(args.word, args.rank)
    emit(ctx, w.text, {"input": args.word, "reduced": w.text, "length": len(w)})
    return 0


def run_cyclic_reduce(args, ctx) -> int:
    w = reduce_text(args.word, args.rank)
    result = cyclic_reduce(w)
    core, conjugator = result.core.text, result.conjugator.text
    emit(ctx, f"{core} {conjugator}".rstrip(), {"core": core, "conjugator": conjugator})
    return 0


def run_count(args, ctx) -> int:
    if args.cyclic:
        total = count_cyclically_reduced(args.rank, args.length)
    elif args.at_most:
        total = count_reduced_at_most(args.rank, args.length)
    else:
        total = count_reduced(args.rank, args.length)
    emit(ctx, str(total), {"rank": args.rank, "n": args.length, "count": total})
    return 0
