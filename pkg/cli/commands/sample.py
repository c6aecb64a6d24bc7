"""
sample: draw random words from an automaton
"""

import numpy as np

from cli.output import emit
from core.errors import UsageError
from core.experiments import sample_tuple
from core.markov import automaton_from_reference


def register(subparsers, common):
    p = subparsers.add_parser("sample", parents=[common], help="print random words")
    p.add_argument("--automaton", default="uniform:2", help="JSON file or preset (default uniform:2)")
    p.add_argument("--n", type=int, required=True, help="word length")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--cyclic", action="store_true", help="cyclically reduced words only")
    p.add_argument("--at-most", action="store_true", help="lengths 1..n (uniform source only)")
    p.set_defaults(handler=run)


def run(args, ctx) -> int:
    if args.n < 1 or args.count < 0:
        raise UsageError("--n must be positive and --count nonnegative")
    a = automaton_from_reference(args.automaton)
    seed = ctx.resolve_seed()
    rng = np.random.default_rng(seed)
    h = sample_tuple(
        a, args.n, args.count, rng,
        length_mode="at_most" if args.at_most else "exact",
        word_mode="cyclically_reduced" if args.cyclic else "reduced",
        max_attempts=ctx.settings.sample_max_attempts,
    )
    texts = h.texts()
    emit(ctx, texts, {"automaton": a.name, "seed": seed, "words": texts})
    return 0
