"""
Abelianization and prefix collisions for presentations ⟨A | h⟩.

Both are necessary conditions for the high-density degenerate regime:
the abelianization must match the predicted quotient group, and two
relators sharing a long prefix must exist.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors, smith_normal_decomp

from core.errors import PreconditionError
from core.markov import MarkovianAutomaton, letter_sets, uniform_automaton
from core.tuples import WordTuple, letter_matrix, stats

log = logging.getLogger(__name__)

COLLISION_COUNT_CAP = 2 ** 32


@dataclass(frozen=True)
class AbelianizationResult:
    """Z^free_rank ⊕ Z/d_1 ⊕ ... ⊕ Z/d_m with d_1 | d_2 | ... and every d_i > 1"""

    free_rank: int
    factors: Tuple[int, ...] = ()

    def __str__(self) -> str:
        parts = [f"Z/{d}" for d in self.factors]
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        return " + ".join(parts) if parts else "1"

    def to_dict(self) -> Dict:
        return {"free_rank": self.free_rank, "factors": list(self.factors), "text": str(self)}


def exponent_matrix(h: WordTuple) -> np.ndarray:
    """Nbr x r matrix of exponent sums"""
    size = 2 * h.rank
    if len(h) == 0:
        return np.zeros((0, h.rank), dtype=np.int64)
    flat = np.frombuffer(b"".join(w.letters for w in h.words), dtype=np.uint8).astype(np.int64)
    rows = np.repeat(np.arange(len(h), dtype=np.int64), h.lengths)
    counts = np.bincount(rows * size + flat, minlength=len(h) * size).reshape(len(h), size)
    return counts[:, 0::2] - counts[:, 1::2]


# ===== SMITH NORMAL FORM =====

def _xgcd(a: int, b: int) -> Tuple[int, int, int]:
    """(g, s, t) with s·a + t·b = g = gcd(a, b) >= 0"""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


class RowFolder:
    """Echelon basis of a growing integer row lattice.

    Each inserted row is cleared against the stored pivot rows by
    unimodular 2x2 gcd steps, so at most r rows are ever kept.
    """

    def __init__(self, columns: int):
        self.columns = columns
        self.pivots: Dict[int, List[int]] = {}

    def add(self, row: Sequence[int]):
        row = [int(v) for v in row]
        for col in range(self.columns):
            a = row[col]
            if a == 0:
                continue
            pivot = self.pivots.get(col)
            if pivot is None:
                if a < 0:
                    row = [-v for v in row]
                self.pivots[col] = row
                return
            p = pivot[col]
            g, s, t = _xgcd(p, a)
            pa, aa = p // g, a // g
            self.pivots[col] = [s * x + t * y for x, y in zip(pivot, row)]
            row = [pa * y - aa * x for x, y in zip(pivot, row)]
            self._reduce_tail(col)

    def _reduce_tail(self, col: int):
        # keep entries right of each pivot small: reduce the new pivot row
        # modulo the pivots stored for later columns
        row = self.pivots[col]
        for c in range(col + 1, self.columns):
            pivot = self.pivots.get(c)
            if pivot is None or row[c] == 0:
                continue
            q = row[c] // pivot[c]
            if q:
                row = [x - q * y for x, y in zip(row, pivot)]
        self.pivots[col] = row

    def rows(self) -> List[List[int]]:
        return [self.pivots[c] for c in sorted(self.pivots)]


def _result_from_rows(rows: List[List[int]], r: int) -> AbelianizationResult:
    rows = [row for row in rows if any(row)]
    if not rows:
        return AbelianizationResult(free_rank=r)
    found = [int(d) for d in invariant_factors(Matrix(rows), domain=ZZ)]
    nonzero = [abs(d) for d in found if d != 0]
    return AbelianizationResult(free_rank=r - len(nonzero), factors=tuple(d for d in nonzero if d > 1))


def abelianization(h: WordTuple) -> AbelianizationResult:
    """Z^r / rowspace(exponent_matrix(h)), folding rows incrementally"""
    folder = RowFolder(h.rank)
    for row in exponent_matrix(h).tolist():
        if any(row):
            folder.add(row)
    result = _result_from_rows(folder.rows(), h.rank)
    log.debug("abelianization of %d relators over rank %d: %s", len(h), h.rank, result)
    return result


def abelianization_batch(h: WordTuple) -> AbelianizationResult:
    """Same invariants from one Smith normal form of the full matrix"""
    return _result_from_rows(exponent_matrix(h).tolist(), h.rank)


def smith_decomposition(matrix) -> Tuple[Matrix, Matrix, Matrix]:
    """(D, U, V) with D = U·A·V in Smith normal form, U and V unimodular"""
    m = Matrix(matrix) if not isinstance(matrix, Matrix) else matrix
    d, u, v = smith_normal_decomp(m, domain=ZZ)
    return d, u, v


# ===== DEGENERATE REGIME =====

class DegenerateOutcome(str, Enum):
    CONSISTENT_TRIVIAL = "consistent_trivial"
    CONSISTENT_Z2 = "consistent_Z2"
    CONSISTENT_FREE = "consistent_free"
    OTHER = "other"


@dataclass(frozen=True)
class DegenerateCheck:
    outcome: DegenerateOutcome
    predicted: AbelianizationResult
    result: AbelianizationResult

    def __str__(self) -> str:
        if self.outcome is DegenerateOutcome.OTHER:
            return f"other({self.result})"
        return self.outcome.value


def predicted_abelianization(h: WordTuple, automaton: Optional[MarkovianAutomaton] = None) -> Tuple[DegenerateOutcome, AbelianizationResult]:
    """Quotient predicted at density above 1/2 by the letter sets of the source"""
    source = automaton or uniform_automaton(h.rank)
    if source.rank != h.rank:
        raise PreconditionError(f"automaton rank {source.rank} differs from tuple rank {h.rank}")
    used, unused = letter_sets(source)
    if not any(x ^ 1 in used for x in used):
        return DegenerateOutcome.CONSISTENT_FREE, AbelianizationResult(free_rank=len(unused) + 1)
    if len(h) and all(len(w) % 2 == 0 for w in h.words):
        return DegenerateOutcome.CONSISTENT_Z2, AbelianizationResult(free_rank=len(unused), factors=(2,))
    return DegenerateOutcome.CONSISTENT_TRIVIAL, AbelianizationResult(free_rank=len(unused))


def degenerate_class_check(h: WordTuple, automaton: Optional[MarkovianAutomaton] = None) -> DegenerateCheck:
    """Necessary condition only: the abelianization equals the predicted one"""
    outcome, predicted = predicted_abelianization(h, automaton)
    result = abelianization(h)
    if result != predicted:
        outcome = DegenerateOutcome.OTHER
    return DegenerateCheck(outcome=outcome, predicted=predicted, result=result)


# ===== PREFIX COLLISIONS =====

@dataclass(frozen=True)
class CollisionResult:
    pairs: int
    exists: bool
    capped: bool = False


def collision_statistic(h: WordTuple, length: int) -> CollisionResult:
    """Pairs of distinct words of h sharing their first ``length`` letters"""
    if length < 0:
        raise PreconditionError(f"prefix length must be nonnegative, got {length}")
    if len(h) == 0:
        return CollisionResult(0, False)
    if length > stats(h).min_length:
        raise PreconditionError(f"prefix length {length} exceeds Min(h) = {stats(h).min_length}")
    if length == 0:
        counts = np.array([len(h)], dtype=np.int64)
    else:
        matrix, _ = letter_matrix([w.letters[:length] for w in h.words])
        _, counts = np.unique(matrix, axis=0, return_counts=True)
    pairs = sum(int(c) * (int(c) - 1) // 2 for c in counts[counts > 1])
    capped = pairs > COLLISION_COUNT_CAP
    return CollisionResult(min(pairs, COLLISION_COUNT_CAP), pairs > 0, capped)


def collision_naive(h: WordTuple, length: int) -> int:
    words = [w.letters for w in h.words]
    pairs = 0
    for i in range(len(words)):
        for j in range(i + 1, len(words)):
            if words[i][:length] == words[j][:length]:
                pairs += 1
    return pairs
