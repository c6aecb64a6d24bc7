"""
Tuple statistics for finite sequences of reduced words.

Lcp, Min, Max and Nbr, the central tree property, the repeated-factor
statistic and the sufficient malnormality certificate built from them.
Statistics are computed over h^± = (h_1, h_1⁻¹, ..., h_k, h_k⁻¹).
"""

import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import (
    AlphabetError,
    EmptyWordError,
    InputFileError,
    PreconditionError,
    WordSyntaxError,
)
from core.words import (
    ReducedWord,
    count_reduced,
    infer_rank,
    invert_letters,
    letters_to_text,
    parse_letters,
    reduce,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WordTuple:
    """Finite sequence of nonempty reduced words over one alphabet; duplicates allowed"""

    words: Tuple[ReducedWord, ...]
    rank: int

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        for i, w in enumerate(self.words):
            if len(w) == 0:
                raise EmptyWordError(f"word {i} of the tuple is empty")
            if w.rank != self.rank:
                raise AlphabetError(f"word {i} has rank {w.rank}, tuple has rank {self.rank}")

    @classmethod
    def from_texts(cls, texts: Iterable[str], rank: Optional[int] = None) -> "WordTuple":
        """Parse and reduce each text"""
        parsed = [parse_letters(t.strip(), rank) for t in texts]
        if rank is None:
            rank = max((infer_rank(p) for p in parsed), default=1)
        return cls(tuple(reduce(p, rank) for p in parsed), rank)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, rank: int, lengths: Optional[np.ndarray] = None) -> "WordTuple":
        """Rows of a letter matrix (sampler output); rows are trusted reduced"""
        matrix = np.ascontiguousarray(matrix, dtype=np.uint8)
        if lengths is None:
            words = tuple(ReducedWord.trusted(row.tobytes(), rank) for row in matrix)
        else:
            words = tuple(ReducedWord.trusted(row[:k].tobytes(), rank) for row, k in zip(matrix, lengths))
        return cls(words, rank)

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def __getitem__(self, item):
        return self.words[item]

    @cached_property
    def signed_entries(self) -> List[bytes]:
        """h_1, h_1⁻¹, h_2, h_2⁻¹, ... as raw letters"""
        out = []
        for w in self.words:
            out.append(w.letters)
            out.append(invert_letters(w.letters))
        return out

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.fromiter((len(w) for w in self.words), dtype=np.int64, count=len(self.words))

    def sub_tuple(self, indices: Sequence[int]) -> "WordTuple":
        return WordTuple(tuple(self.words[i] for i in indices), self.rank)

    def texts(self) -> List[str]:
        return [w.text for w in self.words]


@dataclass(frozen=True)
class TupleStats:
    min_length: int
    max_length: int
    nbr: int
    lcp: int


class CertificateResult(str, Enum):
    CERTIFIED = "certified"
    INCONCLUSIVE = "inconclusive"


# ===== PREFIX TABLES =====

def letter_matrix(entries: Sequence[bytes]) -> Tuple[np.ndarray, np.ndarray]:
    """Rows padded with 0xFF; returns (matrix, lengths)"""
    lengths = np.fromiter((len(e) for e in entries), dtype=np.int64, count=len(entries))
    width = int(lengths.max()) if len(entries) else 0
    if len(entries) and (lengths == width).all():
        matrix = np.frombuffer(b"".join(entries), dtype=np.uint8).reshape(len(entries), width)
        return matrix, lengths
    matrix = np.full((len(entries), width), 0xFF, dtype=np.uint8)
    for row, e in enumerate(entries):
        matrix[row, :len(e)] = np.frombuffer(e, dtype=np.uint8)
    return matrix, lengths


def adjacent_common_prefix(matrix: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """lcp of each row with the next one"""
    if len(matrix) < 2:
        return np.zeros(0, dtype=np.int64)
    eq = matrix[1:] == matrix[:-1]
    width = matrix.shape[1]
    first_diff = np.where(eq.all(axis=1), width, np.argmin(eq, axis=1))
    return np.minimum(first_diff, np.minimum(lengths[1:], lengths[:-1])).astype(np.int64)


def sorted_common_prefixes(entries: Sequence[bytes]) -> Tuple[List[int], np.ndarray]:
    """Sort entries lexicographically; return (order, lcp of sorted neighbours).

    The maximum lcp of an entry against all others is attained at one of
    its sorted neighbours.
    """
    order = sorted(range(len(entries)), key=entries.__getitem__)
    matrix, lengths = letter_matrix([entries[i] for i in order])
    return order, adjacent_common_prefix(matrix, lengths)


# ===== STATISTICS =====

def stats(h: WordTuple) -> TupleStats:
    if len(h) == 0:
        raise PreconditionError("statistics of an empty tuple")
    _, lcps = sorted_common_prefixes(h.signed_entries)
    lengths = h.lengths
    return TupleStats(
        min_length=int(lengths.min()),
        max_length=int(lengths.max()),
        nbr=len(h),
        lcp=int(lcps.max()) if len(lcps) else 0,
    )


def lcp_naive(h: WordTuple) -> int:
    entries = h.signed_entries
    best = 0
    for i in range(len(entries)):
        for j in range(i + 1, len(entries)):
            a, b = entries[i], entries[j]
            k = 0
            while k < len(a) and k < len(b) and a[k] == b[k]:
                k += 1
            best = max(best, k)
    return best


def has_central_tree_property(h: WordTuple) -> bool:
    s = stats(h)
    return 2 * s.lcp < s.min_length


def lcp_below(h: WordTuple, bound: int) -> bool:
    if bound < 0:
        raise PreconditionError(f"bound must be nonnegative, got {bound}")
    return stats(h).lcp <= bound


def min_above(h: WordTuple, beta: float, n: Optional[int] = None) -> bool:
    """Min(h) > beta·n, with n defaulting to Max(h)"""
    s = stats(h)
    if n is None:
        n = s.max_length
    return s.min_length > beta * n


# ===== REPEATED FACTORS =====

def suffix_array(seq: np.ndarray) -> np.ndarray:
    """Suffix array by prefix doubling with ``np.lexsort``"""
    n = len(seq)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    rank = np.unique(seq, return_inverse=True)[1].astype(np.int64).reshape(-1)
    sa = np.argsort(rank, kind="stable")
    k = 1
    while k < n:
        second = np.full(n, -1, dtype=np.int64)
        second[:n - k] = rank[k:]
        sa = np.lexsort((second, rank))
        r_sorted, s_sorted = rank[sa], second[sa]
        step = (r_sorted[1:] != r_sorted[:-1]) | (s_sorted[1:] != s_sorted[:-1])
        new_rank = np.empty(n, dtype=np.int64)
        new_rank[sa] = np.concatenate(([0], np.cumsum(step)))
        rank = new_rank
        if rank[sa[-1]] == n - 1:
            break
        k *= 2
    return sa


def lcp_array(seq: Sequence[int], sa: Sequence[int]) -> List[int]:
    """Kasai: lcp[i] is the lcp of suffixes sa[i-1] and sa[i] (lcp[0] = 0)"""
    n = len(sa)
    rank = [0] * n
    for i, pos in enumerate(sa):
        rank[pos] = i
    lcp = [0] * n
    k = 0
    for i in range(n):
        r = rank[i]
        if r == 0:
            k = 0
            continue
        j = sa[r - 1]
        while i + k < n and j + k < n and seq[i + k] == seq[j + k]:
            k += 1
        lcp[r] = k
        if k:
            k -= 1
    return lcp


def longest_repeated_factor(h: WordTuple) -> int:
    """Longest word with two occurrences as a factor of entries of h^±"""
    if len(h) == 0:
        raise PreconditionError("repeated factors of an empty tuple")
    entries = h.signed_entries
    alphabet = 2 * h.rank
    parts = []
    for i, e in enumerate(entries):
        parts.append(np.frombuffer(e, dtype=np.uint8).astype(np.int64))
        # unique separators keep matches inside one entry
        parts.append(np.array([alphabet + i], dtype=np.int64))
    seq = np.concatenate(parts)
    sa = suffix_array(seq)
    lcp = lcp_array(seq.tolist(), sa.tolist())
    log.debug("suffix array over %d positions", len(seq))
    return max(lcp, default=0)


def longest_repeated_factor_naive(h: WordTuple) -> int:
    entries = h.signed_entries
    longest = max((len(e) for e in entries), default=0)
    for length in range(longest, 0, -1):
        seen = Counter(e[i:i + length] for e in entries for i in range(len(e) - length + 1))
        if any(c >= 2 for c in seen.values()):
            return length
    return 0


def malnormality_certificate(h: WordTuple) -> CertificateResult:
    """Certified when 3·Lcp < Min and every repeated factor is shorter than (Min - 3·Lcp) // 2"""
    s = stats(h)
    if 3 * s.lcp >= s.min_length:
        return CertificateResult.INCONCLUSIVE
    threshold = (s.min_length - 3 * s.lcp) // 2
    if longest_repeated_factor(h) < threshold:
        return CertificateResult.CERTIFIED
    return CertificateResult.INCONCLUSIVE


# ===== FACTOR COVERAGE =====

def factor_coverage(h: WordTuple, length: int) -> Tuple[int, int]:
    """(distinct reduced factors of the given length in h^±, |R_length|)"""
    if length < 1:
        raise PreconditionError(f"factor length must be positive, got {length}")
    seen = {e[i:i + length] for e in h.signed_entries for i in range(len(e) - length + 1)}
    return len(seen), count_reduced(h.rank, length)


def covers_all_factors(h: WordTuple, length: int) -> bool:
    covered, total = factor_coverage(h, length)
    return covered == total


# ===== TUPLE FILES =====

def parse_tuple_text(text: str, rank: Optional[int] = None, source: str = "<text>") -> WordTuple:
    """One word per line; '#' comment lines and blank lines are skipped"""
    parsed = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            parsed.append((lineno, parse_letters(stripped, rank)))
        except WordSyntaxError as exc:
            raise InputFileError(f"{source}:{lineno}: {exc}") from exc
    if rank is None:
        rank = max((infer_rank(p) for _, p in parsed), default=1)
    words = []
    for lineno, letters in parsed:
        w = reduce(letters, rank)
        if len(w) == 0:
            raise InputFileError(f"{source}:{lineno}: word reduces to the empty word")
        words.append(w)
    return WordTuple(tuple(words), rank)


def load_tuple_file(path, rank: Optional[int] = None) -> WordTuple:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputFileError(f"cannot read tuple file {path}: {exc}") from exc
    return parse_tuple_text(text, rank, source=str(path))


def dump_tuple_file(h: WordTuple, path, header: Optional[str] = None):
    lines = []
    if header:
        lines.extend(f"# {line}" for line in header.splitlines())
    lines.extend(letters_to_text(w.letters) for w in h.words)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
