"""
Free-group word arithmetic over a symmetrized alphabet.

Letters are small integers: index 2j is the j-th positive letter and
index 2j+1 its inverse, so inversion is ``x ^ 1``. Words are stored as
``bytes`` for cheap slicing, hashing and lexicographic comparison.
Text form uses lowercase for positive letters and uppercase for inverses
("abA" is a·b·a⁻¹).
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional

from core.config_manager import DEFAULTS
from core.errors import (
    AlphabetError,
    NotCyclicallyReducedError,
    NotReducedError,
    PreconditionError,
    ResourceCapError,
    WordSyntaxError,
)

log = logging.getLogger(__name__)

LETTERS = "abcdefghijklmnopqrstuvwxyz"
MAX_RANK = len(LETTERS)

_INVERT = bytes(i ^ 1 for i in range(256))


def inv(x: int) -> int:
    return x ^ 1


@dataclass(frozen=True)
class Alphabet:
    """Symmetrized alphabet with ``rank`` positive letters"""

    rank: int

    def __post_init__(self):
        if not 1 <= self.rank <= MAX_RANK:
            raise AlphabetError(f"rank must lie in 1..{MAX_RANK}, got {self.rank}")

    @property
    def size(self) -> int:
        return 2 * self.rank

    def char(self, index: int) -> str:
        if not 0 <= index < self.size:
            raise AlphabetError(f"letter index {index} outside alphabet of rank {self.rank}")
        c = LETTERS[index >> 1]
        return c.upper() if index & 1 else c

    def index(self, char: str) -> int:
        j = LETTERS.find(char.lower())
        if j < 0 or j >= self.rank:
            raise AlphabetError(f"letter {char!r} outside alphabet of rank {self.rank}")
        return 2 * j + (1 if char.isupper() else 0)


def letter_char(index: int) -> str:
    c = LETTERS[index >> 1]
    return c.upper() if index & 1 else c


def letters_to_text(letters: bytes) -> str:
    return "".join(letter_char(x) for x in letters)


@dataclass(frozen=True)
class ReducedWord:
    """A reduced word; ``letters`` never contains an adjacent pair x, x⁻¹"""

    letters: bytes
    rank: int

    def __post_init__(self):
        if not 1 <= self.rank <= MAX_RANK:
            raise AlphabetError(f"rank must lie in 1..{MAX_RANK}, got {self.rank}")
        bound = 2 * self.rank
        for pos, x in enumerate(self.letters):
            if x >= bound:
                raise AlphabetError(f"letter index {x} at position {pos} outside alphabet of rank {self.rank}")
            if pos and self.letters[pos - 1] == x ^ 1:
                raise NotReducedError(f"factor {letters_to_text(self.letters[pos - 1:pos + 1])} at position {pos - 1}")

    @classmethod
    def trusted(cls, letters: bytes, rank: int) -> "ReducedWord":
        """Build without validation; callers guarantee the invariants"""
        word = object.__new__(cls)
        object.__setattr__(word, "letters", letters)
        object.__setattr__(word, "rank", rank)
        return word

    @classmethod
    def empty(cls, rank: int) -> "ReducedWord":
        return cls.trusted(b"", rank)

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.rank)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, item):
        return self.letters[item]

    def __str__(self) -> str:
        return letters_to_text(self.letters)

    @property
    def text(self) -> str:
        return letters_to_text(self.letters)


# ===== PARSING =====

def parse_letters(text: str, rank: Optional[int] = None) -> List[int]:
    """Letter indices of ``text``; no reduction is performed"""
    out = []
    for pos, ch in enumerate(text):
        j = LETTERS.find(ch.lower()) if ch.isascii() and ch.isalpha() else -1
        if j < 0:
            raise WordSyntaxError(text, pos, f"invalid character {ch!r}")
        if rank is not None and j >= rank:
            raise WordSyntaxError(text, pos, f"letter {ch!r} outside alphabet of rank {rank}")
        out.append(2 * j + (1 if ch.isupper() else 0))
    return out


def infer_rank(letters: Iterable[int]) -> int:
    top = max(letters, default=0)
    return top // 2 + 1


def parse_word(text: str, rank: Optional[int] = None) -> ReducedWord:
    """Parse text that must already be reduced"""
    text = text.strip()
    letters = parse_letters(text, rank)
    for pos in range(1, len(letters)):
        if letters[pos] == letters[pos - 1] ^ 1:
            raise NotReducedError(f"factor {text[pos - 1:pos + 1]} at position {pos - 1} in {text!r}")
    if rank is None:
        rank = infer_rank(letters)
    return ReducedWord.trusted(bytes(letters), rank)


def reduce_text(text: str, rank: Optional[int] = None) -> ReducedWord:
    """Parse text and return its reduced form"""
    letters = parse_letters(text.strip(), rank)
    if rank is None:
        rank = infer_rank(letters)
    return reduce(letters, rank)


# ===== GROUP OPERATIONS =====

def reduce(raw: Iterable[int], rank: int) -> ReducedWord:
    """Free reduction by a single left-to-right stack pass"""
    bound = 2 * rank
    stack = bytearray()
    for x in raw:
        if not 0 <= x < bound:
            raise AlphabetError(f"letter index {x} outside alphabet of rank {rank}")
        if stack and stack[-1] == x ^ 1:
            stack.pop()
        else:
            stack.append(x)
    return ReducedWord.trusted(bytes(stack), rank)


def _same_alphabet(u: ReducedWord, v: ReducedWord):
    if u.rank != v.rank:
        raise AlphabetError(f"alphabet mismatch: rank {u.rank} vs rank {v.rank}")


def multiply(u: ReducedWord, v: ReducedWord) -> ReducedWord:
    _same_alphabet(u, v)
    a, b = u.letters, v.letters
    k = 0
    limit = min(len(a), len(b))
    while k < limit and a[len(a) - 1 - k] == b[k] ^ 1:
        k += 1
    return ReducedWord.trusted(a[:len(a) - k] + b[k:], u.rank)


def inverse(u: ReducedWord) -> ReducedWord:
    return ReducedWord.trusted(u.letters[::-1].translate(_INVERT), u.rank)


def invert_letters(letters: bytes) -> bytes:
    return letters[::-1].translate(_INVERT)


@dataclass(frozen=True)
class CyclicReduction:
    """u = conjugator · core · conjugator⁻¹"""

    core: ReducedWord
    conjugator: ReducedWord


def cyclic_reduce(u: ReducedWord) -> CyclicReduction:
    w = u.letters
    k = 0
    # a reduced word never strips down to a single letter
    while len(w) - 2 * k >= 2 and w[k] == w[len(w) - 1 - k] ^ 1:
        k += 1
    core = ReducedWord.trusted(w[k:len(w) - k], u.rank)
    return CyclicReduction(core=core, conjugator=ReducedWord.trusted(w[:k], u.rank))


def is_cyclically_reduced(u: ReducedWord) -> bool:
    w = u.letters
    return len(w) > 0 and w[0] != w[-1] ^ 1


def rotations(u: ReducedWord) -> List[ReducedWord]:
    """All cyclic conjugates, rotation amount 0..|u|-1, duplicates kept"""
    if not is_cyclically_reduced(u):
        raise NotCyclicallyReducedError(f"{u.text!r} is not cyclically reduced")
    w = u.letters
    return [ReducedWord.trusted(w[i:] + w[:i], u.rank) for i in range(len(w))]


# ===== COUNTING =====

def count_reduced(r: int, n: int) -> int:
    """|R_n| = 2r(2r-1)^(n-1), and 1 for the empty word"""
    if n < 0:
        raise PreconditionError(f"length must be nonnegative, got {n}")
    Alphabet(r)
    if n == 0:
        return 1
    return 2 * r * (2 * r - 1) ** (n - 1)


def count_reduced_at_most(r: int, n: int) -> int:
    """Reduced words of length 1..n (the empty word is not counted)"""
    return sum(count_reduced(r, length) for length in range(1, n + 1))


def count_cyclically_reduced(r: int, n: int) -> int:
    """|C_n| = (2r-1)^n + 1 + (r-1)(1 + (-1)^n) for n >= 1"""
    if n < 0:
        raise PreconditionError(f"length must be nonnegative, got {n}")
    Alphabet(r)
    if n == 0:
        return 0
    return (2 * r - 1) ** n + 1 + (r - 1) * (1 + (-1) ** n)


def enumerate_reduced(r: int, n: int, cap: int = DEFAULTS.enumerate_cap) -> List[ReducedWord]:
    """Every reduced word of length n, in lexicographic letter-index order"""
    total = count_reduced(r, n)
    if total > cap:
        raise ResourceCapError("reduced word enumeration", cap, total)
    size = 2 * r
    if n == 0:
        return [ReducedWord.empty(r)]
    level = [bytes([x]) for x in range(size)]
    for _ in range(n - 1):
        level = [w + bytes([y]) for w in level for y in range(size) if y != w[-1] ^ 1]
    log.debug("enumerated %d reduced words (r=%d, n=%d)", len(level), r, n)
    return [ReducedWord.trusted(w, r) for w in level]
