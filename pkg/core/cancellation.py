"""
Pieces and the small cancellation condition C'(λ).

Every rotation of every h_i and h_i⁻¹ is one occurrence slot. The
longest piece starting a rotation is its longest common prefix with any
other slot; sorting all rotations lexicographically puts that partner
next to it.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Tuple, Union

from core.config_manager import DEFAULTS
from core.errors import NotCyclicallyReducedError, PreconditionError, ResourceCapError
from core.tuples import WordTuple, sorted_common_prefixes
from core.words import invert_letters, is_cyclically_reduced, letters_to_text

log = logging.getLogger(__name__)


class RotationIndex(NamedTuple):
    """Occurrence slot: word index, sign (+1 for h_i, -1 for h_i⁻¹), rotation amount"""

    word: int
    sign: int
    shift: int


@dataclass(frozen=True)
class CPrimeViolation:
    rotation: RotationIndex
    partner: RotationIndex
    piece: str
    word_length: int

    @property
    def piece_length(self) -> int:
        return len(self.piece)


def as_lambda(value: Union[str, Fraction, int, float]) -> Fraction:
    """Exact λ with 0 < λ < 1, from "p/q", a decimal string or a number"""
    try:
        lam = Fraction(str(value).strip()) if not isinstance(value, Fraction) else value
    except (ValueError, ZeroDivisionError) as exc:
        raise PreconditionError(f"invalid lambda {value!r}") from exc
    if not 0 < lam < 1:
        raise PreconditionError(f"lambda must satisfy 0 < lambda < 1, got {lam}")
    return lam


def _check_cyclic(h: WordTuple):
    for i, w in enumerate(h.words):
        if not is_cyclically_reduced(w):
            raise NotCyclicallyReducedError(f"word {i} ({w.text!r}) is not cyclically reduced")


def _rotation_slots(h: WordTuple) -> Tuple[List[RotationIndex], List[bytes]]:
    slots, rots = [], []
    for i, w in enumerate(h.words):
        for sign, letters in ((1, w.letters), (-1, invert_letters(w.letters))):
            for s in range(len(letters)):
                slots.append(RotationIndex(i, sign, s))
                rots.append(letters[s:] + letters[:s])
    return slots, rots


def _piece_table(h: WordTuple) -> Tuple[List[RotationIndex], List[bytes], List[int], List[int]]:
    """Per slot: longest piece length and the slot it is shared with"""
    _check_cyclic(h)
    slots, rots = _rotation_slots(h)
    order, lcps = sorted_common_prefixes(rots)
    pieces = [0] * len(slots)
    partners = [-1] * len(slots)
    lcps = lcps.tolist()
    for pos, slot in enumerate(order):
        best, partner = -1, -1
        if pos > 0 and lcps[pos - 1] > best:
            best, partner = lcps[pos - 1], order[pos - 1]
        if pos + 1 < len(order) and lcps[pos] > best:
            best, partner = lcps[pos], order[pos + 1]
        pieces[slot] = max(best, 0)
        partners[slot] = partner
    log.debug("sorted %d rotations", len(rots))
    return slots, rots, pieces, partners


def max_piece_per_rotation(h: WordTuple) -> Dict[RotationIndex, int]:
    slots, _, pieces, _ = _piece_table(h)
    return dict(zip(slots, pieces))


def pieces_naive(h: WordTuple, cap: int = DEFAULTS.naive_rotation_cap) -> Dict[RotationIndex, int]:
    _check_cyclic(h)
    slots, rots = _rotation_slots(h)
    if len(slots) > cap:
        raise ResourceCapError("naive piece oracle rotations", cap, len(slots))
    result = {}
    for i, a in enumerate(rots):
        best = 0
        for j, b in enumerate(rots):
            if i == j:
                continue
            k = 0
            while k < len(a) and k < len(b) and a[k] == b[k]:
                k += 1
            best = max(best, k)
        result[slots[i]] = best
    return result


def find_cprime_violation(h: WordTuple, lam) -> Optional[CPrimeViolation]:
    """First slot (in slot order) whose longest piece reaches λ·|w|, if any"""
    lam = as_lambda(lam)
    p, q = lam.numerator, lam.denominator
    slots, rots, pieces, partners = _piece_table(h)
    for k, slot in enumerate(slots):
        length = len(rots[k])
        if q * pieces[k] >= p * length:
            return CPrimeViolation(
                rotation=slot,
                partner=slots[partners[k]],
                piece=letters_to_text(rots[k][:pieces[k]]),
                word_length=length,
            )
    return None


def satisfies_cprime(h: WordTuple, lam) -> bool:
    return find_cprime_violation(h, lam) is None
