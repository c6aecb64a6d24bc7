from fractions import Fraction

import pytest

from core.cancellation import (
    RotationIndex,
    as_lambda,
    find_cprime_violation,
    max_piece_per_rotation,
    pieces_naive,
    satisfies_cprime,
)
from core.errors import NotCyclicallyReducedError, PreconditionError, ResourceCapError
from core.markov import sample_cyclically_reduced, uniform_automaton
from core.tuples import WordTuple
from core.words import inverse, invert_letters, letters_to_text, rotations

LAMBDAS = [Fraction(1, 6), Fraction(1, 4), Fraction(1, 3), Fraction(1, 2)]


def cyclic_tuple(rng, max_words, max_length, rank=2):
    a = uniform_automaton(rank)
    k = int(rng.integers(1, max_words + 1))
    words = [sample_cyclically_reduced(a, int(rng.integers(1, max_length + 1)), rng) for _ in range(k)]
    return WordTuple(tuple(words), rank)


def rotation_text(h, slot):
    letters = h[slot.word].letters
    if slot.sign < 0:
        letters = invert_letters(letters)
    return letters_to_text(letters[slot.shift:] + letters[:slot.shift])


def naive_satisfies(h, lam):
    pieces = pieces_naive(h)
    return all(lam.denominator * piece < lam.numerator * len(h[slot.word])
               for slot, piece in pieces.items())


def test_commutator_pieces():
    h = WordTuple.from_texts(["abAB"])
    assert set(max_piece_per_rotation(h).values()) == {1}
    assert not satisfies_cprime(h, "1/6")
    assert satisfies_cprime(h, "1/3")


def test_genus_two_relator_is_small_cancellation():
    h = WordTuple.from_texts(["abABcdCD"])
    assert satisfies_cprime(h, Fraction(1, 6))


def test_violation_reports_shared_piece():
    h = WordTuple.from_texts(["abAB"])
    violation = find_cprime_violation(h, "1/6")
    assert violation.rotation == RotationIndex(0, 1, 0)
    assert violation.piece_length == 1
    assert violation.word_length == 4
    assert violation.partner != violation.rotation
    assert rotation_text(h, violation.partner).startswith(violation.piece)


def test_proper_power_fails_every_lambda():
    h = WordTuple.from_texts(["abab"])
    for lam in LAMBDAS:
        assert not satisfies_cprime(h, lam)


def test_piece_table_matches_oracle(rng):
    for _ in range(100):
        h = cyclic_tuple(rng, max_words=5, max_length=30)
        assert max_piece_per_rotation(h) == pieces_naive(h)
        for lam in LAMBDAS:
            assert satisfies_cprime(h, lam) == naive_satisfies(h, lam)


@pytest.mark.slow
def test_piece_table_matches_oracle_at_scale(rng):
    for _ in range(500):
        h = cyclic_tuple(rng, max_words=5, max_length=30, rank=int(rng.integers(2, 4)))
        assert max_piece_per_rotation(h) == pieces_naive(h)


def test_violations_are_genuine(rng):
    for _ in range(100):
        h = cyclic_tuple(rng, max_words=4, max_length=20)
        violation = find_cprime_violation(h, "1/6")
        if violation is None:
            continue
        assert rotation_text(h, violation.rotation).startswith(violation.piece)
        assert rotation_text(h, violation.partner).startswith(violation.piece)
        assert 6 * violation.piece_length >= violation.word_length


def test_sub_tuples_inherit_cprime(rng):
    for _ in range(200):
        h = cyclic_tuple(rng, max_words=5, max_length=24)
        if not satisfies_cprime(h, "1/4"):
            continue
        keep = [i for i in range(len(h)) if rng.random() < 0.5] or [0]
        assert satisfies_cprime(h.sub_tuple(keep), "1/4")


def test_cprime_is_monotone_in_lambda(rng):
    for _ in range(200):
        h = cyclic_tuple(rng, max_words=5, max_length=24)
        verdicts = [satisfies_cprime(h, lam) for lam in LAMBDAS]
        # once it holds it keeps holding for every larger lambda
        assert verdicts == sorted(verdicts)


def test_cprime_ignores_order_inversion_and_rotation(rng):
    for _ in range(200):
        h = cyclic_tuple(rng, max_words=5, max_length=24)
        words = []
        for i in rng.permutation(len(h)):
            w = h[i] if rng.random() < 0.5 else inverse(h[i])
            turns = rotations(w)
            words.append(turns[int(rng.integers(len(turns)))])
        moved = WordTuple(tuple(words), h.rank)
        for lam in LAMBDAS:
            assert satisfies_cprime(moved, lam) == satisfies_cprime(h, lam)
        assert sorted(max_piece_per_rotation(moved).values()) == sorted(max_piece_per_rotation(h).values())


def test_requires_cyclically_reduced_words():
    with pytest.raises(NotCyclicallyReducedError):
        satisfies_cprime(WordTuple.from_texts(["abA"]), "1/6")


def test_naive_oracle_cap():
    with pytest.raises(ResourceCapError):
        pieces_naive(WordTuple.from_texts(["abAB"]), cap=3)


@pytest.mark.parametrize("text, expected", [
    ("1/6", Fraction(1, 6)),
    ("0.25", Fraction(1, 4)),
    (Fraction(1, 3), Fraction(1, 3)),
])
def test_as_lambda(text, expected):
    assert as_lambda(text) == expected


@pytest.mark.parametrize("bad", ["0", "1", "3/2", "x", "1/0"])
def test_as_lambda_rejects(bad):
    with pytest.raises(PreconditionError):
        as_lambda(bad)
