import numpy as np
import pytest

from core.config_manager import Settings
from core.markov import psl2_automaton, sample_reduced, uniform_automaton
from core.tuples import WordTuple

THREE_WORDS = ("bAcbbaaB", "aaccAAcbc", "CBabACCbAcc")


@pytest.fixture
def three_words():
    return WordTuple.from_texts(THREE_WORDS, rank=3)


@pytest.fixture
def uniform2():
    return uniform_automaton(2)


@pytest.fixture
def geodesic():
    return psl2_automaton("geodesic")


@pytest.fixture
def quasigeodesic():
    return psl2_automaton("quasigeodesic")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture
def settings_file(tmp_path):
    return tmp_path / "freegroups_config.json"


def random_tuple(rng, rank, max_words, max_length, min_length=1):
    """Tuple of 1..max_words uniform reduced words with lengths in min_length..max_length"""
    a = uniform_automaton(rank)
    k = int(rng.integers(1, max_words + 1))
    words = [sample_reduced(a, int(rng.integers(min_length, max_length + 1)), rng) for _ in range(k)]
    return WordTuple(tuple(words), rank)
