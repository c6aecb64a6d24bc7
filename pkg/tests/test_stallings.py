import json

import pytest

from conftest import random_tuple
from core.errors import AlphabetError, InputFileError, ResourceCapError
from core.stallings import (
    StallingsGraph,
    basis,
    brute_force_malnormal,
    contains,
    fiber_product,
    fold_edges,
    from_json,
    is_admissible,
    is_folded,
    is_isomorphic,
    is_malnormal,
    load_graph,
    rank,
    save_graph,
    stallings_graph,
    to_dot,
    to_json,
)
from core.tuples import (
    CertificateResult,
    WordTuple,
    has_central_tree_property,
    malnormality_certificate,
    stats,
)
from core.words import ReducedWord, inverse, multiply, reduce_text


def graph_of(*texts, r=None):
    return stallings_graph(WordTuple.from_texts(texts, rank=r))


def test_three_words_graph_has_rank_three(three_words):
    g = stallings_graph(three_words)
    assert rank(g) == 3
    assert is_folded(g)
    assert is_admissible(g)
    for w in three_words:
        assert contains(g, w)


def test_equal_subgroups_give_equal_graphs():
    full = StallingsGraph(alphabet_rank=2, vertex_count=1, edges=((0, 0, 0), (0, 2, 0)))
    assert graph_of("ab", "b") == full
    assert graph_of("a", "b") == full
    assert graph_of("a", "b", "ab", "Ba") == full


def test_folding_cancels_free_reductions():
    g = graph_of("abA", "aBA")
    assert g == graph_of("abA")
    assert rank(g) == 1
    assert g.vertex_count == 2


def test_membership():
    g = graph_of("ab")
    assert contains(g, reduce_text("abab", 2))
    assert contains(g, reduce_text("BA", 2))
    assert contains(g, reduce_text("", 2))
    assert not contains(g, reduce_text("ba", 2))
    assert not contains(g, reduce_text("a", 2))


def test_basis_generates_the_same_subgroup(three_words, rng):
    g = stallings_graph(three_words)
    assert len(basis(g)) == 3
    assert stallings_graph(basis(g)) == g
    for _ in range(50):
        h = random_tuple(rng, rank=2, max_words=4, max_length=8)
        g = stallings_graph(h)
        b = basis(g)
        assert len(b) == rank(g)
        if len(b):
            assert stallings_graph(b) == g


def test_folding_ignores_order_and_inversion(rng):
    for _ in range(100):
        h = random_tuple(rng, rank=int(rng.integers(2, 4)), max_words=5, max_length=13, min_length=3)
        words = [inverse(h[i]) if rng.random() < 0.5 else h[i] for i in rng.permutation(len(h))]
        g = stallings_graph(h)
        shuffled = stallings_graph(WordTuple(tuple(words), h.rank))
        assert is_isomorphic(g, shuffled)
        assert shuffled == g


def test_products_of_generators_are_members(rng):
    for _ in range(50):
        h = random_tuple(rng, rank=int(rng.integers(2, 4)), max_words=4, max_length=10)
        g = stallings_graph(h)
        for _ in range(10):
            w = ReducedWord.empty(h.rank)
            for _ in range(int(rng.integers(1, 21))):
                factor = h[int(rng.integers(len(h)))]
                w = multiply(w, inverse(factor) if rng.random() < 0.5 else factor)
            assert contains(g, w)


def test_central_tree_property_gives_a_free_basis(rng):
    checked = 0
    for _ in range(300):
        h = random_tuple(rng, rank=int(rng.integers(2, 4)), max_words=5, max_length=13, min_length=3)
        if not has_central_tree_property(h):
            continue
        assert rank(stallings_graph(h)) == stats(h).nbr
        checked += 1
    assert checked > 30


def test_malnormality_certificate_is_sound(rng):
    certified = 0
    for _ in range(100):
        h = random_tuple(rng, rank=2, max_words=3, max_length=40, min_length=20)
        if malnormality_certificate(h) is not CertificateResult.CERTIFIED:
            continue
        assert is_malnormal(stallings_graph(h))
        certified += 1
    assert certified > 10


def test_fold_edges_is_idempotent(three_words):
    g = stallings_graph(three_words)
    assert fold_edges(g.alphabet_rank, g.vertex_count, list(g.edges)) == g


def test_isomorphism_ignores_vertex_names(three_words):
    g = stallings_graph(three_words)
    n = g.vertex_count
    # reverse the numbering of every vertex but the base
    perm = {0: 0, **{v: n - v for v in range(1, n)}}
    edges = tuple(sorted((perm[u], x, perm[v]) for u, x, v in g.edges))
    relabeled = StallingsGraph(g.alphabet_rank, n, edges)
    assert is_isomorphic(g, relabeled)
    assert not is_isomorphic(g, graph_of("bAcbbaaB", "aaccAAcbc", r=3))


def test_malnormality_anchors():
    assert is_malnormal(graph_of("a"))
    assert not is_malnormal(graph_of("aa"))
    assert not is_malnormal(graph_of("ab", "ba"))
    assert brute_force_malnormal(graph_of("a"), 12)
    assert not brute_force_malnormal(graph_of("aa"), 12)


def test_self_fiber_product_of_square():
    g = graph_of("aa")
    product = fiber_product(g, g)
    assert product.edge_count == 4
    off = [c for c in product.components if c.has_off_diagonal]
    assert len(off) == 1
    assert off[0].vertex_count == 2
    assert not off[0].is_tree


def test_exact_malnormality_agrees_with_brute_force(rng):
    compared = 0
    for _ in range(200):
        h = random_tuple(rng, rank=2, max_words=3, max_length=8)
        g = stallings_graph(h)
        exact = is_malnormal(g)
        witness = brute_force_malnormal(g, 12, budget=10**8)
        # a word loop found by search always refutes malnormality
        if not witness:
            assert not exact
        product = fiber_product(g, g)
        if all(c.vertex_count <= 12 for c in product.components if c.has_off_diagonal):
            assert exact == witness
            compared += 1
    assert compared > 50


def test_fiber_product_preconditions():
    g2 = graph_of("ab", r=2)
    g3 = graph_of("ab", r=3)
    with pytest.raises(AlphabetError):
        fiber_product(g2, g3)
    big = graph_of("abab", "baba")
    with pytest.raises(ResourceCapError):
        fiber_product(big, big, pair_cap=3)


def test_json_round_trip(tmp_path, three_words):
    g = stallings_graph(three_words)
    path = tmp_path / "g.json"
    save_graph(g, path)
    assert load_graph(path) == g
    data = json.loads(path.read_text())
    assert data == to_json(g)
    assert data["base"] == 0
    assert data["vertices"] == g.vertex_count


def test_from_json_reads_inverse_edges():
    g = from_json({"vertices": 2, "edges": [[1, "A", 0], [1, "b", 1]]})
    assert g.edges == ((0, 0, 1), (1, 2, 1))
    assert g.alphabet_rank == 2


def test_from_json_rejects_bad_records():
    with pytest.raises(InputFileError):
        from_json({"vertices": 2, "base": 1, "edges": []})
    with pytest.raises(InputFileError):
        from_json({"vertices": 2, "edges": [[0, "a", 1], [0, "a", 0]]})
    with pytest.raises(InputFileError):
        from_json({"vertices": 2, "edges": [[0, "1", 1]]})
    with pytest.raises(InputFileError):
        from_json({"vertices": 2, "edges": [[0, "a", 5]]})


def test_to_dot_marks_the_base(three_words):
    dot = to_dot(stallings_graph(three_words))
    assert dot.startswith("digraph stallings {")
    assert "0 [shape=doublecircle];" in dot
