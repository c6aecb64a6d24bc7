"""
Stallings graphs of finitely generated subgroups of a free group.

Graphs are built by folding the bouquet of the generators with a
union-find and a worklist of clashing edges, then renumbered by a
breadth-first pass so the base vertex is 0 and equal subgroups give
equal graphs. Malnormality is decided on the self fiber product.
"""

import json
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from core.config_manager import DEFAULTS
from core.errors import (
    AlphabetError,
    EmptyWordError,
    GraphInvariantError,
    InputFileError,
    ResourceCapError,
)
from core.tuples import WordTuple
from core.words import LETTERS, ReducedWord, letter_char, reduce

log = logging.getLogger(__name__)

Edge = Tuple[int, int, int]


@dataclass(frozen=True)
class StallingsGraph:
    """Folded based A-graph; base is vertex 0, edges carry positive letter indices"""

    alphabet_rank: int
    vertex_count: int
    edges: Tuple[Edge, ...]

    @cached_property
    def step(self) -> Dict[Tuple[int, int], int]:
        """(vertex, letter) -> vertex, inverse letters read edges backwards"""
        table = {}
        for u, x, v in self.edges:
            table[(u, x)] = v
            table[(v, x ^ 1)] = u
        return table

    @cached_property
    def transition_table(self) -> np.ndarray:
        """vertex_count x 2r array of targets, -1 where undefined"""
        table = np.full((self.vertex_count, 2 * self.alphabet_rank), -1, dtype=np.int64)
        for (u, x), v in self.step.items():
            table[u, x] = v
        return table

    @property
    def edge_count(self) -> int:
        return len(self.edges)


# ===== FOLDING =====

class _Folder:
    """Union-find over vertices with per-root out/in letter maps"""

    def __init__(self, vertex_count: int):
        self.parent = list(range(vertex_count))
        self.size = [1] * vertex_count
        self.out: List[Dict[int, int]] = [{} for _ in range(vertex_count)]
        self.inn: List[Dict[int, int]] = [{} for _ in range(vertex_count)]
        self.pending: List[Tuple[int, int]] = []
        self.merges = 0

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def add_edge(self, u: int, letter: int, v: int):
        """Add u -letter-> v for a positive letter index"""
        ru, rv = self.find(u), self.find(v)
        if letter in self.out[ru]:
            self.pending.append((self.out[ru][letter], rv))
        else:
            self.out[ru][letter] = rv
        if letter in self.inn[rv]:
            self.pending.append((self.inn[rv][letter], ru))
        else:
            self.inn[rv][letter] = ru
        self.drain()

    def drain(self):
        while self.pending:
            a, b = self.pending.pop()
            self._union(a, b)

    def _union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.merges += 1
        for maps in (self.out, self.inn):
            keep, moved = maps[ra], maps[rb]
            for letter, target in moved.items():
                if letter in keep:
                    self.pending.append((keep[letter], target))
                else:
                    keep[letter] = target
            maps[rb] = {}

    def edges(self) -> List[Edge]:
        found = []
        for v in range(len(self.parent)):
            if self.find(v) != v:
                continue
            for letter, target in self.out[v].items():
                found.append((v, letter, self.find(target)))
        return found


def _canonical(rank: int, edges: List[Edge], base: int) -> StallingsGraph:
    """Renumber by breadth-first search from the base in letter-index order"""
    step: Dict[Tuple[int, int], int] = {}
    for u, x, v in edges:
        step[(u, x)] = v
        step[(v, x ^ 1)] = u
    number = {base: 0}
    queue = deque([base])
    while queue:
        u = queue.popleft()
        for x in range(2 * rank):
            v = step.get((u, x))
            if v is not None and v not in number:
                number[v] = len(number)
                queue.append(v)
    renumbered = sorted((number[u], x, number[v]) for u, x, v in edges if u in number)
    return StallingsGraph(alphabet_rank=rank, vertex_count=len(number), edges=tuple(renumbered))


def fold_edges(rank: int, vertex_count: int, edges: List[Edge], base: int = 0) -> StallingsGraph:
    """Fold an arbitrary A-graph given by edges (src, positive letter, dst)"""
    folder = _Folder(vertex_count)
    for u, x, v in edges:
        folder.add_edge(u, x, v)
    folded = folder.edges()
    roots = sorted({folder.find(v) for v in range(vertex_count)})
    log.debug("folded %d vertices into %d (%d merges)", vertex_count, len(roots), folder.merges)
    return _canonical(rank, folded, folder.find(base))


def stallings_graph(h: WordTuple) -> StallingsGraph:
    """Fold the bouquet of the words of h at a common base vertex"""
    edges: List[Edge] = []
    next_vertex = 1
    for i, w in enumerate(h.words):
        if len(w) == 0:
            raise EmptyWordError(f"word {i} of the tuple is empty")
        path = [0] + list(range(next_vertex, next_vertex + len(w) - 1)) + [0]
        next_vertex += len(w) - 1
        for pos, x in enumerate(w.letters):
            u, v = path[pos], path[pos + 1]
            if x & 1:
                edges.append((v, x ^ 1, u))
            else:
                edges.append((u, x, v))
    return fold_edges(h.rank, next_vertex, edges)


# ===== QUERIES =====

def read_word(g: StallingsGraph, u: ReducedWord, start: int = 0) -> Optional[int]:
    """Vertex reached by reading u from start, or None when undefined"""
    step = g.step
    v = start
    for x in u.letters:
        v = step.get((v, x))
        if v is None:
            return None
    return v


def contains(g: StallingsGraph, u: ReducedWord) -> bool:
    return read_word(g, u) == 0


def rank(g: StallingsGraph) -> int:
    return g.edge_count - g.vertex_count + 1


def spanning_tree_labels(g: StallingsGraph) -> Tuple[Dict[int, bytes], set]:
    """Labels of tree paths from the base and the set of tree edges"""
    labels = {0: b""}
    tree = set()
    queue = deque([0])
    step = g.step
    while queue:
        u = queue.popleft()
        for x in range(2 * g.alphabet_rank):
            v = step.get((u, x))
            if v is None or v in labels:
                continue
            labels[v] = labels[u] + bytes([x])
            tree.add((u, x, v) if x % 2 == 0 else (v, x ^ 1, u))
            queue.append(v)
    return labels, tree


def basis(g: StallingsGraph) -> WordTuple:
    """One generator per edge outside a breadth-first spanning tree"""
    labels, tree = spanning_tree_labels(g)
    words = []
    for u, x, v in g.edges:
        if (u, x, v) in tree:
            continue
        raw = list(labels[u]) + [x] + [y ^ 1 for y in reversed(labels[v])]
        words.append(reduce(raw, g.alphabet_rank))
    return WordTuple(tuple(words), g.alphabet_rank)


def is_admissible(g: StallingsGraph) -> bool:
    """Connected, and every vertex but the base has degree at least 2"""
    labels, _ = spanning_tree_labels(g)
    if len(labels) != g.vertex_count:
        return False
    degree = [0] * g.vertex_count
    for u, _, v in g.edges:
        degree[u] += 1
        degree[v] += 1
    return all(d >= 2 for d in degree[1:])


def is_folded(g: StallingsGraph) -> bool:
    seen = set()
    for u, x, v in g.edges:
        if (u, x) in seen or (v, x ^ 1) in seen:
            return False
        seen.add((u, x))
        seen.add((v, x ^ 1))
    return True


def is_isomorphic(g1: StallingsGraph, g2: StallingsGraph) -> bool:
    """Base-preserving labeled isomorphism by synchronized traversal"""
    if g1.vertex_count != g2.vertex_count or g1.edge_count != g2.edge_count:
        return False
    letters = 2 * max(g1.alphabet_rank, g2.alphabet_rank)
    mapping = {0: 0}
    used = {0}
    queue = deque([0])
    while queue:
        u1 = queue.popleft()
        u2 = mapping[u1]
        for x in range(letters):
            v1, v2 = g1.step.get((u1, x)), g2.step.get((u2, x))
            if (v1 is None) != (v2 is None):
                return False
            if v1 is None:
                continue
            if v1 in mapping:
                if mapping[v1] != v2:
                    return False
            else:
                if v2 in used:
                    return False
                mapping[v1] = v2
                used.add(v2)
                queue.append(v1)
    return len(mapping) == g1.vertex_count


# ===== SERIALIZATION =====

class _GraphRecord(BaseModel):
    vertices: int = Field(ge=1)
    base: int = 0
    alphabet_rank: Optional[int] = Field(None, ge=1, le=26)
    edges: List[Tuple[int, str, int]]

    @field_validator("base")
    @classmethod
    def _base_is_zero(cls, value: int) -> int:
        if value != 0:
            raise ValueError("base vertex must be 0")
        return value


def to_json(g: StallingsGraph) -> Dict:
    return {
        "vertices": g.vertex_count,
        "base": 0,
        "alphabet_rank": g.alphabet_rank,
        "edges": [[u, letter_char(x), v] for u, x, v in g.edges],
    }


def from_json(data: Dict) -> StallingsGraph:
    try:
        record = _GraphRecord.model_validate(data)
    except ValidationError as exc:
        raise InputFileError(f"invalid graph record: {exc}") from exc
    edges = []
    for pos, (u, ch, v) in enumerate(record.edges):
        j = LETTERS.find(ch.lower()) if len(ch) == 1 else -1
        if j < 0:
            raise InputFileError(f"$.edges[{pos}]: invalid letter {ch!r}")
        if not (0 <= u < record.vertices and 0 <= v < record.vertices):
            raise InputFileError(f"$.edges[{pos}]: vertex out of range")
        edges.append((v, 2 * j, u) if ch.isupper() else (u, 2 * j, v))
    top = max((x // 2 + 1 for _, x, _ in edges), default=1)
    rank_ = record.alphabet_rank or top
    if top > rank_:
        raise InputFileError(f"edge letters exceed alphabet rank {rank_}")
    g = StallingsGraph(alphabet_rank=rank_, vertex_count=record.vertices, edges=tuple(sorted(edges)))
    if not is_folded(g):
        raise InputFileError("graph is not folded (two edges share a source or target letter)")
    return g


def save_graph(g: StallingsGraph, path):
    Path(path).write_text(json.dumps(to_json(g), indent=2) + "\n", encoding="utf-8")


def load_graph(path) -> StallingsGraph:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputFileError(f"cannot read graph file {path}: {exc}") from exc
    return from_json(data)


def to_dot(g: StallingsGraph, name: str = "stallings") -> str:
    lines = [f"digraph {name} {{", "  node [shape=circle];", "  0 [shape=doublecircle];"]
    for u, x, v in g.edges:
        lines.append(f'  {u} -> {v} [label="{letter_char(x)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ===== FIBER PRODUCTS =====

@dataclass(frozen=True)
class FiberComponent:
    vertex_count: int
    edge_count: int
    has_diagonal: bool
    has_off_diagonal: bool

    @property
    def betti(self) -> int:
        return self.edge_count - self.vertex_count + 1

    @property
    def is_tree(self) -> bool:
        return self.betti == 0


@dataclass(frozen=True, eq=False)
class FiberProduct:
    """Synchronized product; pair (u, v) is encoded as u * right_vertices + v.

    ``components`` lists the components that carry at least one edge; every
    other pair vertex is an isolated single-vertex tree.
    """

    left_vertices: int
    right_vertices: int
    sources: np.ndarray
    letters: np.ndarray
    targets: np.ndarray
    components: Tuple[FiberComponent, ...] = field(default=())

    @property
    def edge_count(self) -> int:
        return int(len(self.sources))

    def pair(self, code: int) -> Tuple[int, int]:
        return divmod(int(code), self.right_vertices)


def _edge_arrays(g: StallingsGraph) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    if not g.edges:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    arr = np.asarray(g.edges, dtype=np.int64)
    return arr[:, 0], arr[:, 1], arr[:, 2]


def fiber_product(g1: StallingsGraph, g2: StallingsGraph,
                  pair_cap: int = DEFAULTS.fiber_pair_cap) -> FiberProduct:
    if g1.alphabet_rank != g2.alphabet_rank:
        raise AlphabetError(f"alphabet mismatch: rank {g1.alphabet_rank} vs rank {g2.alphabet_rank}")
    pairs = g1.vertex_count * g2.vertex_count
    if pairs > pair_cap:
        raise ResourceCapError("fiber product vertex pairs", pair_cap, pairs)
    s1, x1, t1 = _edge_arrays(g1)
    s2, x2, t2 = _edge_arrays(g2)
    width = g2.vertex_count
    src_parts, let_parts, dst_parts = [], [], []
    for letter in np.intersect1d(x1, x2):
        a = np.flatnonzero(x1 == letter)
        b = np.flatnonzero(x2 == letter)
        src_parts.append((s1[a][:, None] * width + s2[b][None, :]).ravel())
        dst_parts.append((t1[a][:, None] * width + t2[b][None, :]).ravel())
        let_parts.append(np.full(len(a) * len(b), letter, dtype=np.int64))
    if src_parts:
        sources = np.concatenate(src_parts)
        targets = np.concatenate(dst_parts)
        letters = np.concatenate(let_parts)
    else:
        sources = targets = letters = np.zeros(0, dtype=np.int64)
    components = _components(sources, targets, width, self_product=g1 is g2 or g1 == g2)
    log.debug("fiber product: %d pair vertices, %d edges, %d nontrivial components",
              pairs, len(sources), len(components))
    return FiberProduct(g1.vertex_count, width, sources, letters, targets, components)


def _components(sources: np.ndarray, targets: np.ndarray, width: int,
                self_product: bool) -> Tuple[FiberComponent, ...]:
    if len(sources) == 0:
        return ()
    nodes, inverse = np.unique(np.concatenate([sources, targets]), return_inverse=True)
    inverse = inverse.reshape(-1)
    m = len(sources)
    a, b = inverse[:m], inverse[m:]
    adjacency = coo_matrix((np.ones(m, dtype=np.int8), (a, b)), shape=(len(nodes), len(nodes)))
    count, labels = connected_components(adjacency, directed=True, connection="weak")
    vertex_counts = np.bincount(labels, minlength=count)
    edge_counts = np.bincount(labels[a], minlength=count)
    left, right = np.divmod(nodes, width)
    diagonal = left == right
    diag_counts = np.bincount(labels, weights=diagonal.astype(np.float64), minlength=count)
    out = []
    for c in range(count):
        has_diag = diag_counts[c] > 0
        has_off = diag_counts[c] < vertex_counts[c]
        if self_product and has_diag and has_off:
            raise GraphInvariantError("self fiber product joins a diagonal and an off-diagonal vertex")
        out.append(FiberComponent(int(vertex_counts[c]), int(edge_counts[c]), bool(has_diag), bool(has_off)))
    return tuple(out)


def is_malnormal(g: StallingsGraph, pair_cap: int = DEFAULTS.fiber_pair_cap) -> bool:
    """Every off-diagonal component of the self fiber product is a tree"""
    product = fiber_product(g, g, pair_cap=pair_cap)
    return all(c.is_tree for c in product.components if c.has_off_diagonal)


def brute_force_malnormal(g: StallingsGraph, max_length: int,
                          budget: int = DEFAULTS.brute_force_budget) -> bool:
    """False iff a nonempty reduced word of length <= max_length loops at two distinct vertices.

    Breadth-first over (vertex pair, last letter) states from each start
    pair, so each state is expanded at most once per depth.
    """
    table = g.transition_table
    letters = 2 * g.alphabet_rank
    expanded = 0
    for p in range(g.vertex_count):
        for q in range(p + 1, g.vertex_count):
            frontier = {(p, q, -1)}
            for _ in range(max_length):
                nxt = set()
                for u, v, last in frontier:
                    expanded += 1
                    if expanded > budget:
                        raise ResourceCapError("brute-force malnormality states", budget)
                    for x in range(letters):
                        if last >= 0 and x == last ^ 1:
                            continue
                        u2, v2 = table[u, x], table[v, x]
                        if u2 < 0 or v2 < 0:
                            continue
                        if u2 == p and v2 == q:
                            return False
                        nxt.add((int(u2), int(v2), x))
                if not nxt:
                    break
                frontier = nxt
    return True
