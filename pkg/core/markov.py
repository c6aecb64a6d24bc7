"""
Markovian automata as sources of random reduced words.

An automaton has states, an initial law γ₀ and weighted transitions
(state, letter) -> (state, probability). Its local automaton remembers
the last letter read; spectral quantities are taken on the local
transition matrix M and its entrywise powers M_[2], M_[3].
"""

import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import islice
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
import sympy
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from core.cancellation import as_lambda
from core.config_manager import DEFAULTS
from core.errors import (
    AutomatonError,
    ConvergenceError,
    InputFileError,
    PreconditionError,
    ProbabilityOneCycleError,
    ResourceCapError,
    SamplingError,
)
from core.words import LETTERS, MAX_RANK, ReducedWord, letter_char

log = logging.getLogger(__name__)

Probability = Fraction


def parse_probability(value) -> Fraction:
    """Exact probability from "p/q", a decimal string, or a JSON number"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("probability must be a number or a string")
    if isinstance(value, (int, float)):
        return Fraction(str(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"invalid probability {value!r}") from exc
    raise ValueError(f"invalid probability {value!r}")


def format_probability(p: Fraction) -> str:
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


@dataclass(frozen=True)
class Transition:
    source: str
    letter: int
    target: str
    probability: Fraction


@dataclass(frozen=True)
class MarkovianAutomaton:
    """Deterministic weighted transition system emitting reduced words"""

    rank: int
    states: Tuple[str, ...]
    initial: Tuple[Tuple[str, Fraction], ...]
    transitions: Tuple[Transition, ...]
    name: str = "custom"

    @cached_property
    def initial_map(self) -> Dict[str, Fraction]:
        return dict(self.initial)

    @cached_property
    def step(self) -> Dict[Tuple[str, int], Tuple[str, Fraction]]:
        return {(t.source, t.letter): (t.target, t.probability) for t in self.transitions}

    @cached_property
    def state_index(self) -> Dict[str, int]:
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def outgoing(self) -> Dict[str, List[Transition]]:
        out = {s: [] for s in self.states}
        for t in self.transitions:
            out.setdefault(t.source, []).append(t)
        for ts in out.values():
            ts.sort(key=lambda t: t.letter)
        return out

    @cached_property
    def sampling_tables(self) -> "SamplingTables":
        return SamplingTables.build(self)


# ===== VALIDATION =====

@dataclass(frozen=True)
class Violation:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(a: MarkovianAutomaton, tolerance: float = DEFAULTS.stochastic_tolerance) -> ValidationReport:
    found: List[Violation] = []
    if not 1 <= a.rank <= MAX_RANK:
        found.append(Violation("$.rank", f"rank must lie in 1..{MAX_RANK}"))
    if not a.states:
        found.append(Violation("$.states", "no states"))
    seen = set()
    for i, s in enumerate(a.states):
        if s in seen:
            found.append(Violation(f"$.states[{i}]", f"duplicate state {s!r}"))
        seen.add(s)

    total = Fraction(0)
    for s, p in a.initial:
        if s not in seen:
            found.append(Violation(f"$.initial.{s}", "unknown state"))
        if not 0 <= p <= 1:
            found.append(Violation(f"$.initial.{s}", f"probability {p} outside [0, 1]"))
        total += p
    if abs(float(total - 1)) > tolerance:
        found.append(Violation("$.initial", f"initial probabilities sum to {float(total):.15g}, not 1"))

    sums: Dict[str, Fraction] = {s: Fraction(0) for s in a.states}
    keys = set()
    for i, t in enumerate(a.transitions):
        where = f"$.transitions[{i}]"
        if t.source not in seen:
            found.append(Violation(f"{where}.from", f"unknown state {t.source!r}"))
        if t.target not in seen:
            found.append(Violation(f"{where}.to", f"unknown state {t.target!r}"))
        if not 0 <= t.letter < 2 * a.rank:
            found.append(Violation(f"{where}.letter", f"letter index {t.letter} outside alphabet"))
        if not 0 < t.probability <= 1:
            found.append(Violation(f"{where}.prob", f"stored probability {t.probability} must lie in (0, 1]"))
        if (t.source, t.letter) in keys:
            found.append(Violation(where, f"duplicate transition from {t.source!r} on {_letter(t.letter)!r}"))
        keys.add((t.source, t.letter))
        sums[t.source] = sums.get(t.source, Fraction(0)) + t.probability

    for s in a.states:
        if abs(float(sums[s] - 1)) > tolerance:
            found.append(Violation(f"$.states.{s}",
                                   f"outgoing probabilities sum to {float(sums[s]):.15g}, not 1"))

    for i, t in enumerate(a.transitions):
        if (t.target, t.letter ^ 1) in keys:
            found.append(Violation(
                f"$.transitions[{i}]",
                f"reduced support: state {t.target!r} is entered by {_letter(t.letter)!r} "
                f"and leaves by {_letter(t.letter ^ 1)!r}",
            ))
    return ValidationReport(tuple(found))


def _letter(x: int) -> str:
    return letter_char(x) if 0 <= x < 2 * MAX_RANK else str(x)


def require_valid(a: MarkovianAutomaton) -> MarkovianAutomaton:
    report = validate(a)
    if not report.ok:
        raise AutomatonError(f"invalid automaton {a.name!r}", report.violations)
    return a


# ===== JSON FORMAT =====

class _TransitionRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True, arbitrary_types_allowed=True)

    source: str = Field(alias="from")
    letter: str = Field(min_length=1, max_length=1)
    target: str = Field(alias="to")
    prob: Fraction

    @field_validator("prob", mode="before")
    @classmethod
    def _exact(cls, value):
        return parse_probability(value)

    @field_validator("letter")
    @classmethod
    def _is_letter(cls, value: str) -> str:
        if value.lower() not in LETTERS:
            raise ValueError(f"invalid letter {value!r}")
        return value


class _AutomatonRecord(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    rank: int = Field(ge=1, le=MAX_RANK)
    name: Optional[str] = None
    states: List[str] = Field(min_length=1)
    initial: Dict[str, Fraction]
    transitions: List[_TransitionRecord]

    @field_validator("initial", mode="before")
    @classmethod
    def _exact(cls, value):
        if not isinstance(value, dict):
            raise ValueError("initial must be an object mapping states to probabilities")
        return {k: parse_probability(v) for k, v in value.items()}


def _json_path(loc: Sequence) -> str:
    path = "$"
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else f".{part}"
    return path


def automaton_from_dict(data: Mapping, name: Optional[str] = None) -> MarkovianAutomaton:
    """Build and validate an automaton from its JSON record"""
    try:
        record = _AutomatonRecord.model_validate(data)
    except ValidationError as exc:
        violations = [Violation(_json_path(err["loc"]), err["msg"]) for err in exc.errors()]
        raise AutomatonError("malformed automaton record", violations) from exc
    transitions = []
    for t in record.transitions:
        j = LETTERS.index(t.letter.lower())
        transitions.append(Transition(t.source, 2 * j + (1 if t.letter.isupper() else 0), t.target, t.prob))
    a = MarkovianAutomaton(
        rank=record.rank,
        states=tuple(record.states),
        initial=tuple(record.initial.items()),
        transitions=tuple(transitions),
        name=name or record.name or "custom",
    )
    return require_valid(a)


def automaton_to_dict(a: MarkovianAutomaton) -> Dict:
    return {
        "rank": a.rank,
        "name": a.name,
        "states": list(a.states),
        "initial": {s: format_probability(p) for s, p in a.initial},
        "transitions": [
            {"from": t.source, "letter": letter_char(t.letter), "to": t.target,
             "prob": format_probability(t.probability)}
            for t in a.transitions
        ],
    }


def load_automaton(path) -> MarkovianAutomaton:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InputFileError(f"cannot read automaton file {path}: {exc}") from exc
    return automaton_from_dict(data, name=data.get("name") if isinstance(data, dict) else None)


def dump_automaton(a: MarkovianAutomaton, path):
    Path(path).write_text(json.dumps(automaton_to_dict(a), indent=2) + "\n", encoding="utf-8")


# ===== PRESETS =====

def uniform_automaton(r: int) -> MarkovianAutomaton:
    """One state per letter; every non-inverse letter has probability 1/(2r-1)"""
    if not 1 <= r <= MAX_RANK:
        raise PreconditionError(f"rank must lie in 1..{MAX_RANK}, got {r}")
    names = [letter_char(x) for x in range(2 * r)]
    p = Fraction(1, 2 * r - 1)
    transitions = tuple(
        Transition(names[x], y, names[y], p)
        for x in range(2 * r) for y in range(2 * r) if y != x ^ 1
    )
    initial = tuple((s, Fraction(1, 2 * r)) for s in names)
    return MarkovianAutomaton(rank=r, states=tuple(names), initial=initial,
                              transitions=transitions, name=f"uniform:{r}")


PSL2_DEFAULTS: Dict[str, Dict[str, Dict[str, Fraction]]] = {
    "geodesic": {
        "initial": {"after_a": Fraction(1, 2), "after_b": Fraction(1, 2)},
        "after_a": {"b": Fraction(1, 2), "B": Fraction(1, 2)},
        "after_b": {"a": Fraction(1)},
    },
    "quasigeodesic": {
        "initial": {"after_a": Fraction(1, 2), "after_bb": Fraction(1, 2)},
        "after_a": {"b": Fraction(1)},
        "after_b": {"a": Fraction(1, 2), "b": Fraction(1, 2)},
        "after_bb": {"a": Fraction(1)},
    },
}

_PSL2_TARGETS = {
    "geodesic": {("after_a", "b"): "after_b", ("after_a", "B"): "after_b", ("after_b", "a"): "after_a"},
    "quasigeodesic": {("after_a", "b"): "after_b", ("after_b", "a"): "after_a",
                      ("after_b", "b"): "after_bb", ("after_bb", "a"): "after_a"},
}


def psl2_automaton(variant: str = "geodesic",
                   probabilities: Optional[Mapping[str, Mapping[str, object]]] = None) -> MarkovianAutomaton:
    """Word sources for PSL(2,Z) = <a, b | a², b³>.

    geodesic: words over {a, b, b⁻¹} avoiding a², b², b⁻², bb⁻¹, b⁻¹b.
    quasigeodesic: words over {a, b} avoiding a² and b³.
    ``probabilities`` overrides per-state letter laws (and "initial").
    """
    if variant not in PSL2_DEFAULTS:
        raise PreconditionError(f"unknown PSL2 variant {variant!r}")
    table = {k: dict(v) for k, v in PSL2_DEFAULTS[variant].items()}
    for key, law in (probabilities or {}).items():
        if key not in table:
            raise PreconditionError(f"unknown state {key!r} for the {variant} automaton")
        try:
            table[key] = {letter: parse_probability(p) for letter, p in law.items()}
        except ValueError as exc:
            raise AutomatonError(f"invalid probabilities for state {key!r}: {exc}") from exc
    targets = _PSL2_TARGETS[variant]
    states = tuple(k for k in table if k != "initial")
    transitions = []
    for state in states:
        for letter, p in table[state].items():
            if (state, letter) not in targets:
                raise AutomatonError(f"letter {letter!r} is not allowed after state {state!r}")
            if p == 0:
                continue
            j = LETTERS.index(letter.lower())
            transitions.append(Transition(state, 2 * j + (1 if letter.isupper() else 0),
                                          targets[(state, letter)], p))
    a = MarkovianAutomaton(rank=2, states=states, initial=tuple(table["initial"].items()),
                           transitions=tuple(transitions), name=f"psl2:{variant}")
    return require_valid(a)


def automaton_from_reference(ref: str) -> MarkovianAutomaton:
    """Resolve ``uniform:<r>``, ``psl2:geodesic``, ``psl2:quasigeodesic`` or a JSON path"""
    ref = ref.strip()
    if ref.startswith("uniform:"):
        try:
            r = int(ref.split(":", 1)[1])
        except ValueError as exc:
            raise PreconditionError(f"invalid uniform preset {ref!r}") from exc
        return uniform_automaton(r)
    if ref.startswith("psl2:"):
        return psl2_automaton(ref.split(":", 1)[1])
    return load_automaton(ref)


def letter_sets(a: MarkovianAutomaton) -> Tuple[frozenset, frozenset]:
    """(E, D): letters labeling a transition, positive letters j with a_j, a_j⁻¹ both unused"""
    used = frozenset(t.letter for t in a.transitions)
    unused = frozenset(2 * j for j in range(a.rank) if 2 * j not in used and 2 * j + 1 not in used)
    return used, unused


def word_probability(a: MarkovianAutomaton, u: ReducedWord) -> Fraction:
    total = Fraction(0)
    for state, p in a.initial:
        prob = p
        for x in u.letters:
            if prob == 0:
                break
            nxt = a.step.get((state, x))
            if nxt is None:
                prob = Fraction(0)
                break
            state, q = nxt
            prob *= q
        total += prob
    return total


# ===== LOCAL AUTOMATON =====

LocalState = Tuple[str, Optional[int]]


@dataclass(frozen=True, eq=False)
class LocalAutomaton:
    """States (q, a): q reached by letter a; (p, None) for states with no incoming transition"""

    source: MarkovianAutomaton
    states: Tuple[LocalState, ...]
    initial: Tuple[Fraction, ...]
    transitions: Dict[Tuple[int, int], Tuple[int, Fraction]]

    @cached_property
    def index(self) -> Dict[LocalState, int]:
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def matrix(self) -> np.ndarray:
        m = np.zeros((len(self.states), len(self.states)), dtype=np.float64)
        for (i, _), (j, p) in self.transitions.items():
            m[i, j] += float(p)
        return m

    @cached_property
    def incoming_letters(self) -> np.ndarray:
        return np.array([-1 if letter is None else letter for _, letter in self.states], dtype=np.int64)

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.states)))
        for (i, _), (j, p) in self.transitions.items():
            g.add_edge(i, j, probability=p)
        return g

    def word_probability(self, u: ReducedWord) -> Fraction:
        total = Fraction(0)
        for i, p in enumerate(self.initial):
            if p == 0:
                continue
            state, prob = i, p
            for x in u.letters:
                nxt = self.transitions.get((state, x))
                if nxt is None:
                    prob = Fraction(0)
                    break
                state, q = nxt
                prob *= q
            total += prob
        return total


def localize(a: MarkovianAutomaton) -> LocalAutomaton:
    incoming: Dict[str, set] = {s: set() for s in a.states}
    for t in a.transitions:
        incoming[t.target].add(t.letter)
    local: List[LocalState] = []
    for s in a.states:
        if incoming[s]:
            local.extend((s, x) for x in sorted(incoming[s]))
        else:
            local.append((s, None))
    index = {s: i for i, s in enumerate(local)}
    init = [Fraction(0)] * len(local)
    for s, p in a.initial:
        first = min(incoming[s]) if incoming[s] else None
        init[index[(s, first)]] += p
    transitions = {}
    for i, (s, _) in enumerate(local):
        for t in a.outgoing.get(s, ()):
            transitions[(i, t.letter)] = (index[(t.target, t.letter)], t.probability)
    return LocalAutomaton(source=a, states=tuple(local), initial=tuple(init), transitions=transitions)


# ===== SPECTRAL ANALYSIS =====

@dataclass(frozen=True)
class PowerIterationResult:
    radius: float
    vector: np.ndarray
    iterations: int
    residual: float


def spectral_radius(matrix: np.ndarray, tolerance: float = DEFAULTS.spectral_tolerance,
                    max_iterations: int = DEFAULTS.spectral_max_iterations) -> PowerIterationResult:
    """Spectral radius of a nonnegative matrix by power iteration on (A + I)/2.

    The shift makes every eigenvalue of an irreducible periodic matrix
    other than the Perron root strictly smaller in modulus; the radius is
    recovered as 2ρ' - 1.
    """
    n = matrix.shape[0]
    shifted = (matrix + np.eye(n)) / 2.0
    x = np.full(n, 1.0 / n)
    previous = None
    for it in range(1, max_iterations + 1):
        y = shifted @ x
        lam = float(y.sum())
        if lam <= 0:
            return PowerIterationResult(0.0, x, it, 0.0)
        y /= lam
        if previous is not None and abs(lam - previous) <= tolerance * lam:
            residual = float(np.abs(shifted @ y - lam * y).sum())
            return PowerIterationResult(2.0 * lam - 1.0, y, it, residual)
        previous, x = lam, y
    residual = float(np.abs(shifted @ x - previous * x).sum())
    raise ConvergenceError(f"power iteration did not converge in {max_iterations} iterations", residual)


def stationary_vector(matrix: np.ndarray, tolerance: float = DEFAULTS.spectral_tolerance,
                      max_iterations: int = DEFAULTS.spectral_max_iterations) -> np.ndarray:
    """Left power iteration π ← π(M + I)/2 for an ergodic stochastic matrix"""
    n = matrix.shape[0]
    lazy = (matrix + np.eye(n)) / 2.0
    pi = np.full(n, 1.0 / n)
    for _ in range(max_iterations):
        nxt = pi @ lazy
        nxt /= nxt.sum()
        delta = float(np.abs(nxt - pi).sum())
        pi = nxt
        if delta <= tolerance:
            return pi
    raise ConvergenceError(f"stationary vector did not converge in {max_iterations} iterations", delta)


def period(graph: nx.DiGraph) -> int:
    """gcd of level(u) + 1 - level(v) over edges, for a strongly connected graph"""
    root = next(iter(graph.nodes))
    level = nx.single_source_shortest_path_length(graph, root)
    g = 0
    for u, v in graph.edges:
        g = math.gcd(g, abs(level[u] + 1 - level[v]))
    return g


@dataclass(frozen=True)
class PrefixHeavyParams:
    method: str
    C: float
    alpha: float
    delta: Optional[float] = None
    max_cycle_length: Optional[int] = None
    cycle_count: Optional[int] = None


@dataclass(frozen=True)
class PrefixHeavyEstimates:
    cycles: Optional[PrefixHeavyParams]
    spectral: Optional[PrefixHeavyParams]
    cycles_error: Optional[str] = None


@dataclass(frozen=True, eq=False)
class SpectralSummary:
    alpha2: float
    alpha3: float
    irreducible: bool
    ergodic: bool
    period: Optional[int]
    local_states: Tuple[LocalState, ...]
    stationary: Optional[np.ndarray]
    stationary_by_state: Optional[Dict[str, float]]
    stationary_by_letter: Optional[Dict[int, float]]
    first_letter: Dict[int, float]
    degeneracy: Optional[float]
    cyclic_density: Optional[float]
    prefix_heavy: PrefixHeavyEstimates
    alpha2_residual: float = 0.0

    @property
    def non_degenerate(self) -> Optional[bool]:
        if self.degeneracy is None:
            return None
        return self.degeneracy < 1.0 - 1e-12


def first_letter_law(a: MarkovianAutomaton) -> Dict[int, float]:
    law: Dict[int, Fraction] = {}
    for s, p in a.initial:
        for t in a.outgoing.get(s, ()):
            law[t.letter] = law.get(t.letter, Fraction(0)) + p * t.probability
    return {x: float(p) for x, p in sorted(law.items())}


def _perron_constant(vector: np.ndarray) -> Optional[float]:
    """sqrt of the coefficient sum of the Perron vector scaled to minimum 1"""
    if vector is None or len(vector) == 0 or float(vector.min()) <= 0:
        return None
    scaled = vector / float(vector.min())
    return math.sqrt(float(scaled.sum()))


def spectral_summary(a: MarkovianAutomaton,
                     tolerance: float = DEFAULTS.spectral_tolerance,
                     max_iterations: int = DEFAULTS.spectral_max_iterations,
                     cycle_cap: int = DEFAULTS.cycle_cap) -> SpectralSummary:
    require_valid(a)
    local = localize(a)
    m = local.matrix
    r2 = spectral_radius(m ** 2, tolerance, max_iterations)
    r3 = spectral_radius(m ** 3, tolerance, max_iterations)
    graph = local.graph()
    irreducible = nx.is_strongly_connected(graph)
    per = period(graph) if irreducible else None
    ergodic = irreducible and per == 1
    log.debug("%s: alpha2=%.12g alpha3=%.12g period=%s", a.name, r2.radius, r3.radius, per)

    stationary = by_state = by_letter = degeneracy = cyclic_density = None
    first = first_letter_law(a)
    if ergodic:
        stationary = stationary_vector(m, tolerance, max_iterations)
        by_state, by_letter = {}, {}
        for (s, letter), mass in zip(local.states, stationary):
            by_state[s] = by_state.get(s, 0.0) + float(mass)
            if letter is not None:
                by_letter[letter] = by_letter.get(letter, 0.0) + float(mass)
        degeneracy = sum(p * by_letter.get(x ^ 1, 0.0) for x, p in first.items())
        cyclic_density = 1.0 - degeneracy

    heavy = prefix_heavy_params(a, cycle_cap=cycle_cap, local=local, alpha2=r2, irreducible=irreducible)
    return SpectralSummary(
        alpha2=r2.radius,
        alpha3=r3.radius,
        irreducible=irreducible,
        ergodic=ergodic,
        period=per,
        local_states=local.states,
        stationary=stationary,
        stationary_by_state=by_state,
        stationary_by_letter=by_letter,
        first_letter=first,
        degeneracy=degeneracy,
        cyclic_density=cyclic_density,
        prefix_heavy=heavy,
        alpha2_residual=r2.residual,
    )


def cycle_parameters(a: MarkovianAutomaton, cycle_cap: int = DEFAULTS.cycle_cap,
                     local: Optional[LocalAutomaton] = None) -> PrefixHeavyParams:
    """Elementary-cycle bound: δ = max cycle probability, ℓ = max cycle length,
    α = δ^(1/ℓ), C = δ^(-|Q'|/ℓ) over the local automaton."""
    local = local or localize(a)
    graph = local.graph()
    cycles = list(islice(nx.simple_cycles(graph), cycle_cap + 1))
    if len(cycles) > cycle_cap:
        raise ResourceCapError("elementary cycles", cycle_cap)
    if not cycles:
        raise PreconditionError("automaton has no cycle; it emits no long words")
    delta, longest = 0.0, 0
    for cycle in cycles:
        prob = Fraction(1)
        for u, v in zip(cycle, cycle[1:] + cycle[:1]):
            prob *= graph.edges[u, v]["probability"]
        if float(prob) >= 1.0 - 1e-12:
            raise ProbabilityOneCycleError(f"{a.name}: cycle through {len(cycle)} local states has probability 1")
        delta = max(delta, float(prob))
        longest = max(longest, len(cycle))
    alpha = delta ** (1.0 / longest)
    c = delta ** (-len(local.states) / longest)
    return PrefixHeavyParams("cycles", C=c, alpha=alpha, delta=delta,
                             max_cycle_length=longest, cycle_count=len(cycles))


def prefix_heavy_params(a: MarkovianAutomaton, cycle_cap: int = DEFAULTS.cycle_cap,
                        local: Optional[LocalAutomaton] = None,
                        alpha2: Optional[PowerIterationResult] = None,
                        irreducible: Optional[bool] = None) -> PrefixHeavyEstimates:
    """Both parameter estimates.

    Never raises for the cycle method: when cycle_parameters fails (for example
    on a probability-1 cycle) ``cycles`` is None and ``cycles_error`` holds the
    message. Call cycle_parameters directly to get the exception.
    """
    local = local or localize(a)
    if alpha2 is None:
        alpha2 = spectral_radius(local.matrix ** 2)
    if irreducible is None:
        irreducible = nx.is_strongly_connected(local.graph())
    spectral = None
    constant = _perron_constant(alpha2.vector) if irreducible else None
    if constant is not None:
        spectral = PrefixHeavyParams("spectral", C=constant, alpha=math.sqrt(alpha2.radius))
    try:
        cycles = cycle_parameters(a, cycle_cap, local)
        error = None
    except (ProbabilityOneCycleError, ResourceCapError, PreconditionError) as exc:
        cycles, error = None, str(exc)
    return PrefixHeavyEstimates(cycles=cycles, spectral=spectral, cycles_error=error)


# ===== THRESHOLDS =====

def is_uniform_source(a: MarkovianAutomaton) -> bool:
    """True when a emits the uniform law on reduced words of each length"""
    local = localize(a)
    size = 2 * a.rank
    first = first_letter_law(a)
    if len(first) != size or any(abs(p - 1.0 / size) > 1e-12 for p in first.values()):
        return False
    share = Fraction(1, size - 1)
    for i, (_, letter) in enumerate(local.states):
        if letter is None:
            continue
        for x in range(size):
            if x == letter ^ 1:
                continue
            nxt = local.transitions.get((i, x))
            if nxt is None or nxt[1] != share:
                return False
    return True


@dataclass(frozen=True)
class ThresholdPredictions:
    general: Dict[str, Fraction]
    uniform_sharp: Optional[Dict[str, Fraction]] = None


def threshold_predictions(a: MarkovianAutomaton, lambdas: Sequence = (Fraction(1, 6),)) -> ThresholdPredictions:
    """Critical densities: α_[2]-density units, plus α-density units for the uniform source"""
    general = {"ctp": Fraction(1, 8), "malnormal": Fraction(1, 32)}
    for lam in lambdas:
        lam = as_lambda(lam)
        general[f"cprime({format_probability(lam)})"] = lam / 2
    general["degenerate"] = Fraction(1, 2)
    sharp = None
    if is_uniform_source(a):
        sharp = {"ctp": Fraction(1, 4), "malnormal": Fraction(1, 16)}
    return ThresholdPredictions(general=general, uniform_sharp=sharp)


# ===== SIZES =====

def _exact(value) -> Optional[sympy.Rational]:
    if isinstance(value, Fraction):
        return sympy.Rational(value.numerator, value.denominator)
    if isinstance(value, int):
        return sympy.Integer(value)
    if isinstance(value, str):
        return sympy.Rational(value)
    return None


def ceil_power(base, exponent, cap: int = DEFAULTS.size_cap, what: str = "tuple size") -> int:
    """ceil(base ** exponent), exact when both are rationals; capped"""
    fb, fe = float(base), float(exponent)
    estimate = fe * math.log(fb)
    if estimate > math.log(cap) + 1:
        raise ResourceCapError(what, cap, f"~{math.exp(min(estimate, 700.0)):.3g}")
    exact_base = _exact(base)
    exact_exp = _exact(exponent) if not isinstance(exponent, float) else _exact(Fraction(str(exponent)))
    if exact_base is not None and exact_exp is not None:
        value = int(sympy.ceiling(exact_base ** exact_exp))
    else:
        approx = fb ** fe
        nearest = round(approx)
        value = nearest if abs(approx - nearest) <= 1e-9 * max(1.0, approx) else math.ceil(approx)
    if value > cap:
        raise ResourceCapError(what, cap, value)
    return value


def density_to_size(alpha2, d, n: int, cap: int = DEFAULTS.size_cap) -> int:
    """ceil(α₂^(-d·n)) words at α₂-density d"""
    if not 0 < float(alpha2) < 1:
        raise PreconditionError(f"alpha must satisfy 0 < alpha < 1, got {alpha2}")
    if not 0 < float(d) < 1:
        raise PreconditionError(f"density must satisfy 0 < d < 1, got {d}")
    if isinstance(alpha2, float):
        return ceil_power(alpha2, -float(d) * n, cap)
    base = Fraction(alpha2)
    exponent = -(Fraction(str(d)) if isinstance(d, float) else Fraction(d)) * n
    return ceil_power(base, exponent, cap)


# ===== SAMPLING =====

@dataclass(frozen=True, eq=False)
class SamplingTables:
    """Per-state cumulative tables for inverse-CDF sampling"""

    initial_cdf: np.ndarray
    cumulative: np.ndarray
    letters: np.ndarray
    targets: np.ndarray

    @classmethod
    def build(cls, a: MarkovianAutomaton) -> "SamplingTables":
        index = a.state_index
        width = max((len(a.outgoing.get(s, ())) for s in a.states), default=1) or 1
        cumulative = np.full((len(a.states), width), 2.0)
        letters = np.zeros((len(a.states), width), dtype=np.uint8)
        targets = np.zeros((len(a.states), width), dtype=np.int64)
        for i, s in enumerate(a.states):
            out = a.outgoing.get(s, ())
            if not out:
                continue
            probs = np.array([float(t.probability) for t in out])
            cdf = np.cumsum(probs)
            cdf[-1] = 1.0
            cumulative[i, :len(out)] = cdf
            letters[i, :len(out)] = [t.letter for t in out]
            targets[i, :len(out)] = [index[t.target] for t in out]
        init = np.zeros(len(a.states))
        for s, p in a.initial:
            init[index[s]] += float(p)
        initial_cdf = np.cumsum(init)
        initial_cdf[-1] = 1.0
        return cls(initial_cdf, cumulative, letters, targets)


def sample_words(a: MarkovianAutomaton, n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """count x n letter matrix of independent words of length n"""
    if n < 0 or count < 0:
        raise PreconditionError("length and count must be nonnegative")
    tables = a.sampling_tables
    out = np.zeros((count, n), dtype=np.uint8)
    if count == 0:
        return out
    state = np.searchsorted(tables.initial_cdf, rng.random(count), side="right")
    for t in range(n):
        u = rng.random(count)
        choice = (tables.cumulative[state] <= u[:, None]).sum(axis=1)
        out[:, t] = tables.letters[state, choice]
        state = tables.targets[state, choice]
    return out


def sample_reduced(a: MarkovianAutomaton, n: int, rng: np.random.Generator) -> ReducedWord:
    if n < 1:
        raise PreconditionError(f"length must be positive, got {n}")
    return ReducedWord.trusted(sample_words(a, n, 1, rng)[0].tobytes(), a.rank)


def cyclic_mask(matrix: np.ndarray) -> np.ndarray:
    if matrix.shape[1] == 0:
        return np.zeros(matrix.shape[0], dtype=bool)
    return matrix[:, 0] != (matrix[:, -1] ^ 1)


def sample_cyclic_words(a: MarkovianAutomaton, n: int, count: int, rng: np.random.Generator,
                        max_attempts: int = DEFAULTS.sample_max_attempts) -> np.ndarray:
    """Rejection sampling of count cyclically reduced words; max_attempts is per word"""
    budget = max_attempts * max(count, 1)
    accepted: List[np.ndarray] = []
    have = attempts = 0
    while have < count:
        batch = min(max(2 * (count - have), 16), budget - attempts)
        if batch <= 0:
            raise SamplingError(
                f"{a.name}: only {have} of {count} cyclically reduced words after {attempts} attempts"
            )
        drawn = sample_words(a, n, batch, rng)
        attempts += batch
        good = drawn[cyclic_mask(drawn)][:count - have]
        accepted.append(good)
        have += len(good)
    if not accepted:
        return np.zeros((0, n), dtype=np.uint8)
    return np.concatenate(accepted)


def sample_cyclically_reduced(a: MarkovianAutomaton, n: int, rng: np.random.Generator,
                              max_attempts: int = DEFAULTS.sample_max_attempts) -> ReducedWord:
    if n < 1:
        raise PreconditionError(f"length must be positive, got {n}")
    row = sample_cyclic_words(a, n, 1, rng, max_attempts)[0]
    return ReducedWord.trusted(row.tobytes(), a.rank)
