"""
Monte Carlo harness for Free Group Lab
Samples random tuples over grids of (length, size) cells, evaluates
generic properties with the library checkers and reports empirical
frequencies with Wilson intervals.
"""

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from scipy.stats import norm

from core.cancellation import as_lambda, satisfies_cprime
from core.config_manager import DEFAULTS, Settings
from core.errors import (
    FreeGroupError,
    InputFileError,
    PreconditionError,
    ResourceCapError,
    TrialTimeoutError,
)
from core.markov import (
    MarkovianAutomaton,
    automaton_from_reference,
    ceil_power,
    density_to_size,
    is_uniform_source,
    sample_cyclic_words,
    sample_reduced,
    sample_words,
    spectral_summary,
)
from core.presentations import DegenerateOutcome, collision_statistic, degenerate_class_check
from core.stallings import is_malnormal, stallings_graph
from core.tuples import (
    CertificateResult,
    WordTuple,
    covers_all_factors,
    has_central_tree_property,
    lcp_below,
    malnormality_certificate,
    min_above,
)
from core.words import ReducedWord, count_cyclically_reduced, count_reduced

log = logging.getLogger(__name__)

CSV_HEADER = [
    "automaton", "n", "size_mode", "size_param", "length_mode", "word_mode",
    "property", "property_param", "trials", "successes", "frequency",
    "ci_low", "ci_high", "master_seed", "wall_ms",
]

PROPERTY_NAMES = (
    "ctp", "cprime", "lcp_below", "malnormal", "malnormal_certificate", "collision",
    "degenerate", "abelian_z2", "abelian_trivial", "factor_coverage", "min_above",
)

# properties whose parameter is mandatory
_NEEDS_PARAM = {"cprime", "lcp_below", "collision", "factor_coverage", "min_above"}

MASK64 = (1 << 64) - 1


# ===== SEEDING =====

def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(master_seed: int, cell: int, trial: int) -> int:
    """Independent 64-bit substream seed for one (cell, trial)"""
    return splitmix64(splitmix64(splitmix64(master_seed & MASK64) ^ cell) ^ trial)


# ===== CONFIG =====

SizeMode = Literal["density", "fixed", "polynomial"]


class SizeSpec(BaseModel):
    mode: SizeMode = "density"
    values: List[float] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_values(self):
        for v in self.values:
            _check_size_value(self.mode, v)
        return self


class CellSizeSpec(BaseModel):
    mode: SizeMode = "density"
    value: float

    @model_validator(mode="after")
    def _check_value(self):
        _check_size_value(self.mode, self.value)
        return self


def _check_size_value(mode: str, v: float):
    if mode == "density" and not 0 < v < 1:
        raise ValueError(f"density must lie in (0, 1), got {v}")
    if mode == "fixed" and (v < 1 or v != int(v)):
        raise ValueError(f"fixed size must be a positive integer, got {v}")
    if mode == "polynomial" and v < 0:
        raise ValueError(f"polynomial exponent must be nonnegative, got {v}")


class CellSpec(BaseModel):
    n: int = Field(ge=1)
    size: CellSizeSpec


class PropertySpec(BaseModel):
    name: str
    param: Optional[str] = None

    @field_validator("name")
    @classmethod
    def _known(cls, value: str) -> str:
        if value not in PROPERTY_NAMES:
            raise ValueError(f"unknown property {value!r}; expected one of {', '.join(PROPERTY_NAMES)}")
        return value

    @field_validator("param", mode="before")
    @classmethod
    def _as_text(cls, value):
        return None if value is None else str(value)

    @model_validator(mode="after")
    def _param_present(self):
        if self.name in _NEEDS_PARAM and not self.param:
            raise ValueError(f"property {self.name!r} needs a parameter")
        return self

    @property
    def label(self) -> str:
        return self.name if not self.param else f"{self.name}({self.param})"


class ExperimentConfig(BaseModel):
    """Sweep definition; either a grid (n_values x size) or explicit cells, or both"""

    model_config = ConfigDict(extra="forbid")

    name: str = "experiment"
    automaton: str = "uniform:2"
    n_values: List[int] = Field(default_factory=list)
    size: Optional[SizeSpec] = None
    cells: List[CellSpec] = Field(default_factory=list)
    length_mode: Literal["exact", "at_most"] = "exact"
    word_mode: Literal["reduced", "cyclically_reduced"] = "reduced"
    properties: List[PropertySpec] = Field(min_length=1)
    trials: int = Field(100, ge=1)
    master_seed: int = Field(0, ge=0, le=MASK64)
    timeout_ms: Optional[int] = Field(None, ge=1)
    size_cap: Optional[int] = Field(None, ge=1)
    workers: Optional[int] = Field(None, ge=1)

    @field_validator("n_values")
    @classmethod
    def _positive(cls, values: List[int]) -> List[int]:
        if any(n < 1 for n in values):
            raise ValueError("lengths must be positive")
        return values

    @field_validator("properties", mode="before")
    @classmethod
    def _shorthand(cls, values):
        # "ctp" and {"name": ..., "param": ...} are both accepted
        return [{"name": v} if isinstance(v, str) else v for v in values]

    @model_validator(mode="after")
    def _has_cells(self):
        if not self.cells and not (self.n_values and self.size):
            raise ValueError("give n_values with size, or an explicit cells list")
        if bool(self.n_values) != bool(self.size):
            raise ValueError("n_values and size must be given together")
        return self


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        return ExperimentConfig.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputFileError(f"cannot read experiment config {path}: {exc}") from exc
    except ValidationError as exc:
        details = "; ".join(
            f"$.{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
        )
        raise InputFileError(f"invalid experiment config {path}: {details}") from exc


# ===== CELLS =====

@dataclass(frozen=True)
class Cell:
    index: int
    n: int
    size_mode: str
    size_value: float

    @property
    def size_param(self) -> str:
        if self.size_mode == "fixed":
            return str(int(self.size_value))
        return format(self.size_value, ".9g")


def expand_cells(config: ExperimentConfig) -> List[Cell]:
    cells = []
    if config.size is not None:
        for n in config.n_values:
            for v in config.size.values:
                cells.append(Cell(len(cells), n, config.size.mode, v))
    for spec in config.cells:
        cells.append(Cell(len(cells), spec.n, spec.size.mode, spec.size.value))
    return cells


def density_base(automaton: MarkovianAutomaton) -> Union[Fraction, float]:
    """α₂ for density sizes; exact 1/(2r-1) for the uniform source"""
    if is_uniform_source(automaton):
        return Fraction(1, 2 * automaton.rank - 1)
    return spectral_summary(automaton).alpha2


def tuple_size(cell: Cell, alpha2, cap: int) -> int:
    if cell.size_mode == "density":
        return density_to_size(alpha2, cell.size_value, cell.n, cap)
    if cell.size_mode == "fixed":
        size = int(cell.size_value)
        if size > cap:
            raise ResourceCapError("tuple size", cap, size)
        return size
    return max(1, ceil_power(cell.n, cell.size_value, cap))


# ===== SAMPLING =====

def _length_law(r: int, n: int, cyclic: bool) -> Tuple[np.ndarray, np.ndarray]:
    lengths = np.arange(1, n + 1)
    counts = [count_cyclically_reduced(r, k) if cyclic else count_reduced(r, k) for k in lengths]
    total = sum(counts)
    return lengths, np.array([c / total for c in counts])


def _require_uniform(a: MarkovianAutomaton):
    if not is_uniform_source(a):
        raise PreconditionError(f"the at-most-n length law is only defined for the uniform source, not {a.name!r}")


def at_most_length_sampler(a: MarkovianAutomaton, n: int, rng: np.random.Generator) -> ReducedWord:
    """Length ℓ with probability |R_ℓ| / |R_≤n| (1 <= ℓ <= n), then a uniform word of length ℓ"""
    _require_uniform(a)
    if n < 1:
        raise PreconditionError(f"length must be positive, got {n}")
    lengths, probs = _length_law(a.rank, n, cyclic=False)
    length = int(rng.choice(lengths, p=probs))
    return sample_reduced(a, length, rng)


def sample_tuple(a: MarkovianAutomaton, n: int, size: int, rng: np.random.Generator,
                 length_mode: str = "exact", word_mode: str = "reduced",
                 max_attempts: int = DEFAULTS.sample_max_attempts) -> WordTuple:
    cyclic = word_mode == "cyclically_reduced"
    if length_mode == "exact":
        if cyclic:
            matrix = sample_cyclic_words(a, n, size, rng, max_attempts)
        else:
            matrix = sample_words(a, n, size, rng)
        return WordTuple.from_matrix(matrix, a.rank)

    _require_uniform(a)
    lengths, probs = _length_law(a.rank, n, cyclic)
    drawn = rng.choice(lengths, size=size, p=probs)
    matrix = np.zeros((size, n), dtype=np.uint8)
    for length in np.unique(drawn):
        rows = np.flatnonzero(drawn == length)
        if cyclic:
            block = sample_cyclic_words(a, int(length), len(rows), rng, max_attempts)
        else:
            block = sample_words(a, int(length), len(rows), rng)
        matrix[rows, :length] = block
    return WordTuple.from_matrix(matrix, a.rank, drawn)


# ===== PROPERTIES =====

def _rule_value(param: str, n: int, what: str) -> int:
    """'const:k', 'frac:x' (floor(x·n)) or 'log:c' (floor(c·ln n)); a bare number is const"""
    kind, _, value = param.partition(":")
    if not value:
        kind, value = "const", kind
    try:
        number = float(value)
    except ValueError as exc:
        raise PreconditionError(f"invalid {what} rule {param!r}") from exc
    if kind == "const":
        return int(number)
    if kind == "frac":
        return int(math.floor(number * n))
    if kind == "log":
        return int(math.floor(number * math.log(n))) if n > 1 else 0
    raise PreconditionError(f"invalid {what} rule {param!r}")


def check_property(spec: PropertySpec, h: WordTuple, n: int, automaton: MarkovianAutomaton,
                   settings: Optional[Settings] = None) -> bool:
    """Evaluate one property on one tuple through the library checkers"""
    settings = settings or Settings()
    name, param = spec.name, spec.param
    if name == "ctp":
        return has_central_tree_property(h)
    if name == "cprime":
        return satisfies_cprime(h, param)
    if name == "lcp_below":
        return lcp_below(h, _rule_value(param, n, "lcp bound"))
    if name == "malnormal_certificate":
        return malnormality_certificate(h) is CertificateResult.CERTIFIED
    if name == "malnormal":
        if malnormality_certificate(h) is CertificateResult.CERTIFIED:
            return True
        g = stallings_graph(h)
        pairs = g.vertex_count * g.vertex_count
        if pairs > settings.malnormal_pair_budget:
            raise ResourceCapError("malnormality vertex pairs", settings.malnormal_pair_budget, pairs)
        return is_malnormal(g, pair_cap=settings.fiber_pair_cap)
    if name == "collision":
        return collision_statistic(h, _rule_value(param, n, "prefix length")).exists
    if name == "degenerate":
        return degenerate_class_check(h, automaton).outcome is not DegenerateOutcome.OTHER
    if name == "abelian_z2":
        return degenerate_class_check(h, automaton).outcome is DegenerateOutcome.CONSISTENT_Z2
    if name == "abelian_trivial":
        return degenerate_class_check(h, automaton).outcome is DegenerateOutcome.CONSISTENT_TRIVIAL
    if name == "factor_coverage":
        return covers_all_factors(h, _rule_value(param, n, "factor length"))
    if name == "min_above":
        return min_above(h, float(param), n)
    raise PreconditionError(f"unknown property {name!r}")


def _static_precondition(spec: PropertySpec, config: ExperimentConfig) -> Optional[str]:
    if spec.name == "cprime":
        try:
            as_lambda(spec.param)
        except PreconditionError as exc:
            return str(exc)
        if config.word_mode != "cyclically_reduced":
            return "cprime needs word_mode cyclically_reduced"
    return None


# ===== REPORT =====

@dataclass(frozen=True)
class ExperimentRow:
    automaton: str
    n: int
    size_mode: str
    size_param: str
    length_mode: str
    word_mode: str
    property: str
    property_param: str
    trials: int
    successes: int
    frequency: float
    ci_low: float
    ci_high: float
    master_seed: int
    wall_ms: float
    size: int = 0
    cell: int = 0

    def csv_fields(self) -> List[str]:
        return [
            self.automaton, str(self.n), self.size_mode, self.size_param, self.length_mode,
            self.word_mode, self.property, self.property_param, str(self.trials),
            str(self.successes), _fmt(self.frequency), _fmt(self.ci_low), _fmt(self.ci_high),
            str(self.master_seed), _fmt(self.wall_ms),
        ]


@dataclass(frozen=True)
class CellError:
    cell: int
    n: int
    size_mode: str
    size_param: str
    property: Optional[str]
    message: str
    kind: str


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: List[ExperimentRow] = field(default_factory=list)
    errors: List[CellError] = field(default_factory=list)
    wall_ms: float = 0.0

    def frequency(self, prop: str, n: int, size_param: str) -> Optional[float]:
        for row in self.rows:
            label = row.property if not row.property_param else f"{row.property}({row.property_param})"
            if prop in (row.property, label) and row.n == n and row.size_param == size_param:
                return row.frequency
        return None


def _fmt(x: float) -> str:
    return format(x, ".9g")


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    if trials <= 0:
        raise PreconditionError("trials must be positive")
    z = float(norm.ppf(0.5 + confidence / 2))
    p = successes / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return min(max(0.0, center - half), p), max(min(1.0, center + half), p)


# ===== RUNNER =====

@dataclass(frozen=True)
class _CellTask:
    config: ExperimentConfig
    cell: Cell
    size: int
    settings: Settings


@dataclass
class _CellOutcome:
    rows: List[ExperimentRow]
    errors: List[CellError]


def _run_cell(task: _CellTask) -> _CellOutcome:
    config, cell, settings = task.config, task.cell, task.settings
    started = time.perf_counter()
    automaton = automaton_from_reference(config.automaton)
    props = config.properties
    successes = [0] * len(props)
    failed: Dict[int, CellError] = {}

    def error(i: Optional[int], exc: Exception) -> CellError:
        label = props[i].label if i is not None else None
        return CellError(cell.index, cell.n, cell.size_mode, cell.size_param, label, str(exc), type(exc).__name__)

    for i, spec in enumerate(props):
        reason = _static_precondition(spec, config)
        if reason:
            failed[i] = error(i, PreconditionError(reason))

    for trial in range(config.trials):
        if len(failed) == len(props):
            break
        rng = np.random.default_rng(trial_seed(config.master_seed, cell.index, trial))
        try:
            h = sample_tuple(automaton, cell.n, task.size, rng, config.length_mode,
                             config.word_mode, settings.sample_max_attempts)
        except FreeGroupError as exc:
            log.warning("cell %d: sampling failed: %s", cell.index, exc)
            return _CellOutcome([], [error(None, exc)])
        for i, spec in enumerate(props):
            if i in failed:
                continue
            t0 = time.perf_counter()
            try:
                ok = check_property(spec, h, cell.n, automaton, settings)
                elapsed = (time.perf_counter() - t0) * 1000.0
                if config.timeout_ms is not None and elapsed > config.timeout_ms:
                    raise TrialTimeoutError(config.timeout_ms, elapsed)
            except FreeGroupError as exc:
                log.warning("cell %d, %s: %s", cell.index, spec.label, exc)
                failed[i] = error(i, exc)
                continue
            successes[i] += int(ok)

    wall = (time.perf_counter() - started) * 1000.0
    rows = []
    for i, spec in enumerate(props):
        if i in failed:
            continue
        low, high = wilson_interval(successes[i], config.trials)
        rows.append(ExperimentRow(
            automaton=config.automaton, n=cell.n, size_mode=cell.size_mode, size_param=cell.size_param,
            length_mode=config.length_mode, word_mode=config.word_mode,
            property=spec.name, property_param=spec.param or "",
            trials=config.trials, successes=successes[i], frequency=successes[i] / config.trials,
            ci_low=low, ci_high=high, master_seed=config.master_seed, wall_ms=wall,
            size=task.size, cell=cell.index,
        ))
    log.info("cell %d (n=%d, %s=%s, N=%d) done in %.0f ms",
             cell.index, cell.n, cell.size_mode, cell.size_param, task.size, wall)
    return _CellOutcome(rows, sorted(failed.values(), key=lambda e: e.property or ""))


def run_experiment(config: ExperimentConfig, settings: Optional[Settings] = None,
                   workers: Optional[int] = None) -> ExperimentReport:
    """Run every cell; results do not depend on the worker count"""
    settings = settings or Settings()
    workers = workers or config.workers or settings.default_workers
    cap = config.size_cap or settings.size_cap
    started = time.perf_counter()
    automaton = automaton_from_reference(config.automaton)
    cells = expand_cells(config)
    report = ExperimentReport(config=config)

    alpha2 = None
    if any(c.size_mode == "density" for c in cells):
        alpha2 = density_base(automaton)
        log.info("%s: density base alpha2 = %s", automaton.name, alpha2)

    tasks = []
    for cell in cells:
        try:
            if config.length_mode == "at_most":
                _require_uniform(automaton)
            size = tuple_size(cell, alpha2, cap)
        except FreeGroupError as exc:
            log.warning("cell %d skipped: %s", cell.index, exc)
            report.errors.append(CellError(cell.index, cell.n, cell.size_mode, cell.size_param,
                                           None, str(exc), type(exc).__name__))
            continue
        tasks.append(_CellTask(config, cell, size, settings))

    if workers <= 1 or len(tasks) <= 1:
        outcomes = [_run_cell(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_cell, tasks))

    for outcome in outcomes:
        report.rows.extend(outcome.rows)
        report.errors.extend(outcome.errors)
    order = {p.label: i for i, p in enumerate(config.properties)}
    report.rows.sort(key=lambda r: (r.cell, order.get(r.property if not r.property_param
                                                      else f"{r.property}({r.property_param})", 0)))
    report.errors.sort(key=lambda e: (e.cell, e.property or ""))
    report.wall_ms = (time.perf_counter() - started) * 1000.0
    return report


def write_csv(report: ExperimentReport, target=None) -> str:
    """CSV text of the report rows; also written to ``target`` when given"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in report.rows:
        writer.writerow(row.csv_fields())
    text = buffer.getvalue()
    if target is not None:
        Path(target).write_text(text, encoding="utf-8")
    return text


# ===== TRANSITIONS =====

@dataclass(frozen=True)
class TransitionEstimate:
    crossing: Optional[float]
    bracket: Optional[Tuple[float, float]]
    points: Tuple[Tuple[float, float], ...]

    @property
    def found(self) -> bool:
        return self.crossing is not None

    def __str__(self) -> str:
        if self.crossing is None:
            return "no crossing"
        return f"crossing at d={self.crossing:.4g} in [{self.bracket[0]:.4g}, {self.bracket[1]:.4g}]"


def interpolate_crossing(points: Sequence[Tuple[float, float]], level: float = 0.5) -> TransitionEstimate:
    """Linear interpolation of the first grid interval where the frequency crosses ``level``"""
    pts = tuple(sorted((float(d), float(f)) for d, f in points))
    for (d0, f0), (d1, f1) in zip(pts, pts[1:]):
        if (f0 - level) * (f1 - level) > 0 or f0 == f1:
            continue
        crossing = d0 + (level - f0) * (d1 - d0) / (f1 - f0)
        return TransitionEstimate(crossing, (d0, d1), pts)
    return TransitionEstimate(None, None, pts)


def estimate_transition(prop: Union[str, PropertySpec], automaton: str, n: int, d_grid: Sequence[float],
                        trials: int = 100, master_seed: int = 0, word_mode: str = "reduced",
                        settings: Optional[Settings] = None,
                        workers: Optional[int] = None) -> TransitionEstimate:
    spec = PropertySpec(name=prop) if isinstance(prop, str) else prop
    grid = sorted(float(d) for d in d_grid)
    if grid != [float(d) for d in d_grid]:
        raise PreconditionError("density grid must be sorted")
    config = ExperimentConfig(
        name=f"transition-{spec.label}", automaton=automaton, n_values=[n],
        size=SizeSpec(mode="density", values=grid), word_mode=word_mode,
        properties=[spec], trials=trials, master_seed=master_seed,
    )
    report = run_experiment(config, settings, workers)
    points = [(float(row.size_param), row.frequency) for row in report.rows]
    estimate = interpolate_crossing(points)
    log.info("%s at n=%d: %s", spec.label, n, estimate)
    return estimate
