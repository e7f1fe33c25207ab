"""Search spaces, budgeted objective evaluation, and evaluation-cost accounting."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class SearchSpace:
    """Box-bounded continuous search space."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.ndim != 1 or upper.ndim != 1 or lower.shape != upper.shape:
            raise ValueError("lower and upper must be 1-D arrays of equal length")
        if lower.size < 1:
            raise ValueError("search space needs at least one dimension")
        if not np.all(lower < upper):
            raise ValueError("every lower bound must be strictly below its upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dims(self) -> int:
        return self.lower.size

    @property
    def ranges(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def clamp(self, x: np.ndarray) -> np.ndarray:
        return clamp(self, x)


def clamp(space: SearchSpace, x: Sequence[float]) -> np.ndarray:
    """Project a design vector onto the box bounds, componentwise."""
    x = np.asarray(x, dtype=float)
    if x.shape != (space.dims,):
        raise ValueError(f"design vector has length {x.size}, expected {space.dims}")
    return np.minimum(np.maximum(x, space.lower), space.upper)


class Problem:
    """An objective over a search space with a thread-safe true-evaluation ledger.

    ``objective`` is the expensive path: every call through :meth:`evaluate`
    increments ``eval_count`` by exactly one and is recorded in the ledger.
    ``nominal_eval_time`` is the per-evaluation wall time used by the
    accounting helpers (supplied, not measured, so reports are deterministic).
    """

    def __init__(self, space: SearchSpace, objective: Callable[[np.ndarray], float],
                 nominal_eval_time: float = 1.0, name: str = ""):
        self.space = space
        self.objective = objective
        self.nominal_eval_time = float(nominal_eval_time)
        self.name = name
        self._lock = threading.Lock()
        self._count = 0
        self._ledger: list[tuple[tuple[float, ...], float]] = []

    @property
    def eval_count(self) -> int:
        return self._count

    @property
    def ledger(self) -> list[tuple[tuple[float, ...], float]]:
        """Recorded (position, cost) pairs, one per true evaluation."""
        return list(self._ledger)

    def evaluate(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.space.dims,):
            raise ValueError(f"design vector has length {x.size}, expected {self.space.dims}")
        phi = float(self.objective(x))
        with self._lock:
            self._count += 1
            self._ledger.append((tuple(float(v) for v in x), phi))
        return phi

    def ledger_cost(self, x: Sequence[float]) -> Optional[float]:
        """Return the recorded true cost for an exact position, if any."""
        key = tuple(float(v) for v in np.asarray(x, dtype=float))
        with self._lock:
            for pos, phi in reversed(self._ledger):
                if pos == key:
                    return phi
        return None


@dataclass(frozen=True)
class Budget:
    """Evaluation budget: P agents, I iterations, S affordable true evaluations."""

    agents: int
    iterations: int
    true_evals: int
    processors: Optional[int] = None

    def __post_init__(self):
        if self.agents < 1 or self.iterations < 1:
            raise ValueError("agents and iterations must be >= 1")
        if not 0 <= self.true_evals <= self.agents * self.iterations:
            raise ValueError("true_evals must lie in [0, agents*iterations]")
        if self.processors is not None and self.processors < 1:
            raise ValueError("processors must be >= 1 when given")


@dataclass(frozen=True)
class CutSample:
    """One point of a 1-D functional cut: blend parameter, cost, clamp flag."""

    t: float
    cost: float
    clamped: bool


def functional_cut(problem: Problem, a: Sequence[float], b: Sequence[float],
                   ts: Sequence[float]) -> list[CutSample]:
    """Evaluate the objective along the segment (1-t)*a + t*b.

    Blend points that leave the box are clamped before evaluation and flagged,
    so diagnostic sweeps beyond the [0, 1] range never abort.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    space = problem.space
    if a.shape != (space.dims,) or b.shape != (space.dims,):
        raise ValueError("anchor points must match the search-space dimension")
    out = []
    for t in ts:
        t = float(t)
        point = (1.0 - t) * a + t * b
        projected = clamp(space, point)
        flagged = not np.array_equal(projected, point)
        out.append(CutSample(t=t, cost=problem.evaluate(projected), clamped=flagged))
    return out


def time_saving(agents: int, iterations: int, true_evals: int) -> float:
    """Percentage of true evaluations avoided versus a full P*I run."""
    if agents < 1 or iterations < 1:
        raise ValueError("agents and iterations must be >= 1")
    if true_evals < 0:
        raise ValueError("true_evals must be >= 0")
    total = agents * iterations
    # multiply before dividing so integer-percent results are exact
    return (total - true_evals) * 100.0 / total


def budget_from_saving(agents: int, iterations: int, target_saving: float) -> int:
    """Largest true-evaluation count achieving at least the target saving."""
    if not 0.0 <= target_saving <= 100.0:
        raise ValueError("target_saving must lie in [0, 100]")
    if agents < 1 or iterations < 1:
        raise ValueError("agents and iterations must be >= 1")
    # (100 - s) first keeps integer-percent inputs exact in float arithmetic.
    return math.floor(agents * iterations * (100.0 - target_saving) / 100.0 + 1e-9)


def parallel_time_saving(true_evals: int, processors: int, iterations: int) -> float:
    """Time saving with O processors; reduces to (1 - 1/I)*100 once O >= S."""
    if processors < 1 or iterations < 1:
        raise ValueError("processors and iterations must be >= 1")
    if true_evals < 0:
        raise ValueError("true_evals must be >= 0")
    if processors >= true_evals:
        return (iterations - 1) * 100.0 / iterations
    total = processors * iterations
    return (total - true_evals) * 100.0 / total


@dataclass(frozen=True)
class TimingReport:
    """Serial and parallel wall-time estimates for standard vs surrogate runs."""

    standard_seconds: float
    surrogate_seconds: float
    saving_percent: float
    parallel_standard_seconds: Optional[float] = None
    parallel_surrogate_seconds: Optional[float] = None
    parallel_saving_percent: Optional[float] = None


def timing_estimates(budget: Budget, eval_seconds: float, train_seconds: float = 0.0,
                     test_seconds: float = 0.0) -> TimingReport:
    """Estimate total synthesis times from per-call costs.

    Standard run: P*I expensive calls. Surrogate run: S expensive calls plus
    one training pass plus P*I cheap predictions. Parallel estimates assume O
    processors for training and at most P concurrent agents in the loop.
    """
    if min(eval_seconds, train_seconds, test_seconds) < 0:
        raise ValueError("times must be >= 0")
    p, i, s = budget.agents, budget.iterations, budget.true_evals
    standard = p * i * eval_seconds
    training = s * eval_seconds + train_seconds
    surrogate = training + p * i * test_seconds
    report = {
        "standard_seconds": standard,
        "surrogate_seconds": surrogate,
        "saving_percent": time_saving(p, i, s),
    }
    if budget.processors is not None:
        o = budget.processors
        report["parallel_standard_seconds"] = standard / p
        report["parallel_surrogate_seconds"] = training / o + i * test_seconds
        report["parallel_saving_percent"] = parallel_time_saving(s, o, i)
    return TimingReport(**report)
