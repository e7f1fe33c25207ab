"""Training-input generation: one-shot designs and adaptive output-space filling."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .problem import Problem, SearchSpace
from .surrogate import OkModel, TrainingSet, fit_ok

FULL_FACTORIAL_CAP = 10**6


@dataclass(frozen=True)
class SamplingPlan:
    """A batch of design vectors plus the generator tag and seed that made it."""

    points: np.ndarray
    generator: str
    seed: int

    def __len__(self) -> int:
        return self.points.shape[0]

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow([f"x{i + 1}" for i in range(self.points.shape[1])])
        for row in self.points:
            writer.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv_text())


def _rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def lhs(space: SearchSpace, n: int, seed=0) -> SamplingPlan:
    """Latin hypercube design: one point per equal-width stratum, per dimension."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _rng_from(seed)
    k = space.dims
    points = np.empty((n, k))
    for dim in range(k):
        strata = rng.permutation(n)
        offsets = rng.random(n)
        unit = (strata + offsets) / n
        points[:, dim] = space.lower[dim] + unit * (space.upper[dim] - space.lower[dim])
    return SamplingPlan(points=points, generator="lhs",
                        seed=int(seed) if np.isscalar(seed) else -1)


def full_factorial(space: SearchSpace, q: int, cap: int = FULL_FACTORIAL_CAP) -> SamplingPlan:
    """Tensor grid with q levels per dimension, endpoints included."""
    if q < 2:
        raise ValueError("q must be >= 2")
    k = space.dims
    total = q**k
    if total > cap:
        raise ValueError(
            f"full factorial needs q**k = {q}**{k} = {total} points, above the cap "
            f"of {cap}; grid sampling blows up exponentially with the dimension"
        )
    axes = [np.linspace(space.lower[d], space.upper[d], q) for d in range(k)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    return SamplingPlan(points=points, generator="grid", seed=0)


def osf_expand(problem: Problem, d0: TrainingSet, s_target: int,
               c: Optional[int] = None, phi_th: float = np.inf, seed: int = 0,
               fit: Callable[[TrainingSet], OkModel] = fit_ok,
               trace: Optional[list] = None) -> TrainingSet:
    """Grow a training set by optimization-driven output-space filling.

    Each loop refits the surrogate, draws a fresh batch of candidates by LHS,
    and adds the candidate whose predicted cost (a) stays within the
    ``phi_th`` sublevel set and (b) maximizes the minimum output-space
    distance to the costs already in the set. The chosen candidate is then
    truly evaluated, so exactly ``s_target - len(d0)`` evaluations are spent.

    When no candidate satisfies the sublevel constraint the loop falls back
    to the candidate with the lowest predicted cost rather than aborting.
    Ties break toward the lowest candidate index. Pass ``trace`` to receive
    one record per addition (predicted cost, feasible count, fallback flag).
    """
    s0 = len(d0)
    if s_target < s0:
        raise ValueError("s_target must be at least the size of the initial set")
    if c is None:
        c = 100 * problem.space.dims
    if c < 1:
        raise ValueError("candidate count must be >= 1")
    data = d0.copy()
    for loop in range(1, s_target - s0 + 1):
        model = fit(data)
        plan = lhs(problem.space, c,
                   seed=np.random.default_rng(np.random.SeedSequence([seed, loop])))
        predictions = model.predict_batch(plan.points)
        if isinstance(predictions, tuple):
            predictions = predictions[0]
        feasible = predictions <= phi_th
        targets = data.targets
        if np.any(feasible):
            # max-min spread of predicted cost against the training costs
            gaps = np.abs(predictions[:, None] - targets[None, :]).min(axis=1)
            gaps[~feasible] = -np.inf
            chosen = int(np.argmax(gaps))
            fallback = False
        else:
            chosen = int(np.argmin(predictions))
            fallback = True
        point = plan.points[chosen]
        cost = problem.evaluate(point)
        data.add(point, cost)
        if trace is not None:
            trace.append({
                "loop": loop,
                "point": point.copy(),
                "predicted": float(predictions[chosen]),
                "true": cost,
                "feasible_candidates": int(np.count_nonzero(feasible)),
                "fallback": fallback,
            })
    return data
