"""Global optimizers (PSO, DE) over arbitrary evaluators, plus the bare
train-once-optimize-surrogate wrapper."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .problem import Problem, SearchSpace, clamp
from .sampling import lhs, osf_expand
from .surrogate import TrainingSet, fit_ok, fit_rbfn, fit_svr


def subseed(seed: int, *path: int) -> int:
    """Derive an independent child seed from (seed, path) deterministically."""
    ss = np.random.SeedSequence([int(seed), *[int(p) for p in path]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class PsoParams:
    inertia: float = 0.4
    cognitive: float = 2.0
    social: float = 2.0
    max_velocity_fraction: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.inertia < 1.0:
            raise ValueError("inertia must lie in (0, 1)")
        if self.cognitive <= 0 or self.social <= 0:
            raise ValueError("cognitive and social factors must be positive")
        if not 0.0 < self.max_velocity_fraction <= 1.0:
            raise ValueError("max_velocity_fraction must lie in (0, 1]")


@dataclass(frozen=True)
class DeParams:
    scale: float = 0.5
    crossover: float = 0.9
    strategy: str = "rand/1/bin"

    def __post_init__(self):
        # scale == 0 is permitted so the degenerate duplicate-trial mode runs
        if self.scale < 0:
            raise ValueError("scale must be >= 0")
        if not 0.0 < self.crossover <= 1.0:
            raise ValueError("crossover must lie in (0, 1]")
        if self.strategy != "rand/1/bin":
            raise ValueError(f"unsupported DE strategy: {self.strategy}")


@dataclass(frozen=True)
class OptimizerConfig:
    agents: int
    iterations: int
    seed: int = 0
    pso: PsoParams = field(default_factory=PsoParams)
    de: DeParams = field(default_factory=DeParams)

    def __post_init__(self):
        if self.agents < 2:
            raise ValueError("need at least two agents")
        if self.iterations < 1:
            raise ValueError("need at least one iteration")


@dataclass
class RunResult:
    """Outcome of one optimization run.

    ``history`` holds the per-iteration best cost (row 0 is the initialized
    population); ``evals_history`` the true-evaluation count after each row.
    ``extras`` carries algorithm-specific per-iteration columns and
    ``control_points`` optional (iteration, predicted, actual) diagnostics.
    """

    best: np.ndarray
    best_cost: float
    history: list[float]
    true_evals_used: int
    rng_seed: int
    initial_best: Optional[np.ndarray] = None
    evals_history: Optional[list[int]] = None
    extras: dict[str, list] = field(default_factory=dict)
    control_points: Optional[list[tuple[int, float, float]]] = None
    log: list[str] = field(default_factory=list)

    def summary_dict(self) -> dict:
        return {
            "best": [float(v) for v in np.asarray(self.best).ravel()],
            "best_cost": float(self.best_cost),
            "initial_best": None if self.initial_best is None
                            else [float(v) for v in np.asarray(self.initial_best).ravel()],
            "iterations": len(self.history) - 1,
            "true_evals_used": int(self.true_evals_used),
            "rng_seed": int(self.rng_seed),
            "log": list(self.log),
        }

    def to_json_text(self) -> str:
        return json.dumps(self.summary_dict(), indent=2, sort_keys=True) + "\n"

    def history_csv_text(self) -> str:
        def fmt(value) -> str:
            if isinstance(value, (int, np.integer)):
                return str(int(value))
            return repr(float(value))

        buf = io.StringIO()
        writer = csv.writer(buf)
        extra_keys = list(self.extras.keys())
        writer.writerow(["iteration", "best_cost", "true_evals_so_far"] + extra_keys)
        evals = self.evals_history or [self.true_evals_used] * len(self.history)
        for i, cost in enumerate(self.history):
            row = [str(i), repr(float(cost)), str(int(evals[i]))]
            row += [fmt(self.extras[k][i]) for k in extra_keys]
            writer.writerow(row)
        return buf.getvalue()

    def control_points_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["iteration", "predicted_cost", "actual_cost"])
        for it, predicted, actual in self.control_points or []:
            writer.writerow([str(it), repr(float(predicted)), repr(float(actual))])
        return buf.getvalue()


def _evaluate_all(evaluator: Callable[[np.ndarray], float], positions: np.ndarray,
                  workers: int, log: list[str], tag: str) -> np.ndarray:
    """Evaluate a population, reducing results in agent order.

    Non-finite costs become +inf and are flagged in the run log so one bad
    agent cannot poison the bookkeeping.
    """
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(evaluator, positions))
    else:
        raw = [evaluator(p) for p in positions]
    costs = np.empty(len(raw))
    for i, value in enumerate(raw):
        value = float(value)
        if not np.isfinite(value):
            log.append(f"{tag}: non-finite cost for agent {i} replaced with +inf")
            value = np.inf
        costs[i] = value
    return costs


def pso_step(rng: np.random.Generator, positions: np.ndarray, velocities: np.ndarray,
             pbest_positions: np.ndarray, gbest_position: np.ndarray,
             params: PsoParams, space: SearchSpace) -> None:
    """One synchronous PSO velocity/position update, in place.

    Positions are clamped to the box and the velocity component that caused
    the clamp is zeroed.
    """
    p, k = positions.shape
    vmax = params.max_velocity_fraction * space.ranges
    r_cog = rng.random((p, k))
    r_soc = rng.random((p, k))
    velocities *= params.inertia
    velocities += params.cognitive * r_cog * (pbest_positions - positions)
    velocities += params.social * r_soc * (gbest_position[None, :] - positions)
    np.clip(velocities, -vmax, vmax, out=velocities)
    positions += velocities
    low = positions < space.lower
    high = positions > space.upper
    positions[low] = np.broadcast_to(space.lower, positions.shape)[low]
    positions[high] = np.broadcast_to(space.upper, positions.shape)[high]
    velocities[low | high] = 0.0


def init_swarm(rng: np.random.Generator, space: SearchSpace, agents: int,
               params: PsoParams) -> tuple[np.ndarray, np.ndarray]:
    positions = rng.uniform(space.lower, space.upper, size=(agents, space.dims))
    vmax = params.max_velocity_fraction * space.ranges
    velocities = rng.uniform(-vmax, vmax, size=(agents, space.dims))
    return positions, velocities


def pso_run(evaluator: Callable[[np.ndarray], float], space: SearchSpace,
            config: OptimizerConfig, workers: int = 1) -> RunResult:
    """Particle swarm minimization with synchronous global-best topology."""
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 101]))
    log: list[str] = []
    positions, velocities = init_swarm(rng, space, config.agents, config.pso)
    costs = _evaluate_all(evaluator, positions, workers, log, "pso init")
    pbest_positions = positions.copy()
    pbest_costs = costs.copy()
    g = int(np.argmin(pbest_costs))
    gbest_position = pbest_positions[g].copy()
    gbest_cost = float(pbest_costs[g])
    initial_best = gbest_position.copy()
    history = [gbest_cost]
    evals = [config.agents]
    for i in range(1, config.iterations + 1):
        pso_step(rng, positions, velocities, pbest_positions, gbest_position,
                 config.pso, space)
        costs = _evaluate_all(evaluator, positions, workers, log, f"pso iter {i}")
        improved = costs < pbest_costs
        pbest_positions[improved] = positions[improved]
        pbest_costs[improved] = costs[improved]
        g = int(np.argmin(pbest_costs))
        if pbest_costs[g] < gbest_cost:
            gbest_cost = float(pbest_costs[g])
            gbest_position = pbest_positions[g].copy()
        history.append(gbest_cost)
        evals.append(config.agents * (i + 1))
    return RunResult(best=gbest_position, best_cost=gbest_cost, history=history,
                     true_evals_used=evals[-1], rng_seed=config.seed,
                     initial_best=initial_best, evals_history=evals, log=log)


def de_run(evaluator: Callable[[np.ndarray], float], space: SearchSpace,
           config: OptimizerConfig, workers: int = 1) -> RunResult:
    """Differential evolution, rand/1 mutation with binomial crossover."""
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 102]))
    log: list[str] = []
    p, k = config.agents, space.dims
    f_scale, cr = config.de.scale, config.de.crossover
    positions = rng.uniform(space.lower, space.upper, size=(p, k))
    costs = _evaluate_all(evaluator, positions, workers, log, "de init")
    g = int(np.argmin(costs))
    gbest_position = positions[g].copy()
    gbest_cost = float(costs[g])
    initial_best = gbest_position.copy()
    history = [gbest_cost]
    evals = [p]
    for i in range(1, config.iterations + 1):
        trials = np.empty_like(positions)
        for a in range(p):
            choices = [idx for idx in range(p) if idx != a]
            r1, r2, r3 = rng.choice(choices, size=3, replace=False)
            mutant = positions[r1] + f_scale * (positions[r2] - positions[r3])
            cross = rng.random(k) < cr
            cross[rng.integers(k)] = True
            trial = np.where(cross, mutant, positions[a])
            trials[a] = clamp(space, trial)
        trial_costs = _evaluate_all(evaluator, trials, workers, log, f"de iter {i}")
        accept = trial_costs <= costs
        positions[accept] = trials[accept]
        costs[accept] = trial_costs[accept]
        g = int(np.argmin(costs))
        if costs[g] < gbest_cost:
            gbest_cost = float(costs[g])
            gbest_position = positions[g].copy()
        history.append(gbest_cost)
        evals.append(p * (i + 1))
    return RunResult(best=gbest_position, best_cost=gbest_cost, history=history,
                     true_evals_used=evals[-1], rng_seed=config.seed,
                     initial_best=initial_best, evals_history=evals, log=log)


_FITTERS = {"rbfn": fit_rbfn, "svr": fit_svr, "ok": fit_ok}
_OPTIMIZERS = {"pso": pso_run, "de": de_run}


def bare_sbd(problem: Problem, model_kind: str, s: int, opt_kind: str,
             config: OptimizerConfig, seed: Optional[int] = None,
             workers: int = 1) -> RunResult:
    """Train one surrogate on an LHS sample, optimize it, verify the winner.

    Spends exactly ``s + 1`` true evaluations: ``s`` to build the training
    set and one to re-score the returned design, so ``best_cost`` is always
    a true objective value. The history is the surrogate-valued optimizer
    trace and is diagnostic only.
    """
    if s < 2:
        raise ValueError("need at least two training samples")
    if model_kind not in _FITTERS:
        raise ValueError(f"unknown model kind: {model_kind}")
    if opt_kind not in _OPTIMIZERS:
        raise ValueError(f"unknown optimizer kind: {opt_kind}")
    seed = config.seed if seed is None else seed
    plan = lhs(problem.space, s, seed=np.random.default_rng(
        np.random.SeedSequence([seed, 103])))
    data = TrainingSet()
    for point in plan.points:
        data.add(point, problem.evaluate(point))
    model = _FITTERS[model_kind](data)

    def surrogate_evaluator(x: np.ndarray) -> float:
        return model.predict(x).value

    inner_config = OptimizerConfig(agents=config.agents, iterations=config.iterations,
                                   seed=subseed(seed, 104), pso=config.pso, de=config.de)
    run = _OPTIMIZERS[opt_kind](surrogate_evaluator, problem.space, inner_config,
                                workers=workers)
    true_cost = problem.evaluate(run.best)
    run.log.append(
        f"bare sbd: surrogate predicted {run.best_cost!r}, true cost {true_cost!r}"
    )
    return RunResult(best=run.best, best_cost=true_cost, history=run.history,
                     true_evals_used=s + 1, rng_seed=seed,
                     initial_best=run.initial_best, evals_history=None,
                     log=run.log)


def osf_then_bare(problem: Problem, model_kind: str, s0: int, s: int, phi_th: float,
                  opt_kind: str, config: OptimizerConfig, seed: Optional[int] = None,
                  candidates: Optional[int] = None, workers: int = 1) -> RunResult:
    """Adaptive output-space-filling sampling followed by a bare surrogate run.

    The training set starts from ``s0`` LHS samples and grows to ``s`` by
    output-space filling within the ``phi_th`` sublevel set; the surrogate is
    then fitted once and optimized, and the winner re-scored truly. Spends
    exactly ``s + 1`` true evaluations.
    """
    if not 2 <= s0 <= s:
        raise ValueError("need 2 <= s0 <= s")
    if model_kind not in _FITTERS:
        raise ValueError(f"unknown model kind: {model_kind}")
    if opt_kind not in _OPTIMIZERS:
        raise ValueError(f"unknown optimizer kind: {opt_kind}")
    seed = config.seed if seed is None else seed
    plan = lhs(problem.space, s0, seed=np.random.default_rng(
        np.random.SeedSequence([seed, 105])))
    d0 = TrainingSet()
    for point in plan.points:
        d0.add(point, problem.evaluate(point))
    data = osf_expand(problem, d0, s, c=candidates, phi_th=phi_th,
                      seed=subseed(seed, 106))
    model = _FITTERS[model_kind](data)

    def surrogate_evaluator(x: np.ndarray) -> float:
        return model.predict(x).value

    inner_config = OptimizerConfig(agents=config.agents, iterations=config.iterations,
                                   seed=subseed(seed, 107), pso=config.pso, de=config.de)
    run = _OPTIMIZERS[opt_kind](surrogate_evaluator, problem.space, inner_config,
                                workers=workers)
    true_cost = problem.evaluate(run.best)
    run.log.append(
        f"osf then bare: surrogate predicted {run.best_cost!r}, true cost {true_cost!r}"
    )
    return RunResult(best=run.best, best_cost=true_cost, history=run.history,
                     true_evals_used=s + 1, rng_seed=seed,
                     initial_best=run.initial_best, evals_history=None,
                     log=run.log)
