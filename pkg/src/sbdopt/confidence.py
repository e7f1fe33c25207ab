"""Confidence-enhanced surrogate-assisted PSO.

The optimizer runs on Kriging predictions, spends at most one true
evaluation per iteration on its most promising particle (lowest lower
confidence bound, only while it undercuts the best trained cost and budget
remains), refits after every true evaluation, and updates personal/global
bests with provenance-aware rules: simulated costs are exact, predicted
costs carry a confidence interval.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .optimize import OptimizerConfig, RunResult, init_swarm, pso_step, subseed
from .problem import Problem
from .sampling import lhs
from .surrogate import OkModel, SurrogateFitError, TrainingSet, fit_ok


@dataclass(frozen=True)
class ProvenancedPoint:
    """A position with a cost whose provenance is either simulated or predicted.

    Simulated points carry an exact true cost and zero confidence. Predicted
    points carry a surrogate cost plus its confidence value and are re-scored
    against the newest surrogate whenever they are compared.
    """

    position: np.ndarray
    cost: float
    confidence: float
    simulated: bool

    def __post_init__(self):
        if self.simulated and self.confidence != 0.0:
            raise ValueError("simulated points must have zero confidence")
        if self.confidence < 0.0:
            raise ValueError("confidence must be >= 0")


def _check_zeta(zeta: float) -> float:
    if not 1.0 <= zeta <= 3.0:
        raise ValueError("zeta must lie in [1, 3]")
    return float(zeta)


def lcb(point: ProvenancedPoint, zeta: float) -> float:
    """Lower confidence bound: cost minus zeta times confidence."""
    return point.cost - _check_zeta(zeta) * point.confidence


def ucb(point: ProvenancedPoint, zeta: float) -> float:
    """Upper confidence bound: cost plus zeta times confidence."""
    return point.cost + _check_zeta(zeta) * point.confidence


def update_personal_best(current: ProvenancedPoint, prev_best: ProvenancedPoint,
                         zeta: float) -> ProvenancedPoint:
    """Provenance-aware personal-best rule.

    Both simulated: plain cost comparison. Simulated incumbent: the predicted
    challenger must win even in its worst case (UCB below the exact cost).
    Predicted incumbent vs simulated challenger: the exact cost must undercut
    the incumbent's UCB. Both predicted: compare optimistic bounds (LCB), so
    a nominally worse but more promising challenger can take over.
    """
    if current.simulated and prev_best.simulated:
        take = current.cost < prev_best.cost
    elif prev_best.simulated:
        take = ucb(current, zeta) < prev_best.cost
    elif current.simulated:
        take = current.cost < ucb(prev_best, zeta)
    else:
        take = lcb(current, zeta) < lcb(prev_best, zeta)
    return current if take else prev_best


def update_global_best(candidates: Sequence[ProvenancedPoint],
                       prev_global: ProvenancedPoint, zeta: float) -> ProvenancedPoint:
    """Provenance-aware global-best rule.

    A simulated incumbent is displaced only by the candidate with the lowest
    UCB, and only if that UCB beats the exact cost. A predicted incumbent is
    displaced by the candidate with the lowest LCB if it beats the
    incumbent's LCB.
    """
    if len(candidates) < 1:
        raise ValueError("need at least one candidate")
    if prev_global.simulated:
        scores = [ucb(c, zeta) for c in candidates]
        best = int(np.argmin(scores))
        if scores[best] < prev_global.cost:
            return candidates[best]
        return prev_global
    scores = [lcb(c, zeta) for c in candidates]
    best = int(np.argmin(scores))
    if scores[best] < lcb(prev_global, zeta):
        return candidates[best]
    return prev_global


def _rescore(point: ProvenancedPoint, model: OkModel) -> ProvenancedPoint:
    """Refresh a predicted point against the current surrogate."""
    if point.simulated:
        return point
    prediction = model.predict(point.position)
    return replace(point, cost=prediction.value, confidence=prediction.confidence)


def pso_ok_c_run(problem: Problem, config: OptimizerConfig, s0: int, s: int,
                 zeta: float = 2.0, seed: Optional[int] = None,
                 control_stride: int = 0) -> RunResult:
    """Run the confidence-enhanced Kriging-assisted PSO.

    ``s0`` initial LHS samples are truly evaluated and train the first model;
    the whole run spends at most ``s`` true evaluations, one of which is held
    in reserve so a predicted final design can be re-scored exactly. The
    returned ``best_cost`` is always a true objective value.

    ``control_stride`` > 0 additionally pairs the model's cost at every
    stride-th global best with its true cost (diagnostic evaluations that
    bypass the problem ledger).
    """
    zeta = _check_zeta(zeta)
    if not 2 <= s0 <= s:
        raise ValueError("need 2 <= s0 <= s")
    if s > config.agents * config.iterations + s0:
        raise ValueError("s must not exceed agents*iterations + s0")
    seed = config.seed if seed is None else seed
    log: list[str] = [
        "simulation guard: skip when the swarm's minimum lower confidence bound "
        "exceeds the best trained cost",
    ]
    evals_at_start = problem.eval_count

    plan = lhs(problem.space, s0,
               seed=np.random.default_rng(np.random.SeedSequence([seed, 201])))
    training = TrainingSet()
    for point in plan.points:
        training.add(point, problem.evaluate(point))
    model = fit_ok(training)
    best_train_cost = float(training.targets.min())

    def used() -> int:
        return problem.eval_count - evals_at_start

    def refit() -> None:
        nonlocal model
        try:
            model = fit_ok(training)
        except SurrogateFitError as exc:
            log.append(f"refit failed, keeping previous model: {exc}")

    rng = np.random.default_rng(np.random.SeedSequence([seed, 202]))
    positions, velocities = init_swarm(rng, problem.space, config.agents, config.pso)
    pbests: list[Optional[ProvenancedPoint]] = [None] * config.agents
    best_idx = int(np.argmin(training.targets))
    gbest = ProvenancedPoint(position=training.inputs[best_idx].copy(),
                             cost=float(training.targets[best_idx]),
                             confidence=0.0, simulated=True)
    initial_best = gbest.position.copy()

    history: list[float] = []
    evals_history: list[int] = []
    extras: dict[str, list] = {
        "simulated_this_iter": [], "train_size": [], "best_train_cost": [],
        "gbest_predicted": [], "gbest_simulated": [],
    }
    gbest_trace: list[tuple[np.ndarray, float]] = []
    guard_skips = 0

    for i in range(config.iterations + 1):
        values, confidences = model.predict_batch(positions)
        simulated_idx = -1
        simulated_cost = 0.0
        # Reinforced learning: one reserved evaluation stays for the final design.
        if used() < s - 1:
            bounds = values - zeta * confidences
            star = int(np.argmin(bounds))
            if bounds[star] <= best_train_cost:
                simulated_cost = problem.evaluate(positions[star])
                simulated_idx = star
                training.add(positions[star], simulated_cost)
                if simulated_cost < best_train_cost:
                    best_train_cost = simulated_cost
                if gbest.simulated is False and np.array_equal(gbest.position,
                                                               positions[star]) \
                        and simulated_cost > gbest.cost:
                    log.append(
                        f"iter {i}: simulated the predicted global best and found a "
                        f"worse true cost ({simulated_cost!r} > {gbest.cost!r})"
                    )
                refit()
                values, confidences = model.predict_batch(positions)
            else:
                guard_skips += 1

        current: list[ProvenancedPoint] = []
        for p in range(config.agents):
            if p == simulated_idx:
                current.append(ProvenancedPoint(position=positions[p].copy(),
                                                cost=simulated_cost,
                                                confidence=0.0, simulated=True))
            else:
                current.append(ProvenancedPoint(position=positions[p].copy(),
                                                cost=float(values[p]),
                                                confidence=float(confidences[p]),
                                                simulated=False))
        for p in range(config.agents):
            prev = pbests[p]
            if prev is None:
                pbests[p] = current[p]
            else:
                pbests[p] = update_personal_best(current[p], _rescore(prev, model),
                                                 zeta)
        gbest = update_global_best([_rescore(b, model) for b in pbests],
                                   _rescore(gbest, model), zeta)

        predicted_at_g = float(model.predict(gbest.position).value)
        history.append(gbest.cost)
        evals_history.append(used())
        extras["simulated_this_iter"].append(1 if simulated_idx >= 0 else 0)
        extras["train_size"].append(len(training))
        extras["best_train_cost"].append(best_train_cost)
        extras["gbest_predicted"].append(predicted_at_g)
        extras["gbest_simulated"].append(1 if gbest.simulated else 0)
        gbest_trace.append((gbest.position.copy(), predicted_at_g))

        if i < config.iterations:
            pso_step(rng, positions, velocities,
                     np.array([b.position for b in pbests]), gbest.position,
                     config.pso, problem.space)

    if guard_skips:
        log.append(f"simulation guard skipped {guard_skips} iterations")

    if not gbest.simulated:
        known = problem.ledger_cost(gbest.position)
        if known is not None:
            true_cost = known
        elif used() < s:
            true_cost = problem.evaluate(gbest.position)
        else:
            # No reserve left (s == s0): fall back to the best trained design
            # rather than breach the budget or report a prediction.
            best_idx = int(np.argmin(training.targets))
            log.append("budget exhausted before scoring the predicted final "
                       "design; returning the best trained design instead")
            true_cost = None
            gbest = ProvenancedPoint(position=training.inputs[best_idx].copy(),
                                     cost=float(training.targets[best_idx]),
                                     confidence=0.0, simulated=True)
        if true_cost is not None:
            if true_cost > gbest.cost:
                log.append(f"final design re-scored: predicted {gbest.cost!r}, "
                           f"true {true_cost!r}")
            gbest = ProvenancedPoint(position=gbest.position, cost=true_cost,
                                     confidence=0.0, simulated=True)
        history[-1] = gbest.cost
        evals_history[-1] = used()

    control_points = None
    if control_stride > 0:
        control_points = []
        for j in range(0, len(gbest_trace), control_stride):
            position, predicted = gbest_trace[j]
            control_points.append((j, predicted, float(problem.objective(position))))

    return RunResult(best=gbest.position.copy(), best_cost=gbest.cost,
                     history=history, true_evals_used=used(), rng_seed=seed,
                     initial_best=initial_best, evals_history=evals_history,
                     extras=extras, control_points=control_points, log=log)
