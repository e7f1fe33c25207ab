"""Strict JSON experiment configuration: parsing, validation, resolution.

Unknown keys are rejected everywhere so that typos fail loudly before any
evaluation is spent. The resolved configuration (defaults filled in) is
hashed and the digest embedded in every summary, making results traceable.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .benchmarks import (
    BENCHMARK_DOMAINS,
    TmaConfig,
    benchmark_problem,
    chebyshev_durations,
    tma_problem,
)
from .problem import Problem


class ConfigError(ValueError):
    """Configuration problem, with the offending field in the message."""


def _check_keys(obj: dict, allowed: set[str], path: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}; "
                          f"allowed: {sorted(allowed)}")


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise ConfigError(f"{path}: missing required key '{key}'")
    return obj[key]


def _as_int(value, path: str, minimum: Optional[int] = None) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}, got {value}")
    return value


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class ProblemSpec:
    label: str
    kind: str                 # "benchmark" | "tma"
    benchmark: Optional[str] = None
    dims: Optional[int] = None
    tma: Optional[dict] = None
    eval_seconds: float = 1.0

    def build(self) -> Problem:
        if self.kind == "benchmark":
            return benchmark_problem(self.benchmark, self.dims, self.eval_seconds)
        cfg = TmaConfig(n_elements=self.tma["n_elements"],
                        durations=np.asarray(self.tma["durations"], dtype=float),
                        period=self.tma["period"],
                        spacing_wavelengths=self.tma["spacing_wavelengths"],
                        time_grid=self.tma["time_grid"])
        return tma_problem(cfg, self.eval_seconds)

    def resolved(self) -> dict:
        if self.kind == "benchmark":
            return {"benchmark": self.benchmark, "k": self.dims,
                    "eval_seconds": self.eval_seconds}
        return {"tma": dict(self.tma), "eval_seconds": self.eval_seconds}


def _parse_problem(obj, path: str) -> ProblemSpec:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object")
    if "benchmark" in obj:
        _check_keys(obj, {"benchmark", "k", "eval_seconds"}, path)
        name = _require(obj, "benchmark", path)
        if name not in BENCHMARK_DOMAINS:
            raise ConfigError(f"{path}.benchmark: unknown benchmark '{name}'; "
                              f"choose from {sorted(BENCHMARK_DOMAINS)}")
        k = _as_int(_require(obj, "k", path), f"{path}.k", minimum=1)
        eval_seconds = _as_number(obj.get("eval_seconds", 1.0), f"{path}.eval_seconds")
        return ProblemSpec(label=f"{name}-{k}d", kind="benchmark", benchmark=name,
                           dims=k, eval_seconds=eval_seconds)
    if "tma" in obj:
        _check_keys(obj, {"tma", "eval_seconds"}, path)
        tma = obj["tma"]
        if not isinstance(tma, dict):
            raise ConfigError(f"{path}.tma: expected an object")
        _check_keys(tma, {"n_elements", "durations", "chebyshev_sll_db", "period",
                          "spacing_wavelengths", "time_grid"}, f"{path}.tma")
        n = _as_int(_require(tma, "n_elements", f"{path}.tma"), f"{path}.tma.n_elements",
                    minimum=2)
        if n % 2 != 0:
            raise ConfigError(f"{path}.tma.n_elements: must be even")
        if "durations" in tma and "chebyshev_sll_db" in tma:
            raise ConfigError(f"{path}.tma: give either durations or chebyshev_sll_db")
        if "chebyshev_sll_db" in tma:
            sll = _as_number(tma["chebyshev_sll_db"], f"{path}.tma.chebyshev_sll_db")
            if sll >= 0:
                raise ConfigError(f"{path}.tma.chebyshev_sll_db: must be negative")
            durations = [float(v) for v in chebyshev_durations(n, sll)]
        elif "durations" in tma:
            durations = [_as_number(v, f"{path}.tma.durations[{i}]")
                         for i, v in enumerate(tma["durations"])]
            if len(durations) != n:
                raise ConfigError(f"{path}.tma.durations: need {n} entries")
        else:
            raise ConfigError(f"{path}.tma: need durations or chebyshev_sll_db")
        resolved = {
            "n_elements": n,
            "durations": durations,
            "period": _as_number(tma.get("period", 1.0), f"{path}.tma.period"),
            "spacing_wavelengths": _as_number(tma.get("spacing_wavelengths", 0.5),
                                              f"{path}.tma.spacing_wavelengths"),
            "time_grid": _as_int(tma.get("time_grid", 1024), f"{path}.tma.time_grid",
                                 minimum=256),
        }
        eval_seconds = _as_number(obj.get("eval_seconds", 1.0), f"{path}.eval_seconds")
        return ProblemSpec(label=f"tma-{n}", kind="tma", tma=resolved,
                           eval_seconds=eval_seconds)
    raise ConfigError(f"{path}: need either 'benchmark' or 'tma'")


_ARM_KEYS = {
    "std-pso": {"kind", "name"},
    "std-de": {"kind", "name"},
    "bare-sbd": {"kind", "name", "model", "s", "optimizer"},
    "osf-then-bare": {"kind", "name", "model", "s0", "s", "phi_th", "candidates",
                      "optimizer"},
    "pso-ok-c": {"kind", "name", "s0", "s", "zeta", "control_stride"},
}
_MODELS = ("rbfn", "svr", "ok")
_OPTIMIZERS = ("pso", "de")


@dataclass(frozen=True)
class ArmSpec:
    """One concrete algorithm arm (any S sweep already expanded)."""

    label: str
    kind: str
    params: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        return {"kind": self.kind, "name": self.label, **self.params}


def _parse_arm(obj, path: str, budget: tuple[int, int]) -> list[ArmSpec]:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object")
    kind = _require(obj, "kind", path)
    if kind not in _ARM_KEYS:
        raise ConfigError(f"{path}.kind: unknown algorithm kind '{kind}'; "
                          f"choose from {sorted(_ARM_KEYS)}")
    _check_keys(obj, _ARM_KEYS[kind], path)
    agents, iterations = budget
    base_name = obj.get("name")
    if base_name is not None and not isinstance(base_name, str):
        raise ConfigError(f"{path}.name: expected a string")

    def sweep_values(key: str, minimum: int) -> list[int]:
        raw = _require(obj, key, path)
        values = raw if isinstance(raw, list) else [raw]
        if not values:
            raise ConfigError(f"{path}.{key}: empty sweep")
        return [_as_int(v, f"{path}.{key}", minimum=minimum) for v in values]

    arms = []
    if kind in ("std-pso", "std-de"):
        return [ArmSpec(label=base_name or kind, kind=kind)]
    if kind == "bare-sbd":
        model = obj.get("model", "ok")
        if model not in _MODELS:
            raise ConfigError(f"{path}.model: choose from {_MODELS}")
        optimizer = obj.get("optimizer", "pso")
        if optimizer not in _OPTIMIZERS:
            raise ConfigError(f"{path}.optimizer: choose from {_OPTIMIZERS}")
        for s in sweep_values("s", 2):
            label = base_name or f"bare-{model}-{optimizer}"
            arms.append(ArmSpec(label=f"{label}-s{s}", kind=kind,
                                params={"model": model, "optimizer": optimizer,
                                        "s": s}))
        return arms
    if kind == "osf-then-bare":
        model = obj.get("model", "ok")
        if model not in _MODELS:
            raise ConfigError(f"{path}.model: choose from {_MODELS}")
        optimizer = obj.get("optimizer", "pso")
        if optimizer not in _OPTIMIZERS:
            raise ConfigError(f"{path}.optimizer: choose from {_OPTIMIZERS}")
        s0 = _as_int(_require(obj, "s0", path), f"{path}.s0", minimum=2)
        phi_th = _as_number(_require(obj, "phi_th", path), f"{path}.phi_th")
        candidates = obj.get("candidates")
        if candidates is not None:
            candidates = _as_int(candidates, f"{path}.candidates", minimum=1)
        for s in sweep_values("s", 2):
            if s < s0:
                raise ConfigError(f"{path}.s: must be >= s0 ({s0}), got {s}")
            label = base_name or f"osf-{model}-{optimizer}"
            arms.append(ArmSpec(label=f"{label}-s{s}", kind=kind,
                                params={"model": model, "optimizer": optimizer,
                                        "s0": s0, "s": s, "phi_th": phi_th,
                                        "candidates": candidates}))
        return arms
    # pso-ok-c
    s0 = _as_int(_require(obj, "s0", path), f"{path}.s0", minimum=2)
    zeta = _as_number(obj.get("zeta", 2.0), f"{path}.zeta")
    if not 1.0 <= zeta <= 3.0:
        raise ConfigError(f"{path}.zeta: must lie in [1, 3]")
    control_stride = _as_int(obj.get("control_stride", 0), f"{path}.control_stride",
                             minimum=0)
    for s in sweep_values("s", 2):
        if s < s0:
            raise ConfigError(f"{path}.s: must be >= s0 ({s0}), got {s}")
        if s > agents * iterations + s0:
            raise ConfigError(f"{path}.s: must be <= agents*iterations + s0 "
                              f"({agents * iterations + s0}), got {s}")
        label = base_name or "pso-ok-c"
        arms.append(ArmSpec(label=f"{label}-s{s}", kind=kind,
                            params={"s0": s0, "s": s, "zeta": zeta,
                                    "control_stride": control_stride}))
    return arms


@dataclass(frozen=True)
class ExperimentConfig:
    output_dir: str
    seeds: list[int]
    agents: int
    iterations: int
    problems: list[ProblemSpec]
    arms: list[ArmSpec]
    workers: int = 1

    def resolved(self) -> dict:
        return {
            "output_dir": self.output_dir,
            "seeds": list(self.seeds),
            "budget": {"agents": self.agents, "iterations": self.iterations},
            "problems": [p.resolved() for p in self.problems],
            "arms": [a.resolved() for a in self.arms],
        }

    def digest(self) -> str:
        # output location is excluded: the digest identifies what was run
        content = {k: v for k, v in self.resolved().items() if k != "output_dir"}
        canonical = json.dumps(content, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _parse_seeds(obj, path: str) -> list[int]:
    if isinstance(obj, list):
        if not obj:
            raise ConfigError(f"{path}: need at least one seed")
        return [_as_int(v, f"{path}[{i}]") for i, v in enumerate(obj)]
    if isinstance(obj, dict):
        _check_keys(obj, {"count", "master"}, path)
        count = _as_int(_require(obj, "count", path), f"{path}.count", minimum=1)
        master = _as_int(obj.get("master", 0), f"{path}.master")
        # counter-based split keeps every arm comparable across sweeps
        return [int(np.random.SeedSequence([master, i]).generate_state(1)[0])
                for i in range(count)]
    raise ConfigError(f"{path}: expected a list of seeds or {{count, master}}")


def parse_experiment(raw: dict, path: str = "config") -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a JSON object at the top level")
    _check_keys(raw, {"output_dir", "seeds", "budget", "problems", "problem",
                      "arms", "workers"}, path)
    output_dir = _require(raw, "output_dir", path)
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError(f"{path}.output_dir: expected a non-empty string")
    seeds = _parse_seeds(_require(raw, "seeds", path), f"{path}.seeds")
    budget = _require(raw, "budget", path)
    if not isinstance(budget, dict):
        raise ConfigError(f"{path}.budget: expected an object")
    _check_keys(budget, {"agents", "iterations"}, f"{path}.budget")
    agents = _as_int(_require(budget, "agents", f"{path}.budget"),
                     f"{path}.budget.agents", minimum=2)
    iterations = _as_int(_require(budget, "iterations", f"{path}.budget"),
                         f"{path}.budget.iterations", minimum=1)

    if ("problems" in raw) == ("problem" in raw):
        raise ConfigError(f"{path}: give exactly one of 'problem' or 'problems'")
    raw_problems = raw["problems"] if "problems" in raw else [raw["problem"]]
    if not isinstance(raw_problems, list) or not raw_problems:
        raise ConfigError(f"{path}.problems: expected a non-empty list")
    problems = [_parse_problem(p, f"{path}.problems[{i}]")
                for i, p in enumerate(raw_problems)]

    raw_arms = _require(raw, "arms", path)
    if not isinstance(raw_arms, list) or not raw_arms:
        raise ConfigError(f"{path}.arms: expected a non-empty list")
    arms: list[ArmSpec] = []
    for i, a in enumerate(raw_arms):
        arms.extend(_parse_arm(a, f"{path}.arms[{i}]", (agents, iterations)))
    labels = [a.label for a in arms]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"{path}.arms: duplicate arm labels after sweep "
                          f"expansion: {sorted(labels)}")

    workers = _as_int(raw.get("workers", 1), f"{path}.workers", minimum=1)
    env_workers = os.environ.get("SBD_WORKERS")
    if env_workers is not None:
        try:
            workers = max(1, int(env_workers))
        except ValueError:
            raise ConfigError("SBD_WORKERS must be an integer") from None

    return ExperimentConfig(output_dir=output_dir, seeds=seeds, agents=agents,
                            iterations=iterations, problems=problems, arms=arms,
                            workers=workers)


@dataclass(frozen=True)
class CutsConfig:
    """Configuration of a 1-D functional-cut sweep between two anchors."""

    problem: ProblemSpec
    output: str
    anchor_a: Optional[list[float]] = None
    anchor_b: Optional[list[float]] = None
    from_run: Optional[str] = None
    t_start: float = -0.25
    t_stop: float = 1.25
    t_num: int = 101
    model: Optional[dict] = None


def parse_cuts(raw: dict, path: str = "config") -> CutsConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a JSON object at the top level")
    _check_keys(raw, {"problem", "anchors", "t_grid", "model", "output"}, path)
    problem = _parse_problem(_require(raw, "problem", path), f"{path}.problem")
    output = raw.get("output", "cuts.csv")
    if not isinstance(output, str) or not output:
        raise ConfigError(f"{path}.output: expected a non-empty string")

    anchors = _require(raw, "anchors", path)
    if not isinstance(anchors, dict):
        raise ConfigError(f"{path}.anchors: expected an object")
    anchor_a = anchor_b = from_run = None
    if "from_run" in anchors:
        _check_keys(anchors, {"from_run"}, f"{path}.anchors")
        from_run = anchors["from_run"]
        if not isinstance(from_run, str):
            raise ConfigError(f"{path}.anchors.from_run: expected a path string")
    else:
        _check_keys(anchors, {"a", "b"}, f"{path}.anchors")
        anchor_a = [_as_number(v, f"{path}.anchors.a[{i}]")
                    for i, v in enumerate(_require(anchors, "a", f"{path}.anchors"))]
        anchor_b = [_as_number(v, f"{path}.anchors.b[{i}]")
                    for i, v in enumerate(_require(anchors, "b", f"{path}.anchors"))]
        if len(anchor_a) != len(anchor_b):
            raise ConfigError(f"{path}.anchors: a and b must have equal length")

    t_start, t_stop, t_num = -0.25, 1.25, 101
    if "t_grid" in raw:
        grid = raw["t_grid"]
        if not isinstance(grid, dict):
            raise ConfigError(f"{path}.t_grid: expected an object")
        _check_keys(grid, {"start", "stop", "num"}, f"{path}.t_grid")
        t_start = _as_number(grid.get("start", t_start), f"{path}.t_grid.start")
        t_stop = _as_number(grid.get("stop", t_stop), f"{path}.t_grid.stop")
        t_num = _as_int(grid.get("num", t_num), f"{path}.t_grid.num", minimum=2)
        if t_stop <= t_start:
            raise ConfigError(f"{path}.t_grid: stop must exceed start")

    model = None
    if raw.get("model") is not None:
        model = raw["model"]
        if not isinstance(model, dict):
            raise ConfigError(f"{path}.model: expected an object")
        _check_keys(model, {"kind", "training_csv", "lhs", "seed", "s"},
                    f"{path}.model")
        kind = _require(model, "kind", f"{path}.model")
        if kind not in _MODELS:
            raise ConfigError(f"{path}.model.kind: choose from {_MODELS}")
        if ("training_csv" in model) == ("lhs" in model):
            raise ConfigError(f"{path}.model: give exactly one of training_csv or lhs")
        if "lhs" in model:
            _as_int(model["lhs"], f"{path}.model.lhs", minimum=2)
            _as_int(model.get("seed", 0), f"{path}.model.seed")

    return CutsConfig(problem=problem, output=output, anchor_a=anchor_a,
                      anchor_b=anchor_b, from_run=from_run, t_start=t_start,
                      t_stop=t_stop, t_num=t_num, model=model)


def load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}") from None


def load_experiment(path: str) -> ExperimentConfig:
    return parse_experiment(load_json(path))


def load_cuts(path: str) -> CutsConfig:
    return parse_cuts(load_json(path))
