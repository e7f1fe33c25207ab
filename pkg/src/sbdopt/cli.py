"""Batch experiment driver.

Subcommands:
  sbd run <config.json>       execute every (problem, arm, seed) cell
  sbd cuts <config.json>      sweep the objective along a 1-D cut
  sbd validate <config.json>  parse and validate, printing the config digest

Exit codes: 0 on success, 2 on configuration errors, 3 on runtime failures.
The SBD_WORKERS environment variable bounds how many seeds run in parallel.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import (
    ArmSpec,
    ConfigError,
    CutsConfig,
    ExperimentConfig,
    ProblemSpec,
    load_cuts,
    load_experiment,
    load_json,
    parse_cuts,
    parse_experiment,
)
from .confidence import pso_ok_c_run
from .optimize import OptimizerConfig, bare_sbd, de_run, osf_then_bare, pso_run
from .problem import clamp, time_saving
from .sampling import lhs
from .surrogate import OkModel, TrainingSet, fit_ok, fit_rbfn, fit_svr


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _cell_dir(outdir: Path, problem_label: str, arm_label: str) -> Path:
    return outdir / f"{problem_label}__{arm_label}"


def run_cell(problem_spec: ProblemSpec, arm: ArmSpec, agents: int, iterations: int,
             seed: int, outdir: str) -> dict:
    """Run one (problem, arm, seed) cell and write its result files."""
    problem = problem_spec.build()
    config = OptimizerConfig(agents=agents, iterations=iterations, seed=seed)
    params = arm.params
    row = {"problem": problem_spec.label, "arm": arm.label, "seed": seed,
           "s_budget": params.get("s", ""), "error": ""}
    try:
        if arm.kind == "std-pso":
            result = pso_run(problem.evaluate, problem.space, config)
        elif arm.kind == "std-de":
            result = de_run(problem.evaluate, problem.space, config)
        elif arm.kind == "bare-sbd":
            result = bare_sbd(problem, params["model"], params["s"],
                              params["optimizer"], config, seed=seed)
        elif arm.kind == "osf-then-bare":
            result = osf_then_bare(problem, params["model"], params["s0"],
                                   params["s"], params["phi_th"],
                                   params["optimizer"], config, seed=seed,
                                   candidates=params.get("candidates"))
        elif arm.kind == "pso-ok-c":
            result = pso_ok_c_run(problem, config, params["s0"], params["s"],
                                  params["zeta"], seed=seed,
                                  control_stride=params.get("control_stride", 0))
        else:
            raise ValueError(f"unknown arm kind: {arm.kind}")
    except Exception as exc:  # recorded per seed; other seeds continue
        row["error"] = f"{type(exc).__name__}: {exc}"
        cell = _cell_dir(Path(outdir), problem_spec.label, arm.label)
        cell.mkdir(parents=True, exist_ok=True)
        _atomic_write(cell / f"seed_{seed}_error.txt", row["error"] + "\n")
        return row

    cell = _cell_dir(Path(outdir), problem_spec.label, arm.label)
    cell.mkdir(parents=True, exist_ok=True)
    _atomic_write(cell / f"seed_{seed}.json", result.to_json_text())
    _atomic_write(cell / f"seed_{seed}_history.csv", result.history_csv_text())
    if result.control_points is not None:
        _atomic_write(cell / f"seed_{seed}_control_points.csv",
                      result.control_points_csv_text())
    row.update(best_cost=float(result.best_cost),
               true_evals=int(result.true_evals_used))
    return row


def _run_cell_star(task) -> dict:
    return run_cell(*task)


def _summarize(config: ExperimentConfig, rows: list[dict]) -> str:
    digest = config.digest()
    std_median: dict[str, float] = {}
    groups: dict[tuple[str, str], list[dict]] = {}
    arm_kind = {arm.label: arm.kind for arm in config.arms}
    for row in rows:
        if row["error"]:
            continue
        groups.setdefault((row["problem"], row["arm"]), []).append(row)
    for (problem, arm), cells in groups.items():
        if arm_kind.get(arm) == "std-pso" and problem not in std_median:
            std_median[problem] = float(np.median([c["best_cost"] for c in cells]))

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["problem", "arm", "s_budget", "seeds_completed", "median_cost",
                     "q1_cost", "q3_cost", "median_true_evals", "time_saving_pct",
                     "delta_phi_vs_std_pso", "config_digest"])
    for (problem, arm), cells in sorted(groups.items()):
        costs = np.array([c["best_cost"] for c in cells], dtype=float)
        evals = np.array([c["true_evals"] for c in cells], dtype=float)
        q1, median, q3 = np.percentile(costs, [25.0, 50.0, 75.0])
        med_evals = float(np.median(evals))
        saving = time_saving(config.agents, config.iterations, med_evals)
        delta = ""
        if problem in std_median and std_median[problem] != 0.0:
            delta = repr((float(median) - std_median[problem]) / std_median[problem])
        writer.writerow([problem, arm, cells[0]["s_budget"], len(cells),
                         repr(float(median)), repr(float(q1)), repr(float(q3)),
                         repr(med_evals), repr(float(saving)), delta, digest])
    return buf.getvalue()


def command_run(config_path: str, verbose: bool = False) -> int:
    config = load_experiment(config_path)
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    _atomic_write(outdir / "config_resolved.json",
                  json.dumps(config.resolved(), indent=2, sort_keys=True) + "\n")

    tasks = [(problem, arm, config.agents, config.iterations, seed, str(outdir))
             for problem in config.problems
             for arm in config.arms
             for seed in config.seeds]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_run_cell_star, tasks))
    else:
        rows = [_run_cell_star(task) for task in tasks]
    if verbose:
        for row in rows:
            status = row["error"] or f"cost={row.get('best_cost'):.6g} " \
                                     f"evals={row.get('true_evals')}"
            print(f"[{row['problem']}/{row['arm']}] seed {row['seed']}: {status}",
                  file=sys.stderr)

    _atomic_write(outdir / "summary.csv", _summarize(config, rows))
    failures = [row for row in rows if row["error"]]
    for row in failures:
        print(f"seed failure [{row['problem']}/{row['arm']}] seed {row['seed']}: "
              f"{row['error']}", file=sys.stderr)
    print(f"summary written to {outdir / 'summary.csv'} "
          f"(digest {config.digest()})")
    return 3 if failures else 0


def _cut_model(config: CutsConfig, problem) -> tuple[object, bool]:
    spec = config.model
    if spec is None:
        return None, False
    if "training_csv" in spec:
        data = TrainingSet.from_csv(spec["training_csv"])
    else:
        plan = lhs(problem.space, spec["lhs"],
                   seed=np.random.default_rng(
                       np.random.SeedSequence([spec.get("seed", 0), 301])))
        data = TrainingSet()
        for point in plan.points:
            data.add(point, problem.evaluate(point))
    fitter = {"rbfn": fit_rbfn, "svr": fit_svr, "ok": fit_ok}[spec["kind"]]
    model = fitter(data)
    return model, isinstance(model, OkModel)


def command_cuts(config_path: str) -> int:
    config = load_cuts(config_path)
    problem = config.problem.build()
    if config.from_run is not None:
        summary = load_json(config.from_run)
        if "initial_best" not in summary or "best" not in summary:
            raise ConfigError(f"{config.from_run}: run summary lacks "
                              "initial_best/best anchors")
        a = np.asarray(summary["initial_best"], dtype=float)
        b = np.asarray(summary["best"], dtype=float)
    else:
        a = np.asarray(config.anchor_a, dtype=float)
        b = np.asarray(config.anchor_b, dtype=float)
    if a.shape != (problem.space.dims,) or b.shape != (problem.space.dims,):
        raise ConfigError("anchor dimension does not match the problem")

    model, has_confidence = _cut_model(config, problem)
    ts = np.linspace(config.t_start, config.t_stop, config.t_num)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["t", "phi_true", "phi_model", "psi_model", "clamped"])
    for t in ts:
        point = clamp(problem.space, (1.0 - t) * a + t * b)
        flagged = not np.array_equal(point, (1.0 - t) * a + t * b)
        true_cost = problem.evaluate(point)
        phi_model = psi_model = ""
        if model is not None:
            prediction = model.predict(point)
            phi_model = repr(float(prediction.value))
            if has_confidence:
                psi_model = repr(float(prediction.confidence))
        writer.writerow([repr(float(t)), repr(true_cost), phi_model, psi_model,
                         "1" if flagged else "0"])
    out = Path(config.output)
    if out.parent != Path("."):
        out.parent.mkdir(parents=True, exist_ok=True)
    _atomic_write(out, buf.getvalue())
    print(f"cut written to {out}")
    return 0


def command_validate(config_path: str) -> int:
    raw = load_json(config_path)
    if isinstance(raw, dict) and "anchors" in raw:
        parse_cuts(raw)
        print(f"{config_path}: valid cuts config")
    else:
        config = parse_experiment(raw)
        print(f"{config_path}: valid run config "
              f"({len(config.problems)} problem(s), {len(config.arms)} arm(s), "
              f"{len(config.seeds)} seed(s), digest {config.digest()})")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sbd", description="surrogate-assisted optimization experiment driver")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("-v", "--verbose", action="store_true")
    p_cuts = sub.add_parser("cuts", help="sweep the objective along a 1-D cut")
    p_cuts.add_argument("config")
    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return command_run(args.config, verbose=args.verbose)
        if args.command == "cuts":
            return command_cuts(args.config)
        return command_validate(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
