#!/usr/bin/env python3
"""Bare surrogate x optimizer study on the analytic benchmarks.

Runs every combination of {rbfn, svr, ok} x {pso, de} across a sweep of
training-set sizes and writes the per-seed results plus a summary CSV with
one row per (benchmark, arm, S). Final costs are always true re-evaluations
of each arm's winner.
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from sbdopt.cli import command_run


def build_config(output_dir: str, seeds: int, dims: int, agents: int,
                 iterations: int, sizes: list[int], benchmarks: list[str]) -> dict:
    arms = [{"kind": "std-pso"}]
    for model in ("rbfn", "svr", "ok"):
        for optimizer in ("pso", "de"):
            arms.append({"kind": "bare-sbd", "model": model,
                         "optimizer": optimizer, "s": sizes})
    return {
        "output_dir": output_dir,
        "seeds": {"count": seeds, "master": 2024},
        "budget": {"agents": agents, "iterations": iterations},
        "problems": [{"benchmark": name, "k": dims} for name in benchmarks],
        "arms": arms,
    }


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output", default="results/benchmark_arm_sweep")
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--dims", type=int, default=6)
    parser.add_argument("--agents", type=int, default=10)
    parser.add_argument("--iterations", type=int, default=200)
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[30, 60, 120, 240],
                        help="training-set sizes to sweep")
    parser.add_argument("--benchmarks", nargs="+",
                        default=["levy", "schwefel", "ackley"])
    parser.add_argument("--quick", action="store_true",
                        help="3 seeds, 50 iterations, two sizes")
    args = parser.parse_args()
    if args.quick:
        args.seeds, args.iterations, args.sizes = 3, 50, [30, 120]

    config = build_config(args.output, args.seeds, args.dims, args.agents,
                          args.iterations, args.sizes, args.benchmarks)
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(config, fh, indent=2)
        config_path = fh.name
    Path(args.output).mkdir(parents=True, exist_ok=True)
    return command_run(config_path, verbose=True)


if __name__ == "__main__":
    sys.exit(main())
