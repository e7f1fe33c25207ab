#!/usr/bin/env python3
"""Time-modulated-array study: standard PSO vs surrogate-assisted arms.

Compares, at several true-evaluation budgets S, the bare Kriging arm, the
adaptive-sampling-then-bare arm, and the confidence-enhanced arm against a
full standard PSO run. The summary CSV carries each arm's median cost, the
time saving, and the quality delta against the std-pso arm.
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from sbdopt.cli import command_run


def build_config(output_dir: str, seeds: int, n_elements: int, sll_db: float,
                 agents: int, iterations: int, s0: int, sizes: list[int],
                 phi_th: float) -> dict:
    arms = [{"kind": "std-pso"},
            {"kind": "bare-sbd", "model": "ok", "optimizer": "pso", "s": sizes},
            {"kind": "osf-then-bare", "model": "ok", "optimizer": "pso",
             "s0": s0, "s": sizes, "phi_th": phi_th},
            {"kind": "pso-ok-c", "s0": s0, "s": sizes, "zeta": 2.0,
             "control_stride": 20}]
    return {
        "output_dir": output_dir,
        "seeds": {"count": seeds, "master": 7177},
        "budget": {"agents": agents, "iterations": iterations},
        "problem": {"tma": {"n_elements": n_elements,
                            "chebyshev_sll_db": sll_db}},
        "arms": arms,
    }


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output", default="results/tma_arm_comparison")
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--elements", type=int, default=16)
    parser.add_argument("--sll-db", type=float, default=-30.0)
    parser.add_argument("--agents", type=int, default=10)
    parser.add_argument("--iterations", type=int, default=200)
    parser.add_argument("--s0", type=int, default=40)
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[60, 100, 140, 200])
    parser.add_argument("--phi-th", type=float, default=0.15,
                        help="sublevel threshold for the adaptive-sampling arm")
    parser.add_argument("--quick", action="store_true",
                        help="3 seeds, 50 iterations, one size")
    args = parser.parse_args()
    if args.quick:
        args.seeds, args.iterations, args.sizes = 3, 50, [60]

    config = build_config(args.output, args.seeds, args.elements, args.sll_db,
                          args.agents, args.iterations, args.s0, args.sizes,
                          args.phi_th)
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(config, fh, indent=2)
        config_path = fh.name
    Path(args.output).mkdir(parents=True, exist_ok=True)
    return command_run(config_path, verbose=True)


if __name__ == "__main__":
    sys.exit(main())
