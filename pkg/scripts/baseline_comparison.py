#!/usr/bin/env python3
"""Compare the bisection mechanism with the Laplace-then-min baseline.

Prints a paired table of mean absolute errors per (N, eps) cell plus the
error ratio; the baseline is expected to sit above 1 at every N for small
eps while the bisection error keeps decreasing.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ldpmin.harness import compare_baseline, parse_experiment_config


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("config", nargs="?",
                        default=str(Path(__file__).resolve().parent.parent
                                    / "configs" / "baseline_eps1.cfg"))
    args = parser.parse_args()

    spec = parse_experiment_config(args.config)
    print(f"{'N':>8} {'eps':>6} {'bisection':>11} {'laplace':>11} {'ratio':>8}")
    for row in compare_baseline(spec):
        print(f"{row.n:8d} {row.epsilon:6g} {row.err_binary_search:11.5f} "
              f"{row.err_laplace:11.5f} {row.ratio:8.1f}")


if __name__ == "__main__":
    main()
