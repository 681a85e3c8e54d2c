"""Run every experiment with its default configuration and print the report rows.

Usage: python3 scripts/reproduce_all.py [OUT_DIR] [experiment ...]
Takes about ten minutes on one core; CSV files land in OUT_DIR/<experiment>.
"""
import sys
import time
from pathlib import Path

from dirachop.config import EXPERIMENTS, ExperimentConfig
from dirachop.experiments import run_experiment


def main(argv):
    out = Path(argv[0]) if argv else Path("out")
    names = argv[1:] or EXPERIMENTS
    for name in names:
        start = time.perf_counter()
        rep = run_experiment(ExperimentConfig.from_defaults(name, out_dir=out / name))
        print(f"== {name} ({time.perf_counter() - start:.1f} s)")
        for row in rep.rows:
            print("   " + ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))


if __name__ == "__main__":
    main(sys.argv[1:])
