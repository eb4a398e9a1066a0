"""Monte Carlo replication for the three-process scenario.

Runs the full B=50 study with the default fit budget and writes
report.json / boxplot.csv / timing.json under results/small_n/.
Expect roughly 25 minutes on one core; pass --B 5 for a quick look.
"""

import argparse
import sys
from pathlib import Path

from warpreg.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--B", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default="results/small_n")
    args = parser.parse_args()
    Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    return cli_main(["simulate", "--scenario", "small_n",
                     "--B", str(args.B), "--seed", str(args.seed),
                     "--out-dir", args.out_dir])


if __name__ == "__main__":
    sys.exit(main())
