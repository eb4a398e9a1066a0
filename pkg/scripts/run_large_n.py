"""Monte Carlo study for the thirty-process scenario.

Each run fits 30 posterior chains, so the default B=10 already takes a
while on one core; results land in results/large_n/.
"""

import argparse
import sys
from pathlib import Path

from warpreg.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--B", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default="results/large_n")
    args = parser.parse_args()
    Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    return cli_main(["simulate", "--scenario", "large_n",
                     "--B", str(args.B), "--seed", str(args.seed),
                     "--out-dir", args.out_dir])


if __name__ == "__main__":
    sys.exit(main())
