"""Run the generated guarantee suite per shape and write one CSV per shape.

    python3 scripts/run_suite.py --count 1000 --jobs 1 --outdir results
"""

import argparse
import sys
from pathlib import Path

from treecvrp.cli import main as cli_main
from treecvrp.generate import SHAPES


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--with-oracle", action="store_true")
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    worst = 0
    for shape in SHAPES:
        print(f"[{shape}]", file=sys.stderr)
        argv = ["batch", "--gen", str(args.count), "--seed", str(args.seed), "--shape", shape,
                "--jobs", str(args.jobs), "--out", str(out / f"{shape}.csv")]
        if args.with_oracle:
            argv.append("--with-oracle")
        worst = max(worst, cli_main(argv))
    return worst


if __name__ == "__main__":
    sys.exit(main())
