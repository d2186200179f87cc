#!/usr/bin/env python3
"""Curvature-floor sweep: segment a star with delta in {0, 0.05, 0.15, 0.3}.

Prints the isoperimetric ratio of each run's output; the ratios climb
toward 1 as the floor rises (straight edges are allowed at delta = 0 and
eliminated at larger delta).
"""

import argparse
import sys

from csstd.cli import main


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="out/fig5")
    parser.add_argument("--size", type=int, default=384)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    sys.exit(
        main(
            ["demo", "--kind", "fig5", "--size", str(args.size),
             "--seed", str(args.seed), "--out-dir", args.out_dir]
        )
    )
