#!/usr/bin/env python3
"""Sweep each model family across its transition and print the boundaries.

Writes one CSV per family into --out (default ./sweep_output) and prints the
exceptional-point brackets found on the grid next to the bisected location.
"""

import argparse
import math
import os

import numpy as np

from metricforge import phase

SWEEPS = [
    ("jc_doublet", {"epsilon": 0.5, "omega": 1.0, "n": 0},
     "rho", 0.0, 0.5, 101),
    ("pt_matrix", {"r": 1.0, "theta": math.pi / 2, "t": 1.0, "phi": 0.0},
     "s", 0.25, 2.0, 101),
    ("dirac_scalar", {"m0": 1.0, "c": 1.0, "kx": 0.0},
     "v0", 0.0, 2.0, 101),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="sweep_output")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    for family, base, param, lo, hi, count in SWEEPS:
        grid = [float(x) for x in np.linspace(lo, hi, count)]
        diagram = phase.sweep(family, base, [(param, grid)])
        path = os.path.join(args.out, f"{family}_{param}.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(diagram.to_csv())
        brackets = phase.ep_brackets(diagram)
        located = phase.find_exceptional(family, base, param, lo, hi)
        print(f"{family}: {param} in [{lo}, {hi}] -> {path}")
        for b in brackets:
            print(f"  boundary cell [{b['lo']:.4g}, {b['hi']:.4g}] "
                  f"({b['from']} -> {b['to']})")
        print(f"  bisected exceptional point: {param} = {located:.12g}")


if __name__ == "__main__":
    main()
