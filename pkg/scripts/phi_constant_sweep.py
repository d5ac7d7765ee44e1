#!/usr/bin/env python3
"""Sweep the power-barrier constant Phi(alpha, s, p) across the admissible
range and print the bracketing check, one row per case.

Usage: python3 scripts/phi_constant_sweep.py [--fine]
"""

import argparse

import numpy as np

from fracp import phi_constant


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--fine", action="store_true", help="denser alpha grid")
    args = ap.parse_args()

    fracs = np.linspace(0.05, 0.95, 19) if args.fine else (0.1, 0.3, 0.5, 0.7, 0.9)
    print(f"{'alpha':>8} {'s':>5} {'p':>5} {'beta':>7} {'phi':>12} {'c1':>10} {'c2':>10}  ok")
    failures = 0
    for s in (0.3, 0.5, 0.7):
        for p in (1.5, 2.0, 3.0):
            for frac in fracs:
                o = phi_constant(frac * s, s, p)
                ok = o.c1 - 1e-10 <= o.phi <= o.c2 + 1e-10
                failures += not ok
                print(
                    f"{o.alpha:8.4f} {s:5.2f} {p:5.2f} {o.beta:7.4f} "
                    f"{o.phi:12.8f} {o.c1:10.6f} {o.c2:10.6f}  {'PASS' if ok else 'FAIL'}"
                )
    print(f"\n{failures} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
