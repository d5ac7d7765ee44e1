#!/usr/bin/env python3
"""Solve a singular preset by epsilon-continuation and report how the fitted
boundary exponent tracks the predicted one as the mesh refines.

Usage: python3 scripts/boundary_exponent_study.py [--gamma G] [--delta D]
"""

import argparse
import time

from fracp import (
    build_grid,
    classify_regime,
    continuation,
    default_grading,
    fit_boundary_exponent,
    make_params,
)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--s", type=float, default=0.5)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--delta", type=float, default=0.5)
    ap.add_argument("--sizes", type=int, nargs="+", default=[128, 256, 512, 1024])
    args = ap.parse_args()

    params = make_params(args.s, args.p, args.gamma, args.delta)
    report = classify_regime(params)
    ref = report.reference_exponent(params.s)
    q = default_grading(params)
    print(
        f"case {report.case_flag}, alpha*={report.alpha_star:.4f}, "
        f"reference exponent {ref:.4f}, grading {q:.2f}"
    )
    print(f"{'n':>6} {'slope_L':>9} {'slope_R':>9} {'dev':>9} {'eps_final':>10} {'time':>7}")
    for n in args.sizes:
        grid = build_grid(params.a, params.b, n, q)
        t0 = time.time()
        results, u_min, incs = continuation(params, grid, eps0=0.5, halvings=20, tol=1e-4)
        fit = fit_boundary_exponent(u_min, params=params)
        eps_fin = 0.5 * 2.0 ** -(len(results) - 1)
        print(
            f"{n:6d} {fit.slope_left:9.4f} {fit.slope_right:9.4f} "
            f"{fit.deviation:9.4f} {eps_fin:10.2e} {time.time() - t0:6.1f}s"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
