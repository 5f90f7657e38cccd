#!/usr/bin/env python3
"""Regenerate the shipped solved-closure operator files (up6, central6).

The four dispersion-optimised operators ship with closures transcribed from
reference tables; the order-6 classical upwind operator and the order-6
central-interior reference are instead produced by the boundary closure
solver in sbpkit.closure.  This script re-runs those solves with default
hyperparameters and rewrites src/sbpkit/_data/{up6,central6}.json.

Usage: python3 tools/generate_closures.py [--check]

With --check the solve still runs but files are compared against the shipped
ones instead of overwritten (exit 1 on drift beyond solver tolerance).
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from sbpkit.closure import admm_solve, build_problem
from sbpkit.operators import (DualPairOperator, get_interior, get_operator,
                              operator_to_dict, verify_accuracy, verify_sbp,
                              verify_upwind)

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "sbpkit" / "_data"

# name -> (interior name, boundary block size, requested boundary degree)
TARGETS = {
    "up6": ("up6", 8, 3),
    "central6": ("central6", 8, 3),
}


def solve_one(name):
    interior_name, s, degree = TARGETS[name]
    interior = get_interior(interior_name)
    if hasattr(interior, "as_interior"):
        interior = interior.as_interior()
    problem = build_problem(interior, s, degree)
    t0 = time.perf_counter()
    result = admm_solve(problem)
    wall = time.perf_counter() - t0
    if not result.converged:
        raise RuntimeError(f"{name}: solver stopped at residual "
                           f"{result.residual:.3e} without converging")
    op = DualPairOperator(
        name, interior, result.closure,
        meta={"source": "tools/generate_closures.py",
              "comment": (f"solved closure: s={s}, boundary degree "
                          f"{problem.boundary_order}, residual "
                          f"{result.residual:.3e}, "
                          f"{result.iterations} iterations")})
    print(f"{name}: degree {problem.boundary_order}, "
          f"{result.iterations} iters, residual {result.residual:.3e}, "
          f"h1 = {result.closure.h[0]:.9f}, {wall:.1f}s")
    return op


def check_operator(op):
    """The checks a shipped operator file must satisfy."""
    n = max(24, op.minimum_n)
    sbp = verify_sbp(op, n)
    lam = verify_upwind(op, n)
    acc = verify_accuracy(op, n)
    print(f"  n={n}: sbp residual {sbp:.3e}, lambda_max(S) {lam:.3e}, "
          f"accuracy {acc}")
    if sbp != 0.0:
        raise AssertionError(f"{op.name}: solved closure should give an "
                             f"exactly zero pairing residual, got {sbp:.3e}")
    if lam > 1e-8:
        raise AssertionError(f"{op.name}: lambda_max(S) = {lam:.3e} > 1e-8")
    want = (op.interior.declared_order, op.interior.declared_order // 2)
    if acc != want:
        raise AssertionError(f"{op.name}: accuracy {acc}, expected {want}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true",
                    help="compare against shipped files instead of rewriting")
    ap.add_argument("names", nargs="*", default=list(TARGETS),
                    help="subset of operators to regenerate")
    args = ap.parse_args(argv)

    drift = False
    for name in (args.names or list(TARGETS)):
        op = solve_one(name)
        check_operator(op)
        path = DATA_DIR / f"{name}.json"
        if args.check:
            shipped = get_operator(name)
            dq = float(np.max(np.abs(shipped.closure.q - op.closure.q)))
            dh = float(np.max(np.abs(shipped.closure.h - op.closure.h)))
            print(f"  vs shipped: max|dq| = {dq:.3e}, max|dh| = {dh:.3e}")
            if max(dq, dh) > 1e-6:
                drift = True
        else:
            with open(path, "w") as f:
                json.dump(operator_to_dict(op), f, indent=1)
                f.write("\n")
            print(f"  wrote {path}")
    return 1 if drift else 0


if __name__ == "__main__":
    sys.exit(main())
