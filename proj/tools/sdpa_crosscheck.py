#!/usr/bin/env python3
"""Independent feasibility check of an exported SDPA problem with cvxpy.

Solves  min ||<F_i, Y> - c_i||_2  over block-diagonal PSD Y  (objective F0 = 0)
and classifies the optimum: ~0 means feasible, clearly positive means infeasible.

exit codes: 0 feasible, 1 infeasible, 2 undetermined, 3 solver or input failure
"""

import argparse
import re
import sys

import numpy as np


def read_sdpa(path):
    with open(path) as fh:
        lines = [ln for ln in fh if ln.strip() and ln.lstrip()[0] not in '"*']
    tokens = []
    for ln in lines:
        ln = ln.split("=")[0]
        tokens.extend(re.sub(r"[,(){}]", " ", ln).split())
    pos = 0

    def take(n=1):
        nonlocal pos
        out = tokens[pos:pos + n]
        pos += n
        return out

    m = int(take()[0])
    nblocks = int(take()[0])
    sizes = [int(t) for t in take(nblocks)]
    if any(s <= 0 for s in sizes):
        raise ValueError("LP (diagonal) blocks are not supported")
    rhs = np.array([float(t) for t in take(m)])
    mats = [[np.zeros((s, s)) for s in sizes] for _ in range(m + 1)]
    rest = tokens[pos:]
    if len(rest) % 5:
        raise ValueError("entry list is not a multiple of 5 tokens")
    for k in range(0, len(rest), 5):
        c, b, i, j = (int(t) for t in rest[k:k + 4])
        v = float(rest[k + 4])
        mats[c][b - 1][i - 1, j - 1] = v
        mats[c][b - 1][j - 1, i - 1] = v
    return sizes, rhs, mats


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("sdpa", help="SDPA sparse file (.dat-s)")
    ap.add_argument("--feasible-tol", type=float, default=1e-6,
                    help="relative residual treated as feasible")
    ap.add_argument("--infeasible-tol", type=float, default=1e-3,
                    help="relative residual treated as infeasible")
    args = ap.parse_args()

    try:
        import cvxpy as cp
    except ImportError:
        print("error: cvxpy is not installed", file=sys.stderr)
        return 3

    try:
        sizes, rhs, mats = read_sdpa(args.sdpa)
    except (OSError, ValueError, IndexError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3

    ys = [cp.Variable((s, s), PSD=True) for s in sizes]
    lhs = cp.hstack([
        sum(cp.trace(mats[c][b] @ ys[b]) for b in range(len(sizes)))
        for c in range(1, len(rhs) + 1)
    ])
    # the trace bound keeps the minimum-residual problem bounded without cutting off the
    # small certificates that exported problems have
    scale = max(1.0, float(np.linalg.norm(rhs)))
    bound = 1e4 * scale
    prob = cp.Problem(cp.Minimize(cp.norm(lhs - rhs, 2)),
                      [cp.sum([cp.trace(y) for y in ys]) <= bound])

    status = None
    for solver in ("CLARABEL", "SCS"):
        if solver not in cp.installed_solvers():
            continue
        try:
            prob.solve(solver=solver)
            status = prob.status
            break
        except cp.error.SolverError:
            continue
    if status not in ("optimal", "optimal_inaccurate"):
        print(f"undetermined (solver status {status})")
        return 2

    rel = prob.value / scale
    if rel <= args.feasible_tol:
        print(f"feasible (relative residual {rel:.3e}, {status})")
        return 0
    if rel >= args.infeasible_tol:
        print(f"infeasible (relative residual {rel:.3e}, {status})")
        return 1
    print(f"undetermined (relative residual {rel:.3e}, {status})")
    return 2


if __name__ == "__main__":
    sys.exit(main())
