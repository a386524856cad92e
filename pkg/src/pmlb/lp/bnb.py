"""Best-first branch and bound over binary variables."""

from __future__ import annotations

import heapq
import itertools
import time

import numpy as np

from .program import INT_TOL, LinearProgram, LpSolution, Status

DEFAULT_NODE_LIMIT = 10**6
PRUNE_TOL = 1e-10


def _cutoff(best_obj):
    """Bound a node must beat to stay alive."""
    if not np.isfinite(best_obj):
        return np.inf
    return best_obj - PRUNE_TOL * max(1.0, abs(best_obj))


def _most_fractional(x, int_vars):
    frac = np.abs(x[int_vars] - np.round(x[int_vars]))
    k = int(np.argmax(frac))
    if frac[k] <= INT_TOL:
        return -1
    return int(int_vars[k])


def branch_and_bound(prog: LinearProgram, int_vars, lp_solver, node_limit=DEFAULT_NODE_LIMIT,
                     time_limit=None) -> LpSolution:
    t0 = time.perf_counter()
    int_vars = np.asarray(sorted(set(int(i) for i in int_vars)), dtype=int)
    if int_vars.size and (np.any(prog.lo[int_vars] < 0) or np.any(prog.hi[int_vars] > 1)):
        raise ValueError("integer variables must have bounds within [0, 1]")

    tie = itertools.count()
    best_x, best_obj = None, np.inf
    nodes = 0
    iters = 0
    limited = False

    root = lp_solver(prog)
    nodes += 1
    iters += root.iterations
    if root.status is Status.UNBOUNDED:
        return LpSolution(root.values, np.nan, Status.UNBOUNDED, iters, time.perf_counter() - t0, nodes)
    heap = []
    if root.optimal:
        heapq.heappush(heap, (root.objective_value, next(tie), prog.lo.copy(), prog.hi.copy(), root))

    while heap:
        bound, _, lo, hi, sol = heapq.heappop(heap)
        if bound >= _cutoff(best_obj):
            continue
        j = _most_fractional(sol.values, int_vars)
        if j < 0:
            best_x, best_obj = sol.values, sol.objective_value
            continue
        if nodes >= node_limit or (time_limit is not None and time.perf_counter() - t0 > time_limit):
            limited = True
            break
        for val in (0.0, 1.0):
            clo, chi = lo.copy(), hi.copy()
            clo[j] = chi[j] = val
            child = lp_solver(prog.with_bounds(clo, chi))
            nodes += 1
            iters += child.iterations
            if child.optimal and child.objective_value < _cutoff(best_obj):
                heapq.heappush(heap, (child.objective_value, next(tie), clo, chi, child))

    elapsed = time.perf_counter() - t0
    if best_x is None:
        status = Status.NODE_LIMIT if limited else Status.INFEASIBLE
        return LpSolution(np.full(prog.n_vars, np.nan), np.nan, status, iters, elapsed, nodes)

    x = _polish(prog, best_x, int_vars, lp_solver)
    status = Status.NODE_LIMIT if limited else Status.OPTIMAL
    return LpSolution(x, float(prog.c @ x), status, iters, time.perf_counter() - t0, nodes)


def _polish(prog, x, int_vars, lp_solver):
    """Snap integer variables to 0/1 and re-solve the continuous remainder."""
    lo, hi = prog.lo.copy(), prog.hi.copy()
    snapped = np.round(x[int_vars])
    lo[int_vars] = hi[int_vars] = snapped
    sol = lp_solver(prog.with_bounds(lo, hi))
    if sol.optimal and sol.objective_value <= float(prog.c @ x) + 1e-9:
        return sol.values
    x = x.copy()
    x[int_vars] = snapped
    return x
