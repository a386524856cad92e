"""LP backend delegating to scipy's HiGHS interface."""

from __future__ import annotations

import time

import numpy as np
from scipy.optimize import linprog

from .program import LinearProgram, LpSolution, Status

_STATUS = {0: Status.OPTIMAL, 1: Status.ITERATION_LIMIT, 2: Status.INFEASIBLE, 3: Status.UNBOUNDED}

OPTIONS = {
    "primal_feasibility_tolerance": 1e-9,
    "dual_feasibility_tolerance": 1e-9,
    "presolve": True,
}


def solve(prog: LinearProgram) -> LpSolution:
    t0 = time.perf_counter()
    bounds = np.column_stack([prog.lo, prog.hi])
    res = linprog(
        prog.c,
        A_ub=prog.A_ub if prog.A_ub.shape[0] else None,
        b_ub=prog.b_ub if prog.b_ub.size else None,
        A_eq=prog.A_eq if prog.A_eq.shape[0] else None,
        b_eq=prog.b_eq if prog.b_eq.size else None,
        bounds=bounds,
        method="highs",
        options=OPTIONS,
    )
    status = _STATUS.get(res.status)
    if status is None:
        raise RuntimeError(f"HiGHS failed: {res.message}")
    iters = int(getattr(res, "nit", 0) or 0)
    if status is not Status.OPTIMAL:
        return LpSolution(np.full(prog.n_vars, np.nan), np.nan, status, iters, time.perf_counter() - t0)
    x = np.clip(res.x, prog.lo, prog.hi)
    return LpSolution(x, float(prog.c @ x), status, iters, time.perf_counter() - t0)
