"""Linear and mixed-integer linear programming.

``solve_lp`` dispatches between the in-house dense simplex (small programs)
and scipy's HiGHS (large sparse programs); ``solve_milp`` runs best-first
branch and bound on top of either.
"""

from __future__ import annotations

import time

from . import bnb, face, highs, simplex
from .face import central
from .program import FEAS_TOL, INT_TOL, LinearProgram, LpSolution, Status

__all__ = [
    "FEAS_TOL",
    "INT_TOL",
    "LinearProgram",
    "LpSolution",
    "SolverError",
    "Status",
    "central",
    "solve_lp",
    "solve_milp",
    "solve_stats",
    "METHODS",
]

METHODS = ("auto", "simplex", "highs")

# dense tableau cells above which "auto" hands the program to HiGHS
DENSE_LIMIT = 250_000


def _tableau_cells(prog: LinearProgram) -> int:
    m = prog.n_rows
    return m * (prog.n_vars + prog.A_ub.shape[0] + m)


def pick_method(prog: LinearProgram, method: str = "auto") -> str:
    if method not in METHODS:
        raise ValueError(f"unknown LP method {method!r}; choose from {METHODS}")
    if method != "auto":
        return method
    return "simplex" if _tableau_cells(prog) <= DENSE_LIMIT else "highs"


def solve_lp(prog: LinearProgram, method: str = "auto") -> LpSolution:
    m = pick_method(prog, method)
    sol = simplex.solve(prog) if m == "simplex" else highs.solve(prog)
    sol.method = m
    return sol


def solve_milp(prog: LinearProgram, integer_vars, method: str = "auto",
               node_limit: int = bnb.DEFAULT_NODE_LIMIT, time_limit: float | None = None) -> LpSolution:
    """Branch and bound; every integer variable must be bounded within [0, 1]."""
    m = pick_method(prog, method)
    sol = bnb.branch_and_bound(prog, integer_vars, lambda p: solve_lp(p, m), node_limit, time_limit)
    sol.method = m
    return sol


class SolverError(RuntimeError):
    def __init__(self, status: Status):
        super().__init__(f"solver finished with status {status.value}")
        self.status = status


def solve_stats(prog: LinearProgram, mode: str = "lp", method: str = "auto", **kwargs):
    """Wall-clock a single solve; returns ``(objective_value, seconds)``.

    A MILP stopped by its node limit still reports its incumbent.  Any
    status without a usable objective raises ``SolverError``.
    """
    t0 = time.perf_counter()
    if mode == "lp":
        sol = solve_lp(prog, method)
    elif mode == "milp":
        sol = solve_milp(prog, kwargs.pop("integer_vars"), method, **kwargs)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    elapsed = time.perf_counter() - t0
    if not (sol.optimal or (sol.status is Status.NODE_LIMIT and sol.objective_value == sol.objective_value)):
        raise SolverError(sol.status)
    return sol.objective_value, elapsed
