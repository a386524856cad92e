from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

FEAS_TOL = 1e-7
INT_TOL = 1e-6


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NODE_LIMIT = "node_limit"
    ITERATION_LIMIT = "iteration_limit"


def _as_matrix(a, n):
    if a is None:
        return np.zeros((0, n))
    if sp.issparse(a):
        return sp.csr_matrix(a, dtype=float)
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1) if a.size else np.zeros((0, n))
    return a


def _as_vector(b):
    if b is None:
        return np.zeros(0)
    return np.atleast_1d(np.asarray(b, dtype=float))


@dataclass
class LinearProgram:
    """``min c @ x`` s.t. ``A_eq x = b_eq``, ``A_ub x <= b_ub``, ``lo <= x <= hi``.

    Bounds default to ``[0, inf)``.  Infinite bounds are allowed; all matrix
    coefficients must be finite.
    """

    c: np.ndarray
    A_eq: np.ndarray = None
    b_eq: np.ndarray = None
    A_ub: np.ndarray = None
    b_ub: np.ndarray = None
    lo: np.ndarray = None
    hi: np.ndarray = None
    names: list = field(default=None, repr=False)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A_eq = _as_matrix(self.A_eq, n)
        self.b_eq = _as_vector(self.b_eq)
        self.A_ub = _as_matrix(self.A_ub, n)
        self.b_ub = _as_vector(self.b_ub)
        self.lo = np.zeros(n) if self.lo is None else np.asarray(self.lo, dtype=float).copy()
        self.hi = np.full(n, np.inf) if self.hi is None else np.asarray(self.hi, dtype=float).copy()
        for name, a, b in (("eq", self.A_eq, self.b_eq), ("ub", self.A_ub, self.b_ub)):
            if a.shape[1] != n:
                raise ValueError(f"{name} rows have length {a.shape[1]}, expected {n}")
            if a.shape[0] != b.size:
                raise ValueError(f"{name}: {a.shape[0]} rows but {b.size} right-hand sides")
            coef = a.data if sp.issparse(a) else a
            if not (np.all(np.isfinite(coef)) and np.all(np.isfinite(b))):
                raise ValueError(f"{name} constraints must be finite")
        if self.lo.shape != (n,) or self.hi.shape != (n,):
            raise ValueError("bounds must have one entry per variable")
        if np.any(self.lo > self.hi):
            raise ValueError("lower bound exceeds upper bound")
        if not np.all(np.isfinite(self.c)):
            raise ValueError("objective must be finite")

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def n_rows(self) -> int:
        return self.A_eq.shape[0] + self.A_ub.shape[0]

    def dense(self) -> "LinearProgram":
        def d(a):
            return a.toarray() if sp.issparse(a) else a

        return LinearProgram(self.c, d(self.A_eq), self.b_eq, d(self.A_ub), self.b_ub, self.lo, self.hi, self.names)

    def with_bounds(self, lo, hi) -> "LinearProgram":
        return LinearProgram(self.c, self.A_eq, self.b_eq, self.A_ub, self.b_ub, lo, hi, self.names)

    def violation(self, x) -> float:
        """Largest constraint or bound violation at ``x``."""
        x = np.asarray(x, dtype=float)
        v = [0.0]
        if self.b_eq.size:
            v.append(np.max(np.abs(self.A_eq @ x - self.b_eq)))
        if self.b_ub.size:
            v.append(np.max(self.A_ub @ x - self.b_ub))
        v.append(np.max(self.lo - x, initial=0.0))
        v.append(np.max(x - self.hi, initial=0.0))
        return float(max(v))


@dataclass
class LpSolution:
    values: np.ndarray
    objective_value: float
    status: Status
    iterations: int = 0
    solve_time: float = 0.0
    nodes: int = 0
    method: str = ""

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL
