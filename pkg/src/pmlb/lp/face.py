"""A central point of the optimal face.

Simplex codes stop at a vertex; interior-point codes without crossover
return a point near the analytic center of the optimal face.  When the
optimum is not unique the two differ, and anything that samples from the
solution (probabilistic rounding) sees different inputs.  ``central``
approximates the interior-point answer by averaging the incumbent vertex
with the optima of random objectives over the optimal face.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .program import LinearProgram, LpSolution

FACE_TOL = 1e-9


def optimal_face(prog: LinearProgram, z: float) -> LinearProgram:
    """``prog`` with the extra row ``c @ x <= z`` (slightly relaxed)."""
    row = prog.c.reshape(1, -1)
    tol = FACE_TOL * max(1.0, abs(z))
    if sp.issparse(prog.A_ub):
        A = sp.vstack([prog.A_ub, sp.csr_matrix(row)]).tocsr()
    else:
        A = np.vstack([prog.A_ub, row])
    return LinearProgram(np.zeros(prog.n_vars), prog.A_eq, prog.b_eq, A, np.r_[prog.b_ub, z + tol],
                         prog.lo, prog.hi, prog.names)


def central(prog: LinearProgram, sol: LpSolution, solver, rng: np.random.Generator,
            n_samples: int = 8, directions=None) -> np.ndarray:
    """Average of ``sol`` and ``n_samples`` random vertices of the optimal face.

    ``directions`` restricts the random objectives to a subset of variables
    (by default all of them).  Samples whose solve fails are skipped, so the
    result is always at least ``sol.values``.
    """
    if not sol.optimal or n_samples <= 0:
        return sol.values
    face = optimal_face(prog, sol.objective_value)
    idx = np.arange(prog.n_vars) if directions is None else np.asarray(directions)
    acc = np.array(sol.values, dtype=float)
    k = 1
    for _ in range(n_samples):
        c = np.zeros(prog.n_vars)
        c[idx] = rng.normal(size=idx.size)
        face.c = c
        s = solver(face)
        if s.optimal:
            acc += s.values
            k += 1
    return acc / k
