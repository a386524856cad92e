"""Dense two-phase bounded-variable primal simplex.

Variables carry their box bounds implicitly (nonbasic at lower or upper);
only the constraint rows enter the tableau.  Pricing is Dantzig's rule,
switching to Bland's smallest-index rule after a run of degenerate pivots
so cycling cannot occur.  The pivot loop is the hot path and exists as a
numba kernel and a vectorized numpy kernel.
"""

from __future__ import annotations

import time

import numpy as np

from .. import _accel
from .program import FEAS_TOL, LinearProgram, LpSolution, Status

OPTIMAL, UNBOUNDED, ITER_LIMIT = 0, 1, 2

D_TOL = 1e-9
PIV_TOL = 1e-9
TIE_TOL = 1e-12
DEGENERATE_RUN = 50


# --------------------------------------------------------------------------
# kernels


@_accel.njit
def _iterate_jit(T, xB, d, basis, inbasis, at_upper, ub, blocked, max_iter):
    m, n = T.shape
    it = 0
    degenerate = 0
    bland = False
    support = np.empty(n, dtype=np.int64)
    while it < max_iter:
        # pricing
        j = -1
        best = 0.0
        for k in range(n):
            if inbasis[k] or blocked[k]:
                continue
            score = d[k] if at_upper[k] else -d[k]
            if score > D_TOL:
                if bland:
                    j = k
                    break
                if score > best:
                    best = score
                    j = k
        if j < 0:
            return OPTIMAL, it
        sgn = -1.0 if at_upper[j] else 1.0

        # ratio test
        r = -1
        theta_r = np.inf
        alpha_r = 0.0
        for i in range(m):
            alpha = sgn * T[i, j]
            if alpha > PIV_TOL:
                th = max(xB[i], 0.0) / alpha
            elif alpha < -PIV_TOL and ub[basis[i]] < np.inf:
                th = max(ub[basis[i]] - xB[i], 0.0) / -alpha
            else:
                continue
            if r < 0 or th < theta_r - TIE_TOL:
                r, theta_r, alpha_r = i, th, alpha
            elif th <= theta_r + TIE_TOL:
                if bland:
                    if basis[i] < basis[r]:
                        r, theta_r, alpha_r = i, th, alpha
                elif abs(alpha) > abs(alpha_r):
                    r, theta_r, alpha_r = i, th, alpha
        theta = ub[j]
        flip = True
        if r >= 0 and theta_r < theta:
            theta = theta_r
            flip = False
        if theta == np.inf:
            return UNBOUNDED, it
        it += 1
        if theta <= TIE_TOL:
            degenerate += 1
            if degenerate > DEGENERATE_RUN:
                bland = True
        else:
            degenerate = 0
            bland = False

        step = sgn * theta
        if step != 0.0:
            for i in range(m):
                xB[i] -= step * T[i, j]
        if flip:
            at_upper[j] = not at_upper[j]
            continue

        leave = basis[r]
        enter_val = theta if sgn > 0 else ub[j] - theta
        piv = T[r, j]
        # pivot rows of these programs are sparse: update only their support
        nnz = 0
        for k in range(n):
            if T[r, k] != 0.0:
                T[r, k] /= piv
                support[nnz] = k
                nnz += 1
        for i in range(m):
            if i == r:
                continue
            f = T[i, j]
            if f != 0.0:
                for q in range(nnz):
                    k = support[q]
                    T[i, k] -= f * T[r, k]
                T[i, j] = 0.0
        dj = d[j]
        if dj != 0.0:
            for q in range(nnz):
                k = support[q]
                d[k] -= dj * T[r, k]
        d[j] = 0.0
        xB[r] = enter_val
        basis[r] = j
        inbasis[j] = True
        inbasis[leave] = False
        at_upper[leave] = sgn * piv < 0
        at_upper[j] = False
    return ITER_LIMIT, it


def _iterate_numpy(T, xB, d, basis, inbasis, at_upper, ub, blocked, max_iter):
    m, n = T.shape
    it = 0
    degenerate = 0
    bland = False
    rows = np.arange(m)
    while it < max_iter:
        score = np.where(at_upper, d, -d)
        score[inbasis | blocked] = 0.0
        cand = np.flatnonzero(score > D_TOL)
        if cand.size == 0:
            return OPTIMAL, it
        j = int(cand[0]) if bland else int(cand[np.argmax(score[cand])])
        sgn = -1.0 if at_upper[j] else 1.0

        alpha = sgn * T[:, j]
        ub_b = ub[basis]
        th = np.full(m, np.inf)
        pos = alpha > PIV_TOL
        neg = (alpha < -PIV_TOL) & np.isfinite(ub_b)
        th[pos] = np.maximum(xB[pos], 0.0) / alpha[pos]
        th[neg] = np.maximum(ub_b[neg] - xB[neg], 0.0) / -alpha[neg]
        ok = pos | neg
        r = -1
        theta_r = np.inf
        if ok.any():
            # reproduce the kernel's sequential scan: first strict minimum,
            # then tie-break among rows within TIE_TOL of the running best
            for i in rows[ok]:
                if r < 0 or th[i] < theta_r - TIE_TOL:
                    r, theta_r = int(i), th[i]
                elif th[i] <= theta_r + TIE_TOL:
                    if bland:
                        if basis[i] < basis[r]:
                            r, theta_r = int(i), th[i]
                    elif abs(alpha[i]) > abs(alpha[r]):
                        r, theta_r = int(i), th[i]
        theta = ub[j]
        flip = True
        if r >= 0 and theta_r < theta:
            theta = theta_r
            flip = False
        if theta == np.inf:
            return UNBOUNDED, it
        it += 1
        if theta <= TIE_TOL:
            degenerate += 1
            if degenerate > DEGENERATE_RUN:
                bland = True
        else:
            degenerate = 0
            bland = False

        step = sgn * theta
        if step != 0.0:
            xB -= step * T[:, j]
        if flip:
            at_upper[j] = not at_upper[j]
            continue
        _pivot_numpy(T, xB, d, basis, inbasis, at_upper, r, j, ub, sgn, theta)
    return ITER_LIMIT, it


def _pivot_numpy(T, xB, d, basis, inbasis, at_upper, r, j, ub, sgn, theta):
    leave = basis[r]
    piv = T[r, j]
    support = np.flatnonzero(T[r])
    T[r, support] /= piv
    prow = T[r, support]
    col = T[:, j].copy()
    col[r] = 0.0
    nz = np.flatnonzero(col)
    if nz.size:
        T[np.ix_(nz, support)] -= np.outer(col[nz], prow)
        T[nz, j] = 0.0
    d[support] -= d[j] * prow
    d[j] = 0.0
    xB[r] = theta if sgn > 0 else ub[j] - theta
    basis[r] = j
    inbasis[j] = True
    inbasis[leave] = False
    at_upper[leave] = sgn * piv < 0
    at_upper[j] = False


def _iterate(*args):
    if _accel.use_numba():
        return _iterate_jit(*args)
    return _iterate_numpy(*args)


# --------------------------------------------------------------------------
# standard form


class _Standard:
    """Shifted / split / scaled form of a LinearProgram.

    Structural columns z satisfy ``0 <= z <= zub``; ``x = shift + M @ z``
    where each z column maps to one x entry with coefficient +1 or -1.
    """

    def __init__(self, prog: LinearProgram):
        n = prog.n_vars
        lo, hi = prog.lo, prog.hi
        fixed = lo == hi
        self.n = n
        self.fixed = fixed
        self.shift = np.where(fixed, lo, 0.0)
        cols, signs, zub = [], [], []
        for j in range(n):
            if fixed[j]:
                continue
            if np.isfinite(lo[j]):
                self.shift[j] = lo[j]
                cols.append(j), signs.append(1.0), zub.append(hi[j] - lo[j])
            elif np.isfinite(hi[j]):
                self.shift[j] = hi[j]
                cols.append(j), signs.append(-1.0), zub.append(np.inf)
            else:
                cols.append(j), signs.append(1.0), zub.append(np.inf)
                cols.append(j), signs.append(-1.0), zub.append(np.inf)
        self.cols = np.array(cols, dtype=np.int64)
        self.signs = np.array(signs)
        self.zub = np.array(zub, dtype=float)
        self.cz = prog.c[self.cols] * self.signs
        self.c0 = float(prog.c @ self.shift)

        def transform(A, b):
            Az = A[:, self.cols] * self.signs if self.cols.size else np.zeros((A.shape[0], 0))
            bz = b - A @ self.shift
            return Az, bz

        Aeq, beq = transform(prog.A_eq, prog.b_eq)
        Aub, bub = transform(prog.A_ub, prog.b_ub)
        self.n_eq, self.n_ub = Aeq.shape[0], Aub.shape[0]
        A = np.vstack([Aeq, Aub])
        b = np.concatenate([beq, bub])
        scale = np.abs(A).max(axis=1, initial=0.0)
        scale[scale == 0] = 1.0
        self.A = A / scale[:, None]
        self.b = b / scale

    def recover(self, z):
        x = self.shift.copy()
        np.add.at(x, self.cols, self.signs * z)
        return x


def solve(prog: LinearProgram, max_iter: int | None = None) -> LpSolution:
    t0 = time.perf_counter()
    prog = prog.dense()
    sf = _Standard(prog)
    m = sf.A.shape[0]
    nz = sf.cols.size
    ns = sf.n_ub
    A = sf.A
    b = sf.b.copy()

    # slacks on the inequality rows, then flip rows so that b >= 0
    S = np.zeros((m, ns))
    S[sf.n_eq + np.arange(ns), np.arange(ns)] = 1.0
    neg = b < 0
    A = np.where(neg[:, None], -A, A)
    S = np.where(neg[:, None], -S, S)
    b = np.abs(b)
    needs_art = np.ones(m, dtype=bool)
    needs_art[sf.n_eq:] = neg[sf.n_eq:]
    art_rows = np.flatnonzero(needs_art)
    na = art_rows.size
    Art = np.zeros((m, na))
    Art[art_rows, np.arange(na)] = 1.0

    T = np.ascontiguousarray(np.hstack([A, S, Art]))
    N = nz + ns + na
    ub = np.concatenate([sf.zub, np.full(ns + na, np.inf)])
    basis = np.empty(m, dtype=np.int64)
    slack_rows = np.flatnonzero(~needs_art)
    basis[slack_rows] = nz + (slack_rows - sf.n_eq)
    basis[art_rows] = nz + ns + np.arange(na)
    inbasis = np.zeros(N, dtype=np.bool_)
    inbasis[basis] = True
    at_upper = np.zeros(N, dtype=np.bool_)
    xB = b.copy()
    blocked = np.zeros(N, dtype=np.bool_)
    if max_iter is None:
        max_iter = 50 * (m + N) + 1000
    iters = 0

    def finish(status, x=None):
        x = np.full(prog.n_vars, np.nan) if x is None else x
        obj = float(prog.c @ x) if status is Status.OPTIMAL else np.nan
        return LpSolution(x, obj, status, iters, time.perf_counter() - t0)

    if na:
        c1 = np.zeros(N)
        c1[nz + ns:] = 1.0
        d = c1 - c1[basis] @ T
        code, k = _iterate(T, xB, d, basis, inbasis, at_upper, ub, blocked, max_iter)
        iters += k
        if code == ITER_LIMIT:
            return finish(Status.ITERATION_LIMIT)
        infeas = xB[basis >= nz + ns].sum()
        if infeas > FEAS_TOL * 1e-1:
            return finish(Status.INFEASIBLE)
        # drive zero-level artificials out of the basis where possible
        is_art = np.zeros(N, dtype=bool)
        is_art[nz + ns:] = True
        for r in np.flatnonzero(is_art[basis]):
            row = np.abs(T[r, : nz + ns]).copy()
            row[inbasis[: nz + ns]] = 0.0
            j = int(np.argmax(row)) if row.size else 0
            if row.size and row[j] > 1e-9:
                val = sf.zub[j] if (j < nz and at_upper[j]) else 0.0
                _pivot_numpy(T, xB, d, basis, inbasis, at_upper, r, j, ub, 1.0, val)
            else:
                ub[basis[r]] = 0.0  # redundant row
        blocked[nz + ns:] = True

    c2 = np.zeros(N)
    c2[:nz] = sf.cz
    d = c2 - c2[basis] @ T
    code, k = _iterate(T, xB, d, basis, inbasis, at_upper, ub, blocked, max_iter)
    iters += k
    if code == UNBOUNDED:
        return finish(Status.UNBOUNDED)
    if code == ITER_LIMIT:
        return finish(Status.ITERATION_LIMIT)

    full = np.where(at_upper, ub, 0.0)
    full[basis] = xB
    z = np.clip(full[:nz], 0.0, sf.zub)
    return finish(Status.OPTIMAL, sf.recover(z))
