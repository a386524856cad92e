"""Event-triggered probabilistic load balancing across the bands of a cell."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .. import lp
from ..model import AssignmentMatrix, LoadSample, lbi, n_max
from .config import BalanceDecision, BalancerConfig, InsufficientObservations, LoadWindow
from .rounding import RepairError, round_deterministic, round_probabilistic

logger = logging.getLogger(__name__)


def estimate_expected_loads(window: LoadWindow) -> LoadSample:
    """Mean of the per-UE band loads over the window."""
    if len(window) == 0:
        raise InsufficientObservations("load window is empty")
    samples = window.samples
    loads = np.mean(np.stack([s.loads for s in samples]), axis=0)
    incurred = np.mean(np.stack([s.incurred for s in samples]), axis=0)
    return LoadSample(loads, incurred, samples[-1].timestamp)


@dataclass
class Prefilter:
    fixed: list            # (ue, band) pairs
    incurred: np.ndarray   # prefilter load per band
    remaining: np.ndarray  # UE indices left to the optimizer


def prefilter_infeasible(quality, rate_estimates, loads, r_min) -> Prefilter:
    """Pin every UE that meets ``r_min`` on no band to its best-quality band."""
    q = np.asarray(quality, dtype=float)
    r = np.asarray(rate_estimates, dtype=float)
    rho = loads.loads if isinstance(loads, LoadSample) else np.asarray(loads, dtype=float)
    if np.any(r <= 0):
        raise ValueError("rate estimates must be positive")
    U, B = r.shape
    infeasible = r.max(axis=1) < r_min
    incurred = np.zeros(B)
    fixed = []
    for u in np.flatnonzero(infeasible):
        b = int(np.argmax(q[u]))
        fixed.append((int(u), b))
        incurred[b] += rho[u, b]
    return Prefilter(fixed, incurred, np.flatnonzero(~infeasible))


def normalizers(expected_loads, incurred, previous, load_norm="current"):
    """``(T_max, Y_max)`` dividing the two objectives into comparable ranges."""
    rho = np.asarray(expected_loads, dtype=float)
    U = rho.shape[0]
    if load_norm == "current":
        xh = previous.entries if isinstance(previous, AssignmentMatrix) else np.asarray(previous)
        t_max = float(np.max((xh * rho).sum(axis=0) + incurred)) if rho.size else float(np.max(incurred, initial=0))
    else:
        t_max = float(rho.max(axis=1).sum()) if rho.size else 0.0
    if not t_max > 0:
        t_max = 1.0
    y_max = 2.0 * U if U else 1.0
    return t_max, y_max


def build_lp(expected_loads, incurred, rates, previous, cfg: BalancerConfig, caps) -> lp.LinearProgram:
    """Epigraph LP over x (U*B), per-entry deviation slacks (U*B), t and y.

    Variables are laid out ``[x_00, x_01, ..., y_00, y_01, ..., t, y]`` with
    UE-major ordering inside each block.
    """
    rho = np.asarray(expected_loads, dtype=float)
    r = np.asarray(rates, dtype=float)
    xh = previous.entries if isinstance(previous, AssignmentMatrix) else np.asarray(previous, dtype=float)
    incurred = np.asarray(incurred, dtype=float)
    U, B = rho.shape
    UB = U * B
    n = 2 * UB + 2
    it, iy = 2 * UB, 2 * UB + 1
    xi = np.arange(UB).reshape(U, B)
    yi = UB + xi
    ue_rows = np.repeat(np.arange(U), B)

    t_max, y_max = normalizers(rho, incurred, xh, cfg.load_norm)
    c = np.zeros(n)
    c[it] = cfg.w / t_max
    c[iy] = (1.0 - cfg.w) / y_max

    # one band per UE, and the tie between y and the deviation slacks
    eq_rows = sp.csr_matrix((np.ones(UB), (ue_rows, xi.ravel())), shape=(U, n))
    tie = sp.csr_matrix((np.r_[np.ones(UB), -1.0], (np.zeros(UB + 1, dtype=int), np.r_[yi.ravel(), iy])),
                        shape=(1, n))
    A_eq = sp.vstack([eq_rows, tie]).tocsr()
    b_eq = np.r_[np.ones(U), 0.0]

    # minimum rate, scaled by r_ref so coefficients stay O(1)
    r_ref = np.where(cfg.r_min > 0, cfg.r_min, r.max(axis=1, initial=1.0))
    rate_rows = sp.csr_matrix((-(r / r_ref[:, None]).ravel(), (ue_rows, xi.ravel())), shape=(U, n))
    rate_rhs = -cfg.r_min / r_ref if U else np.zeros(0)
    rate_rhs = np.broadcast_to(rate_rhs, (U,)).astype(float)

    band_cols = np.tile(np.arange(B), U)
    card = sp.csr_matrix((np.ones(UB), (band_cols, xi.ravel())), shape=(B, n))
    card_rhs = np.asarray(caps, dtype=float)

    epi = sp.csr_matrix(
        (np.r_[rho.ravel(), -np.ones(B)], (np.r_[band_cols, np.arange(B)], np.r_[xi.ravel(), np.full(B, it)])),
        shape=(B, n),
    )
    epi_rhs = -incurred

    k = np.arange(UB)
    dev_pos = sp.csr_matrix((np.r_[np.ones(UB), -np.ones(UB)], (np.r_[k, k], np.r_[xi.ravel(), yi.ravel()])),
                            shape=(UB, n))
    dev_neg = sp.csr_matrix((np.r_[-np.ones(UB), -np.ones(UB)], (np.r_[k, k], np.r_[xi.ravel(), yi.ravel()])),
                            shape=(UB, n))

    A_ub = sp.vstack([rate_rows, card, epi, dev_pos, dev_neg]).tocsr()
    b_ub = np.r_[rate_rhs, card_rhs, epi_rhs, xh.ravel(), -xh.ravel()]

    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    hi[:UB] = 1.0
    return lp.LinearProgram(c, A_eq, b_eq, A_ub, b_ub, lo, hi)


def split_solution(values, n_ues, n_bands):
    """``(X, Y, t, y)`` views of an LP solution vector laid out by ``build_lp``."""
    UB = n_ues * n_bands
    v = np.asarray(values)
    return v[:UB].reshape(n_ues, n_bands), v[UB:2 * UB].reshape(n_ues, n_bands), v[2 * UB], v[2 * UB + 1]


def scalarized(hard, expected_loads, incurred, previous, cfg: BalancerConfig):
    """``(objective, f1_norm, f2_norm)`` of an assignment on the optimizer's scale."""
    x = hard.entries if isinstance(hard, AssignmentMatrix) else np.asarray(hard, dtype=float)
    xh = previous.entries if isinstance(previous, AssignmentMatrix) else np.asarray(previous, dtype=float)
    rho = np.asarray(expected_loads, dtype=float)
    t_max, y_max = normalizers(rho, incurred, xh, cfg.load_norm)
    f1 = float(np.max((x * rho).sum(axis=0) + incurred))
    f2 = float(np.abs(x - xh).sum())
    f1n, f2n = f1 / t_max, f2 / y_max
    return cfg.w * f1n + (1 - cfg.w) * f2n, f1n, f2n


def symmetrize(X, expected_loads, rates, previous) -> np.ndarray:
    """Average the LP rows of interchangeable UEs.

    UEs with identical load rows, rate rows and previous bands can swap
    roles without changing any constraint or the objective, so the average
    of their rows is optimal whenever ``X`` is.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] < 2:
        return X
    key = np.concatenate([np.asarray(expected_loads), np.asarray(rates), np.asarray(previous)], axis=1)
    _, group = np.unique(key, axis=0, return_inverse=True)
    group = group.ravel()
    sums = np.zeros((group.max() + 1, X.shape[1]))
    np.add.at(sums, group, X)
    return sums[group] / np.bincount(group)[group, None]


def solve_relaxation(prog: lp.LinearProgram, expected_loads, rates, previous, cfg: BalancerConfig,
                     rng: np.random.Generator):
    """Solve the LP; returns ``(solution, X)`` with X the rows handed to rounding.

    With ``cfg.lp_point == "central"`` X is a central point of the optimal
    face rather than the vertex the solver stopped at.
    """
    U, B = np.asarray(expected_loads).shape
    sol = lp.solve_lp(prog, cfg.lp_method)
    if sol.values is None or not sol.optimal:
        return sol, None
    values = sol.values
    if cfg.lp_point == "central" and U:
        values = lp.central(prog, sol, lambda p: lp.solve_lp(p, cfg.lp_method), rng,
                            cfg.center_samples, directions=np.arange(U * B))
    X = np.clip(split_solution(values, U, B)[0], 0.0, 1.0)
    prev = previous.entries if isinstance(previous, AssignmentMatrix) else np.asarray(previous)
    if cfg.lp_point == "central":
        X = symmetrize(X, expected_loads, rates, prev)
    return sol, X


def pmlb_step(window: LoadWindow, previous: AssignmentMatrix, quality, rates, cfg: BalancerConfig,
              rng: np.random.Generator, bands) -> BalanceDecision:
    """One event check of the balancer; call it at every ``delta_t`` boundary.

    ``rates`` are the per-UE band rate estimates for the window and ``bands``
    the cell's Band list (used for the UE caps).
    """
    est = estimate_expected_loads(window)
    xh = previous.entries
    U, B = xh.shape
    current = (xh * est.loads).sum(axis=0) + est.incurred
    index = lbi(current)
    if index >= cfg.lbi_threshold:
        return BalanceDecision(previous, AssignmentMatrix(xh, "stochastic"), [], 0, False, lbi=index)

    pre = prefilter_infeasible(quality, rates, est, cfg.r_min)
    rem = pre.remaining
    caps = n_max(bands, U, cfg.ue_cap_factor)
    for _, b in pre.fixed:
        caps[b] -= 1
    rho = est.loads[rem]
    incurred = pre.incurred + est.incurred
    prev_rem = xh[rem]
    prog = build_lp(rho, incurred, rates[rem], prev_rem, cfg, caps)

    if cfg.rounding == "milp":
        sol = lp.solve_milp(prog, np.arange(rem.size * B), cfg.lp_method)
        X = None
        if sol.values is not None and np.all(np.isfinite(sol.values)):
            X = np.clip(split_solution(sol.values, rem.size, B)[0], 0.0, 1.0)
    else:
        sol, X = solve_relaxation(prog, rho, rates[rem], prev_rem, cfg, rng)
    if X is None:
        logger.info("balancer LP returned %s; keeping the current assignment", sol.status.value)
        return BalanceDecision(previous, AssignmentMatrix(xh, "stochastic"), pre.fixed, 0, True,
                               lbi=index, infeasible=True)

    dist_rem = AssignmentMatrix.stochastic(X) if rem.size else AssignmentMatrix(np.zeros((0, B)), "stochastic")
    try:
        if cfg.rounding == "probabilistic":
            hard_rem = round_probabilistic(dist_rem, rates[rem], cfg.r_min, rng, caps)
        else:
            hard_rem = round_deterministic(dist_rem, rates[rem], cfg.r_min, caps)
    except RepairError as exc:
        logger.info("repair failed (%s); keeping the current assignment", exc)
        return BalanceDecision(previous, AssignmentMatrix(xh, "stochastic"), pre.fixed, 0, True,
                               lbi=index, infeasible=True)

    new_bands = previous.bands().copy()
    new_bands[rem] = hard_rem.bands()
    dist = np.array(xh, dtype=float)
    dist[rem] = dist_rem.entries
    for u, b in pre.fixed:
        new_bands[u] = b
        dist[u] = 0.0
        dist[u, b] = 1.0
    new = AssignmentMatrix.from_bands(new_bands, B)
    moved = int(np.count_nonzero(new_bands != previous.bands()))
    _, f1n, f2n = scalarized(hard_rem, rho, incurred, prev_rem, cfg)
    return BalanceDecision(new, AssignmentMatrix(dist, "stochastic"), pre.fixed, moved, True, (f1n, f2n), index)
