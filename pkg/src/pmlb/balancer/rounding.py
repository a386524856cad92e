"""Turning relaxed LP rows into hard band choices, plus the repair pass."""

from __future__ import annotations

import numpy as np

from ..model import AssignmentMatrix

TIE_TOL = 1e-9


class RepairError(RuntimeError):
    """No feasible hard assignment reachable from the rounded one."""

    def __init__(self, bands, reason=""):
        self.bands = sorted(int(b) for b in bands)
        super().__init__(f"cannot repair band(s) {self.bands}{': ' + reason if reason else ''}")


def _rows(distributions):
    if isinstance(distributions, AssignmentMatrix):
        return distributions.entries
    return np.asarray(distributions, dtype=float)


def repair(bands, distributions, feasible, caps=None, rng=None) -> np.ndarray:
    """Make ``bands`` respect the rate mask and the per-band UE caps.

    A UE on a band it cannot use is resampled (or, without ``rng``, moved to
    the argmax) among its feasible bands, weighted by its LP row.  Then,
    while a band exceeds its cap, the UE with the least LP mass on it moves
    to its most probable feasible band that still has room.
    """
    bands = np.array(bands, dtype=int)
    D = _rows(distributions)
    F = np.asarray(feasible, dtype=bool)
    U, B = D.shape

    for u in np.flatnonzero(~F[np.arange(U), bands]):
        if not F[u].any():
            raise RepairError([bands[u]], f"UE {u} meets the minimum rate on no band")
        p = np.where(F[u], D[u], 0.0)
        if p.sum() <= 0:
            p = F[u].astype(float)
        if rng is None:
            bands[u] = int(np.argmax(p))
        else:
            bands[u] = int(rng.choice(B, p=p / p.sum()))

    if caps is None:
        return bands
    caps = np.asarray(caps)
    counts = np.bincount(bands, minlength=B)
    while True:
        over = np.flatnonzero(counts > caps)
        if over.size == 0:
            return bands
        b = int(over[0])
        on_b = np.flatnonzero(bands == b)
        moved = False
        for u in on_b[np.argsort(D[on_b, b], kind="stable")]:
            room = F[u] & (counts < caps)
            room[b] = False
            if not room.any():
                continue
            alt = np.flatnonzero(room)
            target = int(alt[np.argmax(D[u, alt])])
            bands[u] = target
            counts[b] -= 1
            counts[target] += 1
            moved = True
            break
        if not moved:
            raise RepairError(over, "no UE on it can move to a band with room")


def round_probabilistic(distributions, rates, r_min, rng, caps=None) -> AssignmentMatrix:
    """Sample each UE's band from its row, then repair."""
    D = np.clip(_rows(distributions), 0.0, None)
    U, B = D.shape
    cdf = np.cumsum(D, axis=1)
    cdf /= cdf[:, -1:]
    draws = rng.random(U)
    bands = (draws[:, None] >= cdf).sum(axis=1)
    bands = np.minimum(bands, B - 1)
    feasible = np.asarray(rates) >= r_min
    bands = repair(bands, D, feasible, caps, rng)
    return AssignmentMatrix.from_bands(bands, B)


def round_deterministic(distributions, rates=None, r_min=0.0, caps=None) -> AssignmentMatrix:
    """Round each row to its largest entry; ties rotate with the UE index."""
    D = _rows(distributions)
    U, B = D.shape
    top = D.max(axis=1, keepdims=True)
    tied = D >= top - TIE_TOL
    bands = np.empty(U, dtype=int)
    for u in range(U):
        idx = np.flatnonzero(tied[u])
        bands[u] = idx[u % idx.size]
    feasible = np.ones_like(D, dtype=bool) if rates is None else np.asarray(rates) >= r_min
    bands = repair(bands, D, feasible, caps)
    return AssignmentMatrix.from_bands(bands, B)
