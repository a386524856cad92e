"""Comparison policies: no balancing, A2-triggered moves, rule-based pools."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..model import AssignmentMatrix


def baseline_no_mlb(quality) -> AssignmentMatrix:
    """Camp every UE on the better of the first two bands."""
    q = np.asarray(quality, dtype=float)
    B = q.shape[1]
    bands = np.argmax(q[:, : min(2, B)], axis=1)
    return AssignmentMatrix.from_bands(bands, B)


def baseline_a2_mlb(quality, previous: AssignmentMatrix, a2_threshold: float) -> AssignmentMatrix:
    """Move UEs whose serving quality fell below the A2 threshold to their best other band."""
    q = np.asarray(quality, dtype=float)
    U, B = q.shape
    bands = previous.bands().copy()
    serving = q[np.arange(U), bands]
    for u in np.flatnonzero(serving < a2_threshold):
        others = q[u].copy()
        others[bands[u]] = -np.inf
        if B > 1:
            bands[u] = int(np.argmax(others))
    return AssignmentMatrix.from_bands(bands, B)


@dataclass(frozen=True)
class RuleBasedParams:
    gap: float = 0.2
    pool_size: int | None = None   # None: ceil(5% of the UEs)
    q_min: float = -12.0

    def pool(self, n_ues: int) -> int:
        return math.ceil(0.05 * n_ues) if self.pool_size is None else int(self.pool_size)


def baseline_rule_based(quality, loads, previous: AssignmentMatrix, rng: np.random.Generator,
                        params: RuleBasedParams = RuleBasedParams()) -> AssignmentMatrix:
    """Shift a random pool off the busiest band when the load spread exceeds ``gap``.

    Each pooled UE goes to the least-loaded other band whose quality clears
    ``q_min`` (an A4-style check); UEs with no such band stay.
    """
    q = np.asarray(quality, dtype=float)
    rho = np.asarray(loads, dtype=float)
    U, B = q.shape
    bands = previous.bands().copy()
    totals = np.bincount(bands, weights=rho[np.arange(U), bands], minlength=B)
    if totals.max() - totals.min() <= params.gap:
        return previous
    src = int(np.argmax(totals))
    candidates = np.flatnonzero(bands == src)
    k = min(params.pool(U), candidates.size)
    if k == 0:
        return previous
    for u in rng.choice(candidates, size=k, replace=False):
        ok = q[u] > params.q_min
        ok[src] = False
        if not ok.any():
            continue
        targets = np.flatnonzero(ok)
        dst = int(targets[np.argmin(totals[targets])])
        totals[src] -= rho[u, src]
        totals[dst] += rho[u, dst]
        bands[u] = dst
    return AssignmentMatrix.from_bands(bands, B)
