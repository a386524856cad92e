"""Frozen single-instant balancing problems for solver and rounding studies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import lp
from ..model import AssignmentMatrix, n_max
from .config import BalancerConfig
from .pmlb import build_lp, scalarized, solve_relaxation
from .rounding import repair


@dataclass
class Instance:
    """One balancing problem with no prefiltered UEs."""

    loads: np.ndarray
    rates: np.ndarray
    previous: AssignmentMatrix
    caps: np.ndarray
    cfg: BalancerConfig
    incurred: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.incurred is None:
            self.incurred = np.zeros(self.loads.shape[1])

    @property
    def shape(self):
        return self.loads.shape

    def program(self) -> lp.LinearProgram:
        return build_lp(self.loads, self.incurred, self.rates, self.previous, self.cfg, self.caps)

    def objective(self, hard) -> float:
        return scalarized(hard, self.loads, self.incurred, self.previous, self.cfg)[0]

    def parts(self, hard):
        """``(f1, f2)`` in natural units: max band load and L1 distance."""
        x = hard.entries if isinstance(hard, AssignmentMatrix) else np.asarray(hard, dtype=float)
        f1 = float(np.max((x * self.loads).sum(axis=0) + self.incurred))
        return f1, float(np.abs(x - self.previous.entries).sum())

    def feasible_mask(self) -> np.ndarray:
        return self.rates >= self.cfg.r_min

    def relaxed(self, rng: np.random.Generator):
        """``(solution, rows to round)`` as the balancer would produce them."""
        return solve_relaxation(self.program(), self.loads, self.rates, self.previous, self.cfg, rng)


def camped_instance(rates, demand_bits, quality, bands, cfg: BalancerConfig | None = None) -> Instance:
    """Instance whose previous assignment camps on the better of bands 0 and 1.

    The camped assignment is pushed inside the rate mask and UE caps by the
    repair pass, so it is itself feasible and ``w = 0`` keeps it unchanged.
    """
    cfg = cfg or BalancerConfig()
    rates = np.asarray(rates, dtype=float)
    U, B = rates.shape
    loads = np.broadcast_to(np.asarray(demand_bits, dtype=float).reshape(-1, 1), (U, 1)) / rates
    caps = n_max(bands, U, cfg.ue_cap_factor)
    q = np.asarray(quality, dtype=float)
    camp = np.argmax(q[:, : min(2, B)], axis=1)
    prev = np.zeros((U, B))
    prev[np.arange(U), camp] = 1.0
    bands_prev = repair(camp, prev, rates >= cfg.r_min, caps)
    return Instance(loads, rates, AssignmentMatrix.from_bands(bands_prev, B), caps, cfg)
