from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..model import AssignmentMatrix, LoadSample

ROUNDING_MODES = ("probabilistic", "deterministic", "milp")
LOAD_NORMS = ("current", "stacking")
LP_POINTS = ("central", "vertex")


@dataclass(frozen=True)
class BalancerConfig:
    """PMLB knobs.  ``delta_t`` is in seconds, ``r_min`` in bits/s.

    ``load_norm`` picks the constant dividing the max-load objective:
    ``"current"`` uses the max band load of the assignment in force,
    ``"stacking"`` uses the sum over UEs of their worst-band load.
    ``lp_point`` selects which optimal LP solution is rounded: a simplex
    vertex, or a central point of the optimal face (what an interior-point
    solver hands back), built from ``center_samples`` random optimal vertices.
    """

    w: float = 0.4
    delta_t: float = 120.0
    lbi_threshold: float = 0.8
    r_min: float = 1e6
    ue_cap_factor: float = 1.2
    rounding: str = "probabilistic"
    load_norm: str = "current"
    lp_method: str = "auto"
    lp_point: str = "central"
    center_samples: int = 8

    def __post_init__(self):
        if not 0.0 <= self.w <= 1.0:
            raise ValueError("w must lie in [0, 1]")
        if not self.delta_t > 0:
            raise ValueError("delta_t must be > 0")
        if not 0.0 < self.lbi_threshold <= 1.0:
            raise ValueError("lbi_threshold must lie in (0, 1]")
        if self.r_min < 0:
            raise ValueError("r_min must be >= 0")
        if not self.ue_cap_factor > 0:
            raise ValueError("ue_cap_factor must be > 0")
        if self.rounding not in ROUNDING_MODES:
            raise ValueError(f"rounding must be one of {ROUNDING_MODES}")
        if self.load_norm not in LOAD_NORMS:
            raise ValueError(f"load_norm must be one of {LOAD_NORMS}")
        if self.lp_method not in ("auto", "simplex", "highs"):
            raise ValueError("lp_method must be auto, simplex or highs")
        if self.lp_point not in LP_POINTS:
            raise ValueError(f"lp_point must be one of {LP_POINTS}")
        if self.center_samples < 0:
            raise ValueError("center_samples must be >= 0")


@dataclass
class BalanceDecision:
    new_assignment: AssignmentMatrix
    distributions: AssignmentMatrix
    prefiltered: list
    handover_count: int
    triggered: bool
    objective_parts: tuple = (np.nan, np.nan)
    lbi: float = np.nan
    infeasible: bool = False


class InsufficientObservations(ValueError):
    pass


class LoadWindow:
    """Bounded, time-ordered buffer of load samples."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self.samples: deque = deque(maxlen=self.capacity)

    def __len__(self):
        return len(self.samples)

    def push(self, sample: LoadSample):
        if self.samples and sample.timestamp < self.samples[-1].timestamp:
            raise ValueError("samples must arrive in timestamp order")
        self.samples.append(sample)

    def extend(self, samples):
        for s in samples:
            self.push(s)

    def clear(self):
        self.samples.clear()
