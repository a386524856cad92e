"""Domain types and the load / objective / fairness arithmetic.

All matrices are oriented UE x band: row ``u`` belongs to a UE, column ``b``
to a band.  Loads are expressed as the fraction of a band's time a UE needs
to clear its demand over the measurement window, so a band total of 1.0
means the band is fully occupied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ROW_SUM_TOL = 1e-9

# spectral efficiency (bits/s/Hz) of CQI 1..15, 4-bit CQI table of LTE/NR
CQI_EFFICIENCY = np.array([
    0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141,
    2.4063, 2.7305, 3.3223, 3.9023, 4.5234, 5.1152, 5.5547,
])
CQI_EFFICIENCY.setflags(write=False)


def rate_set(bandwidths_hz) -> np.ndarray:
    """All achievable rates, shape 15 x B: efficiency of each CQI times bandwidth."""
    return CQI_EFFICIENCY[:, None] * np.asarray(bandwidths_hz, dtype=float)[None, :]


class InvalidChannelState(ValueError):
    """A rate was zero or negative where a division by it is required."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Band:
    id: int
    bandwidth_hz: float
    n_prb: int
    ue_cap: int = 10**9
    carrier_ghz: float = 2.0

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ValueError(f"band {self.id}: bandwidth_hz must be > 0")
        if self.n_prb < 1:
            raise ValueError(f"band {self.id}: n_prb must be >= 1")
        if self.ue_cap < 1:
            raise ValueError(f"band {self.id}: ue_cap must be >= 1")
        if not self.carrier_ghz > 0:
            raise ValueError(f"band {self.id}: carrier_ghz must be > 0")


@dataclass(frozen=True)
class UeState:
    id: int
    mean_arrival_rate: float
    packet_size_bits: float
    channel_quality: tuple
    current_band: int = 0
    backlog_bits: float = 0.0

    def __post_init__(self):
        if self.mean_arrival_rate < 0:
            raise ValueError("mean_arrival_rate must be >= 0")
        if not self.packet_size_bits > 0:
            raise ValueError("packet_size_bits must be > 0")
        if self.backlog_bits < 0:
            raise ValueError("backlog_bits must be >= 0")
        object.__setattr__(self, "channel_quality", tuple(float(q) for q in self.channel_quality))
        if not 0 <= self.current_band < len(self.channel_quality):
            raise ValueError("current_band outside channel_quality")


@dataclass(frozen=True)
class RateMatrix:
    """U x B downlink rates in bits/s."""

    rates: np.ndarray

    def __post_init__(self):
        r = _frozen(self.rates)
        if r.ndim != 2:
            raise ValueError("rates must be a U x B matrix")
        if r.size and not np.all(r > 0):
            raise InvalidChannelState("all rates must be > 0")
        object.__setattr__(self, "rates", r)

    @property
    def shape(self):
        return self.rates.shape

    def is_discrete(self, rate_set: np.ndarray) -> bool:
        """True if every entry of column ``b`` is a member of ``rate_set[:, b]``
        (or of the flat ``rate_set`` when it is one-dimensional)."""
        rs = np.asarray(rate_set, dtype=float)
        if rs.ndim == 1:
            return bool(np.all(np.isin(self.rates, rs)))
        return all(np.all(np.isin(self.rates[:, b], rs[:, b])) for b in range(self.rates.shape[1]))


@dataclass(frozen=True)
class AssignmentMatrix:
    """UE-band assignment, either hard (0/1 entries) or row-stochastic."""

    entries: np.ndarray
    mode: str = "hard"

    def __post_init__(self):
        x = _frozen(self.entries)
        if x.ndim != 2:
            raise ValueError("assignment must be a U x B matrix")
        if self.mode not in ("hard", "stochastic"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if x.size:
            if np.any(x < -ROW_SUM_TOL) or np.any(x > 1 + ROW_SUM_TOL):
                raise ValueError("assignment entries must lie in [0, 1]")
            if np.any(np.abs(x.sum(axis=1) - 1.0) > ROW_SUM_TOL):
                raise ValueError("assignment rows must sum to 1")
            if self.mode == "hard" and not np.all((x == 0) | (x == 1)):
                raise ValueError("hard assignment entries must be 0 or 1")
        object.__setattr__(self, "entries", x)

    @classmethod
    def from_bands(cls, bands: Sequence[int], n_bands: int) -> "AssignmentMatrix":
        bands = np.asarray(bands, dtype=int)
        x = np.zeros((bands.size, n_bands))
        x[np.arange(bands.size), bands] = 1.0
        return cls(x, "hard")

    @classmethod
    def stochastic(cls, entries) -> "AssignmentMatrix":
        x = np.clip(np.asarray(entries, dtype=float), 0.0, 1.0)
        if x.size:
            x = x / x.sum(axis=1, keepdims=True)
        return cls(x, "stochastic")

    @property
    def n_ues(self) -> int:
        return self.entries.shape[0]

    @property
    def n_bands(self) -> int:
        return self.entries.shape[1]

    def bands(self) -> np.ndarray:
        """Band index per UE (the argmax of each row)."""
        return np.argmax(self.entries, axis=1)

    def counts(self) -> np.ndarray:
        return self.entries.sum(axis=0)


@dataclass(frozen=True)
class LoadSample:
    """Per-UE load on every band (U x B) plus the prefilter load per band."""

    loads: np.ndarray
    incurred: np.ndarray = None
    timestamp: float = 0.0

    def __post_init__(self):
        rho = _frozen(self.loads)
        if rho.ndim != 2:
            raise ValueError("loads must be a U x B matrix")
        inc = np.zeros(rho.shape[1]) if self.incurred is None else self.incurred
        inc = _frozen(inc)
        if inc.shape != (rho.shape[1],):
            raise ValueError("incurred loads must have one entry per band")
        if np.any(rho < 0) or np.any(inc < 0):
            raise ValueError("loads must be non-negative")
        object.__setattr__(self, "loads", rho)
        object.__setattr__(self, "incurred", inc)

    @property
    def per_band_loads(self) -> list:
        return [self.loads[:, b] for b in range(self.loads.shape[1])]


def sample_demand(ue: UeState, rng: np.random.Generator, dt: float) -> float:
    """Bits arriving at ``ue`` over ``dt`` seconds: Poisson packets times size."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    lam = ue.mean_arrival_rate * dt
    if lam == 0:
        return 0.0
    return float(rng.poisson(lam)) * ue.packet_size_bits


def load_vector(demands, band_rates) -> np.ndarray:
    d = np.asarray(demands, dtype=float)
    r = np.asarray(band_rates, dtype=float)
    if d.shape != r.shape:
        raise ValueError(f"length mismatch: {d.shape} demands vs {r.shape} rates")
    if np.any(r <= 0):
        raise InvalidChannelState("band rates must be > 0")
    return d / r


def band_load(assignment_col, loads) -> float:
    x = np.asarray(assignment_col, dtype=float)
    rho = np.asarray(loads, dtype=float)
    if x.shape != rho.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {rho.shape}")
    return float(x @ rho)


def band_totals(assignment: AssignmentMatrix, loads: LoadSample) -> np.ndarray:
    """Load carried by each band, including the prefilter load."""
    x = assignment.entries
    if x.shape != loads.loads.shape:
        raise ValueError(f"shape mismatch: {x.shape} assignment vs {loads.loads.shape} loads")
    return (x * loads.loads).sum(axis=0) + loads.incurred


def objective_f1(assignment: AssignmentMatrix, loads: LoadSample) -> float:
    """Maximum band load."""
    return float(np.max(band_totals(assignment, loads)))


def objective_f2(assignment: AssignmentMatrix, previous: AssignmentMatrix) -> float:
    """Entry-wise L1 distance between two assignments (2 per moved UE when hard)."""
    a, b = assignment.entries, previous.entries
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.abs(a - b).sum())


def lbi(band_total_loads) -> float:
    """Jain's fairness index over band loads; 1.0 for an all-zero vector."""
    v = np.asarray(band_total_loads, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("need a non-empty 1-D load vector")
    if np.any(v < 0):
        raise ValueError("band loads must be non-negative")
    top = float(v.max())
    if top == 0.0:
        return 1.0
    v = v / top   # the index is scale-free; this keeps tiny loads from underflowing
    sq = float(v @ v)
    s = float(v.sum())
    return min(1.0, s * s / (v.size * sq))


def n_max(bands: Sequence[Band], n_ues: int, beta: float) -> np.ndarray:
    """Per-band UE cap proportional to PRB share: ceil(beta * U * N_b / sum N)."""
    prb = np.array([b.n_prb for b in bands], dtype=float)
    share = beta * n_ues * prb / prb.sum()
    # guard against ceil(53.000000001) style float noise
    return np.array([math.ceil(s - 1e-9) for s in share], dtype=int)
