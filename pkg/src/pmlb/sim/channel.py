"""Large-scale SINR per UE and band, CQI quantization, and the CQI jitter walk.

Each UE gets a position in the cell and a shadowing draw per band (partly
shared across bands, since co-sited carriers see the same obstacles).  The
resulting mean SINR maps to a base CQI; a lazy reflected +-1 walk on an
offset around that base adds time variation.  The offset walk is symmetric,
so its stationary law is uniform on ``[-span, span]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._accel import njit, use_numba
from ..model import CQI_EFFICIENCY, Band, RateMatrix

# lower SINR edge (dB) of CQI 1..15
CQI_SINR_DB = np.array([
    -6.7, -4.7, -2.3, 0.2, 2.4, 4.3, 5.9, 8.1, 10.3, 11.7, 14.1, 16.3, 18.7, 21.0, 22.7,
])


@dataclass(frozen=True)
class ChannelParams:
    isd_m: float = 200.0
    min_distance_m: float = 10.0
    pathloss_exponent: float = 3.76
    edge_sinr_db: float = 4.0       # SINR at the cell edge before shadowing
    max_sinr_db: float = 30.0
    shadowing_db: float = 8.0
    shadowing_corr: float = 0.5     # correlation of shadowing between bands
    walk_span: int = 2
    walk_prob: float = 0.1          # chance per step that the offset moves

    def __post_init__(self):
        if not self.isd_m > 0:
            raise ValueError("isd_m must be > 0")
        if not 0 < self.min_distance_m < self.radius_m:
            raise ValueError("min_distance_m must lie inside the cell radius")
        if self.shadowing_db < 0:
            raise ValueError("shadowing_db must be >= 0")
        if not 0.0 <= self.shadowing_corr <= 1.0:
            raise ValueError("shadowing_corr must lie in [0, 1]")
        if self.walk_span < 0:
            raise ValueError("walk_span must be >= 0")
        if not 0.0 <= self.walk_prob <= 1.0:
            raise ValueError("walk_prob must lie in [0, 1]")

    @property
    def radius_m(self) -> float:
        # hexagonal cell of a three-sector site: radius ISD / sqrt(3)
        return self.isd_m / np.sqrt(3.0)


def carrier_penalty_db(bands) -> np.ndarray:
    """Extra loss of each band relative to a 2 GHz carrier."""
    f = np.array([b.carrier_ghz for b in bands], dtype=float)
    return 10.0 * np.log10(f / 2.0)


def sinr_to_cqi(sinr_db) -> np.ndarray:
    """CQI index 1..15; SINR below the CQI 1 edge still reports 1."""
    q = np.searchsorted(CQI_SINR_DB, np.asarray(sinr_db, dtype=float), side="right")
    return np.clip(q, 1, 15).astype(np.int64)


def rsrq_db(sinr_db) -> np.ndarray:
    """RSRQ proxy with a fully loaded reference: 1 / (12 (1 + 1/SINR))."""
    s = 10.0 ** (np.asarray(sinr_db, dtype=float) / 10.0)
    return 10.0 * np.log10(1.0 / (12.0 * (1.0 + 1.0 / s)))


@dataclass
class ChannelState:
    mean_sinr_db: np.ndarray    # U x B, fixed for the episode
    base_cqi: np.ndarray        # U x B in 1..15
    offset: np.ndarray          # U x B in [-span, span]
    params: ChannelParams = field(default_factory=ChannelParams)

    def __post_init__(self):
        if not np.all(np.isfinite(self.mean_sinr_db)):
            raise ValueError("mean SINR must be finite")
        self.base_cqi = np.asarray(self.base_cqi, dtype=np.int64)
        self.offset = np.asarray(self.offset, dtype=np.int64)
        if self.base_cqi.min(initial=1) < 1 or self.base_cqi.max(initial=15) > 15:
            raise ValueError("base CQI outside 1..15")

    @property
    def cqi(self) -> np.ndarray:
        return np.clip(self.base_cqi + self.offset, 1, 15)

    @property
    def quality(self) -> np.ndarray:
        """Per-UE per-band RSRQ proxy (dB) from the mean SINR."""
        return rsrq_db(self.mean_sinr_db)


def draw_sinr(n_ues: int, bands, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """Mean SINR (dB) for UEs dropped uniformly over the cell area."""
    B = len(bands)
    r0, r1 = params.min_distance_m, params.radius_m
    d = np.sqrt(rng.uniform(r0 * r0, r1 * r1, size=n_ues))
    common = rng.normal(size=(n_ues, 1))
    own = rng.normal(size=(n_ues, B))
    c = params.shadowing_corr
    shadow = params.shadowing_db * (np.sqrt(c) * common + np.sqrt(1.0 - c) * own)
    gain = 10.0 * params.pathloss_exponent * np.log10(r1 / d)
    sinr = params.edge_sinr_db + gain[:, None] - shadow - carrier_penalty_db(bands)[None, :]
    return np.minimum(sinr, params.max_sinr_db)


def init_channel(n_ues: int, bands, params: ChannelParams, rng: np.random.Generator) -> ChannelState:
    sinr = draw_sinr(n_ues, bands, params, rng)
    k = params.walk_span
    offset = rng.integers(-k, k + 1, size=sinr.shape)   # start in the stationary law
    return ChannelState(sinr, sinr_to_cqi(sinr), offset, params)


@njit
def _walk_jit(offset, draws, prob, span):
    U, B = offset.shape
    half = 0.5 * prob
    for u in range(U):
        for b in range(B):
            x = draws[u, b]
            if x < half:
                if offset[u, b] < span:
                    offset[u, b] += 1
            elif x < prob:
                if offset[u, b] > -span:
                    offset[u, b] -= 1


def _walk_numpy(offset, draws, prob, span):
    up = (draws < 0.5 * prob) & (offset < span)
    down = (draws >= 0.5 * prob) & (draws < prob) & (offset > -span)
    offset += up.astype(offset.dtype)
    offset -= down.astype(offset.dtype)


def walk_step(offset: np.ndarray, draws: np.ndarray, prob: float, span: int) -> None:
    """Advance the offsets in place; ``draws`` are uniforms on [0, 1)."""
    if use_numba():
        _walk_jit(offset, draws, float(prob), int(span))
    else:
        _walk_numpy(offset, draws, prob, span)


def rates_from_cqi(cqi, bands) -> np.ndarray:
    bw = np.array([b.bandwidth_hz for b in bands], dtype=float)
    return CQI_EFFICIENCY[np.asarray(cqi) - 1] * bw[None, :]


def realize_rates(channel: ChannelState, bands, rng: np.random.Generator) -> RateMatrix:
    """Advance the CQI walk one step and return the resulting rate matrix."""
    p = channel.params
    walk_step(channel.offset, rng.random(channel.offset.shape), p.walk_prob, p.walk_span)
    return RateMatrix(rates_from_cqi(channel.cqi, bands))


def stationary_cqi(base_cqi: int, span: int) -> np.ndarray:
    """Stationary law of the reported CQI (index 0 is CQI 1) for one base value."""
    p = np.zeros(15)
    for o in range(-span, span + 1):
        p[min(max(base_cqi + o, 1), 15) - 1] += 1.0
    return p / p.sum()
