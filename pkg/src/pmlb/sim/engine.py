"""Cell state, the step function, handover execution, and whole episodes."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..balancer import (
    LoadWindow,
    baseline_a2_mlb,
    baseline_no_mlb,
    baseline_rule_based,
    pmlb_step,
)
from ..kpi import KpiReport, combine_cells, window_row
from ..model import CQI_EFFICIENCY, AssignmentMatrix, LoadSample
from .channel import ChannelState, draw_sinr, init_channel, sinr_to_cqi
from .config import ScenarioConfig
from .kernels import run_segment

logger = logging.getLogger(__name__)


@dataclass
class StepRecord:
    timestamp: float
    served_bits: np.ndarray
    backlog: np.ndarray
    band_totals: np.ndarray
    handovers: int = 0
    interruption_ms: float = 0.0


@dataclass
class CellState:
    bands: tuple
    channel: ChannelState
    assignment: np.ndarray      # band index per UE
    arrival_rate: float         # packets/s per UE
    packet_bits: float
    step: float
    backlog: np.ndarray = None
    ema: np.ndarray = None
    busy: np.ndarray = None     # seconds of interruption left per UE
    time: float = 0.0

    def __post_init__(self):
        U = self.channel.base_cqi.shape[0]
        self.assignment = np.asarray(self.assignment, dtype=np.int64)
        if self.backlog is None:
            self.backlog = np.zeros(U)
        if self.ema is None:
            self.ema = np.zeros(U)
        if self.busy is None:
            self.busy = np.zeros(U)
        self.bw = np.array([b.bandwidth_hz for b in self.bands], dtype=float)

    @property
    def n_ues(self) -> int:
        return self.assignment.size

    @property
    def n_bands(self) -> int:
        return len(self.bands)

    @property
    def quality(self) -> np.ndarray:
        return self.channel.quality

    def hard(self) -> AssignmentMatrix:
        return AssignmentMatrix.from_bands(self.assignment, self.n_bands)

    def advance(self, arrivals, draws):
        """Run ``len(arrivals)`` steps; see ``kernels.run_segment`` for the outputs."""
        p = self.channel.params
        out = run_segment(self.channel.base_cqi, self.channel.offset, CQI_EFFICIENCY, self.bw,
                          self.assignment, self.backlog, self.ema, self.busy, arrivals, draws,
                          self.step, p.walk_prob, p.walk_span)
        self.time += len(arrivals) * self.step
        return out


def init_cell(cfg: ScenarioConfig, rng: np.random.Generator) -> CellState:
    """Drop the UEs, draw their channels, and camp them as the no-MLB rule does."""
    channel = init_channel(cfg.n_ues_per_cell, cfg.bands, cfg.channel, rng)
    camp = baseline_no_mlb(channel.quality).bands()
    return CellState(tuple(cfg.bands), channel, camp, cfg.arrival_rate, cfg.packet_bits, cfg.step)


def apply_handovers(previous: AssignmentMatrix, next: AssignmentMatrix, ho_interruption_ms: float):
    """``(ho_count, moved UE indices)``; every moved UE owes ``ho_interruption_ms``."""
    if previous.entries.shape != next.entries.shape:
        raise ValueError("assignments differ in shape")
    moved = np.flatnonzero(previous.bands() != next.bands())
    return int(moved.size), moved


def handover(state: CellState, new: AssignmentMatrix, ho_interruption_ms: float):
    """Move UEs to ``new`` and block each moved UE; returns ``(count, interruption_ms)``."""
    count, moved = apply_handovers(state.hard(), new, ho_interruption_ms)
    state.assignment = new.bands().astype(np.int64)
    state.busy[moved] = ho_interruption_ms / 1000.0
    return count, count * ho_interruption_ms


def draw_traffic(state: CellState, n: int, rng: np.random.Generator) -> np.ndarray:
    """Arrived bits, ``n x U``: Poisson packet counts times the packet size."""
    return rng.poisson(state.arrival_rate * state.step, size=(n, state.n_ues)) * state.packet_bits


def step(state: CellState, assignment: AssignmentMatrix, rng: np.random.Generator,
         ho_interruption_ms: float = 50.0) -> StepRecord:
    """One time step under ``assignment`` (handing over any UE whose band changed)."""
    ho, interruption = 0, 0.0
    if not np.array_equal(assignment.bands(), state.assignment):
        ho, interruption = handover(state, assignment, ho_interruption_ms)
    arrivals = draw_traffic(state, 1, rng)
    draws = rng.random((1, state.n_ues, state.n_bands))
    served_sum, _, band_load, _, _ = state.advance(arrivals, draws)
    return StepRecord(state.time, served_sum, state.backlog.copy(), band_load, ho, interruption)


class _Cell:
    """One cell inside an episode: its state, its random streams, its policy."""

    def __init__(self, cfg: ScenarioConfig, seq: np.random.SeedSequence):
        place, traffic, walk, algo = (np.random.default_rng(s) for s in seq.spawn(4))
        self.cfg = cfg
        self.place, self.traffic, self.walk, self.algo = place, traffic, walk, algo
        self.state = init_cell(cfg, place)
        self.window = LoadWindow(cfg.window_steps) if cfg.algorithm == "pmlb" else None
        self.pending = (0, 0.0)
        self.leave_at = None
        if cfg.churn_dwell_s is not None:
            self.leave_at = place.exponential(cfg.churn_dwell_s, size=self.state.n_ues)

    def run(self, n: int):
        s = self.state
        t0 = s.time
        arrivals = draw_traffic(s, n, self.traffic)
        draws = self.walk.random((n, s.n_ues, s.n_bands))
        served_sum, rate_sum, band_load_sum, loads, _ = s.advance(arrivals, draws)
        window_s = n * s.step
        ho, interruption = self.pending
        self.pending = (0, 0.0)
        row = window_row(s.time, served_sum, window_s, band_load_sum / n, ho, interruption)
        self.rates = rate_sum / n
        self.mean_loads = loads.mean(axis=0)
        if self.window is not None:
            self.window.clear()
            for i in range(n):
                self.window.push(LoadSample(loads[i], None, t0 + (i + 1) * s.step))
        return row

    def rebalance(self):
        cfg, s = self.cfg, self.state
        prev = s.hard()
        if cfg.algorithm == "no_mlb":
            new = prev
        elif cfg.algorithm == "a2_mlb":
            new = baseline_a2_mlb(s.quality, prev, cfg.a2_threshold_db)
        elif cfg.algorithm == "rule_based":
            new = baseline_rule_based(s.quality, self.mean_loads, prev, self.algo, cfg.rule_based)
        else:
            new = pmlb_step(self.window, prev, s.quality, self.rates, cfg.balancer, self.algo, s.bands).new_assignment
        self.pending = handover(s, new, cfg.ho_interruption_ms)

    def churn(self):
        """Replace departed UEs by fresh arrivals at new positions (not handovers)."""
        if self.leave_at is None:
            return
        s = self.state
        gone = np.flatnonzero(self.leave_at <= s.time)
        if gone.size == 0:
            return
        ch = s.channel
        sinr = draw_sinr(gone.size, s.bands, ch.params, self.place)
        ch.mean_sinr_db[gone] = sinr
        ch.base_cqi[gone] = sinr_to_cqi(sinr)
        k = ch.params.walk_span
        ch.offset[gone] = self.place.integers(-k, k + 1, size=sinr.shape)
        s.assignment[gone] = baseline_no_mlb(ch.quality[gone]).bands()
        s.backlog[gone] = 0.0
        s.ema[gone] = 0.0
        s.busy[gone] = 0.0
        self.leave_at[gone] = s.time + self.place.exponential(self.cfg.churn_dwell_s, size=gone.size)


def run_episode(cfg: ScenarioConfig) -> KpiReport:
    """Simulate every cell over ``cfg.sim_duration``, balancing at each ``delta_t`` boundary.

    Handovers decided at a boundary, and their interruption, are booked in
    the window that starts there.  A final partial window is reported over
    its own length.
    """
    cfg.validate()
    cells = [_Cell(cfg, s) for s in np.random.SeedSequence(cfg.seed).spawn(cfg.n_cells)]
    report = KpiReport(cfg.name, cfg.algorithm, cfg.seed, cfg.n_bands)
    total, W = cfg.n_steps, cfg.window_steps
    done = 0
    while done < total:
        n = min(W, total - done)
        report.rows.append(combine_cells([c.run(n) for c in cells]))
        done += n
        if done < total:
            for c in cells:
                c.rebalance()
                c.churn()
    return report
