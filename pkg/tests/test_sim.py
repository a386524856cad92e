import dataclasses

import numpy as np
import pytest

from pmlb.kpi import write_report
from pmlb.model import CQI_EFFICIENCY, AssignmentMatrix, Band, rate_set
from pmlb.sim import (
    CellState,
    ChannelParams,
    ChannelState,
    ConfigError,
    ScenarioConfig,
    apply_handovers,
    config_from_dict,
    desk_scenario,
    dump_config,
    init_cell,
    load_config,
    named_scenario,
    realize_rates,
    run_episode,
    sinr_to_cqi,
    snapshot_instance,
    stationary_cqi,
    step,
)
from pmlb.sim.channel import walk_step
from pmlb.sim.config import DEFAULT_BANDS
from pmlb.sim.engine import handover

FROZEN = ChannelParams(walk_prob=0.0)


def channel(base, params=FROZEN):
    base = np.asarray(base, dtype=np.int64)
    return ChannelState(np.zeros(base.shape), base, np.zeros_like(base), params)


def quiet_cell(base, bands, backlog=None):
    """A cell with frozen CQI and no arrivals."""
    ch = channel(base)
    U = ch.base_cqi.shape[0]
    return CellState(tuple(bands), ch, np.zeros(U, dtype=int), 0.0, 12000.0, 0.1,
                     backlog=None if backlog is None else np.array(backlog, dtype=float))


def small(**kw):
    base = dict(n_ues_per_cell=12, n_cells=2, sim_duration=600.0)
    base.update(kw)
    return desk_scenario("A", **base)


# --- channel ---------------------------------------------------------------------

def test_top_cqi_rate():
    bands = [Band(0, 20e6, 100)]
    r = realize_rates(channel([[15]]), bands, np.random.default_rng(0))
    assert r.rates[0, 0] == pytest.approx(111.08e6, rel=2e-4)


def test_realize_rates_seeded():
    bands = DEFAULT_BANDS
    base = np.random.default_rng(1).integers(1, 16, size=(30, 4))
    a = realize_rates(channel(base, ChannelParams()), bands, np.random.default_rng(5))
    b = realize_rates(channel(base, ChannelParams()), bands, np.random.default_rng(5))
    np.testing.assert_array_equal(a.rates, b.rates)
    assert a.is_discrete(rate_set([b.bandwidth_hz for b in bands]))


def test_cqi_stays_in_table():
    ch = channel(np.array([[1, 15, 8]]), ChannelParams(walk_prob=1.0))
    rng = np.random.default_rng(0)
    for _ in range(200):
        realize_rates(ch, DEFAULT_BANDS[:3], rng)
        assert 1 <= ch.cqi.min() and ch.cqi.max() <= 15
        assert np.abs(ch.offset).max() <= 2


def test_walk_stationary_law():
    rng = np.random.default_rng(3)
    base, span = 8, 2
    offset = rng.integers(-span, span + 1, size=(16, 1))
    counts = np.zeros(15)
    for _ in range(100_000 // offset.size):   # 1e5 samples over 16 chains
        walk_step(offset, rng.random(offset.shape), 0.1, span)
        np.add.at(counts, np.clip(base + offset.ravel(), 1, 15) - 1, 1)
    tv = 0.5 * np.abs(counts / counts.sum() - stationary_cqi(base, span)).sum()
    assert tv <= 0.02


def test_stationary_law_clips_at_edges():
    p = stationary_cqi(15, 2)
    assert p[14] == pytest.approx(3 / 5)
    assert stationary_cqi(8, 0)[7] == 1.0


def test_sinr_to_cqi_edges():
    np.testing.assert_array_equal(sinr_to_cqi([-30.0, -6.7, 0.0, 22.7, 40.0]), [1, 1, 3, 15, 15])


def test_channel_params_validation():
    with pytest.raises(ValueError):
        ChannelParams(walk_prob=2.0)
    with pytest.raises(ValueError):
        ChannelParams(shadowing_corr=-0.1)
    with pytest.raises(ValueError):
        ChannelState(np.array([[np.nan]]), np.array([[3]]), np.array([[0]]))


# --- stepping ----------------------------------------------------------------------

def test_idle_cell_serves_nothing():
    s = quiet_cell([[10, 10]], DEFAULT_BANDS[:2])
    rec = step(s, s.hard(), np.random.default_rng(0))
    assert rec.served_bits.sum() == 0.0
    assert rec.handovers == 0


@pytest.mark.parametrize("backlog", [1e4, 1e9])
def test_single_ue_served_min_of_backlog_and_rate(backlog):
    s = quiet_cell([[12, 12]], DEFAULT_BANDS[:2], backlog=[backlog])
    rate = CQI_EFFICIENCY[11] * 20e6
    rec = step(s, s.hard(), np.random.default_rng(0))
    assert rec.served_bits[0] == pytest.approx(min(backlog, rate * 0.1))
    assert rec.backlog[0] == pytest.approx(backlog - rec.served_bits[0])


def test_two_identical_ues_share_evenly():
    cfg = ScenarioConfig(n_ues_per_cell=2, inter_arrival_ms=1.0, bands=DEFAULT_BANDS[:1])
    ch = channel(np.array([[9], [9]]), ChannelParams())
    s = CellState(cfg.bands, ch, np.zeros(2, dtype=int), cfg.arrival_rate, cfg.packet_bits, cfg.step)
    rng = np.random.default_rng(8)
    n = 20_000
    arrivals = rng.poisson(cfg.arrival_rate * cfg.step, size=(n, 2)) * cfg.packet_bits
    served, *_ = s.advance(arrivals, rng.random((n, 2, 1)))
    assert abs(served[0] - served[1]) / served.mean() < 0.05


def test_conservation_per_step():
    cfg = small()
    rng = np.random.default_rng(2)
    s = init_cell(cfg, rng)
    for _ in range(30):
        before = s.backlog.copy()
        rec = step(s, s.hard(), rng)
        arrived = rec.backlog + rec.served_bits - before
        assert np.all(arrived >= -1e-6)
        assert np.all(rec.served_bits <= before + arrived + 1e-6)
        assert np.all(rec.served_bits >= 0) and np.all(rec.backlog >= -1e-9)


def test_handover_counts_and_interruption():
    a = AssignmentMatrix.from_bands([0, 1, 2, 3, 0], 4)
    assert apply_handovers(a, a, 50.0)[0] == 0
    b = AssignmentMatrix.from_bands([1, 2, 3, 3, 0], 4)
    count, moved = apply_handovers(a, b, 50.0)
    assert count == 3
    np.testing.assert_array_equal(moved, [0, 1, 2])
    s = quiet_cell(np.full((5, 4), 10), DEFAULT_BANDS)
    s.assignment = a.bands().copy()
    assert handover(s, b, 50.0) == (3, 150.0)


def test_interrupted_ue_loses_airtime():
    s = quiet_cell([[12, 12]], DEFAULT_BANDS[:2], backlog=[1e9])
    rate = CQI_EFFICIENCY[11] * 10e6
    rec = step(s, AssignmentMatrix.from_bands([1], 2), np.random.default_rng(0), ho_interruption_ms=50.0)
    assert rec.handovers == 1 and rec.interruption_ms == 50.0
    assert rec.served_bits[0] == pytest.approx(rate * 0.05)
    rec = step(s, s.hard(), np.random.default_rng(0))
    assert rec.served_bits[0] == pytest.approx(rate * 0.1)


# --- episodes -------------------------------------------------------------------------

def test_zero_duration_is_empty():
    assert run_episode(small(sim_duration=0.0)).rows == []


def test_no_mlb_never_hands_over():
    rep = run_episode(small(algorithm="no_mlb"))
    assert rep.aggregates["ho_total"] == 0
    assert rep.aggregates["interruption_total_ms"] == 0


@pytest.mark.parametrize("algorithm", ["pmlb", "rule_based"])
def test_episode_is_byte_identical(tmp_path, algorithm):
    cfg = small(algorithm=algorithm)
    for k in range(2):
        write_report(run_episode(cfg), "csv", tmp_path / f"{k}.csv")
    assert (tmp_path / "0.csv").read_bytes() == (tmp_path / "1.csv").read_bytes()


def test_partial_last_window():
    rep = run_episode(small(sim_duration=300.0))
    np.testing.assert_allclose(rep.column("t"), [120.0, 240.0, 300.0])


def test_interruption_matches_handovers():
    rep = run_episode(small(algorithm="rule_based", ho_interruption_ms=35.0))
    assert rep.aggregates["interruption_total_ms"] == rep.aggregates["ho_total"] * 35.0


def test_churn_runs_and_is_seeded():
    cfg = small(churn_dwell_s=200.0)
    a, b = run_episode(cfg), run_episode(cfg)
    assert a.rows == b.rows
    assert len(a.rows) == 5


# --- scenarios ----------------------------------------------------------------------

def test_named_scenarios():
    for name, (u, gap) in {"A": (400, 20.0), "B": (400, 50.0), "C": (200, 50.0)}.items():
        cfg = named_scenario(name)
        assert (cfg.n_ues_per_cell, cfg.inter_arrival_ms) == (u, gap)
    assert [b.bandwidth_hz for b in DEFAULT_BANDS] == [20e6, 10e6, 5e6, 10e6]
    assert [b.n_prb for b in DEFAULT_BANDS] == [100, 50, 25, 50]
    with pytest.raises(ConfigError):
        named_scenario("D")


@pytest.mark.parametrize("bad,key", [
    (dict(step=0.0), "step"),
    (dict(sim_duration=0.05), "sim_duration"),
    (dict(sim_duration=1.05), "sim_duration"),
    (dict(bands=()), "bands"),
    (dict(algorithm="greedy"), "algorithm"),
    (dict(n_cells=0), "n_cells"),
])
def test_scenario_validation(bad, key):
    with pytest.raises(ConfigError) as exc:
        ScenarioConfig(**bad).validate()
    assert exc.value.key == key


def test_yaml_round_trip(tmp_path):
    cfg = small(churn_dwell_s=90.0)
    cfg = cfg.replace(balancer=dataclasses.replace(cfg.balancer, w=0.3))
    dump_config(cfg, tmp_path / "s.yaml")
    assert load_config(tmp_path / "s.yaml") == cfg


def test_config_errors_name_the_key():
    with pytest.raises(ConfigError) as exc:
        config_from_dict({"balancer": {"w": 3.0}})
    assert exc.value.key == "balancer.w"
    with pytest.raises(ConfigError) as exc:
        config_from_dict({"bands": [{"id": 0, "bandwidth_hz": 1e6, "n_prb": 5, "colour": 1}]})
    assert exc.value.key == "bands[0].colour"


def test_snapshot_instance_is_feasible_at_w0():
    inst = snapshot_instance(20, np.random.default_rng(4))
    assert inst.shape == (20, 4)
    assert np.all(inst.previous.counts() <= inst.caps)
    assert np.all(inst.rates[np.arange(20), inst.previous.bands()] >= inst.cfg.r_min)
