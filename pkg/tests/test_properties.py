import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from generators import random_instance
from oracles import random_lp
from pmlb import lp
from pmlb.balancer import (
    BalancerConfig,
    LoadWindow,
    pmlb_step,
    prefilter_infeasible,
    round_deterministic,
    round_probabilistic,
    split_solution,
)
from pmlb.kpi import KpiReport, KpiRow, from_dict, read_report, to_dict, write_report
from pmlb.model import AssignmentMatrix, LoadSample, lbi, load_vector, objective_f1, objective_f2
from pmlb.sim import desk_scenario, init_cell, run_episode
from pmlb.sim.config import DEFAULT_BANDS
from pmlb.sim.engine import draw_traffic

seeds = st.integers(0, 2**32 - 1)
finite = st.floats(0.0, 1e3, allow_nan=False)


def bands_of(draw, n_ues, n_bands):
    return draw(arrays(np.int64, n_ues, elements=st.integers(0, n_bands - 1)))


# --- model -------------------------------------------------------------------------

@given(arrays(float, st.tuples(st.integers(1, 8), st.integers(1, 5)), elements=st.floats(0.01, 1.0)))
def test_rows_are_stochastic(raw):
    X = AssignmentMatrix.stochastic(raw)
    np.testing.assert_allclose(X.entries.sum(axis=1), 1.0, atol=1e-9)
    H = AssignmentMatrix.from_bands(np.argmax(raw, axis=1), raw.shape[1])
    np.testing.assert_allclose(H.entries.sum(axis=1), 1.0, atol=1e-9)


@given(st.data(), st.integers(1, 10), st.integers(1, 5))
def test_f2_symmetry_bound_parity(data, U, B):
    a = AssignmentMatrix.from_bands(bands_of(data.draw, U, B), B)
    b = AssignmentMatrix.from_bands(bands_of(data.draw, U, B), B)
    f = objective_f2(a, b)
    assert f == objective_f2(b, a) >= 0
    assert (f == 0) == np.array_equal(a.entries, b.entries)
    assert 0 <= f <= 2 * U and f % 2 == 0


@given(arrays(float, st.integers(1, 6), elements=finite), st.floats(1e-3, 1e3))
def test_lbi_bounds_and_scale(v, c):
    if not v.any():
        assert lbi(v) == 1.0
        return
    B = v.size
    x = lbi(v)
    assert 1 / B - 1e-12 <= x <= 1 + 1e-12
    assert lbi(c * v) == pytest.approx(x, rel=1e-9)
    assert (abs(x - 1) < 1e-12) == bool(np.allclose(v, v[0], rtol=1e-9, atol=0))


@given(st.data(), st.integers(1, 6), st.integers(1, 4))
def test_f1_monotone_in_incurred(data, U, B):
    rho = data.draw(arrays(float, (U, B), elements=finite))
    extra = data.draw(arrays(float, B, elements=finite))
    X = AssignmentMatrix.from_bands(bands_of(data.draw, U, B), B)
    assert objective_f1(X, LoadSample(rho, extra)) >= objective_f1(X, LoadSample(rho)) - 1e-12


@given(arrays(float, 5, elements=finite), arrays(float, 5, elements=st.floats(1e3, 1e8)), st.floats(0, 1e3))
def test_load_vector_linear(d, r, c):
    np.testing.assert_allclose(load_vector(c * d, r), c * load_vector(d, r), rtol=1e-12, atol=1e-300)


# --- lp ------------------------------------------------------------------------------

@settings(max_examples=30)
@given(seeds, st.integers(3, 10), st.integers(1, 5), st.integers(0, 2))
def test_lp_optimal_is_feasible(seed, n, m_ub, m_eq):
    c, A_eq, b_eq, A_ub, b_ub, lo, hi = random_lp(np.random.default_rng(seed), n, m_ub, m_eq)
    prog = lp.LinearProgram(c, A_eq, b_eq, A_ub, b_ub, lo, hi)
    sol = lp.solve_lp(prog, "simplex")
    assert sol.optimal
    assert prog.violation(sol.values) <= 1e-7
    assert sol.objective_value == pytest.approx(prog.c @ sol.values, abs=1e-7)
    assert lp.solve_lp(prog, "simplex").objective_value == sol.objective_value


@settings(max_examples=25)
@given(seeds, st.integers(2, 6), st.integers(2, 3))
def test_relaxation_bounds_milp(seed, U, B):
    inst = random_instance(np.random.default_rng(seed), U, B)
    prog = inst.program()
    relaxed = lp.solve_lp(prog)
    milp = lp.solve_milp(prog, np.arange(U * B))
    assert milp.optimal
    assert relaxed.objective_value <= milp.objective_value + 1e-6
    X = split_solution(milp.values, U, B)[0]
    assert np.all(np.abs(X - np.round(X)) <= 1e-6)


# --- balancer --------------------------------------------------------------------------

def _step(inst, rng, **cfg):
    conf = dataclasses.replace(inst.cfg, **cfg)
    window = LoadWindow(1)
    window.push(LoadSample(inst.loads))
    return pmlb_step(window, inst.previous, np.zeros_like(inst.rates), inst.rates, conf, rng,
                     DEFAULT_BANDS[:inst.shape[1]])


@settings(max_examples=30)
@given(seeds, st.integers(2, 12), st.integers(2, 4), st.sampled_from(["probabilistic", "deterministic"]))
def test_output_is_feasible(seed, U, B, rounding):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, U, B)
    d = _step(inst, rng, lbi_threshold=1.0, rounding=rounding)
    bands = d.new_assignment.bands()
    np.testing.assert_allclose(d.new_assignment.entries.sum(axis=1), 1.0)
    if not d.infeasible:
        assert np.all(inst.rates[np.arange(U), bands] >= inst.cfg.r_min)
        assert np.all(d.new_assignment.counts() <= inst.caps)
    assert d.handover_count == objective_f2(d.new_assignment, inst.previous) / 2


@settings(max_examples=20)
@given(seeds, st.integers(2, 10), st.integers(2, 4))
def test_event_gating(seed, U, B):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, U, B)
    xh = inst.previous.entries
    current = lbi((xh * inst.loads).sum(axis=0))
    d = _step(inst, rng, lbi_threshold=max(1e-9, current))
    assert not d.triggered and d.handover_count == 0
    assert d.new_assignment is inst.previous


@settings(max_examples=20)
@given(seeds, st.integers(2, 10), st.integers(2, 4))
def test_w_extremes_and_monotone_t(seed, U, B):
    inst = random_instance(np.random.default_rng(seed), U, B)
    # make the previous assignment feasible so w=0 can keep it
    inst.caps = np.maximum(inst.caps, inst.previous.counts())
    ts, ys = [], []
    for w in np.linspace(0, 1, 6):
        inst.cfg = dataclasses.replace(inst.cfg, w=float(w))
        sol = lp.solve_lp(inst.program())
        X, _, t, y = split_solution(sol.values, U, B)
        if w == 0:
            assert y == pytest.approx(0.0, abs=1e-9)
            np.testing.assert_allclose(X, inst.previous.entries, atol=1e-9)
        f1 = np.max((X * inst.loads).sum(axis=0))
        ts.append(f1)
        ys.append(y)
    assert all(a >= b - 1e-6 * max(1.0, a) for a, b in zip(ts, ts[1:]))
    assert all(a <= b + 1e-6 for a, b in zip(ys, ys[1:]))


@settings(max_examples=15)
@given(seeds, st.integers(2, 6), st.integers(2, 3))
def test_milp_dominates_roundings(seed, U, B):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, U, B)
    milp = lp.solve_milp(inst.program(), np.arange(U * B))
    _, X = inst.relaxed(rng)
    D = AssignmentMatrix.stochastic(X)
    det = inst.objective(round_deterministic(D, inst.rates, inst.cfg.r_min, inst.caps))
    prob = [inst.objective(round_probabilistic(D, inst.rates, inst.cfg.r_min, rng, inst.caps))
            for _ in range(100)]
    assert milp.objective_value <= det + 1e-9
    assert milp.objective_value <= min(prob) + 1e-9


@given(st.data(), st.integers(1, 10), st.integers(1, 4), st.floats(1e5, 1e7))
def test_prefilter_conservation(data, U, B, r_min):
    rates = data.draw(arrays(float, (U, B), elements=st.floats(1e4, 1e8)))
    quality = data.draw(arrays(float, (U, B), elements=st.floats(-20, 0)))
    loads = data.draw(arrays(float, (U, B), elements=finite))
    pre = prefilter_infeasible(quality, rates, loads, r_min)
    expected = sum(loads[u, b] for u, b in pre.fixed)
    assert pre.incurred.sum() == pytest.approx(expected, rel=1e-12, abs=1e-12)
    assert len(pre.fixed) + pre.remaining.size == U


# --- sim -------------------------------------------------------------------------------

@settings(max_examples=10)
@given(seeds, st.integers(1, 12))
def test_conservation_and_capacity(seed, U):
    cfg = desk_scenario("A", n_ues_per_cell=U)
    rng = np.random.default_rng(seed)
    s = init_cell(cfg, rng)
    s.assignment = rng.integers(0, 4, size=U)
    arrived_total = np.zeros(U)
    served_total = np.zeros(U)
    for _ in range(40):
        arrivals = draw_traffic(s, 1, rng)
        served, rate_sum, _, _, _ = s.advance(arrivals, rng.random((1, U, 4)))
        arrived_total += arrivals[0]
        served_total += served
        assert np.all(served_total <= arrived_total + 1e-6)
        for b in range(4):
            on = s.assignment == b
            if on.any():
                assert served[on].sum() <= rate_sum[on, b].max() * cfg.step * (1 + 1e-12)


@settings(max_examples=5)
@given(seeds, st.sampled_from(["pmlb", "rule_based", "a2_mlb"]), st.floats(0, 100))
def test_interruption_accounting_and_determinism(seed, algorithm, ho_ms):
    cfg = desk_scenario("A", n_ues_per_cell=12, n_cells=2, sim_duration=480.0, seed=seed, algorithm=algorithm,
                        ho_interruption_ms=ho_ms)
    a = run_episode(cfg)
    agg = a.aggregates
    assert agg["interruption_total_ms"] == pytest.approx(agg["ho_total"] * ho_ms, rel=1e-12)
    for row in a.rows:
        assert row.interruption_ms == pytest.approx(row.ho_count * ho_ms, rel=1e-12)
    assert run_episode(cfg) == a


# --- kpi -------------------------------------------------------------------------------

pos = st.floats(0, 1e9, allow_nan=False)
kpi_rows = st.builds(
    KpiRow, t=pos, avg_tput_bps=pos, min_tput_bps=pos, ho_count=st.integers(0, 10**6),
    interruption_ms=pos, lbi=st.floats(0.25, 1.0), loads=st.tuples(pos, pos, pos, pos),
)
reports = st.builds(KpiReport, scenario=st.sampled_from(["A", "B", "C"]), algorithm=st.just("pmlb"),
                    seed=st.integers(0, 2**31), n_bands=st.just(4), rows=st.lists(kpi_rows, max_size=6))


@given(reports)
def test_window_additivity(rep):
    assert rep.aggregates["ho_total"] == sum(int(x) for x in rep.column("ho_count"))


@given(reports)
def test_json_round_trip_exact(rep):
    assert from_dict(json.loads(json.dumps(to_dict(rep)))) == rep


@settings(max_examples=30)
@given(reports)
def test_csv_round_trip(tmp_path_factory, rep):
    path = tmp_path_factory.mktemp("csv") / "r.csv"
    write_report(rep, "csv", path)
    back = read_report(path, scenario=rep.scenario, algorithm=rep.algorithm, seed=rep.seed)
    assert len(back.rows) == len(rep.rows)
    for a, b in zip(back.rows, rep.rows):
        np.testing.assert_allclose([a.t, a.avg_tput_bps, a.min_tput_bps, a.interruption_ms, a.lbi, *a.loads],
                                   [b.t, b.avg_tput_bps, b.min_tput_bps, b.interruption_ms, b.lbi, *b.loads],
                                   rtol=1e-9)
        assert a.ho_count == b.ho_count
