import csv
import json
import pathlib

import numpy as np
import pytest

from oracles import brute_force_assignment
from pmlb.cli import main, pareto_points, study_row
from pmlb.sim import desk_scenario, named_scenario, snapshot_instance

ROOT = pathlib.Path(__file__).resolve().parents[1]
SCENARIOS = sorted((ROOT / "scenarios").glob("*.yaml"))
MALFORMED = sorted((ROOT / "tests" / "fixtures" / "malformed").glob("*.yaml"))
QUICK = ["--ues", "12", "--cells", "1", "--duration", "360"]


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_writes_csv(tmp_path, capsys):
    out = tmp_path / "a.csv"
    assert main(["run", "--scenario", "A", "--algorithm", "pmlb", "--seed", "1", "--out", str(out), *QUICK]) == 0
    data = rows(out)
    assert list(data[0]) == ["t", "avg_tput_bps", "min_tput_bps", "ho_count", "interruption_ms", "lbi",
                             "load_b0", "load_b1", "load_b2", "load_b3"]
    assert len(data) == 3
    assert "avg_tput_bps" in capsys.readouterr().out


def test_run_json(tmp_path):
    out = tmp_path / "a.json"
    assert main(["run", "--scenario", "B", "--out", str(out), *QUICK]) == 0
    assert json.loads(out.read_text())["scenario"] == "B"


def test_no_mlb_has_no_handovers(capsys):
    assert main(["run", "--scenario", "C", "--algorithm", "no_mlb", *QUICK]) == 0
    line = [x for x in capsys.readouterr().out.splitlines() if x.split()[0] == "ho_total"][0]
    assert float(line.split()[1]) == 0


def test_unknown_algorithm_exits_1(capsys):
    assert main(["run", "--algorithm", "magic", *QUICK]) == 1
    assert "algorithm" in capsys.readouterr().err


def test_bad_flag_exits_1():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--frobnicate"])
    assert exc.value.code == 1


def test_bad_weight_exits_1(capsys):
    assert main(["run", "--w", "1.5", *QUICK]) == 1
    assert main(["pareto", "--weights", "0,2", "--ues", "8"]) == 1
    assert capsys.readouterr().out == ""


def test_unwritable_output_exits_2(tmp_path):
    assert main(["run", "--out", str(tmp_path / "no" / "a.csv"), *QUICK]) == 2


@pytest.mark.parametrize("path", SCENARIOS, ids=lambda p: p.name)
def test_shipped_scenarios_validate(path):
    assert main(["validate", str(path)]) == 0


@pytest.mark.parametrize("path", MALFORMED, ids=lambda p: p.name)
def test_malformed_scenarios_rejected(path, capsys):
    assert main(["validate", str(path)]) == 1
    assert "invalid" in capsys.readouterr().out


def test_config_error_names_key(tmp_path, capsys):
    p = tmp_path / "s.yaml"
    p.write_text("balancer:\n  w: 4\n")
    assert main(["run", "--config", str(p)]) == 1
    assert "balancer.w" in capsys.readouterr().err


def test_pareto_single_zero():
    pts = pareto_points(named_scenario("A", n_ues_per_cell=30), [0.0], 0)
    assert len(pts) == 1 and pts[0][2] == 0.0


def test_pareto_monotone_and_w1_minimal():
    cfg = named_scenario("A", n_ues_per_cell=30)
    pts = pareto_points(cfg, [0.0, 0.5, 1.0], 3)
    f1 = [p[1] for p in pts]
    f2 = [p[2] for p in pts]
    assert all(a >= b - 1e-6 for a, b in zip(f1, f1[1:]))
    assert all(a <= b + 1e-6 for a, b in zip(f2, f2[1:]))
    others = pareto_points(cfg, [0.2, 0.7, 0.9], 3)
    assert f1[-1] <= min(p[1] for p in others) + 1e-6


def test_pareto_cli(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["pareto", "--ues", "10", "--weights", "0,1", "--seeds", "2", "--out", str(out)]) == 0
    assert len(rows(out)) == 4


def test_rounding_study_matches_oracle():
    cfg = desk_scenario("A")
    row = study_row(cfg, 6, 3, 0, samples=10)
    inst = snapshot_instance(6, np.random.default_rng([0, 6]), cfg, n_bands=3)
    ref, _ = brute_force_assignment(inst.loads, inst.rates, inst.previous.bands(), inst.caps, inst.cfg.w,
                                    inst.cfg.r_min)
    assert row["milp_obj"] == pytest.approx(ref, abs=1e-9)
    assert row["lp_obj"] <= row["milp_obj"] + 1e-6


def test_rounding_study_cli(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["rounding-study", "--ue-counts", "6,8", "--bands", "3", "--seeds", "1", "--samples", "5",
                 "--out", str(out)]) == 0
    got = rows(out)
    assert [int(r["n_ues"]) for r in got] == [6, 8]
    assert all(r["milp_status"] == "optimal" for r in got)
    assert main(["rounding-study", "--bands", "9"]) == 1
