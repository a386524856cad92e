"""Command-line front end.

    pmlb run --scenario A --algorithm pmlb --seed 1 --out a.csv
    pmlb pareto --scenario A --weights 0,0.5,1 --out front.csv
    pmlb rounding-study --ue-counts 10,20,40 --seeds 3 --out study.csv
    pmlb validate scenarios/*.yaml

Exit status: 0 on success, 1 for a bad configuration or bad flags,
2 when the run itself fails.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
import time

import numpy as np

from . import lp
from .balancer import round_deterministic, round_probabilistic, split_solution
from .kpi import KPIS, write_report
from .model import AssignmentMatrix
from .sim import ConfigError, ScenarioConfig, load_config, named_scenario, run_episode, snapshot_instance

logger = logging.getLogger("pmlb")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2
DEFAULT_WEIGHTS = tuple(round(0.1 * i, 1) for i in range(11))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _scenario_args(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--scenario", help="named scenario A, B or C (default A)")
    src.add_argument("--config", help="scenario YAML file")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--w", type=float, help="objective weight on the max band load")
    p.add_argument("--ues", type=int, help="UEs per cell")
    p.add_argument("--cells", type=int, help="number of cells")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pmlb", description="Multi-band load balancing experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="simulate one episode and write its KPI report")
    _scenario_args(run)
    run.add_argument("--algorithm", help="pmlb, no_mlb, a2_mlb or rule_based")
    run.add_argument("--duration", type=float, help="simulated seconds")
    run.add_argument("--out", help="report path (default: no file)")
    run.add_argument("--format", choices=("csv", "json"), help="report format (default from --out suffix)")

    par = sub.add_parser("pareto", help="sweep the objective weight on a frozen snapshot")
    _scenario_args(par)
    par.add_argument("--weights", type=_floats, default=list(DEFAULT_WEIGHTS))
    par.add_argument("--seeds", type=int, default=1, help="snapshots, seeded from --seed upward")
    par.add_argument("--out", help="csv path (default: stdout)")

    rs = sub.add_parser("rounding-study", help="MILP vs rounded LP on generated instances")
    _scenario_args(rs)
    rs.add_argument("--ue-counts", type=_ints, default=[10, 20, 40])
    rs.add_argument("--bands", type=int, default=4)
    rs.add_argument("--seeds", type=int, default=3)
    rs.add_argument("--samples", type=int, default=100, help="probabilistic roundings per instance")
    rs.add_argument("--node-limit", type=int, default=20000)
    rs.add_argument("--out", help="csv path (default: stdout)")

    val = sub.add_parser("validate", help="check scenario files")
    val.add_argument("paths", nargs="+")
    return parser


def scenario_from_args(args) -> ScenarioConfig:
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    else:
        cfg = named_scenario(args.scenario or "A")
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.ues is not None:
        changes["n_ues_per_cell"] = args.ues
    if args.cells is not None:
        changes["n_cells"] = args.cells
    if getattr(args, "algorithm", None) is not None:
        changes["algorithm"] = args.algorithm
    if getattr(args, "duration", None) is not None:
        changes["sim_duration"] = args.duration
    if args.w is not None:
        try:
            changes["balancer"] = dataclasses.replace(cfg.balancer, w=args.w)
        except ValueError as exc:
            raise ConfigError("w", str(exc)) from exc
    return cfg.replace(**changes) if changes else cfg


def _writer(path):
    if path:
        fh = open(path, "w", newline="")
        return fh, csv.writer(fh)
    return None, csv.writer(sys.stdout)


def cmd_run(args) -> int:
    cfg = scenario_from_args(args)
    report = run_episode(cfg)
    if args.out:
        fmt = args.format or ("json" if args.out.endswith(".json") else "csv")
        write_report(report, fmt, args.out)
    agg = report.aggregates
    print(f"scenario={cfg.name} algorithm={cfg.algorithm} seed={cfg.seed} windows={len(report.rows)}")
    for k in (*KPIS, "ho_total", "interruption_total_ms"):
        print(f"{k:>22} {agg[k]:.6g}")
    return EXIT_OK


def _check_weights(weights):
    if not weights:
        raise ConfigError("weights", "empty weight grid")
    for w in weights:
        if not 0.0 <= w <= 1.0:
            raise ConfigError("weights", f"{w} outside [0, 1]")


def pareto_points(cfg: ScenarioConfig, weights, seed: int):
    """``(w, f1, f2, objective)`` per weight for one frozen snapshot, sorted by w."""
    _check_weights(weights)
    inst = snapshot_instance(cfg.n_ues_per_cell, np.random.default_rng(seed), cfg)
    U, B = inst.shape
    out = []
    for w in sorted(weights):
        inst.cfg = dataclasses.replace(cfg.balancer, w=w)
        sol = lp.solve_lp(inst.program(), inst.cfg.lp_method)
        if not sol.optimal:
            raise lp.SolverError(sol.status)
        X = split_solution(sol.values, U, B)[0]
        f1, f2 = inst.parts(X)
        out.append((w, f1, f2, sol.objective_value))
    return out


def cmd_pareto(args) -> int:
    cfg = scenario_from_args(args)
    _check_weights(args.weights)
    fh, w = _writer(args.out)
    try:
        w.writerow(["w", "seed", "f1", "f2", "objective"])
        for k in range(args.seeds):
            seed = cfg.seed + k
            for wt, f1, f2, obj in pareto_points(cfg, args.weights, seed):
                w.writerow([wt, seed, repr(f1), repr(f2), repr(obj)])
    finally:
        if fh:
            fh.close()
    return EXIT_OK


STUDY_COLUMNS = ["n_ues", "seed", "milp_time", "lp_time", "milp_obj", "lp_obj", "dlp_obj",
                 "plp_obj_mean", "milp_status", "milp_nodes"]


def study_row(cfg: ScenarioConfig, n_ues: int, n_bands: int, seed: int, samples: int = 100,
              node_limit: int = 20000) -> dict:
    """Time the LP and the MILP on one instance and score both roundings."""
    rng = np.random.default_rng([seed, n_ues])
    inst = snapshot_instance(n_ues, rng, cfg, n_bands=n_bands)
    prog = inst.program()
    lp.solve_lp(prog, inst.cfg.lp_method)   # warm-up: keeps one-off JIT compilation out of the timings
    t0 = time.perf_counter()
    root = lp.solve_lp(prog, inst.cfg.lp_method)
    lp_time = time.perf_counter() - t0
    t0 = time.perf_counter()
    milp = lp.solve_milp(prog, np.arange(n_ues * n_bands), inst.cfg.lp_method, node_limit=node_limit)
    milp_time = time.perf_counter() - t0
    _, X = inst.relaxed(rng)
    if X is None:
        raise lp.SolverError(root.status)
    D = AssignmentMatrix.stochastic(X)
    dlp = inst.objective(round_deterministic(D, inst.rates, inst.cfg.r_min, inst.caps))
    plp = [inst.objective(round_probabilistic(D, inst.rates, inst.cfg.r_min, rng, inst.caps))
           for _ in range(samples)]
    return dict(n_ues=n_ues, seed=seed, milp_time=milp_time, lp_time=lp_time,
                milp_obj=milp.objective_value, lp_obj=root.objective_value, dlp_obj=dlp,
                plp_obj_mean=float(np.mean(plp)), milp_status=milp.status.value, milp_nodes=milp.nodes)


def cmd_rounding_study(args) -> int:
    cfg = scenario_from_args(args)
    if any(u < 1 for u in args.ue_counts):
        raise ConfigError("ue-counts", "UE counts must be positive")
    if not 1 <= args.bands <= cfg.n_bands:
        raise ConfigError("bands", f"must lie in 1..{cfg.n_bands}")
    fh, w = _writer(args.out)
    try:
        w.writerow(STUDY_COLUMNS)
        for U in sorted(args.ue_counts):
            for k in range(args.seeds):
                row = study_row(cfg, U, args.bands, cfg.seed + k, args.samples, args.node_limit)
                w.writerow([row[c] for c in STUDY_COLUMNS])
    finally:
        if fh:
            fh.close()
    return EXIT_OK


def cmd_validate(args) -> int:
    bad = 0
    for path in args.paths:
        try:
            load_config(path)
            print(f"ok      {path}")
        except (ConfigError, OSError) as exc:
            print(f"invalid {path}: {exc}")
            bad += 1
    return EXIT_CONFIG if bad else EXIT_OK


COMMANDS = {"run": cmd_run, "pareto": cmd_pareto, "rounding-study": cmd_rounding_study, "validate": cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - every other failure is a runtime error
        logger.debug("run failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
