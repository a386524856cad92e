"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py --repeat 5

Each kernel runs once per backend before timing so JIT compilation is not
counted.  Outputs of the two backends are compared and the largest
difference is printed next to the timings.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from pmlb import _accel, lp
from pmlb.model import CQI_EFFICIENCY
from pmlb.sim import desk_scenario, snapshot_instance
from pmlb.sim.engine import init_cell
from pmlb.sim.kernels import run_segment


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def simplex_case(n_ues):
    inst = snapshot_instance(n_ues, np.random.default_rng(n_ues))
    prog = inst.program()

    def run():
        return lp.solve_lp(prog, "simplex").objective_value

    return f"simplex U={n_ues}", run


def segment_case(n_ues, n_steps):
    cfg = desk_scenario("A", n_ues_per_cell=n_ues)
    rng = np.random.default_rng(0)
    cell = init_cell(cfg, rng)
    arrivals = rng.poisson(cfg.arrival_rate * cfg.step, size=(n_steps, n_ues)) * cfg.packet_bits
    draws = rng.random((n_steps, n_ues, cfg.n_bands))
    p = cfg.channel

    def run():
        off = cell.channel.offset.copy()
        backlog, ema, busy = np.zeros(n_ues), np.zeros(n_ues), np.zeros(n_ues)
        served, *_ = run_segment(cell.channel.base_cqi, off, CQI_EFFICIENCY, cell.bw, cell.assignment,
                                 backlog, ema, busy, arrivals, draws, cfg.step, p.walk_prob, p.walk_span)
        return served.sum()

    return f"segment U={n_ues} steps={n_steps}", run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="small sizes only")
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        print("numba is not installed; only the numpy path can run")
        return 1

    if args.quick:
        cases = [simplex_case(20), segment_case(50, 200)]
    else:
        cases = [simplex_case(20), simplex_case(100), segment_case(100, 1200), segment_case(400, 1200)]
    print(f"{'kernel':<28}{'numba s':>10}{'numpy s':>10}{'speedup':>9}{'max diff':>11}")
    for name, fn in cases:
        res = {}
        for backend in ("numba", "numpy"):
            with _accel.backend(backend):
                fn()
                res[backend] = best_of(fn, args.repeat)
        (tn, on), (tp, op) = res["numba"], res["numpy"]
        diff = abs(on - op) / max(1.0, abs(op))
        print(f"{name:<28}{tn:>10.4f}{tp:>10.4f}{tp / tn:>9.1f}{diff:>11.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
