"""Per-window KPIs, episode aggregates, and report files.

CSV columns, in order::

    t, avg_tput_bps, min_tput_bps, ho_count, interruption_ms, lbi, load_b0 .. load_b{B-1}

``t`` is the end of the window in seconds.  The JSON form is the
``KpiReport`` dataclass as a mapping (``rows`` is a list of row mappings,
``loads`` a list of floats) and reads back to an equal report.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .model import lbi

BASE_COLUMNS = ("t", "avg_tput_bps", "min_tput_bps", "ho_count", "interruption_ms", "lbi")
KPIS = ("avg_tput_bps", "min_tput_bps", "ho_count", "interruption_ms", "lbi")


class ReportError(RuntimeError):
    pass


@dataclass(frozen=True)
class KpiRow:
    t: float
    avg_tput_bps: float
    min_tput_bps: float
    ho_count: int
    interruption_ms: float
    lbi: float
    loads: tuple = ()


@dataclass
class KpiReport:
    scenario: str
    algorithm: str
    seed: int
    n_bands: int
    rows: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def band_loads(self) -> np.ndarray:
        return np.array([r.loads for r in self.rows], dtype=float).reshape(len(self.rows), self.n_bands)

    @property
    def aggregates(self) -> dict:
        """Mean of each KPI over the windows, plus episode totals of the counts."""
        out = {k: (float(np.mean(self.column(k))) if self.rows else math.nan) for k in KPIS}
        out["ho_total"] = int(sum(r.ho_count for r in self.rows))
        out["interruption_total_ms"] = float(sum(r.interruption_ms for r in self.rows))
        return out


def window_row(t, served_bits, window_s, band_loads, ho_count=0, interruption_ms=0.0) -> KpiRow:
    """KPI row from per-UE served bits and per-band mean loads over one window."""
    served = np.asarray(served_bits, dtype=float)
    if served.size == 0:
        raise ValueError("no UEs in window")
    if not window_s > 0:
        raise ValueError("window must be > 0")
    tput = served / window_s
    loads = np.asarray(band_loads, dtype=float)
    return KpiRow(float(t), float(tput.mean()), float(tput.min()), int(ho_count), float(interruption_ms),
                  lbi(loads), tuple(float(x) for x in loads))


def aggregate_window(records, window: float) -> KpiRow:
    """One KPI row from the step records covering a window of ``window`` seconds."""
    records = list(records)
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    served = np.sum([r.served_bits for r in records], axis=0)
    loads = np.mean([r.band_totals for r in records], axis=0)
    return window_row(records[-1].timestamp, served, window, loads,
                      sum(r.handovers for r in records), sum(r.interruption_ms for r in records))


def combine_cells(rows) -> KpiRow:
    """Merge the same window across cells: rates and LBI averaged, counts summed."""
    rows = list(rows)
    if len(rows) == 1:
        return rows[0]
    return KpiRow(
        rows[0].t,
        float(np.mean([r.avg_tput_bps for r in rows])),
        float(np.mean([r.min_tput_bps for r in rows])),
        int(sum(r.ho_count for r in rows)),
        float(sum(r.interruption_ms for r in rows)),
        float(np.mean([r.lbi for r in rows])),
        tuple(float(x) for x in np.mean([r.loads for r in rows], axis=0)),
    )


def csv_header(n_bands: int) -> list:
    return list(BASE_COLUMNS) + [f"load_b{b}" for b in range(n_bands)]


def to_dict(report: KpiReport) -> dict:
    return dataclasses.asdict(report)


def from_dict(d: dict) -> KpiReport:
    rows = [KpiRow(**{**r, "loads": tuple(r["loads"])}) for r in d["rows"]]
    return KpiReport(d["scenario"], d["algorithm"], d["seed"], d["n_bands"], rows)


def write_report(report: KpiReport, fmt: str, path) -> None:
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}")
    try:
        with open(path, "w", newline="") as fh:
            if fmt == "json":
                json.dump(to_dict(report), fh, indent=1)
                fh.write("\n")
                return
            w = csv.writer(fh)
            w.writerow(csv_header(report.n_bands))
            for r in report.rows:
                w.writerow([repr(r.t), repr(r.avg_tput_bps), repr(r.min_tput_bps), r.ho_count,
                            repr(r.interruption_ms), repr(r.lbi), *(repr(x) for x in r.loads)])
    except OSError as exc:
        raise ReportError(f"cannot write report to {path}: {exc}") from exc


def read_report(path, fmt: str | None = None, scenario="", algorithm="", seed=0) -> KpiReport:
    """Read a report back; CSV files carry no metadata, so it is passed in."""
    fmt = fmt or ("json" if str(path).endswith(".json") else "csv")
    try:
        with open(path, newline="") as fh:
            if fmt == "json":
                return from_dict(json.load(fh))
            rd = csv.reader(fh)
            header = next(rd)
            B = len(header) - len(BASE_COLUMNS)
            rows = []
            for rec in rd:
                v = [float(x) for x in rec]
                rows.append(KpiRow(v[0], v[1], v[2], int(v[3]), v[4], v[5], tuple(v[6:])))
            return KpiReport(scenario, algorithm, seed, B, rows)
    except OSError as exc:
        raise ReportError(f"cannot read report from {path}: {exc}") from exc


def compare_reports(a: KpiReport, b: KpiReport) -> dict:
    """Ratio ``a / b`` of each episode aggregate (1.0 when both are zero)."""
    if a.scenario != b.scenario:
        raise ValueError(f"scenario mismatch: {a.scenario!r} vs {b.scenario!r}")
    ga, gb = a.aggregates, b.aggregates
    out = {}
    for k in (*KPIS, "ho_total", "interruption_total_ms"):
        x, y = ga[k], gb[k]
        if y == 0:
            out[k] = 1.0 if x == 0 else math.inf
        else:
            out[k] = x / y
    return out
