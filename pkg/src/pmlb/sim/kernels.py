"""Per-step cell dynamics over a run of steps with a fixed assignment.

One call advances a cell by ``n`` steps: arrivals join the backlogs, the
CQI offsets walk, each band shares its time among its backlogged,
schedulable UEs by proportional fair water-filling, and the throughput
averages update.  Random draws are made by the caller so both kernels
consume identical inputs.
"""

from __future__ import annotations

import numpy as np

from .._accel import njit, use_numba

EMA_ALPHA = 0.1
EMA_FLOOR = 1.0   # bits/s; keeps the PF weight finite for idle UEs


@njit
def _segment_jit(base_cqi, offset, eff, bw, band, backlog, ema, busy, arrivals, draws,
                 step, alpha, walk_prob, span,
                 served_sum, rate_sum, band_load_sum, loads_out, served_out):
    n, U = arrivals.shape
    B = bw.shape[0]
    half = 0.5 * walk_prob
    rate = np.empty((U, B))
    cap = np.empty(U)
    wt = np.empty(U)
    tshare = np.empty(U)
    idx = np.empty(U, dtype=np.int64)
    sat = np.zeros(U, dtype=np.bool_)
    served = np.empty(U)
    for s in range(n):
        for u in range(U):
            backlog[u] += arrivals[s, u]
            for b in range(B):
                x = draws[s, u, b]
                if x < half:
                    if offset[u, b] < span:
                        offset[u, b] += 1
                elif x < walk_prob:
                    if offset[u, b] > -span:
                        offset[u, b] -= 1
                q = base_cqi[u, b] + offset[u, b]
                if q < 1:
                    q = 1
                elif q > 15:
                    q = 15
                r = eff[q - 1] * bw[b]
                rate[u, b] = r
                rate_sum[u, b] += r
                ld = arrivals[s, u] / (r * step)
                loads_out[s, u, b] = ld
            band_load_sum[band[u]] += loads_out[s, u, band[u]]
            served[u] = 0.0

        for b in range(B):
            m = 0
            for u in range(U):
                if band[u] != b or backlog[u] <= 0.0:
                    continue
                avail = 1.0 - busy[u] / step
                if avail <= 0.0:
                    continue
                if avail > 1.0:
                    avail = 1.0
                need = backlog[u] / (rate[u, b] * step)
                idx[m] = u
                cap[m] = need if need < avail else avail
                e = ema[u] if ema[u] > EMA_FLOOR else EMA_FLOOR
                wt[m] = rate[u, b] / e
                sat[m] = False
                tshare[m] = 0.0
                m += 1
            T = 1.0
            while True:
                W = 0.0
                for i in range(m):
                    if not sat[i]:
                        W += wt[i]
                if W <= 0.0 or T <= 0.0:
                    break
                hit = False
                used = 0.0
                for i in range(m):
                    if not sat[i] and cap[i] <= T * wt[i] / W:
                        sat[i] = True
                        tshare[i] = cap[i]
                        used += cap[i]
                        hit = True
                if not hit:
                    for i in range(m):
                        if not sat[i]:
                            tshare[i] = T * wt[i] / W
                    break
                T -= used
            for i in range(m):
                u = idx[i]
                bits = tshare[i] * rate[u, b] * step
                if bits > backlog[u]:
                    bits = backlog[u]
                served[u] = bits

        for u in range(U):
            backlog[u] -= served[u]
            if backlog[u] < 0.0:
                backlog[u] = 0.0
            served_sum[u] += served[u]
            served_out[s, u] = served[u]
            ema[u] = (1.0 - alpha) * ema[u] + alpha * served[u] / step
            busy[u] = busy[u] - step if busy[u] > step else 0.0


def _share_band(rate_b, backlog, ema, avail, step):
    """Water-filled time shares for the UEs of one band (numpy path)."""
    m = rate_b.size
    tshare = np.zeros(m)
    ok = (backlog > 0.0) & (avail > 0.0)
    cap = np.minimum(backlog / (rate_b * step), avail)
    wt = rate_b / np.maximum(ema, EMA_FLOOR)
    active = ok.copy()
    T = 1.0
    while active.any() and T > 0.0:
        W = wt[active].sum()
        if W <= 0.0:
            break
        share = T * wt / W
        hit = active & (cap <= share)
        if not hit.any():
            tshare[active] = share[active]
            break
        tshare[hit] = cap[hit]
        T -= cap[hit].sum()
        active &= ~hit
    return tshare


def _segment_numpy(base_cqi, offset, eff, bw, band, backlog, ema, busy, arrivals, draws,
                   step, alpha, walk_prob, span,
                   served_sum, rate_sum, band_load_sum, loads_out, served_out):
    n, U = arrivals.shape
    B = bw.shape[0]
    rows = np.arange(U)
    for s in range(n):
        backlog += arrivals[s]
        x = draws[s]
        offset += ((x < 0.5 * walk_prob) & (offset < span)).astype(offset.dtype)
        offset -= ((x >= 0.5 * walk_prob) & (x < walk_prob) & (offset > -span)).astype(offset.dtype)
        rate = eff[np.clip(base_cqi + offset, 1, 15) - 1] * bw[None, :]
        rate_sum += rate
        ld = arrivals[s][:, None] / (rate * step)
        loads_out[s] = ld
        band_load_sum += np.bincount(band, weights=ld[rows, band], minlength=B)
        avail = np.clip(1.0 - busy / step, 0.0, 1.0)
        served = np.zeros(U)
        for b in range(B):
            on = np.flatnonzero(band == b)
            if on.size == 0:
                continue
            t = _share_band(rate[on, b], backlog[on], ema[on], avail[on], step)
            served[on] = np.minimum(t * rate[on, b] * step, backlog[on])
        backlog -= served
        np.maximum(backlog, 0.0, out=backlog)
        served_sum += served
        served_out[s] = served
        ema *= 1.0 - alpha
        ema += alpha * served / step
        busy[:] = np.where(busy > step, busy - step, 0.0)


def run_segment(base_cqi, offset, eff, bw, band, backlog, ema, busy, arrivals, draws,
                step, walk_prob, span, alpha=EMA_ALPHA):
    """Advance a cell ``len(arrivals)`` steps in place.

    Returns ``(served_sum, rate_sum, band_load_sum, loads, served)`` where
    ``loads`` is ``n x U x B`` (per-step load of each UE on each band) and
    ``served`` is ``n x U``.
    """
    n, U = arrivals.shape
    B = bw.shape[0]
    served_sum = np.zeros(U)
    rate_sum = np.zeros((U, B))
    band_load_sum = np.zeros(B)
    loads = np.empty((n, U, B))
    served = np.empty((n, U))
    fn = _segment_jit if use_numba() else _segment_numpy
    fn(base_cqi, offset, eff, bw, np.asarray(band, dtype=np.int64), backlog, ema, busy,
       np.ascontiguousarray(arrivals, dtype=float), np.ascontiguousarray(draws, dtype=float),
       float(step), float(alpha), float(walk_prob), int(span),
       served_sum, rate_sum, band_load_sum, loads, served)
    return served_sum, rate_sum, band_load_sum, loads, served
