"""Cycle model of a W-wide vector-unit array.

Each unit has W multiply lanes feeding a log2(W) tree reducer.  A state
update wider than one unit chains ceil(N / W) units with one extra cycle per
hop.  Matrix-vector products stream the reduction dimension through a unit
in W-element chunks, one chunk per cycle in steady state.

As with the systolic model, the closed forms carry the sweeps and the
pipeline; ``functional_*`` simulates lane-level numerics plus a micro-op
schedule and anchors the closed forms in tests.
"""

from __future__ import annotations

import math

import numpy as np

from .config import VectorArrayConfig
from .reference import SsmState, SsmTokenParams
from .systolic import CycleReport


def _finish(cfg: VectorArrayConfig, compute: int, fill: int, bytes_moved: int,
            mac_ops: int, arrays: int) -> CycleReport:
    demand = math.ceil(bytes_moved / arrays * cfg.freq_hz / cfg.sram_bw)
    stall = max(0, demand - compute)
    cycles = compute + stall
    util = mac_ops / (arrays * cfg.macs_per_array * cycles)
    return CycleReport(cycles=cycles, compute_cycles=compute, fill_cycles=fill,
                       stall_cycles=stall, mac_ops=mac_ops, utilization=util,
                       freq_hz=cfg.freq_hz, bytes_moved=bytes_moved)


def step_latency(cfg: VectorArrayConfig, n_state: int) -> int:
    """Latency of one channel's state update and output reduction.

    Three vector stages, the reduction tree, the chain across units, and
    the transition-discretization SFU.
    """
    units = math.ceil(n_state / cfg.lane_width_w)
    return (3 + int(math.log2(cfg.lane_width_w)) + (units - 1)
            + cfg.sfu_latency_cycles)


def sim_ssm_step(cfg: VectorArrayConfig, ed: int, n_state: int,
                 batch: int = 1, dtype_bytes: int = 2,
                 arrays: int = 1) -> CycleReport:
    """Closed-form cost of a single-token state update for ED channels.

    Channels issue serially within a group of chained units; the array
    holds floor(rows * cols / units-per-channel) such groups.
    """
    if min(ed, n_state, batch) < 1 or arrays < 1:
        raise ValueError("step dims and arrays must be >= 1")
    units = math.ceil(n_state / cfg.lane_width_w)
    groups = (cfg.rows * cfg.cols) // units
    if groups < 1:
        raise ValueError(
            f"state width {n_state} needs {units} chained units but the "
            f"array has only {cfg.rows * cfg.cols}")
    lat = step_latency(cfg, n_state)
    compute = math.ceil(ed * batch / (groups * arrays)) * lat
    bytes_moved = dtype_bytes * batch * (2 * ed * n_state + 2 * n_state + 4 * ed)
    mac_ops = batch * (3 * ed * n_state + ed)
    return _finish(cfg, compute, 0, bytes_moved, mac_ops, arrays)


def sim_gemv(cfg: VectorArrayConfig, k: int, n: int, batch: int = 1,
             dtype_bytes: int = 2, arrays: int = 1) -> CycleReport:
    """Closed-form cost of ``batch`` vector-matrix products (K x N weights).

    Each output element streams K in W-wide chunks through one unit at one
    chunk per cycle; the final tree reduction drains once at the end.
    """
    if min(k, n, batch) < 1 or arrays < 1:
        raise ValueError("gemv dims and arrays must be >= 1")
    chunks = math.ceil(k / cfg.lane_width_w)
    rounds = math.ceil(n * batch / (cfg.rows * cfg.cols * arrays))
    drain = int(math.log2(cfg.lane_width_w))
    compute = rounds * chunks + drain
    bytes_moved = dtype_bytes * (k * n + batch * k + batch * n)
    return _finish(cfg, compute, drain, bytes_moved, batch * k * n, arrays)


# ---------------------------------------------------------------------------
# Functional (lane-level) simulation
# ---------------------------------------------------------------------------

def _tree_reduce(vals: np.ndarray) -> float:
    """Pairwise reduction in the order the adder tree performs it."""
    work = [float(v) for v in vals]
    while len(work) > 1:
        nxt = []
        for i in range(0, len(work) - 1, 2):
            nxt.append(work[i] + work[i + 1])
        if len(work) % 2:
            nxt.append(work[-1])
        work = nxt
    return work[0]


def functional_ssm_step(cfg: VectorArrayConfig, state: SsmState,
                        p: SsmTokenParams) -> tuple[SsmState, np.ndarray, int, dict]:
    """Lane-level simulation of one recurrence token.

    Each channel's N state cells map to chained units in W-wide contiguous
    slices; the output reduction runs the adder tree per unit and sums
    across the chain in hop order.  The cycle count is the makespan of the
    serial per-group channel schedule.
    """
    if state.x.shape != (p.ed, p.n_state):
        raise ValueError("state shape mismatch")
    w = cfg.lane_width_w
    units = math.ceil(p.n_state / w)
    groups = (cfg.rows * cfg.cols) // units
    if groups < 1:
        raise ValueError("state wider than the unit chain")
    x = state.x.copy()
    y = np.zeros(p.ed, dtype=np.float64)
    stats = {"sfu_ops": 0, "mac_ops": 0}
    lat = step_latency(cfg, p.n_state)
    group_end = [0] * groups
    for e in range(p.ed):
        g = e % groups
        start = group_end[g]
        group_end[g] = start + lat  # serial issue within the group
        a_bar = math.exp(float(p.delta[e]) * float(p.a_log[e]))
        stats["sfu_ops"] += 1
        u_bar = float(p.delta[e]) * float(p.u[e])
        chain = 0.0
        for unit in range(units):
            lo = unit * w
            hi = min(lo + w, p.n_state)
            t1 = p.b[lo:hi] * u_bar
            x[e, lo:hi] = a_bar * x[e, lo:hi] + t1
            prods = p.c[lo:hi] * x[e, lo:hi]
            chain += _tree_reduce(prods)
            stats["mac_ops"] += 3 * (hi - lo)
        y[e] = chain + float(p.d[e]) * float(p.u[e])
        stats["mac_ops"] += 1
    cycles = max(group_end)
    return SsmState(x), y, cycles, stats


def functional_gemv(cfg: VectorArrayConfig, x_vec: np.ndarray,
                    w_mat: np.ndarray) -> tuple[np.ndarray, int, dict]:
    """Lane-level simulation of a vector-matrix product.

    Output elements round-robin over the units; each unit accumulates its
    dot product chunk by chunk with a tree reduction per chunk.
    """
    if x_vec.ndim != 1 or w_mat.ndim != 2 or x_vec.shape[0] != w_mat.shape[0]:
        raise ValueError(f"shape mismatch: {x_vec.shape} x {w_mat.shape}")
    k, n = w_mat.shape
    w = cfg.lane_width_w
    units = cfg.rows * cfg.cols
    y = np.zeros(n, dtype=np.float64)
    stats = {"mac_ops": 0}
    chunks = math.ceil(k / w)
    rounds = math.ceil(n / units)
    for j in range(n):
        acc = 0.0
        for c in range(chunks):
            lo = c * w
            hi = min(lo + w, k)
            acc += _tree_reduce(x_vec[lo:hi] * w_mat[lo:hi, j])
            stats["mac_ops"] += hi - lo
        y[j] = acc
    cycles = rounds * chunks + int(math.log2(w))
    return y, cycles, stats
