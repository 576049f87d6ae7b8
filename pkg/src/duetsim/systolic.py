"""Cycle model of a dual-mode systolic array.

The array has two dataflows:

* output-stationary matrix mode: operands stream in skewed from the west and
  north edges, each PE accumulates one output element, results drain through
  the rows.  A tile costs ceil(K / depth) + (rows - 1) + (cols - 1) + rows
  cycles.
* state-stationary recurrence mode: each PE pins one (channel, state) cell of
  the recurrent state and runs a three-stage micro-pipeline per token, so the
  steady-state rate is one token every 3 cycles per tile with an O(rows +
  cols) fill.

Closed-form costs are used by the sweep and pipeline layers; the
``functional_*`` entry points simulate every PE every cycle and are the
oracle the closed forms are tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystolicConfig
from .reference import SsmState, SsmTokenParams


@dataclass(frozen=True)
class CycleReport:
    """Cost of one kernel on one engine (or a pool of identical engines)."""

    cycles: int
    compute_cycles: int
    fill_cycles: int
    stall_cycles: int
    mac_ops: int
    utilization: float
    freq_hz: float
    bytes_moved: int

    @property
    def time_s(self) -> float:
        return self.cycles / self.freq_hz


def _finish(cfg: SystolicConfig, compute: int, fill: int, bytes_moved: int,
            mac_ops: int, arrays: int) -> CycleReport:
    per_array_bytes = bytes_moved / arrays
    demand = math.ceil(per_array_bytes * cfg.freq_hz / cfg.sram_bw)
    stall = max(0, demand - compute)
    cycles = compute + stall
    util = mac_ops / (arrays * cfg.macs_per_array * cycles)
    return CycleReport(cycles=cycles, compute_cycles=compute, fill_cycles=fill,
                       stall_cycles=stall, mac_ops=mac_ops, utilization=util,
                       freq_hz=cfg.freq_hz, bytes_moved=bytes_moved)


def sim_gemm(cfg: SystolicConfig, m: int, k: int, n: int,
             dtype_bytes: int = 2, arrays: int = 1) -> CycleReport:
    """Closed-form matrix-mode cost for an M x K x N product.

    Tiles are processed back to back; a pool of ``arrays`` identical arrays
    splits the tile grid evenly.
    """
    if min(m, k, n) < 1 or arrays < 1:
        raise ValueError("gemm dims and arrays must be >= 1")
    tiles_m = math.ceil(m / cfg.rows)
    tiles_n = math.ceil(n / cfg.cols)
    tiles_per_array = math.ceil(tiles_m * tiles_n / arrays)
    fill_per_tile = (cfg.rows - 1) + (cfg.cols - 1) + cfg.rows
    per_tile = math.ceil(k / cfg.depth) + fill_per_tile
    compute = tiles_per_array * per_tile
    # operands re-stream once per tile along the orthogonal axis
    bytes_moved = dtype_bytes * (tiles_n * m * k + tiles_m * k * n + m * n)
    return _finish(cfg, compute, tiles_per_array * fill_per_tile,
                   bytes_moved, m * k * n, arrays)


def sim_ssm_scan(cfg: SystolicConfig, ed: int, n_state: int, seq_len: int,
                 batch: int = 1, dtype_bytes: int = 2,
                 arrays: int = 1) -> CycleReport:
    """Closed-form recurrence-mode cost for a length-L scan.

    Each (channel-tile, state-tile, batch) triple keeps its state resident
    and advances one token per 3 cycles after the diagonal fill.
    """
    if not cfg.ssm_capable:
        raise ValueError("array is not recurrence-capable")
    if min(ed, n_state, seq_len, batch) < 1 or arrays < 1:
        raise ValueError("scan dims and arrays must be >= 1")
    tiles = math.ceil(ed / cfg.rows) * math.ceil(n_state / cfg.cols) * batch
    tiles_per_array = math.ceil(tiles / arrays)
    fill = (cfg.rows - 1) + (cfg.cols - 1) + 3 + cfg.sfu_latency_cycles
    per_tile = fill + 3 * seq_len
    compute = tiles_per_array * per_tile
    # per tile and token: B and C enter the column edge, the per-channel
    # scalars enter the row edge; the state never leaves the array.
    bytes_moved = dtype_bytes * tiles * seq_len * (2 * cfg.cols + 3 * cfg.rows)
    mac_ops = 3 * batch * seq_len * ed * n_state
    return _finish(cfg, compute, tiles_per_array * fill, bytes_moved,
                   mac_ops, arrays)


def mode_switch_cycles(cfg: SystolicConfig, kinds: list[str]) -> int:
    """Reconfiguration cost of running a kernel sequence on one array."""
    matrix = {"gemm", "gemv"}
    switches = 0
    prev = None
    for kind in kinds:
        cur = "matrix" if kind in matrix else "recurrence"
        if prev is not None and cur != prev:
            switches += 1
        prev = cur
    return switches * cfg.mode_switch_cycles


# ---------------------------------------------------------------------------
# Functional (per-PE, per-cycle) simulation
# ---------------------------------------------------------------------------

def _require_functional(cfg: SystolicConfig):
    if cfg.depth != 1:
        raise ValueError("functional simulation supports depth-1 arrays only")


def functional_gemm(cfg: SystolicConfig, a: np.ndarray,
                    b: np.ndarray) -> tuple[np.ndarray, int, dict]:
    """Simulate matrix mode PE by PE and cycle by cycle.

    Returns the product, the cycle count, and instrumentation counters.
    The recurrence state registers are tracked and must never be written in
    matrix mode.
    """
    _require_functional(cfg)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch: {a.shape} x {b.shape}")
    m, k = a.shape
    n = b.shape[1]
    out = np.zeros((m, n), dtype=np.float64)
    stats = {"mac_ops": 0, "state_register_writes": 0}
    cycles = 0
    fill = (cfg.rows - 1) + (cfg.cols - 1) + cfg.rows
    for i0 in range(0, m, cfg.rows):
        for j0 in range(0, n, cfg.cols):
            rows_t = min(cfg.rows, m - i0)
            cols_t = min(cfg.cols, n - j0)
            acc = np.zeros((rows_t, cols_t), dtype=np.float64)
            # west operand A[i, c] reaches PE(i, j) at cycle c + i + j, as
            # does north operand B[c, j]; sweep the skewed wavefronts.
            for t in range(k + rows_t + cols_t - 2):
                for i in range(rows_t):
                    for j in range(cols_t):
                        c = t - i - j
                        if 0 <= c < k:
                            acc[i, j] += float(a[i0 + i, c]) * float(b[c, j0 + j])
                            stats["mac_ops"] += 1
            out[i0:i0 + rows_t, j0:j0 + cols_t] = acc
            cycles += k + fill
    return out, cycles, stats


def functional_ssm_scan(cfg: SystolicConfig, params: list[SsmTokenParams],
                        init: SsmState) -> tuple[SsmState, np.ndarray, int, dict]:
    """Simulate recurrence mode with explicit per-PE state registers.

    PE(i, j) holds cell (i, j) of its tile's state; token k occupies its
    three pipeline stages starting at cycle i + j + 3k.  Partial outputs
    accumulate west to east along each row and column tiles add at the
    east edge.  Returns the final state, the L x ED outputs, the cycle
    count, and counters (state register writes, SFU evaluations).
    """
    _require_functional(cfg)
    if not cfg.ssm_capable:
        raise ValueError("array is not recurrence-capable")
    if not params:
        raise ValueError("need at least one token")
    ed, n_state = params[0].ed, params[0].n_state
    if init.x.shape != (ed, n_state):
        raise ValueError("initial state shape mismatch")
    seq_len = len(params)
    x = init.x.copy()
    ys = np.zeros((seq_len, ed), dtype=np.float64)
    stats = {"state_register_writes": 0, "sfu_ops": 0, "mac_ops": 0}
    cycles = 0
    fill = (cfg.rows - 1) + (cfg.cols - 1) + 3 + cfg.sfu_latency_cycles
    for i0 in range(0, ed, cfg.rows):
        rows_t = min(cfg.rows, ed - i0)
        for j0 in range(0, n_state, cfg.cols):
            cols_t = min(cfg.cols, n_state - j0)
            for kk, p in enumerate(params):
                # row-edge SFU discretizes the transition once per channel
                a_bar = np.exp(p.delta[i0:i0 + rows_t] * p.a_log[i0:i0 + rows_t])
                stats["sfu_ops"] += rows_t
                u_bar = p.delta[i0:i0 + rows_t] * p.u[i0:i0 + rows_t]
                for i in range(rows_t):
                    if j0 == 0:
                        # feedthrough term injected at the west edge
                        ys[kk, i0 + i] += float(p.d[i0 + i]) * float(p.u[i0 + i])
                    psum = 0.0
                    for j in range(cols_t):
                        t1 = float(p.b[j0 + j]) * float(u_bar[i])
                        x[i0 + i, j0 + j] = float(a_bar[i]) * x[i0 + i, j0 + j] + t1
                        psum += float(p.c[j0 + j]) * x[i0 + i, j0 + j]
                        stats["state_register_writes"] += 1
                        stats["mac_ops"] += 3
                    ys[kk, i0 + i] += psum
            cycles += fill + 3 * seq_len
    return SsmState(x), ys, cycles, stats
