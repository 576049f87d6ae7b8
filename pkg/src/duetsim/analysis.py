"""Roofline classification and design-space exploration sweeps.

The roofline model places a kernel (or a fused layer) by its operational
intensity against a machine's peak throughput and memory bandwidth.  The
DSE sweeps run the closed-form engine models over a grid of array shapes
and report the latency/area Pareto frontier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import LayerSpec, SystolicConfig, VectorArrayConfig
from . import kernels
from . import systolic
from . import vector


@dataclass(frozen=True)
class RooflinePoint:
    label: str
    flops: int
    bytes_moved: int
    oi: float
    attainable_flops: float
    bound: str  # "compute" or "memory"


def ridge_point(peak_flops: float, mem_bw: float) -> float:
    """Operational intensity at which the machine leaves the bandwidth slope."""
    return peak_flops / mem_bw


def roofline_classify(label: str, flops: int, bytes_moved: int,
                      peak_flops: float, mem_bw: float) -> RooflinePoint:
    if flops < 0 or bytes_moved <= 0:
        raise ValueError("need positive byte traffic and non-negative flops")
    oi = flops / bytes_moved
    attainable = min(peak_flops, oi * mem_bw)
    bound = "compute" if oi >= ridge_point(peak_flops, mem_bw) else "memory"
    return RooflinePoint(label, flops, bytes_moved, oi, attainable, bound)


def layer_roofline(layer: LayerSpec, phase: str, seq_len: int, context_len: int,
                   batch: int, d_model: int, peak_flops: float, mem_bw: float,
                   label: str = "") -> RooflinePoint:
    """Roofline placement of one fused layer at DRAM-traffic granularity."""
    ops = kernels.lower_layer(layer, phase, seq_len, context_len, batch, d_model)
    flops = sum(kernels.flops_of(op) for op in ops)
    nbytes = kernels.layer_memory_bytes(layer, phase, seq_len, context_len,
                                        batch, d_model)
    return roofline_classify(label or f"{layer.kind}/{phase}", flops, nbytes,
                             peak_flops, mem_bw)


# ---------------------------------------------------------------------------
# Pareto utilities
# ---------------------------------------------------------------------------

def pareto_mask(points: list[tuple[float, float]]) -> list[bool]:
    """Non-domination mask for (latency, area) minimization.

    q dominates p when q is no worse on both axes and strictly better on
    one; exact ties on both axes are mutually non-dominating, so equally
    good corner cases are all kept.
    """
    mask = []
    for i, (lat_p, area_p) in enumerate(points):
        dominated = False
        for j, (lat_q, area_q) in enumerate(points):
            if j == i:
                continue
            if (lat_q <= lat_p and area_q <= area_p
                    and (lat_q < lat_p or area_q < area_p)):
                dominated = True
                break
        mask.append(not dominated)
    return mask


# ---------------------------------------------------------------------------
# Design-space sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DsePoint:
    label: str
    rows: int
    cols: int
    lane_width_w: int  # 0 for systolic points
    area_macs: int
    compute_cycles: int
    total_cycles: int
    utilization: float
    on_frontier: bool = False


SYSTOLIC_SWEEP_SIZES = (8, 16, 32, 64, 128, 256)
VECTOR_SWEEP_SIZES = (4, 8, 16, 32)
VECTOR_SWEEP_WIDTHS = (8, 16, 32, 64)


def dse_sweep_systolic(ed: int = 16384, n_state: int = 256, seq_len: int = 2048,
                       sizes=SYSTOLIC_SWEEP_SIZES, sram_bw: float = 256e9,
                       freq_hz: float = 700e6) -> list[DsePoint]:
    """Sweep array shapes on the long-sequence recurrence scan.

    The frontier is taken over compute cycles so the comparison isolates
    the dataflow; bandwidth-stalled totals are reported alongside.
    """
    raw = []
    for rows in sizes:
        for cols in sizes:
            cfg = SystolicConfig(rows=rows, cols=cols, freq_hz=freq_hz,
                                 sram_bw=sram_bw, buffer_bytes=1 << 20)
            rep = systolic.sim_ssm_scan(cfg, ed, n_state, seq_len)
            raw.append((f"{rows}x{cols}", rows, cols, 0, rows * cols, rep))
    return _finalize(raw)


def dse_sweep_vector(ed: int = 16384, n_state: int = 64, batch: int = 1,
                     sizes=VECTOR_SWEEP_SIZES, widths=VECTOR_SWEEP_WIDTHS,
                     sram_bw: float = 1024e9,
                     freq_hz: float = 700e6) -> list[DsePoint]:
    """Sweep unit-array shapes and lane widths on the single-token update."""
    raw = []
    for w in widths:
        for rows in sizes:
            for cols in sizes:
                cfg = VectorArrayConfig(lane_width_w=w, rows=rows, cols=cols,
                                        freq_hz=freq_hz, sram_bw=sram_bw,
                                        buffer_bytes=1 << 20)
                units = math.ceil(n_state / w)
                if rows * cols < units:
                    continue  # state does not fit one chain
                rep = vector.sim_ssm_step(cfg, ed, n_state, batch=batch)
                raw.append((f"{rows}x{cols}/w{w}", rows, cols, w,
                            w * rows * cols, rep))
    return _finalize(raw)


def _finalize(raw) -> list[DsePoint]:
    mask = pareto_mask([(rep.compute_cycles, area)
                        for (_, _, _, _, area, rep) in raw])
    points = []
    for (label, rows, cols, w, area, rep), keep in zip(raw, mask):
        points.append(DsePoint(label=label, rows=rows, cols=cols,
                               lane_width_w=w, area_macs=area,
                               compute_cycles=rep.compute_cycles,
                               total_cycles=rep.cycles,
                               utilization=rep.utilization,
                               on_frontier=keep))
    return points
