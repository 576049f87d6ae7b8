"""End-to-end inference timing: prefill, decode, and phase disaggregation.

Kernel mapping policy: matrix kernels run on the systolic pool, streaming
kernels on the vector pool, and when a package carries both pools the idle
one assists at a fixed cross-dispatch efficiency.  Recurrence kernels on
packages without state-stationary support fall back to the package's scalar
vector throughput.  Per layer, compute time, DRAM service time (fused layer
traffic over the derated aggregate bandwidth), and the interposer transfer
of the layer's input activations add up.

Prefill is modeled per request: a batch of prompts is prefilled back to
back, so time-to-first-token for the batch is the completion of its last
prompt plus, on disaggregated systems, the exposed tail of the layer-wise
cache shipment to the decode package.  Decode advances all sequences one
token per step with the attention context growing as tokens accumulate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .config import (HardwareSpec, LayerSpec, ModelSpec, PackageSpec,
                     WorkloadSpec, cache_footprint)
from . import fabric
from . import kernels
from . import systolic
from . import vector

CROSS_DISPATCH_EFFICIENCY = 0.5
ELEMENTWISE_LANE_EFFICIENCY = 0.5


class MappingError(ValueError):
    """A kernel has no viable engine on the target package."""


@dataclass(frozen=True)
class PhaseMetrics:
    phase: str
    batch: int
    new_tokens: int
    context_len: int
    compute_s: float
    dram_s: float
    noi_s: float

    @property
    def total_s(self) -> float:
        return self.compute_s + self.dram_s + self.noi_s


@dataclass(frozen=True)
class RunResult:
    system: str
    model: str
    workload: str
    batch: int
    ttft_s: float
    tbt_s: float
    tokens_per_s: float
    cache_bytes: int
    feasible: bool
    prefill: PhaseMetrics
    decode: PhaseMetrics


def _pool_mac_rate(count: int, cfg) -> float:
    return count * cfg.macs_per_array * cfg.freq_hz if count else 0.0


def op_compute_time(op: kernels.KernelOp, pkg: PackageSpec) -> float:
    """Seconds to execute one kernel on the package's engine pools."""
    sys_n, sys_cfg = pkg.array_pool("systolic-compute")
    vec_n, vec_cfg = pkg.array_pool("vector-compute")
    sys_rate = _pool_mac_rate(sys_n, sys_cfg)
    vec_rate = _pool_mac_rate(vec_n, vec_cfg)

    def assisted(t: float, primary: float, secondary: float) -> float:
        if secondary <= 0:
            return t
        return t * primary / (primary + CROSS_DISPATCH_EFFICIENCY * secondary)

    if op.kind == "gemm":
        if sys_n:
            rep = systolic.sim_gemm(sys_cfg, op.m, op.k, op.n,
                                    dtype_bytes=op.dtype_bytes, arrays=sys_n)
            return assisted(rep.time_s, sys_rate, vec_rate)
        if vec_n:
            rep = vector.sim_gemv(vec_cfg, op.k, op.n, batch=op.m,
                                  dtype_bytes=op.dtype_bytes, arrays=vec_n)
            return rep.time_s
        raise MappingError(f"package {pkg.name!r} cannot run gemm kernels")

    if op.kind == "gemv":
        if vec_n:
            rep = vector.sim_gemv(vec_cfg, op.k, op.n, batch=op.batch,
                                  dtype_bytes=op.dtype_bytes, arrays=vec_n)
            return assisted(rep.time_s, vec_rate, sys_rate)
        if sys_n:
            rep = systolic.sim_gemm(sys_cfg, op.batch, op.k, op.n,
                                    dtype_bytes=op.dtype_bytes, arrays=sys_n)
            return rep.time_s
        raise MappingError(f"package {pkg.name!r} cannot run gemv kernels")

    if op.kind == "ssm_scan":
        if sys_n and sys_cfg.ssm_capable:
            rep = systolic.sim_ssm_scan(sys_cfg, op.ed, op.n_state, op.seq_len,
                                        batch=op.batch, dtype_bytes=op.dtype_bytes,
                                        arrays=sys_n)
            return rep.time_s
        if vec_n:
            # token-serial execution on the streaming pool
            rep = vector.sim_ssm_step(vec_cfg, op.ed, op.n_state, batch=op.batch,
                                      dtype_bytes=op.dtype_bytes, arrays=vec_n)
            return op.seq_len * rep.time_s
        if pkg.fallback_vector_flops > 0:
            return kernels.flops_of(op) / pkg.fallback_vector_flops
        raise MappingError(
            f"package {pkg.name!r} has no engine for the sequence recurrence")

    if op.kind == "ssm_step":
        if vec_n:
            rep = vector.sim_ssm_step(vec_cfg, op.ed, op.n_state, batch=op.batch,
                                      dtype_bytes=op.dtype_bytes, arrays=vec_n)
            return rep.time_s
        if sys_n and sys_cfg.ssm_capable:
            rep = systolic.sim_ssm_scan(sys_cfg, op.ed, op.n_state, 1,
                                        batch=op.batch, dtype_bytes=op.dtype_bytes,
                                        arrays=sys_n)
            return rep.time_s
        if pkg.fallback_vector_flops > 0:
            return kernels.flops_of(op) / pkg.fallback_vector_flops
        raise MappingError(
            f"package {pkg.name!r} has no engine for single-token updates")

    # elementwise / softmax: lanes of either pool at reduced efficiency
    rate = ELEMENTWISE_LANE_EFFICIENCY * (sys_rate + vec_rate)
    if rate <= 0:
        if pkg.fallback_vector_flops > 0:
            rate = pkg.fallback_vector_flops
        else:
            raise MappingError(f"package {pkg.name!r} cannot run {op.kind}")
    return kernels.flops_of(op) / rate


def _noi_bw(pkg: PackageSpec) -> float:
    if pkg.noi_link_bw > 0:
        return pkg.noi_link_bw
    return min(c.d2d_bw for c in pkg.compute_chiplets())


def layer_times(model: ModelSpec, pkg: PackageSpec, phase: str, seq_len: int,
                context_len: int, batch: int) -> list[tuple[float, float, float]]:
    """Per layer (compute_s, dram_s, noi_s) for one forward pass."""
    n_compute = len(pkg.compute_chiplets())
    noi_bw = _noi_bw(pkg) * n_compute
    sys_n, sys_cfg = pkg.array_pool("systolic-compute")
    out = []
    for i, layer in enumerate(model.layers):
        ops = kernels.lower_layer(layer, phase, seq_len, context_len, batch,
                                  model.d_model, layer_index=i,
                                  dtype_bytes=model.dtype_bytes)
        compute = sum(op_compute_time(op, pkg) for op in ops)
        if sys_n:
            switch = systolic.mode_switch_cycles(
                sys_cfg, [op.kind for op in ops
                          if op.kind in ("gemm", "gemv", "ssm_scan", "ssm_step")])
            compute += switch / sys_cfg.freq_hz
        nbytes = kernels.layer_memory_bytes(layer, phase, seq_len, context_len,
                                            batch, model.d_model,
                                            model.dtype_bytes)
        dram = fabric.dram_service_time(pkg.memory, nbytes, pkg.dram_efficiency)
        noi = 0.0
        if n_compute > 1:
            act_bytes = batch * seq_len * model.d_model * model.dtype_bytes
            noi = act_bytes / noi_bw + pkg.noi_hop_latency_ns * 1e-9
        out.append((compute, dram, noi))
    return out


def _layer_cache_bytes(layer: LayerSpec, batch: int, context_len: int,
                       dt: int) -> int:
    if layer.kind == "attention":
        return batch * context_len * 2 * layer.n_kv_heads * layer.head_dim * dt
    if layer.kind == "mamba2":
        state = layer.d_inner * layer.d_state
        conv = layer.conv_width * (layer.d_inner + 2 * layer.d_state)
        return batch * (state + conv) * dt
    return 0


def prefill_metrics(hw: HardwareSpec, model: ModelSpec, prompt_len: int,
                    batch: int) -> tuple[float, PhaseMetrics]:
    """TTFT for the batch and the per-request prefill phase breakdown.

    Prompts prefill one request at a time; on disaggregated systems the
    per-layer cache slices of the last request ship to the decode package
    overlapped with its prefill compute.
    """
    pkg = hw.package_for("prefill")
    per_layer = layer_times(model, pkg, "prefill", prompt_len, prompt_len, 1)
    compute = sum(t[0] for t in per_layer)
    dram = sum(t[1] for t in per_layer)
    noi = sum(t[2] for t in per_layer)
    request_s = compute + dram + noi
    ttft = batch * request_s
    if not hw.aggregated and hw.decode_package is not pkg:
        done = []
        t = 0.0
        for c, d, n in per_layer:
            t += c + d + n
            done.append(t)
        slices = [_layer_cache_bytes(l, 1, prompt_len, model.dtype_bytes)
                  for l in model.layers]
        _, exposed = fabric.overlap_cache_transfer(done, slices,
                                                   pkg.interpackage_link_bw)
        ttft += exposed
    metrics = PhaseMetrics(phase="prefill", batch=batch, new_tokens=prompt_len,
                           context_len=prompt_len, compute_s=compute,
                           dram_s=dram, noi_s=noi)
    return ttft, metrics


def decode_metrics(hw: HardwareSpec, model: ModelSpec, prompt_len: int,
                   gen_len: int, batch: int,
                   max_samples: int = 32) -> tuple[float, PhaseMetrics]:
    """Mean time between tokens and the aggregate decode breakdown.

    The attention context grows every step; step costs are evaluated at up
    to ``max_samples`` context points and held piecewise constant between
    them, which bounds the error to the sub-percent drift of the nearly
    linear context term.
    """
    pkg = hw.package_for("decode")
    stride = max(1, math.ceil(gen_len / max_samples))
    compute = dram = noi = 0.0
    step = 0
    while step < gen_len:
        span = min(stride, gen_len - step)
        ctx = prompt_len + step + 1
        per_layer = layer_times(model, pkg, "decode", 1, ctx, batch)
        compute += span * sum(t[0] for t in per_layer)
        dram += span * sum(t[1] for t in per_layer)
        noi += span * sum(t[2] for t in per_layer)
        step += span
    total = compute + dram + noi
    metrics = PhaseMetrics(phase="decode", batch=batch, new_tokens=gen_len,
                           context_len=prompt_len + gen_len, compute_s=compute,
                           dram_s=dram, noi_s=noi)
    return total / gen_len, metrics


def batch_feasible(hw: HardwareSpec, model: ModelSpec, prompt_len: int,
                   gen_len: int, batch: int) -> tuple[bool, int]:
    """Whether the batch fits in DRAM, and the full-context footprint.

    The decode package (or the single package of an aggregated system)
    must hold the weights plus the whole batch's caches at full context;
    a dedicated prefill package only ever holds one in-flight request.
    """
    full = cache_footprint(model, batch, prompt_len + gen_len)
    ok = full.total_bytes <= hw.package_for("decode").memory.capacity_bytes
    if not hw.aggregated and hw.prefill_package is not hw.decode_package \
            and hw.prefill_package is not None:
        single = cache_footprint(model, 1, prompt_len)
        ok = ok and (single.total_bytes
                     <= hw.prefill_package.memory.capacity_bytes)
    return ok, full.total_bytes


def run_end_to_end(hw: HardwareSpec, model: ModelSpec, workload: WorkloadSpec,
                   batch: int, max_samples: int = 32) -> RunResult:
    ttft, pre = prefill_metrics(hw, model, workload.prompt_len, batch)
    tbt, dec = decode_metrics(hw, model, workload.prompt_len, workload.gen_len,
                              batch, max_samples=max_samples)
    feasible, cache_bytes = batch_feasible(hw, model, workload.prompt_len,
                                           workload.gen_len, batch)
    total = ttft + dec.total_s
    return RunResult(system=hw.name, model=model.name, workload=workload.name,
                     batch=batch, ttft_s=ttft, tbt_s=tbt,
                     tokens_per_s=batch * workload.gen_len / total,
                     cache_bytes=cache_bytes, feasible=feasible,
                     prefill=pre, decode=dec)


def sweep_workload(hw: HardwareSpec, model: ModelSpec, workload: WorkloadSpec,
                   jobs: int = 1, max_samples: int = 32) -> list[RunResult]:
    """Evaluate every batch size; results are ordered by batch regardless of
    how many workers computed them."""
    batches = list(workload.batch_sizes)
    if jobs <= 1 or len(batches) <= 1:
        return [run_end_to_end(hw, model, workload, b, max_samples) for b in batches]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futs = [pool.submit(run_end_to_end, hw, model, workload, b, max_samples)
                for b in batches]
        return [f.result() for f in futs]
