"""Phase-specific kernel lowering with FLOP and byte accounting.

A ``KernelOp`` is the shared currency between the engine cycle models, the
roofline analyzer, and the inference pipeline.  Costs are analytical:

* FLOPs: 2 per MAC for matrix kernels; 6 per (channel, state) cell per token
  for the recurrence (three multiplies and three adds across the state update
  and the output reduction) plus 2 per channel for the feedthrough term;
  5 per element for softmax (max, subtract, exp, sum, divide).
* Bytes ("cold" policy): every operand read and result written once at the
  kernel's datatype width.  The prefill recurrence is the exception: its
  state and elementwise intermediates stay inside the array, so only the
  streamed per-token parameters and outputs count.  The decode recurrence
  additionally reads and writes the full state per token.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

from .config import LayerSpec

KINDS = ("gemm", "gemv", "ssm_scan", "ssm_step", "elementwise", "softmax")
PHASES = ("prefill", "decode")


@dataclass(frozen=True)
class KernelOp:
    kind: str
    phase: str
    layer_index: int = 0
    dtype_bytes: int = 2
    # gemm
    m: int = 0
    # gemm / gemv
    k: int = 0
    n: int = 0
    # gemv / ssm_* batch
    batch: int = 1
    # ssm_scan / ssm_step
    ed: int = 0
    n_state: int = 0
    seq_len: int = 0
    # elementwise
    count: int = 0
    # softmax
    rows: int = 0
    cols: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.phase not in PHASES:
            raise ValueError(f"unknown phase {self.phase!r}")
        if self.phase == "prefill" and self.kind in ("gemv", "ssm_step"):
            raise ValueError(f"{self.kind} kernels are decode-only")
        if self.phase == "decode" and self.kind in ("gemm", "ssm_scan"):
            raise ValueError(f"{self.kind} kernels are prefill-only")
        dims = {
            "gemm": ("m", "k", "n"),
            "gemv": ("k", "n", "batch"),
            "ssm_scan": ("ed", "n_state", "seq_len", "batch"),
            "ssm_step": ("ed", "n_state", "batch"),
            "elementwise": ("count",),
            "softmax": ("rows", "cols"),
        }[self.kind]
        for d in dims:
            if getattr(self, d) < 1:
                raise ValueError(f"{self.kind} kernel: {d} must be >= 1")


def flops_of(op: KernelOp) -> int:
    if op.kind == "gemm":
        return 2 * op.m * op.k * op.n
    if op.kind == "gemv":
        return 2 * op.batch * op.k * op.n
    if op.kind == "ssm_scan":
        return op.batch * op.seq_len * (6 * op.ed * op.n_state + 2 * op.ed)
    if op.kind == "ssm_step":
        return op.batch * (6 * op.ed * op.n_state + 2 * op.ed)
    if op.kind == "elementwise":
        return op.count
    return 5 * op.rows * op.cols


def bytes_of(op: KernelOp, policy: str = "cold") -> int:
    if policy not in ("cold", "weights-resident"):
        raise ValueError(f"unknown byte policy {policy!r}")
    dt = op.dtype_bytes
    if op.kind == "gemm":
        weights = 0 if policy == "weights-resident" else op.k * op.n
        return dt * (op.m * op.k + weights + op.m * op.n)
    if op.kind == "gemv":
        weights = 0 if policy == "weights-resident" else op.k * op.n
        return dt * (weights + op.batch * op.k + op.batch * op.n)
    if op.kind == "ssm_scan":
        # state-stationary: no state traffic, elementwise intermediates fused.
        per_token = 4 * op.ed + 2 * op.n_state
        return dt * op.batch * op.seq_len * per_token
    if op.kind == "ssm_step":
        per_token = 2 * op.ed * op.n_state + 4 * op.ed + 2 * op.n_state
        return dt * op.batch * per_token
    if op.kind == "elementwise":
        return 2 * dt * op.count
    return 2 * dt * op.rows * op.cols


def operational_intensity(op: KernelOp, policy: str = "cold") -> float:
    return flops_of(op) / bytes_of(op, policy)


# ---------------------------------------------------------------------------
# Layer lowering
# ---------------------------------------------------------------------------

def _mamba_proj_width(layer: LayerSpec) -> int:
    # fused input projection: gate + conv input + B + C + delta-per-head
    return 2 * layer.d_inner + 2 * layer.d_state + layer.n_heads


def lower_layer(layer: LayerSpec, phase: str, seq_len: int, context_len: int,
                batch: int, d_model: int, layer_index: int = 0,
                dtype_bytes: int = 2) -> list[KernelOp]:
    """Lower one model layer into kernel operations for the given phase.

    ``seq_len`` is the number of new tokens processed (the prompt length in
    prefill, 1 in decode); ``context_len`` is the total visible context used
    by attention kernels.
    """
    if phase not in PHASES:
        raise ValueError(f"unknown phase {phase!r}")
    if phase == "decode" and seq_len != 1:
        raise ValueError("decode lowering requires seq_len = 1")
    if context_len < seq_len:
        raise ValueError("context_len must cover seq_len")
    common = dict(phase=phase, layer_index=layer_index, dtype_bytes=dtype_bytes)
    tokens = batch * seq_len
    ops: list[KernelOp] = []

    if layer.kind == "mamba2":
        inner = layer.d_inner
        proj = _mamba_proj_width(layer)
        if phase == "prefill":
            ops.append(KernelOp("gemm", m=tokens, k=layer.d_model, n=proj, **common))
            ops.append(KernelOp("elementwise",
                                count=tokens * inner * layer.conv_width, **common))
            ops.append(KernelOp("ssm_scan", ed=inner, n_state=layer.d_state,
                                seq_len=seq_len, batch=batch, **common))
            ops.append(KernelOp("elementwise", count=tokens * inner, **common))
            ops.append(KernelOp("gemm", m=tokens, k=inner, n=layer.d_model, **common))
        else:
            ops.append(KernelOp("gemv", k=layer.d_model, n=proj, batch=batch, **common))
            ops.append(KernelOp("elementwise",
                                count=batch * inner * layer.conv_width, **common))
            ops.append(KernelOp("ssm_step", ed=inner, n_state=layer.d_state,
                                batch=batch, **common))
            ops.append(KernelOp("elementwise", count=batch * inner, **common))
            ops.append(KernelOp("gemv", k=inner, n=layer.d_model, batch=batch, **common))
    elif layer.kind == "attention":
        h, kv, hd = layer.n_heads, layer.n_kv_heads, layer.head_dim
        qkv_width = (h + 2 * kv) * hd
        if phase == "prefill":
            ops.append(KernelOp("gemm", m=tokens, k=d_model, n=qkv_width, **common))
            ops.append(KernelOp("gemm", m=batch * h * seq_len, k=hd, n=context_len,
                                **common))
            ops.append(KernelOp("softmax", rows=batch * h * seq_len, cols=context_len,
                                **common))
            ops.append(KernelOp("gemm", m=batch * h * seq_len, k=context_len, n=hd,
                                **common))
            ops.append(KernelOp("gemm", m=tokens, k=h * hd, n=d_model, **common))
        else:
            ops.append(KernelOp("gemv", k=d_model, n=qkv_width, batch=batch, **common))
            ops.append(KernelOp("gemv", k=hd, n=context_len, batch=batch * h, **common))
            ops.append(KernelOp("softmax", rows=batch * h, cols=context_len, **common))
            ops.append(KernelOp("gemv", k=context_len, n=hd, batch=batch * h, **common))
            ops.append(KernelOp("gemv", k=h * hd, n=d_model, batch=batch, **common))
    elif layer.kind == "mlp":
        if phase == "prefill":
            ops.append(KernelOp("gemm", m=tokens, k=layer.d_model, n=layer.d_ff,
                                **common))
            ops.append(KernelOp("elementwise", count=tokens * layer.d_ff, **common))
            ops.append(KernelOp("gemm", m=tokens, k=layer.d_ff, n=layer.d_model,
                                **common))
        else:
            ops.append(KernelOp("gemv", k=layer.d_model, n=layer.d_ff, batch=batch,
                                **common))
            ops.append(KernelOp("elementwise", count=batch * layer.d_ff, **common))
            ops.append(KernelOp("gemv", k=layer.d_ff, n=layer.d_model, batch=batch,
                                **common))
    else:
        raise ValueError(f"unsupported layer kind {layer.kind!r}")
    return ops


def layer_memory_bytes(layer: LayerSpec, phase: str, seq_len: int,
                       context_len: int, batch: int, d_model: int,
                       dtype_bytes: int = 2) -> int:
    """Off-chip (DRAM) traffic of one layer under on-chip fusion.

    Weights and layer input/output activations stream once; attention reads
    and appends its KV cache; the recurrence reads/writes its state in decode
    and writes it once in prefill.  Intra-layer intermediates (scores,
    softmax, projections feeding the recurrence) stay in the package SRAM.
    """
    dt = dtype_bytes
    tokens = batch * seq_len
    total = layer.weight_params(d_model) * dt
    total += 2 * tokens * d_model * dt  # layer input + output
    if layer.kind == "attention":
        kv_row = 2 * layer.n_kv_heads * layer.head_dim * dt
        total += tokens * kv_row  # cache append
        if phase == "decode":
            total += batch * context_len * kv_row  # cache read
    elif layer.kind == "mamba2":
        state = layer.d_inner * layer.d_state * dt
        if phase == "prefill":
            # streamed per-token scan parameters plus the final state write
            total += tokens * (2 * layer.d_state + layer.n_heads) * dt
            total += batch * state
        else:
            total += 2 * batch * state  # state read + write
    return total


# ---------------------------------------------------------------------------
# Trace serialization
# ---------------------------------------------------------------------------

def ops_to_jsonl(ops: list[KernelOp]) -> str:
    """One kernel per line, for debugging dumps."""
    lines = []
    for op in ops:
        d = {k: v for k, v in asdict(op).items() if v not in (0, "") or k in
             ("kind", "phase", "layer_index")}
        d["flops"] = flops_of(op)
        d["bytes"] = bytes_of(op)
        lines.append(json.dumps(d, sort_keys=True))
    return "\n".join(lines) + "\n"


def ops_from_jsonl(text: str) -> list[KernelOp]:
    ops = []
    for line in text.splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        d.pop("flops", None)
        d.pop("bytes", None)
        defaults = dict(batch=1)
        ops.append(KernelOp(**{**defaults, **d}))
    return ops
