"""Hardware, model, and workload descriptors.

Descriptors are TOML files (see ``hw/``, ``models/``, ``workloads/`` in the
repository root).  Loading validates every invariant and resolves suffixed
quantity literals to plain numbers; the resulting dataclasses are immutable
and safe to share across concurrent simulation scenarios.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .units import parse_bandwidth, parse_bytes, parse_frequency, parse_quantity


class SpecError(ValueError):
    """A descriptor failed to parse or violated an invariant."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise SpecError(msg)


# ---------------------------------------------------------------------------
# Array configurations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SystolicConfig:
    """A single systolic array: rows x cols grid of MAC PEs.

    ``depth`` > 1 models dot-product PEs (tensor-core style units that retire
    ``depth`` MACs per PE per cycle); the shipped GPU descriptor uses it.
    ``ssm_capable`` marks arrays carrying the two extra state registers that
    enable the state-stationary recurrence mode.
    """

    rows: int
    cols: int
    freq_hz: float
    sram_bw: float
    buffer_bytes: int
    sfu_count: int = 1
    sfu_latency_cycles: int = 0
    mode_switch_cycles: int = 1
    depth: int = 1
    ssm_capable: bool = True

    def __post_init__(self):
        _require(self.rows >= 1 and self.cols >= 1, "systolic rows/cols must be >= 1")
        _require(self.depth >= 1, "systolic depth must be >= 1")
        _require(self.freq_hz > 0, "systolic freq_hz must be > 0")
        _require(self.sram_bw > 0, "systolic sram_bw must be > 0")
        _require(self.sfu_count >= 1, "systolic sfu_count must be >= 1")
        _require(self.sfu_latency_cycles >= 0, "sfu_latency_cycles must be >= 0")

    @property
    def macs_per_array(self) -> int:
        return self.rows * self.cols * self.depth


@dataclass(frozen=True)
class VectorArrayConfig:
    """An array of W-wide vector units (rows x cols units)."""

    lane_width_w: int
    rows: int
    cols: int
    freq_hz: float
    sram_bw: float
    buffer_bytes: int
    sfu_latency_cycles: int = 0

    def __post_init__(self):
        w = self.lane_width_w
        _require(w >= 1 and (w & (w - 1)) == 0, "lane_width_w must be a power of two")
        _require(self.rows * self.cols >= 1, "vector rows*cols must be >= 1")
        _require(self.freq_hz > 0, "vector freq_hz must be > 0")
        _require(self.sram_bw > 0, "vector sram_bw must be > 0")
        _require(self.sfu_latency_cycles >= 0, "sfu_latency_cycles must be >= 0")

    @property
    def macs_per_array(self) -> int:
        return self.lane_width_w * self.rows * self.cols


ArrayConfig = Union[SystolicConfig, VectorArrayConfig]


# ---------------------------------------------------------------------------
# Package hierarchy
# ---------------------------------------------------------------------------

CHIPLET_KINDS = ("systolic-compute", "vector-compute", "memory-phy")


@dataclass(frozen=True)
class ChipletSpec:
    kind: str
    arrays_per_chiplet: int
    array_config: Optional[ArrayConfig]
    d2d_bw: float
    local_sram_bytes: int
    grid: tuple[int, int]
    name: str = ""

    def __post_init__(self):
        _require(self.kind in CHIPLET_KINDS, f"unknown chiplet kind {self.kind!r}")
        if self.kind == "memory-phy":
            _require(self.arrays_per_chiplet == 0,
                     "memory-phy chiplets must have arrays_per_chiplet = 0")
        else:
            _require(self.arrays_per_chiplet >= 1,
                     f"{self.kind} chiplet needs arrays_per_chiplet >= 1")
            _require(self.array_config is not None,
                     f"{self.kind} chiplet needs an [chiplet.array] table")
            if self.kind == "systolic-compute":
                _require(isinstance(self.array_config, SystolicConfig),
                         "systolic-compute chiplet carries a vector array config")
            else:
                _require(isinstance(self.array_config, VectorArrayConfig),
                         "vector-compute chiplet carries a systolic array config")
        _require(self.d2d_bw > 0, "chiplet d2d_bw must be > 0")

    @property
    def is_compute(self) -> bool:
        return self.kind != "memory-phy"


@dataclass(frozen=True)
class MemorySpec:
    stacks: int
    bw_per_stack: float
    capacity_per_stack: int
    access_latency_ns: float = 0.0

    def __post_init__(self):
        _require(self.stacks >= 1, "memory stacks must be >= 1")
        _require(self.bw_per_stack > 0, "memory bw_per_stack must be > 0")
        _require(self.capacity_per_stack > 0, "memory capacity_per_stack must be > 0")

    @property
    def aggregate_bw(self) -> float:
        return self.stacks * self.bw_per_stack

    @property
    def capacity_bytes(self) -> int:
        return self.stacks * self.capacity_per_stack


@dataclass(frozen=True)
class PackageSpec:
    name: str
    chiplets: tuple[ChipletSpec, ...]
    memory: MemorySpec
    noi_link_bw: float = 0.0  # 0 -> use the attached chiplet's d2d_bw
    interpackage_link_bw: float = 0.9e12
    flop_per_mac: int = 1
    noi_hop_latency_ns: float = 10.0
    dram_efficiency: float = 0.85
    # Throughput of the scalar/SFU fallback path used for recurrence kernels
    # on packages whose compute units lack the state-stationary extensions.
    fallback_vector_flops: float = 0.0

    def __post_init__(self):
        _require(len(self.chiplets) >= 1, f"package {self.name!r} has no chiplets")
        _require(self.flop_per_mac in (1, 2), "flop_per_mac must be 1 or 2")
        _require(any(c.is_compute for c in self.chiplets),
                 f"package {self.name!r} has no compute chiplets")
        _require(self.memory.capacity_bytes > 0,
                 f"package {self.name!r} has zero memory capacity")
        _require(0 < self.dram_efficiency <= 1, "dram_efficiency must be in (0, 1]")
        seen = set()
        for c in self.chiplets:
            _require(c.grid not in seen,
                     f"package {self.name!r}: duplicate grid position {c.grid}")
            seen.add(c.grid)
        if len(self.chiplets) > 1:
            _require(any(c.kind == "memory-phy" for c in self.chiplets),
                     f"package {self.name!r}: multi-chiplet package needs a "
                     "memory-phy chiplet")
            self._check_reachability()

    def _check_reachability(self) -> None:
        # every compute chiplet must reach a memory-phy endpoint over the mesh
        occupied = {c.grid for c in self.chiplets}
        mem = {c.grid for c in self.chiplets if c.kind == "memory-phy"}
        frontier = list(mem)
        reach = set(mem)
        while frontier:
            r, c = frontier.pop()
            for nb in ((r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)):
                if nb in occupied and nb not in reach:
                    reach.add(nb)
                    frontier.append(nb)
        unreachable = [c.name or str(c.grid) for c in self.chiplets
                       if c.is_compute and c.grid not in reach]
        _require(not unreachable,
                 f"package {self.name!r}: compute chiplets unreachable from any "
                 f"memory-phy chiplet: {unreachable}")

    def compute_chiplets(self, kind: Optional[str] = None) -> list[ChipletSpec]:
        out = [c for c in self.chiplets if c.is_compute]
        if kind is not None:
            out = [c for c in out if c.kind == kind]
        return out

    def array_pool(self, kind: str) -> tuple[int, Optional[ArrayConfig]]:
        """Total array count and the (uniform) array config for one compute kind."""
        chiplets = self.compute_chiplets(kind)
        if not chiplets:
            return 0, None
        cfgs = {c.array_config for c in chiplets}
        _require(len(cfgs) == 1,
                 f"package {self.name!r}: mixed {kind} array configs are unsupported")
        return sum(c.arrays_per_chiplet for c in chiplets), chiplets[0].array_config


@dataclass(frozen=True)
class HardwareSpec:
    prefill_package: Optional[PackageSpec]
    decode_package: Optional[PackageSpec]
    aggregated: bool = False
    name: str = ""

    def __post_init__(self):
        _require(self.prefill_package is not None or self.decode_package is not None,
                 "hardware spec needs at least one package")
        if self.aggregated:
            _require(self.prefill_package is self.decode_package,
                     "aggregated systems use exactly one package for both phases")

    def package_for(self, phase: str) -> PackageSpec:
        pkg = self.prefill_package if phase == "prefill" else self.decode_package
        _require(pkg is not None, f"hardware {self.name!r} has no {phase} package")
        return pkg


# ---------------------------------------------------------------------------
# Model and workload descriptors
# ---------------------------------------------------------------------------

LAYER_KINDS = ("mamba2", "attention", "mlp")


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    # mamba2
    d_model: int = 0
    d_state: int = 0
    n_heads: int = 0
    head_dim: int = 0
    expand_factor: int = 2
    conv_width: int = 4
    # attention reuses n_heads / head_dim
    n_kv_heads: int = 0
    # mlp reuses d_model
    d_ff: int = 0

    def __post_init__(self):
        _require(self.kind in LAYER_KINDS, f"unknown layer kind {self.kind!r}")
        if self.kind == "mamba2":
            for f in ("d_model", "d_state", "n_heads", "head_dim", "expand_factor",
                      "conv_width"):
                _require(getattr(self, f) >= 1, f"mamba2 layer: {f} must be >= 1")
        elif self.kind == "attention":
            for f in ("n_heads", "n_kv_heads", "head_dim"):
                _require(getattr(self, f) >= 1, f"attention layer: {f} must be >= 1")
            _require(self.n_heads % self.n_kv_heads == 0,
                     "attention layer: n_heads must be divisible by n_kv_heads")
        else:
            for f in ("d_model", "d_ff"):
                _require(getattr(self, f) >= 1, f"mlp layer: {f} must be >= 1")

    @property
    def d_inner(self) -> int:
        """Expanded channel count of a mamba2 layer."""
        return self.n_heads * self.head_dim

    def weight_params(self, d_model: int) -> int:
        """Parameter count of this layer given the model embedding width."""
        if self.kind == "mamba2":
            inner = self.d_inner
            in_proj = self.d_model * (2 * inner + 2 * self.d_state + self.n_heads)
            conv = self.conv_width * (inner + 2 * self.d_state)
            out_proj = inner * self.d_model
            extra = 3 * self.n_heads + self.d_model
            return in_proj + conv + out_proj + extra
        if self.kind == "attention":
            q = d_model * self.n_heads * self.head_dim
            kv = 2 * d_model * self.n_kv_heads * self.head_dim
            out = self.n_heads * self.head_dim * d_model
            return q + kv + out
        return 2 * self.d_model * self.d_ff


@dataclass(frozen=True)
class ModelSpec:
    name: str
    layers: tuple[LayerSpec, ...]
    vocab_size: int
    d_model: int
    dtype_bytes: int = 2

    def __post_init__(self):
        _require(len(self.layers) >= 1, "model has no layers")
        _require(self.dtype_bytes == 2, "only 16-bit datatypes are modeled")
        _require(self.vocab_size >= 1 and self.d_model >= 1,
                 "vocab_size and d_model must be >= 1")

    @property
    def weight_param_count(self) -> int:
        blocks = sum(l.weight_params(self.d_model) for l in self.layers)
        embeddings = 2 * self.vocab_size * self.d_model  # embedding + lm head
        return blocks + embeddings

    @property
    def weight_bytes(self) -> int:
        return self.weight_param_count * self.dtype_bytes


@dataclass(frozen=True)
class WorkloadSpec:
    name: str
    prompt_len: int
    gen_len: int
    batch_sizes: tuple[int, ...]

    def __post_init__(self):
        _require(self.prompt_len >= 1, "prompt_len must be >= 1")
        _require(self.gen_len >= 1, "gen_len must be >= 1")
        _require(len(self.batch_sizes) >= 1, "batch_sizes must be non-empty")
        _require(list(self.batch_sizes) == sorted(self.batch_sizes),
                 "batch_sizes must be ascending")
        _require(all(b >= 1 for b in self.batch_sizes), "batch sizes must be >= 1")


# ---------------------------------------------------------------------------
# Derived static quantities
# ---------------------------------------------------------------------------

def peak_flops(pkg: PackageSpec) -> float:
    """FP16 peak of a package: sum over compute chiplets of array MAC lanes
    times frequency times the package's FLOP-per-MAC convention."""
    total = 0.0
    for c in pkg.compute_chiplets():
        total += c.arrays_per_chiplet * c.array_config.macs_per_array \
            * c.array_config.freq_hz
    return total * pkg.flop_per_mac


def aggregate_bandwidth(pkg: PackageSpec) -> float:
    """Aggregate DRAM bandwidth in bytes/second."""
    return pkg.memory.aggregate_bw


@dataclass(frozen=True)
class CacheFootprint:
    """Memory footprint of one in-flight batch.

    ``kv_bytes`` grows with both batch and context length; ``ssm_state_bytes``
    (recurrent state plus conv state) grows with batch only.  ``total_bytes``
    adds the resident model weights, i.e. the DRAM capacity a package must
    provide to hold the batch.
    """

    kv_bytes: int
    ssm_state_bytes: int
    weight_bytes: int

    @property
    def cache_bytes(self) -> int:
        return self.kv_bytes + self.ssm_state_bytes

    @property
    def total_bytes(self) -> int:
        return self.kv_bytes + self.ssm_state_bytes + self.weight_bytes


def cache_footprint(model: ModelSpec, batch: int, context_len: int) -> CacheFootprint:
    _require(batch >= 1 and context_len >= 1, "batch and context_len must be >= 1")
    dt = model.dtype_bytes
    kv = 0
    ssm = 0
    for layer in model.layers:
        if layer.kind == "attention":
            kv += 2 * layer.n_kv_heads * layer.head_dim * dt
        elif layer.kind == "mamba2":
            state = layer.d_inner * layer.d_state
            conv = layer.conv_width * (layer.d_inner + 2 * layer.d_state)
            ssm += (state + conv) * dt
    return CacheFootprint(
        kv_bytes=batch * context_len * kv,
        ssm_state_bytes=batch * ssm,
        weight_bytes=model.weight_bytes,
    )


# ---------------------------------------------------------------------------
# TOML loading
# ---------------------------------------------------------------------------

def _load_toml(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise SpecError(f"descriptor not found: {path}")
    try:
        with open(path, "rb") as f:
            return _toml.load(f)
    except _toml.TOMLDecodeError as e:
        raise SpecError(f"{path}: parse error: {e}") from e


def _array_config_from_dict(d: dict) -> ArrayConfig:
    kind = d.get("type", "systolic")
    common = dict(
        rows=int(d["rows"]),
        cols=int(d["cols"]),
        freq_hz=parse_frequency(d["freq"]),
        sram_bw=parse_bandwidth(d["sram_bw"]),
        buffer_bytes=parse_bytes(d.get("buffer_bytes", "1MB")),
        sfu_latency_cycles=int(d.get("sfu_latency_cycles", 0)),
    )
    if kind == "systolic":
        return SystolicConfig(
            sfu_count=int(d.get("sfu_count", 1)),
            mode_switch_cycles=int(d.get("mode_switch_cycles", 1)),
            depth=int(d.get("depth", 1)),
            ssm_capable=bool(d.get("ssm_capable", True)),
            **common,
        )
    if kind == "vector":
        return VectorArrayConfig(lane_width_w=int(d["lane_width"]), **common)
    raise SpecError(f"unknown array type {kind!r}")


def _chiplets_from_entries(entries: list[dict], pkg_name: str) -> tuple[ChipletSpec, ...]:
    chiplets = []
    auto_row = 0
    for i, entry in enumerate(entries):
        try:
            kind = entry["kind"]
            count = int(entry.get("count", 1))
            arr = entry.get("array")
            cfg = _array_config_from_dict(arr) if arr is not None else None
            base = dict(
                kind=kind,
                arrays_per_chiplet=int(entry.get("arrays_per_chiplet", 0)),
                array_config=cfg,
                d2d_bw=parse_bandwidth(entry.get("d2d_bw", "256GB/s")),
                local_sram_bytes=parse_bytes(entry.get("local_sram_bytes", "0")),
            )
            if "grid" in entry:
                _require(count == 1, "explicit grid position requires count = 1")
                grid = tuple(int(x) for x in entry["grid"])
                chiplets.append(ChipletSpec(
                    grid=grid, name=entry.get("name", f"{kind}:{i}"), **base))
            else:
                cols = int(entry.get("grid_cols", max(1, count)))
                for j in range(count):
                    grid = (auto_row + j // cols, j % cols)
                    chiplets.append(
                        ChipletSpec(grid=grid, name=f"{kind}:{i}.{j}", **base))
                auto_row += (count + cols - 1) // cols
        except KeyError as e:
            raise SpecError(
                f"package {pkg_name!r} chiplet entry {i}: missing field {e}") from e
    return tuple(chiplets)


def _package_from_dict(name: str, d: dict) -> PackageSpec:
    try:
        mem = d["memory"]
        memory = MemorySpec(
            stacks=int(mem["stacks"]),
            bw_per_stack=parse_bandwidth(mem["bw_per_stack"]),
            capacity_per_stack=parse_bytes(mem["capacity_per_stack"]),
            access_latency_ns=float(mem.get("access_latency_ns", 0.0)),
        )
        chiplets = _chiplets_from_entries(d.get("chiplet", []), name)
        return PackageSpec(
            name=d.get("name", name),
            chiplets=chiplets,
            memory=memory,
            noi_link_bw=parse_bandwidth(d["noi_link_bw"]) if "noi_link_bw" in d else 0.0,
            interpackage_link_bw=parse_bandwidth(d.get("interpackage_link_bw", "0.9TB/s")),
            flop_per_mac=int(d.get("flop_per_mac", 1)),
            noi_hop_latency_ns=float(d.get("noi_hop_latency_ns", 10.0)),
            dram_efficiency=float(d.get("dram_efficiency", 0.85)),
            fallback_vector_flops=parse_quantity(d.get("fallback_vector_flops", 0.0)),
        )
    except KeyError as e:
        raise SpecError(f"package {name!r}: missing field {e}") from e


def hardware_from_dict(d: dict, name: str = "") -> HardwareSpec:
    packages = d.get("package", {})
    _require(isinstance(packages, dict) and packages,
             "hardware descriptor needs a [package.*] table")
    aggregated = bool(d.get("aggregated", False))
    if aggregated:
        _require(len(packages) == 1,
                 "aggregated hardware must define exactly one package")
        key = next(iter(packages))
        pkg = _package_from_dict(key, packages[key])
        return HardwareSpec(prefill_package=pkg, decode_package=pkg,
                            aggregated=True, name=d.get("name", name))
    prefill = packages.get("prefill")
    decode = packages.get("decode")
    return HardwareSpec(
        prefill_package=_package_from_dict("prefill", prefill) if prefill else None,
        decode_package=_package_from_dict("decode", decode) if decode else None,
        aggregated=False,
        name=d.get("name", name),
    )


def load_hardware_spec(path) -> HardwareSpec:
    return hardware_from_dict(_load_toml(path), name=Path(path).stem)


def model_from_dict(d: dict, name: str = "") -> ModelSpec:
    layers: list[LayerSpec] = []
    for i, entry in enumerate(d.get("layer", [])):
        entry = dict(entry)
        count = int(entry.pop("count", 1))
        _require(count >= 1, f"layer entry {i}: count must be >= 1")
        try:
            spec = LayerSpec(**entry)
        except TypeError as e:
            raise SpecError(f"layer entry {i}: {e}") from e
        layers.extend([spec] * count)
    try:
        return ModelSpec(
            name=d.get("name", name),
            layers=tuple(layers),
            vocab_size=int(d["vocab_size"]),
            d_model=int(d["d_model"]),
            dtype_bytes=int(d.get("dtype_bytes", 2)),
        )
    except KeyError as e:
        raise SpecError(f"model descriptor: missing field {e}") from e


def load_model_spec(path) -> ModelSpec:
    return model_from_dict(_load_toml(path), name=Path(path).stem)


def workload_from_dict(d: dict, name: str = "") -> WorkloadSpec:
    try:
        return WorkloadSpec(
            name=d.get("name", name),
            prompt_len=int(d["prompt_len"]),
            gen_len=int(d["gen_len"]),
            batch_sizes=tuple(int(b) for b in d["batch_sizes"]),
        )
    except KeyError as e:
        raise SpecError(f"workload descriptor: missing field {e}") from e


def load_workload_spec(path) -> WorkloadSpec:
    return workload_from_dict(_load_toml(path), name=Path(path).stem)


# ---------------------------------------------------------------------------
# Serialization (round-trip support)
# ---------------------------------------------------------------------------

def _emit_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_emit_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _emit_table(d: dict, prefix: str, out: list[str]) -> None:
    scalars = {k: v for k, v in d.items()
               if not isinstance(v, dict)
               and not (isinstance(v, list) and v and isinstance(v[0], dict))}
    if prefix and (scalars or not d):
        out.append(f"[{prefix}]")
    for k, v in scalars.items():
        out.append(f"{k} = {_emit_value(v)}")
    if scalars:
        out.append("")
    for k, v in d.items():
        if isinstance(v, dict):
            _emit_table(v, f"{prefix}.{k}" if prefix else k, out)
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            for item in v:
                out.append(f"[[{prefix}.{k}]]" if prefix else f"[[{k}]]")
                sub: list[str] = []
                _emit_inline(item, f"{prefix}.{k}" if prefix else k, sub)
                out.extend(sub)
                out.append("")


def _emit_inline(d: dict, prefix: str, out: list[str]) -> None:
    nested = []
    for k, v in d.items():
        if isinstance(v, dict):
            nested.append((k, v))
        else:
            out.append(f"{k} = {_emit_value(v)}")
    for k, v in nested:
        out.append(f"[{prefix}.{k}]")
        _emit_inline(v, f"{prefix}.{k}", out)


def emit_toml(d: dict) -> str:
    out: list[str] = []
    _emit_table(d, "", out)
    return "\n".join(out).rstrip() + "\n"


def _array_to_dict(cfg: ArrayConfig) -> dict:
    if isinstance(cfg, SystolicConfig):
        return dict(type="systolic", rows=cfg.rows, cols=cfg.cols,
                    freq=cfg.freq_hz, sram_bw=cfg.sram_bw,
                    buffer_bytes=cfg.buffer_bytes, sfu_count=cfg.sfu_count,
                    sfu_latency_cycles=cfg.sfu_latency_cycles,
                    mode_switch_cycles=cfg.mode_switch_cycles, depth=cfg.depth,
                    ssm_capable=cfg.ssm_capable)
    return dict(type="vector", lane_width=cfg.lane_width_w, rows=cfg.rows,
                cols=cfg.cols, freq=cfg.freq_hz, sram_bw=cfg.sram_bw,
                buffer_bytes=cfg.buffer_bytes,
                sfu_latency_cycles=cfg.sfu_latency_cycles)


def _package_to_dict(pkg: PackageSpec) -> dict:
    chiplets = []
    for c in pkg.chiplets:
        entry = dict(kind=c.kind, name=c.name,
                     arrays_per_chiplet=c.arrays_per_chiplet,
                     d2d_bw=c.d2d_bw, local_sram_bytes=c.local_sram_bytes,
                     grid=list(c.grid))
        if c.array_config is not None:
            entry["array"] = _array_to_dict(c.array_config)
        chiplets.append(entry)
    return dict(
        name=pkg.name,
        noi_link_bw=pkg.noi_link_bw,
        interpackage_link_bw=pkg.interpackage_link_bw,
        flop_per_mac=pkg.flop_per_mac,
        noi_hop_latency_ns=pkg.noi_hop_latency_ns,
        dram_efficiency=pkg.dram_efficiency,
        fallback_vector_flops=pkg.fallback_vector_flops,
        memory=dict(stacks=pkg.memory.stacks, bw_per_stack=pkg.memory.bw_per_stack,
                    capacity_per_stack=pkg.memory.capacity_per_stack,
                    access_latency_ns=pkg.memory.access_latency_ns),
        chiplet=chiplets,
    )


def hardware_to_dict(hw: HardwareSpec) -> dict:
    d: dict = {"name": hw.name, "aggregated": hw.aggregated, "package": {}}
    if hw.aggregated:
        d["package"]["main"] = _package_to_dict(hw.prefill_package)
    else:
        if hw.prefill_package is not None:
            d["package"]["prefill"] = _package_to_dict(hw.prefill_package)
        if hw.decode_package is not None:
            d["package"]["decode"] = _package_to_dict(hw.decode_package)
    return d


def model_to_dict(model: ModelSpec) -> dict:
    layers = []
    for l in model.layers:
        entry = {"kind": l.kind}
        if l.kind == "mamba2":
            entry.update(d_model=l.d_model, d_state=l.d_state, n_heads=l.n_heads,
                         head_dim=l.head_dim, expand_factor=l.expand_factor,
                         conv_width=l.conv_width)
        elif l.kind == "attention":
            entry.update(n_heads=l.n_heads, n_kv_heads=l.n_kv_heads,
                         head_dim=l.head_dim)
        else:
            entry.update(d_model=l.d_model, d_ff=l.d_ff)
        layers.append(entry)
    # run-length compress identical consecutive entries
    compressed: list[dict] = []
    for entry in layers:
        if compressed and {k: v for k, v in compressed[-1].items() if k != "count"} == entry:
            compressed[-1]["count"] = compressed[-1].get("count", 1) + 1
        else:
            compressed.append(dict(entry))
    return dict(name=model.name, d_model=model.d_model, vocab_size=model.vocab_size,
                dtype_bytes=model.dtype_bytes, layer=compressed)


def workload_to_dict(w: WorkloadSpec) -> dict:
    return dict(name=w.name, prompt_len=w.prompt_len, gen_len=w.gen_len,
                batch_sizes=list(w.batch_sizes))
