"""Command-line interface: roofline reports, DSE sweeps, inference
simulation, and oracle self-validation.

All commands are deterministic for fixed arguments and seed; output files
carry a header line echoing the tool version and the full parameter set so
results are reproducible from the artifact alone.  Exit codes: 0 success,
1 validation failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__
from . import analysis
from . import kernels
from . import pipeline
from . import reference
from . import systolic
from . import vector
from .config import (SpecError, SystolicConfig, VectorArrayConfig,
                     load_hardware_spec, load_model_spec, load_workload_spec,
                     peak_flops, aggregate_bandwidth)


class UsageError(Exception):
    pass


def _echo(cmd: str, args: dict) -> str:
    params = " ".join(f"{k}={v}" for k, v in sorted(args.items()))
    return f"duet-sim v{__version__} | {cmd} | {params}"


def _write_report(path, header: str, columns: list[str], rows: list[list],
                  fmt: str) -> None:
    if fmt == "json":
        payload = {"header": header,
                   "rows": [dict(zip(columns, r)) for r in rows]}
        text = json.dumps(payload, indent=2) + "\n"
    else:
        buf = io.StringIO()
        buf.write(f"# {header}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)
        text = buf.getvalue()
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as f:
            f.write(text)


def _fmt_of(args) -> str:
    if args.format:
        return args.format
    if args.out and str(args.out).endswith(".json"):
        return "json"
    return "csv"


def _parse_int_list(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise UsageError(f"bad integer list {text!r}") from e
    if not vals:
        raise UsageError(f"empty list {text!r}")
    return vals


# ---------------------------------------------------------------------------
# roofline
# ---------------------------------------------------------------------------

def cmd_roofline(args) -> int:
    model = load_model_spec(args.model)
    hw = load_hardware_spec(args.hw)
    batches = _parse_int_list(args.batch)
    phases = ["prefill", "decode"] if args.phase == "both" else [args.phase]
    columns = ["layer", "kind", "phase", "batch", "flops", "bytes", "oi",
               "attainable_flops", "regime"]
    rows = []
    for phase in phases:
        pkg = hw.package_for(phase)
        peak = peak_flops(pkg)
        bw = aggregate_bandwidth(pkg)
        seq = args.context if phase == "prefill" else 1
        for batch in batches:
            for i, layer in enumerate(model.layers):
                pt = analysis.layer_roofline(layer, phase, seq, args.context,
                                             batch, model.d_model, peak, bw)
                rows.append([i, layer.kind, phase, batch, pt.flops,
                             pt.bytes_moved, f"{pt.oi:.6g}",
                             f"{pt.attainable_flops:.6g}", pt.bound])
    header = _echo("roofline", dict(model=model.name, hw=hw.name,
                                    batch=args.batch, phase=args.phase,
                                    context=args.context))
    _write_report(args.out, header, columns, rows, _fmt_of(args))
    return 0


# ---------------------------------------------------------------------------
# dse
# ---------------------------------------------------------------------------

def cmd_dse(args) -> int:
    sizes = tuple(_parse_int_list(args.sizes)) if args.sizes else None
    if args.engine == "systolic":
        points = analysis.dse_sweep_systolic(
            ed=args.ed, n_state=args.n_state, seq_len=args.seq_len,
            sizes=sizes or analysis.SYSTOLIC_SWEEP_SIZES,
            sram_bw=args.sram_bw, freq_hz=args.freq)
    else:
        widths = tuple(_parse_int_list(args.widths)) if args.widths else \
            analysis.VECTOR_SWEEP_WIDTHS
        points = analysis.dse_sweep_vector(
            ed=args.ed, n_state=args.n_state, batch=args.step_batch,
            sizes=sizes or analysis.VECTOR_SWEEP_SIZES, widths=widths,
            sram_bw=args.sram_bw, freq_hz=args.freq)
    if not points:
        raise UsageError("sweep produced no feasible points")
    columns = ["rows", "cols", "w", "latency_cycles", "total_cycles",
               "area_proxy", "utilization", "on_frontier"]
    rows = [[p.rows, p.cols, p.lane_width_w, p.compute_cycles, p.total_cycles,
             p.area_macs, f"{p.utilization:.6g}", int(p.on_frontier)]
            for p in points]
    header = _echo("dse", dict(engine=args.engine, ed=args.ed,
                               n_state=args.n_state, seq_len=args.seq_len,
                               sram_bw=args.sram_bw, freq=args.freq))
    _write_report(args.out, header, columns, rows, _fmt_of(args))
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    hw = load_hardware_spec(args.hw)
    model = load_model_spec(args.model)
    workload = load_workload_spec(args.workload)
    jobs = args.jobs or int(os.environ.get("DUET_SIM_JOBS", "1"))
    results = pipeline.sweep_workload(hw, model, workload, jobs=jobs)
    columns = ["system", "model", "workload", "batch", "phase", "ttft_ms",
               "tbt_ms", "tokens_per_s", "cache_gb", "feasible"]
    rows = []
    for r in results:
        phase = args.phase
        rows.append([r.system, r.model, r.workload, r.batch, phase,
                     f"{r.ttft_s * 1e3:.4f}" if phase != "decode" else "",
                     f"{r.tbt_s * 1e3:.4f}" if phase != "prefill" else "",
                     f"{r.tokens_per_s:.4f}" if phase == "e2e" else "",
                     f"{r.cache_bytes / 1e9:.3f}", int(r.feasible)])
    header = _echo("simulate", dict(hw=hw.name, model=model.name,
                                    workload=workload.name, phase=args.phase,
                                    jobs=jobs))
    _write_report(args.out, header, columns, rows, _fmt_of(args))
    return 0


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def _validate_once(rng: np.random.Generator, inject_fault: bool) -> list[str]:
    failures = []
    ed = int(rng.integers(2, 33))
    n = int(rng.integers(2, 33))
    seq = int(rng.integers(2, 33))
    params = [reference.random_token_params(rng, ed, n) for _ in range(seq)]
    init = reference.SsmState(rng.normal(0, 1, (ed, n)))
    ref_state, ref_ys = reference.ssm_scan_ref(params, init)

    cfg = SystolicConfig(rows=8, cols=8, freq_hz=1e9, sram_bw=1e12,
                         buffer_bytes=1 << 16)
    st, ys, cycles, _ = systolic.functional_ssm_scan(cfg, params, init)
    scale = np.max(np.abs(ref_ys)) + 1.0
    err = np.max(np.abs(ys - ref_ys)) / scale
    if inject_fault:
        err += 1.0
    if err > 1e-12 or np.max(np.abs(st.x - ref_state.x)) > 1e-12 * (
            np.max(np.abs(ref_state.x)) + 1.0):
        failures.append(f"scan mismatch (rel err {err:.3e})")
    rep = systolic.sim_ssm_scan(cfg, ed, n, seq)
    if rep.compute_cycles != cycles:
        failures.append(f"scan cycle model {rep.compute_cycles} != {cycles}")

    vcfg = VectorArrayConfig(lane_width_w=8, rows=4, cols=4, freq_hz=1e9,
                             sram_bw=1e12, buffer_bytes=1 << 16)
    vstate, vy, vcycles, _ = vector.functional_ssm_step(vcfg, init, params[0])
    rstate, ry = reference.ssm_step_ref(init, params[0])
    if np.max(np.abs(vy - ry)) / (np.max(np.abs(ry)) + 1.0) > 1e-12:
        failures.append("step mismatch")
    vrep = vector.sim_ssm_step(vcfg, ed, n)
    if vrep.compute_cycles != vcycles:
        failures.append(f"step cycle model {vrep.compute_cycles} != {vcycles}")

    a = rng.integers(-8, 9, (int(rng.integers(1, 20)), int(rng.integers(1, 20))))
    b = rng.integers(-8, 9, (a.shape[1], int(rng.integers(1, 20))))
    got, gcycles, stats = systolic.functional_gemm(cfg, a.astype(float),
                                                   b.astype(float))
    if not np.array_equal(got, reference.gemm_ref(a.astype(float),
                                                  b.astype(float))):
        failures.append("gemm mismatch")
    if stats["state_register_writes"] != 0:
        failures.append("gemm touched recurrence state")
    x = rng.integers(-8, 9, a.shape[1]).astype(float)
    gv, _, _ = vector.functional_gemv(vcfg, x, b.astype(float))
    if not np.array_equal(gv, reference.gemv_ref(x, b.astype(float))):
        failures.append("gemv mismatch")
    return failures


def cmd_validate(args) -> int:
    if args.cases == 0:
        print("validate: 0 cases requested, nothing checked (warning)")
        return 0
    rng = np.random.default_rng(args.seed)
    failures: list[str] = []
    for i in range(args.cases):
        failures += [f"case {i}: {msg}"
                     for msg in _validate_once(rng, args.inject_fault and i == 0)]
    if failures:
        for msg in failures:
            print(f"FAIL {msg}")
        print(f"validate: {len(failures)} failure(s) over {args.cases} cases")
        return 1
    print(f"validate: {args.cases} cases passed (seed {args.seed})")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="duet-sim",
                                description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("roofline", help="per-layer roofline classification")
    r.add_argument("-m", "--model", required=True)
    r.add_argument("-w", "--hw", required=True)
    r.add_argument("--batch", default="1", help="comma-separated batch sizes")
    r.add_argument("--phase", choices=["prefill", "decode", "both"],
                   default="both")
    r.add_argument("--context", type=int, default=4096)
    r.add_argument("-o", "--out", default=None)
    r.add_argument("--format", choices=["csv", "json"], default=None)
    r.set_defaults(func=cmd_roofline)

    d = sub.add_parser("dse", help="array design-space sweep")
    d.add_argument("engine", choices=["systolic", "vector"])
    d.add_argument("--sizes", default=None, help="comma-separated dims")
    d.add_argument("--widths", default=None, help="vector lane widths")
    d.add_argument("--ed", type=int, default=16384)
    d.add_argument("--n-state", type=int, default=None, dest="n_state")
    d.add_argument("--seq-len", type=int, default=2048, dest="seq_len")
    d.add_argument("--step-batch", type=int, default=1, dest="step_batch")
    d.add_argument("--sram-bw", type=float, default=None, dest="sram_bw")
    d.add_argument("--freq", type=float, default=700e6)
    d.add_argument("-o", "--out", default=None)
    d.add_argument("--format", choices=["csv", "json"], default=None)
    d.set_defaults(func=cmd_dse)

    s = sub.add_parser("simulate", help="prefill/decode inference timing")
    s.add_argument("-w", "--hw", required=True)
    s.add_argument("-m", "--model", required=True)
    s.add_argument("-l", "--workload", required=True)
    s.add_argument("--phase", choices=["prefill", "decode", "e2e"],
                   default="e2e")
    s.add_argument("-j", "--jobs", type=int, default=None)
    s.add_argument("-o", "--out", default=None)
    s.add_argument("--format", choices=["csv", "json"], default=None)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("validate", help="functional-vs-oracle self test")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--cases", type=int, default=25)
    v.add_argument("--inject-fault", action="store_true",
                   help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    # engine-specific sweep defaults
    if args.command == "dse":
        if args.n_state is None:
            args.n_state = 256 if args.engine == "systolic" else 64
        if args.sram_bw is None:
            args.sram_bw = 256e9 if args.engine == "systolic" else 1024e9
    try:
        return args.func(args)
    except (SpecError, UsageError, OSError) as e:
        print(f"duet-sim: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
