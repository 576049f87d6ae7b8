"""Systolic engine: closed-form cycle model against the PE-level simulator
and the numerical references."""

import numpy as np
import pytest

from duetsim.config import SystolicConfig
from duetsim.reference import (SsmState, gemm_ref, random_token_params,
                               ssm_scan_ref)
from duetsim.systolic import (functional_gemm, functional_ssm_scan,
                              mode_switch_cycles, sim_gemm, sim_ssm_scan)


def cfg(rows=8, cols=8, depth=1, sram_bw=1e15, freq=1e9, sfu_lat=0):
    return SystolicConfig(rows=rows, cols=cols, depth=depth, freq_hz=freq,
                          sram_bw=sram_bw, buffer_bytes=1 << 20,
                          sfu_latency_cycles=sfu_lat)


def test_gemm_minimal_array():
    # a 1x1 array degenerates to a MAC: K accumulate cycles + 1 drain
    rep = sim_gemm(cfg(1, 1), 1, 100, 1)
    assert rep.compute_cycles == 101


def test_gemm_single_tile_formula():
    rep = sim_gemm(cfg(64, 32), 64, 4096, 32)
    assert rep.compute_cycles == 4096 + 63 + 31 + 64


def test_gemm_tiling_scales_linearly():
    one = sim_gemm(cfg(8, 8), 8, 64, 8).compute_cycles
    four = sim_gemm(cfg(8, 8), 16, 64, 16).compute_cycles
    assert four == 4 * one


def test_gemm_array_pool_splits_tiles():
    single = sim_gemm(cfg(8, 8), 32, 64, 32)
    pooled = sim_gemm(cfg(8, 8), 32, 64, 32, arrays=16)
    assert single.compute_cycles == 16 * pooled.compute_cycles


def test_gemm_depth_shortens_accumulation():
    shallow = sim_gemm(cfg(8, 8, depth=1), 8, 256, 8).compute_cycles
    deep = sim_gemm(cfg(8, 8, depth=16), 8, 256, 8).compute_cycles
    assert deep == shallow - 256 + 16


def test_gemm_bandwidth_stall():
    fast = sim_gemm(cfg(8, 8, sram_bw=1e15), 64, 512, 64)
    slow = sim_gemm(cfg(8, 8, sram_bw=1e9), 64, 512, 64)
    assert slow.stall_cycles > 0
    assert slow.cycles == slow.compute_cycles + slow.stall_cycles
    assert fast.stall_cycles == 0
    assert slow.utilization < fast.utilization <= 1.0


def test_scan_steady_state_rate():
    c = cfg(64, 32)
    base = sim_ssm_scan(c, 64, 32, 32).cycles
    for dl in (1, 7, 100):
        assert sim_ssm_scan(c, 64, 32, 32 + dl).cycles == base + 3 * dl


def test_scan_single_tile_formula():
    rep = sim_ssm_scan(cfg(64, 32), 64, 32, 2048)
    assert rep.compute_cycles == (63 + 31 + 3) + 3 * 2048 == 6241


def test_scan_requires_capability():
    c = SystolicConfig(rows=8, cols=8, freq_hz=1e9, sram_bw=1e12,
                       buffer_bytes=1, ssm_capable=False)
    with pytest.raises(ValueError):
        sim_ssm_scan(c, 8, 8, 16)


def test_scan_sfu_latency_adds_to_fill_only():
    a = sim_ssm_scan(cfg(8, 8), 8, 8, 100).compute_cycles
    b = sim_ssm_scan(cfg(8, 8, sfu_lat=5), 8, 8, 100).compute_cycles
    assert b == a + 5


def test_mode_switch_counting():
    c = cfg()
    assert mode_switch_cycles(c, ["gemm", "ssm_scan", "gemm"]) == 2
    assert mode_switch_cycles(c, ["gemm", "gemm"]) == 0
    assert mode_switch_cycles(c, []) == 0


# -- functional vs oracle ----------------------------------------------------

def test_functional_gemm_exact_and_counts():
    rng = np.random.default_rng(11)
    c = cfg(4, 4)
    a = rng.normal(0, 1, (10, 7))
    b = rng.normal(0, 1, (7, 9))
    out, cycles, stats = functional_gemm(c, a, b)
    # identical accumulation order as the triple loop: bitwise equal
    np.testing.assert_array_equal(out, gemm_ref(a, b))
    assert stats["mac_ops"] == 10 * 7 * 9
    assert stats["state_register_writes"] == 0
    assert cycles == sim_gemm(c, 10, 7, 9).compute_cycles


def test_functional_gemm_rejects_deep_arrays():
    with pytest.raises(ValueError):
        functional_gemm(cfg(4, 4, depth=4), np.eye(4), np.eye(4))


def test_functional_scan_matches_reference():
    rng = np.random.default_rng(5)
    c = cfg(8, 8)
    params = [random_token_params(rng, 20, 12) for _ in range(40)]
    init = SsmState(rng.normal(0, 1, (20, 12)))
    ref_state, ref_ys = ssm_scan_ref(params, init)
    state, ys, cycles, stats = functional_ssm_scan(c, params, init)
    scale = np.max(np.abs(ref_ys)) + 1.0
    assert np.max(np.abs(ys - ref_ys)) / scale < 1e-12
    assert np.max(np.abs(state.x - ref_state.x)) < 1e-12 * (
        np.max(np.abs(ref_state.x)) + 1.0)
    assert stats["state_register_writes"] == 20 * 12 * 40
    assert stats["sfu_ops"] == 40 * 20 * 2  # two state-column tiles
    assert cycles == sim_ssm_scan(c, 20, 12, 40).compute_cycles


CYCLE_GRID = [
    # (rows, cols, m/ed, k/n_state, n/seq)
    (2, 3, 5, 9, 4), (4, 4, 4, 4, 4), (8, 8, 16, 32, 8), (5, 7, 12, 13, 11),
    (8, 2, 3, 64, 20), (1, 4, 6, 10, 3), (3, 1, 7, 5, 9), (6, 6, 36, 18, 12),
    (2, 2, 2, 2, 2), (7, 3, 20, 6, 14), (4, 8, 9, 40, 17), (8, 4, 31, 11, 5),
    (3, 5, 8, 24, 16),
]


@pytest.mark.parametrize("rows,cols,m,k,n", CYCLE_GRID)
def test_gemm_cycle_model_matches_functional(rows, cols, m, k, n):
    c = cfg(rows, cols)
    rng = np.random.default_rng(rows * 100 + cols)
    a = rng.integers(-4, 5, (m, k)).astype(float)
    b = rng.integers(-4, 5, (k, n)).astype(float)
    out, cycles, _ = functional_gemm(c, a, b)
    np.testing.assert_array_equal(out, gemm_ref(a, b))
    assert cycles == sim_gemm(c, m, k, n).compute_cycles


@pytest.mark.parametrize("rows,cols,ed,n,seq", CYCLE_GRID)
def test_scan_cycle_model_matches_functional(rows, cols, ed, n, seq):
    c = cfg(rows, cols)
    rng = np.random.default_rng(rows * 17 + cols)
    params = [random_token_params(rng, ed, n) for _ in range(seq)]
    init = SsmState.zeros(ed, n)
    _, _, cycles, _ = functional_ssm_scan(c, params, init)
    assert cycles == sim_ssm_scan(c, ed, n, seq).compute_cycles
