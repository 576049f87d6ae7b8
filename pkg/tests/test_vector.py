"""Vector engine: closed forms against the lane-level simulator."""

import math

import numpy as np
import pytest

from duetsim.config import VectorArrayConfig
from duetsim.reference import (SsmState, gemv_ref, random_token_params,
                               ssm_step_ref)
from duetsim.vector import (functional_gemv, functional_ssm_step, sim_gemv,
                            sim_ssm_step, step_latency)


def cfg(w=8, rows=4, cols=4, sram_bw=1e15, sfu_lat=0):
    return VectorArrayConfig(lane_width_w=w, rows=rows, cols=cols,
                             freq_hz=1e9, sram_bw=sram_bw,
                             buffer_bytes=1 << 20,
                             sfu_latency_cycles=sfu_lat)


def test_gemv_single_dot_product():
    # one W-element dot product: one chunk plus the reduction tree
    for w in (8, 16, 32, 64):
        rep = sim_gemv(cfg(w=w, rows=1, cols=1), w, 1)
        assert rep.compute_cycles == 1 + int(math.log2(w))


def test_gemv_streams_chunks():
    rep = sim_gemv(cfg(w=8, rows=1, cols=1), 64, 1)
    assert rep.compute_cycles == 8 + 3


def test_gemv_rounds_over_units():
    one = sim_gemv(cfg(w=8, rows=2, cols=2), 64, 4).compute_cycles
    two = sim_gemv(cfg(w=8, rows=2, cols=2), 64, 8).compute_cycles
    assert two - one == 8  # one extra round of chunk streaming


def test_step_latency_components():
    c = cfg(w=32, rows=16, cols=8)
    # 3 vector stages + log2(32) tree + one chain hop for N=64
    assert step_latency(c, 64) == 3 + 5 + 1
    assert step_latency(c, 32) == 3 + 5
    assert step_latency(cfg(w=32, sfu_lat=4), 32) == 3 + 5 + 4


def test_step_groups_issue_serially():
    c = cfg(w=8, rows=4, cols=4)  # 16 units, N=16 -> 2 units, 8 groups
    rep = sim_ssm_step(c, 16, 16)
    assert rep.compute_cycles == 2 * step_latency(c, 16)
    rep2 = sim_ssm_step(c, 16, 16, batch=4)
    assert rep2.compute_cycles == 8 * step_latency(c, 16)


def test_step_state_must_fit_chain():
    with pytest.raises(ValueError):
        sim_ssm_step(cfg(w=8, rows=2, cols=2), 8, 64)  # needs 8 units, has 4


def test_wide_lanes_on_narrow_state_waste_utilization():
    rep = sim_ssm_step(cfg(w=64, rows=4, cols=4), 256, 32)
    assert rep.utilization <= 0.5


def test_step_bandwidth_stall():
    slow = sim_ssm_step(cfg(w=8, sram_bw=1e8), 64, 32)
    assert slow.stall_cycles > 0
    assert slow.cycles == slow.compute_cycles + slow.stall_cycles


# -- functional vs oracle ----------------------------------------------------

def test_functional_gemv_exact_on_integers():
    rng = np.random.default_rng(2)
    c = cfg(w=8, rows=2, cols=2)
    x = rng.integers(-8, 9, 20).astype(float)
    w = rng.integers(-8, 9, (20, 7)).astype(float)
    y, cycles, stats = functional_gemv(c, x, w)
    np.testing.assert_array_equal(y, gemv_ref(x, w))
    assert stats["mac_ops"] == 20 * 7
    assert cycles == sim_gemv(c, 20, 7).compute_cycles


def test_functional_gemv_close_on_reals():
    rng = np.random.default_rng(3)
    c = cfg(w=16)
    x = rng.normal(0, 1, 100)
    w = rng.normal(0, 1, (100, 13))
    y, _, _ = functional_gemv(c, x, w)
    np.testing.assert_allclose(y, gemv_ref(x, w), rtol=1e-12)


def test_functional_step_matches_reference():
    rng = np.random.default_rng(9)
    c = cfg(w=8, rows=4, cols=4)
    p = random_token_params(rng, 24, 20)
    init = SsmState(rng.normal(0, 1, (24, 20)))
    state, y, cycles, stats = functional_ssm_step(c, init, p)
    ref_state, ref_y = ssm_step_ref(init, p)
    assert np.max(np.abs(y - ref_y)) / (np.max(np.abs(ref_y)) + 1) < 1e-12
    np.testing.assert_allclose(state.x, ref_state.x, rtol=1e-12)
    assert stats["sfu_ops"] == 24
    assert cycles == sim_ssm_step(c, 24, 20).compute_cycles


CYCLE_GRID = [
    # (w, rows, cols, ed/k, n_state/n)
    (8, 2, 2, 8, 8), (8, 4, 4, 24, 20), (16, 2, 4, 30, 16), (16, 4, 4, 7, 48),
    (32, 2, 2, 12, 64), (8, 1, 4, 5, 24), (64, 2, 2, 40, 64), (8, 4, 2, 17, 10),
    (16, 1, 2, 9, 32), (32, 4, 4, 33, 96), (8, 2, 4, 50, 4), (16, 4, 2, 21, 40),
    (32, 1, 1, 4, 32),
]


@pytest.mark.parametrize("w,rows,cols,ed,n", CYCLE_GRID)
def test_step_cycle_model_matches_functional(w, rows, cols, ed, n):
    c = cfg(w=w, rows=rows, cols=cols)
    rng = np.random.default_rng(w + rows * 7 + cols)
    p = random_token_params(rng, ed, n)
    init = SsmState.zeros(ed, n)
    _, y, cycles, _ = functional_ssm_step(c, init, p)
    _, ref_y = ssm_step_ref(init, p)
    assert np.max(np.abs(y - ref_y)) / (np.max(np.abs(ref_y)) + 1) < 1e-12
    assert cycles == sim_ssm_step(c, ed, n).compute_cycles


@pytest.mark.parametrize("w,rows,cols,k,n", CYCLE_GRID)
def test_gemv_cycle_model_matches_functional(w, rows, cols, k, n):
    c = cfg(w=w, rows=rows, cols=cols)
    rng = np.random.default_rng(w + rows + cols * 3)
    x = rng.integers(-4, 5, k).astype(float)
    mat = rng.integers(-4, 5, (k, n)).astype(float)
    y, cycles, _ = functional_gemv(c, x, mat)
    np.testing.assert_array_equal(y, gemv_ref(x, mat))
    assert cycles == sim_gemv(c, k, n).compute_cycles
