"""Interconnect flow scheduling, DRAM service, and cache handoff."""

import pytest

from duetsim.config import MemorySpec
from duetsim.fabric import (TransferEvent, dram_service_time,
                            overlap_cache_transfer, route_links,
                            schedule_transfers, timeline_csv)

BW = 100e9


def test_route_is_x_then_y():
    links = route_links((0, 0), (2, 1))
    assert links == [(((0, 0)), (1, 0)), ((1, 0), (2, 0)), ((2, 0), (2, 1))]
    assert route_links((1, 1), (1, 1)) == []


def test_single_transfer_time():
    e = TransferEvent(src=(0, 0), dst=(0, 2), size_bytes=1e9)
    makespan = schedule_transfers([e], BW, hop_latency_s=10e-9)
    assert makespan == pytest.approx(1e9 / BW + 2 * 10e-9, rel=1e-6)
    assert e.finish_time == pytest.approx(makespan)


def test_shared_link_halves_rate():
    # both transfers cross the (0,0)->(1,0) link
    a = TransferEvent(src=(0, 0), dst=(1, 0), size_bytes=1e9)
    b = TransferEvent(src=(0, 0), dst=(1, 0), size_bytes=1e9)
    makespan = schedule_transfers([a, b], BW, hop_latency_s=0.0)
    assert makespan == pytest.approx(2e9 / BW, rel=1e-6)


def test_disjoint_transfers_run_in_parallel():
    a = TransferEvent(src=(0, 0), dst=(0, 1), size_bytes=1e9)
    b = TransferEvent(src=(1, 0), dst=(1, 1), size_bytes=1e9)
    makespan = schedule_transfers([a, b], BW, hop_latency_s=0.0)
    assert makespan == pytest.approx(1e9 / BW, rel=1e-6)


def test_short_transfer_frees_bandwidth():
    # after the short flow drains, the long one gets the full link
    a = TransferEvent(src=(0, 0), dst=(1, 0), size_bytes=1e9)
    b = TransferEvent(src=(0, 0), dst=(1, 0), size_bytes=3e9)
    makespan = schedule_transfers([a, b], BW, hop_latency_s=0.0)
    assert makespan == pytest.approx(4e9 / BW, rel=1e-6)
    assert a.finish_time == pytest.approx(2e9 / BW, rel=1e-6)


def test_release_times_honored():
    e = TransferEvent(src=(0, 0), dst=(1, 0), size_bytes=1e9, start_time=5.0)
    assert schedule_transfers([e], BW, hop_latency_s=0.0) == \
        pytest.approx(5.0 + 1e9 / BW, rel=1e-6)


def test_timeline_csv_has_all_rows():
    evts = [TransferEvent(src=(0, 0), dst=(0, 1), size_bytes=10.0, tag="t0"),
            TransferEvent(src=(0, 1), dst=(0, 0), size_bytes=20.0, tag="t1")]
    schedule_transfers(evts, BW)
    text = timeline_csv(evts)
    assert text.count("\n") == 3 and "t0" in text and "t1" in text


def test_dram_service_latency_plus_pipe():
    mem = MemorySpec(stacks=4, bw_per_stack=1e12, capacity_per_stack=8 << 30,
                     access_latency_ns=100.0)
    assert dram_service_time(mem, 0) == 0.0
    t = dram_service_time(mem, 4e9, efficiency=0.8)
    assert t == pytest.approx(100e-9 + 4e9 / (4e12 * 0.8))
    with pytest.raises(ValueError):
        dram_service_time(mem, -1)


def test_overlap_fully_hidden():
    # compute finishes each layer well before its slice ships
    done = [1.0, 2.0, 3.0]
    finish, exposed = overlap_cache_transfer(done, [1.0, 1.0, 1.0], 1e3)
    assert finish == pytest.approx(3.0 + 1e-3)
    assert exposed == pytest.approx(1e-3)


def test_overlap_slow_link_serializes():
    done = [0.1, 0.2, 0.3]
    finish, exposed = overlap_cache_transfer(done, [100.0, 100.0, 100.0], 10.0)
    # link is the bottleneck: 0.1 + 3 * 10s of transfer
    assert finish == pytest.approx(30.1)
    assert exposed == pytest.approx(29.8)


def test_overlap_validates_lengths():
    with pytest.raises(ValueError):
        overlap_cache_transfer([1.0], [1.0, 2.0], 1.0)
