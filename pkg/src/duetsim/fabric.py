"""Event-driven model of the chiplet interconnect and the DRAM system.

Transfers between chiplets follow dimension-ordered (X then Y) routes over
the package mesh.  Link bandwidth is shared max-min fairly among the
transfers crossing it, recomputed at every start or completion event, so a
congested link slows exactly the flows that use it.  Per-hop latency is a
fixed pipeline delay added once per transfer.

DRAM is modeled as a latency plus a derated-bandwidth pipe; the cache
handoff between the prefill and decode packages is a layer-by-layer
transfer chain that overlaps with prefill compute.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from .config import ChipletSpec, MemorySpec, PackageSpec


@dataclass
class TransferEvent:
    """One point-to-point transfer, filled in by the scheduler."""

    src: tuple[int, int]
    dst: tuple[int, int]
    size_bytes: float
    start_time: float = 0.0
    finish_time: float = 0.0
    tag: str = ""

    @property
    def hops(self) -> int:
        return abs(self.src[0] - self.dst[0]) + abs(self.src[1] - self.dst[1])


def route_links(src: tuple[int, int],
                dst: tuple[int, int]) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Directed links of the X-then-Y route between two mesh nodes."""
    links = []
    x, y = src
    step = 1 if dst[0] >= x else -1
    while x != dst[0]:
        links.append(((x, y), (x + step, y)))
        x += step
    step = 1 if dst[1] >= y else -1
    while y != dst[1]:
        links.append(((x, y), (x, y + step)))
        y += step
    return links


def schedule_transfers(events: list[TransferEvent], link_bw: float,
                       hop_latency_s: float = 10e-9) -> float:
    """Simulate the transfers to completion; returns the makespan.

    Each event's ``start_time`` is its earliest allowed start (release
    time); ``finish_time`` is filled in.  Rates are max-min fair shares of
    ``link_bw`` on every link of the route, recomputed at each event.
    """
    if link_bw <= 0:
        raise ValueError("link bandwidth must be positive")
    remaining = {id(e): e.size_bytes for e in events}
    routes = {id(e): route_links(e.src, e.dst) for e in events}
    active: list[TransferEvent] = []
    pending = sorted(events, key=lambda e: e.start_time)
    now = 0.0
    makespan = 0.0
    while pending or active:
        if not active:
            now = max(now, pending[0].start_time)
        while pending and pending[0].start_time <= now + 1e-18:
            active.append(pending.pop(0))
        rates = _fair_rates(active, routes, link_bw)
        # time to the next completion or the next release
        dt = math.inf
        for e in active:
            r = rates[id(e)]
            if r > 0:
                dt = min(dt, remaining[id(e)] / r)
        if pending:
            dt = min(dt, pending[0].start_time - now)
        if not math.isfinite(dt):
            raise RuntimeError("transfer scheduling stalled")
        now += dt
        done = []
        for e in active:
            remaining[id(e)] -= rates[id(e)] * dt
            if remaining[id(e)] <= max(1e-9, 1e-12 * e.size_bytes):
                done.append(e)
        for e in done:
            active.remove(e)
            e.finish_time = now + e.hops * hop_latency_s
            makespan = max(makespan, e.finish_time)
    return makespan


def _fair_rates(active, routes, link_bw):
    """Progressive-filling max-min allocation for the active transfers."""
    rates = {id(e): 0.0 for e in active}
    frozen: set[int] = set()
    if not active:
        return rates
    for _ in range(len(active) + 1):
        link_load: dict = {}
        for e in active:
            if id(e) in frozen:
                continue
            links = routes[id(e)] or [None]  # same-node transfer: no links
            for ln in links:
                link_load.setdefault(ln, []).append(e)
        if not link_load:
            break
        if None in link_load:
            for e in link_load.pop(None):
                if not routes[id(e)]:
                    rates[id(e)] = link_bw
                    frozen.add(id(e))
            if not link_load:
                break
        # tightest link determines the next fair increment
        slack = math.inf
        for ln, users in link_load.items():
            used = sum(rates[id(e)] for e in active
                       if id(e) in frozen and ln in routes[id(e)])
            share = (link_bw - used) / len(users)
            slack = min(slack, share)
        newly = False
        for ln, users in link_load.items():
            used = sum(rates[id(e)] for e in active
                       if id(e) in frozen and ln in routes[id(e)])
            if (link_bw - used) / len(users) <= slack + 1e-9 * link_bw:
                for e in users:
                    if id(e) not in frozen:
                        rates[id(e)] = slack
                        frozen.add(id(e))
                        newly = True
        if not newly:
            break
        if len(frozen) == len(active):
            break
    return rates


def timeline_csv(events: list[TransferEvent]) -> str:
    """Render a scheduled event list as CSV for inspection."""
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["tag", "src", "dst", "bytes", "hops", "start_s", "finish_s"])
    for e in sorted(events, key=lambda e: e.start_time):
        w.writerow([e.tag, f"{e.src[0]}/{e.src[1]}", f"{e.dst[0]}/{e.dst[1]}",
                    f"{e.size_bytes:.0f}", e.hops, f"{e.start_time:.9f}",
                    f"{e.finish_time:.9f}"])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# DRAM and cross-package cache handoff
# ---------------------------------------------------------------------------

def dram_service_time(mem: MemorySpec, size_bytes: float,
                      efficiency: float = 0.85) -> float:
    """Latency-plus-pipe service time for a DRAM burst across all stacks."""
    if size_bytes < 0:
        raise ValueError("negative transfer size")
    if size_bytes == 0:
        return 0.0
    return mem.access_latency_ns * 1e-9 + size_bytes / (mem.aggregate_bw * efficiency)


def overlap_cache_transfer(layer_done_times: list[float],
                           layer_bytes: list[float],
                           link_bw: float) -> tuple[float, float]:
    """Layer-wise cache shipment overlapped with prefill compute.

    Layer i's cache slice becomes eligible when prefill finishes that layer
    (``layer_done_times[i]``) and the link sends slices in order.  Returns
    the time the last slice lands and the exposed tail beyond the end of
    prefill compute.
    """
    if len(layer_done_times) != len(layer_bytes):
        raise ValueError("per-layer lists must align")
    if link_bw <= 0:
        raise ValueError("link bandwidth must be positive")
    t = 0.0
    for done, nbytes in zip(layer_done_times, layer_bytes):
        t = max(t, done) + nbytes / link_bw
    compute_end = layer_done_times[-1] if layer_done_times else 0.0
    return t, max(0.0, t - compute_end)
