"""Link math, routing, and the fair-share transfer model against a fluid oracle."""

import heapq
import random

import pytest

from ponedge.config import topology_preset
from ponedge.network import (BITS_PER_KB, ConfigurationError, FairSharePool,
                             LinkKind, LinkSpec, route_between, single_transfer_time,
                             transfer_schedule)
from ponedge.workload import scenario_preset

FIBER = LinkSpec(LinkKind.FIBER, 1e9, 100.0, 0.0)
WAN_50KM = LinkSpec(LinkKind.WAN, 1e9, 50_000.0, 10e-3)
LOCAL = LinkSpec(LinkKind.LOCAL, 0.0, 0.0, 0.0)


def test_single_transfer_time_fiber_1kb():
    # 8000 bits / 1 Gbps + 100 m / 2e8 m/s = 8e-6 + 5e-7
    assert single_transfer_time(1.0, FIBER) == pytest.approx(8.5e-6, rel=1e-12)


def test_single_transfer_time_empty_payload_wan():
    # propagation 2.5e-4 plus the 10 ms one-way latency
    assert single_transfer_time(0.0, WAN_50KM) == pytest.approx(1.025e-2, rel=1e-12)


def test_local_links_cost_nothing():
    for size in (0.0, 1.0, 5000.0):
        assert single_transfer_time(size, LOCAL) == 0.0


def test_link_invariants():
    with pytest.raises(ConfigurationError):
        LinkSpec(LinkKind.FIBER, 0.0, 100.0, 0.0)
    with pytest.raises(ConfigurationError):
        LinkSpec(LinkKind.WAN, 1e9, -1.0, 0.0)


def _kinds(topo, route):
    links = {link.id: link for link in topo.links}
    return [links[hop.link_id].spec.kind for hop in route]


def test_route_device_to_edge_genio():
    topo = topology_preset("genio", scenario_preset("e-health"), 220_000)
    route = route_between(topo, "n0000-dev", "n0021-edge")
    assert _kinds(topo, route) == [LinkKind.LOCAL, LinkKind.FIBER, LinkKind.LOCAL]


def test_route_device_to_cloud_genio_appends_wan():
    topo = topology_preset("genio", scenario_preset("e-health"), 220_000)
    route = route_between(topo, "n0000-dev", "n0022-cloud")
    assert _kinds(topo, route) == [
        LinkKind.LOCAL, LinkKind.FIBER, LinkKind.LOCAL, LinkKind.WAN,
    ]


def test_route_device_to_edge_baseline_crosses_wan():
    topo = topology_preset("baseline", scenario_preset("e-health"), 220_000)
    route = route_between(topo, "n0000-dev", "n0021-edge")
    kinds = _kinds(topo, route)
    assert kinds == [LinkKind.LOCAL, LinkKind.FIBER, LinkKind.WAN]
    links = {link.id: link for link in topo.links}
    assert links[route[-1].link_id].spec.length_m == 100.0


def test_route_symmetry():
    topo = topology_preset("genio", scenario_preset("e-health"), 220_000)
    fwd = route_between(topo, "n0003-dev", "n0022-cloud")
    rev = route_between(topo, "n0022-cloud", "n0003-dev")
    assert [h.link_id for h in rev] == [h.link_id for h in fwd][::-1]
    assert [h.head for h in rev] == [h.tail for h in fwd][::-1]


def test_route_unknown_node():
    topo = topology_preset("genio", scenario_preset("e-health"), 220_000)
    with pytest.raises(ConfigurationError):
        route_between(topo, "n0000-dev", "nowhere")


def drive_pool(bandwidth_bps, transfers, hop_const=0.0):
    """Tiny event loop around FairSharePool: the kernel's serialization logic."""
    pool = FairSharePool(bandwidth_bps)
    heap = []
    seq = 0
    epoch = {}
    done = {}

    def reschedule(etas):
        nonlocal seq
        for token, eta in etas:
            epoch[token] = epoch.get(token, 0) + 1
            heapq.heappush(heap, (eta, seq, "ser-end", token, epoch[token]))
            seq += 1

    for idx, (start, _bits) in enumerate(transfers):
        heapq.heappush(heap, (start, seq, "join", idx, 0))
        seq += 1
    while heap:
        time, _, kind, token, ev_epoch = heapq.heappop(heap)
        if kind == "join":
            reschedule(pool.join(time, token, transfers[token][1]))
        else:
            if ev_epoch != epoch[token]:
                continue
            reschedule(pool.leave(time, token))
            done[token] = time + hop_const
    return [done[i] for i in range(len(transfers))]


def test_uncontended_transfer_matches_analytic_time():
    size_kb = 321.5
    start = 2.25
    hop_const = WAN_50KM.length_m / 2.0e8 + WAN_50KM.fixed_latency_s
    (completed,) = drive_pool(1e9, [(start, size_kb * BITS_PER_KB)], hop_const)
    assert abs(completed - (start + single_transfer_time(size_kb, WAN_50KM))) < 1e-12


def test_two_simultaneous_transfers_double_serialization():
    bits = 5000.0 * BITS_PER_KB  # 0.04 s alone on 1 Gbps
    prop = 100.0 / 2.0e8
    done = drive_pool(1e9, [(0.0, bits), (0.0, bits)], hop_const=prop)
    for completion in done:
        assert completion == pytest.approx(2 * 0.04 + prop, rel=1e-9)


def test_n_identical_transfers_finish_together():
    bits = 750.0 * BITS_PER_KB
    for n in (2, 3, 7):
        done = drive_pool(1e9, [(0.0, bits)] * n)
        expected = n * bits / 1e9
        for completion in done:
            assert completion == pytest.approx(expected, rel=1e-9)


def test_staggered_transfers_match_fluid_oracle():
    rng = random.Random(7)
    for _ in range(60):
        n = rng.randint(1, 6)
        transfers = [
            (rng.random() * 0.05, (rng.random() * 4000 + 1) * BITS_PER_KB)
            for _ in range(n)
        ]
        got = drive_pool(1e9, transfers)
        want = transfer_schedule(1e9, transfers)
        for g, w in zip(got, want):
            assert g == pytest.approx(w, rel=1e-6)


def test_work_conservation_rate_sum():
    pool = FairSharePool(1e9)
    assert pool.demand_bps() == 0.0
    pool.join(0.0, 1, 1e6)
    pool.join(0.0, 2, 1e6)
    # two active transfers at 0.5 Gbps each: the full link is in use
    assert pool.demand_bps() == 1e9
    assert len(pool.members) == 2


def test_pool_accounting_by_hand():
    # 1 KB alone for 1 us (1000 bits drained), then an equal joiner halves the
    # rate; when the first leaves, the second must hold exactly the leftovers
    pool = FairSharePool(1e9)
    etas = pool.join(0.0, 1, 8000.0)
    assert etas == [(1, 8e-6)]
    etas = dict(pool.join(1e-6, 2, 8000.0))
    assert etas[1] == pytest.approx(1e-6 + 7000.0 / 0.5e9, rel=1e-12)
    assert etas[2] == pytest.approx(1e-6 + 8000.0 / 0.5e9, rel=1e-12)
    etas = dict(pool.leave(etas[1], 1))
    assert pool.members[2] == pytest.approx(1000.0, rel=1e-9)
    assert etas[2] == pytest.approx(1.6e-5, rel=1e-9)
