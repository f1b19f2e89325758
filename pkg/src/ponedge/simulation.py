"""Wires config, workload, orchestration, and the kernel into one run."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from . import _kernel
from .config import (Calibration, DEFAULT_CALIBRATION, TopologySpec, cpu_label,
                     device_node_id, topology_preset)
from .engine import EventKind, SimulationError, hash_trace
from .metrics import RunSummary, TaskRecord, summarize
from .network import BITS_PER_KB, LinkKind, route_between
from .orchestrator import architecture_preset, eligible_nodes
from .workload import ScenarioSpec, generate_arrivals
from ._kernel import pykernel

DECOMPOSITION_TOLERANCE_S = 1e-12

_TRACE_KINDS = list(EventKind)


@dataclass(frozen=True)
class RunParams:
    """Everything one simulation run depends on."""

    scenario: ScenarioSpec
    topology: str
    cpu_mips: float
    seed: int
    cpu: str = ""
    duration_s: float = 600.0
    strategy: str = "trade-off"
    arrivals: str = "poisson"
    calibration: Calibration = DEFAULT_CALIBRATION

    def cpu_name(self) -> str:
        return self.cpu or cpu_label(self.cpu_mips)


@dataclass
class RunResult:
    params: RunParams
    topology: TopologySpec
    records: list[TaskRecord]
    summary: RunSummary
    processed_events: int
    trace_lines: list[str] | None = None
    trace_hash: str | None = None


def build_kernel_inputs(params: RunParams, topo: TopologySpec,
                        collect_trace: bool) -> pykernel.KernelInputs:
    cal = params.calibration
    scenario = params.scenario
    weights = cal.layer_weights()
    node_index = {node.id: idx for idx, node in enumerate(topo.nodes)}

    preset = architecture_preset(params.topology, far_edge_execution=cal.far_edge_execution)
    candidate_ids = eligible_nodes(preset, topo.nodes)
    candidate_nodes = [node_index[nid] for nid in candidate_ids]

    link_bandwidth = []
    link_hop_delay = []
    for link in topo.links:
        if link.spec.kind is LinkKind.LOCAL:
            link_bandwidth.append(math.inf)
            link_hop_delay.append(0.0)
        else:
            link_bandwidth.append(link.spec.bandwidth_bps)
            link_hop_delay.append(link.spec.hop_delay_s)

    links_by_id = {link.id: link for link in topo.links}
    route_ids: dict[tuple[int, ...], int] = {}
    route_hops: list[list[int]] = []
    up_route: list[list[int]] = []
    for device in range(scenario.users):
        device_id = device_node_id(device)
        slots = []
        for target_id in candidate_ids:
            hops = []
            for hop in route_between(topo, device_id, target_id):
                link = links_by_id[hop.link_id]
                if link.spec.kind is LinkKind.LOCAL:
                    continue  # zero-distance attachment, no event needed
                direction = 0 if hop.head == link.a else 1
                hops.append(hop.link_id * 2 + direction)
            key = tuple(hops)
            if key not in route_ids:
                route_ids[key] = len(route_hops)
                route_hops.append(list(key))
            slots.append(route_ids[key])
        up_route.append(slots)

    arrival_time, arrival_device = _cached_arrivals(
        scenario, params.duration_s, params.seed, params.arrivals
    )

    return pykernel.KernelInputs(
        mips_per_core=[node.mips_per_core for node in topo.nodes],
        cores=[node.cores for node in topo.nodes],
        weight=[weights[node.layer] for node in topo.nodes],
        ram_capacity=[node.ram_mb for node in topo.nodes],
        storage_capacity=[node.storage_mb for node in topo.nodes],
        candidate_nodes=candidate_nodes,
        link_bandwidth=link_bandwidth,
        link_hop_delay=link_hop_delay,
        route_hops=route_hops,
        up_route=up_route,
        arrival_time=list(arrival_time),
        arrival_device=list(arrival_device),
        length_mi=scenario.length_mi,
        request_bits=scenario.request_kb * BITS_PER_KB,
        result_bits=scenario.result_kb * BITS_PER_KB,
        task_ram_mb=cal.task_ram_mb,
        task_storage_mb=cal.task_storage_mb,
        strategy=pykernel.STRATEGY_TRADE_OFF if params.strategy == "trade-off"
        else pykernel.STRATEGY_ROUND_ROBIN,
        control_delay_s=cal.control_plane_delay_s,
        duration_s=params.duration_s,
        collect_trace=collect_trace,
    )


@lru_cache(maxsize=64)
def _cached_arrivals(scenario: ScenarioSpec, duration_s: float, seed: int,
                     mode: str) -> tuple[tuple[float, ...], tuple[int, ...]]:
    # the arrival process is identical for every topology/CPU cell of a sweep
    tasks = generate_arrivals(scenario, duration_s, seed, mode)
    return tuple(t.generated_at for t in tasks), tuple(t.device for t in tasks)


def _maybe(value: float) -> float | None:
    return None if math.isnan(value) else value


def _build_records(params: RunParams, topo: TopologySpec,
                   inputs: pykernel.KernelInputs,
                   out: pykernel.KernelOutputs) -> list[TaskRecord]:
    records = []
    deadline = params.scenario.deadline_s
    for i in range(len(inputs.arrival_time)):
        delivered_at = _maybe(out.delivered_at[i])
        generated_at = inputs.arrival_time[i]
        latency = delivered_at - generated_at if delivered_at is not None else None
        records.append(TaskRecord(
            task_id=i,
            node_id=topo.nodes[out.node_of[i]].id if out.node_of[i] >= 0 else None,
            generated_at=generated_at,
            uplink_done=_maybe(out.uplink_done[i]),
            exec_start=_maybe(out.exec_start[i]),
            exec_end=_maybe(out.exec_end[i]),
            delivered_at=delivered_at,
            status="Delivered" if delivered_at is not None else "Unfinished",
            latency_s=latency,
            deadline_met=latency is not None and latency <= deadline,
        ))
    return records


def assert_run_invariants(records: list[TaskRecord], summary: RunSummary) -> None:
    """Conservation and latency-decomposition identities, checked on every run."""
    if summary.tasks_generated != summary.tasks_delivered + summary.tasks_unfinished:
        raise SimulationError(
            f"conservation violated: {summary.tasks_generated} generated != "
            f"{summary.tasks_delivered} delivered + {summary.tasks_unfinished} unfinished"
        )
    for r in records:
        if not r.delivered:
            continue
        parts = (
            (r.uplink_done - r.generated_at)
            + (r.exec_start - r.uplink_done)
            + (r.exec_end - r.exec_start)
            + (r.delivered_at - r.exec_end)
        )
        if abs(parts - r.latency_s) > DECOMPOSITION_TOLERANCE_S:
            raise SimulationError(
                f"latency decomposition violated for task {r.task_id}: "
                f"components {parts!r} vs latency {r.latency_s!r}"
            )
        if not (r.generated_at <= r.uplink_done <= r.exec_start
                <= r.exec_end <= r.delivered_at):
            raise SimulationError(f"lifecycle timestamps out of order for task {r.task_id}")


def node_utilization(topo: TopologySpec, out: pykernel.KernelOutputs,
                     duration_s: float) -> tuple[tuple[str, float], ...]:
    """Busy core-time per node over the horizon, clipped at the cutoff."""
    busy = [0.0] * len(topo.nodes)
    for i, node in enumerate(out.node_of):
        if node < 0 or math.isnan(out.exec_start[i]):
            continue
        start = min(out.exec_start[i], duration_s)
        end = min(out.exec_end[i], duration_s)
        busy[node] += end - start
    return tuple(
        (node.id, busy[idx] / (node.cores * duration_s))
        for idx, node in enumerate(topo.nodes)
        if node.layer.value in ("edge-server", "cloud") or busy[idx] > 0.0
    )


def _trace_lines(topo: TopologySpec, trace) -> list[str]:
    lines = []
    for time, seq, kind_code, task, extra in trace:
        kind = _TRACE_KINDS[kind_code]
        if kind is EventKind.TASK_ARRIVAL:
            subject = f"task=t{task} src={device_node_id(extra)}"
        elif kind is EventKind.TRANSFER_COMPLETE:
            subject = f"task=t{task} leg={'up' if extra == 0 else 'down'}"
        elif kind is EventKind.SIMULATION_END:
            subject = "-"
        else:
            subject = f"task=t{task} node={topo.nodes[extra].id}"
        lines.append(f"{time:.17g}\t{seq}\t{kind.value}\t{subject}")
    return lines


def run_simulation(params: RunParams, backend: str | None = "auto",
                   collect_trace: bool = False) -> RunResult:
    """Execute one deterministic run and summarize it.

    Raises SimulationError when a run-level invariant breaks; that is a bug,
    not a data point.
    """
    topo = topology_preset(params.topology, params.scenario, params.cpu_mips,
                           params.calibration)
    inputs = build_kernel_inputs(params, topo, collect_trace)
    out = _kernel.run(inputs, topo.nodes, backend=backend)
    records = _build_records(params, topo, inputs, out)
    summary = summarize(
        records,
        scenario=params.scenario.name,
        topology=params.topology,
        cpu=params.cpu_name(),
        mips=params.cpu_mips,
        seed=params.seed,
        strict_deadline=params.calibration.strict_deadline_tsr,
        node_utilization=node_utilization(topo, out, params.duration_s),
    )
    assert_run_invariants(records, summary)
    result = RunResult(
        params=params,
        topology=topo,
        records=records,
        summary=summary,
        processed_events=out.processed_events,
    )
    if collect_trace:
        result.trace_lines = _trace_lines(topo, out.trace)
        result.trace_hash = hash_trace(result.trace_lines)
    return result
