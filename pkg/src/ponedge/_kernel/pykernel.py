"""Pure-Python simulation kernel (reference semantics for the compiled twin).

The compiled kernel in _ckernel.pyx mirrors this module operation for
operation: same event codes, same push order inside each handler, same
float expressions, and the same insertion-ordered pool iteration. Any change
here must be reflected there, or the two backends stop being bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..compute import NodeState
from ..engine import EventQueue
from ..network import FairSharePool

# internal event codes
EV_ARRIVAL = 0
EV_SER_END = 1
EV_HOP_ARRIVE = 2
EV_EXEC_START = 3
EV_EXEC_END = 4
EV_DELIVERED = 5
EV_SIM_END = 6

# trace kinds (index-aligned with engine.EventKind declaration order)
TR_TASK_ARRIVAL = 0
TR_TRANSFER_COMPLETE = 1
TR_EXECUTION_START = 2
TR_EXECUTION_COMPLETE = 3
TR_RESULT_DELIVERED = 4
TR_SIMULATION_END = 5

# task phases
PH_PENDING = 0
PH_UP = 1
PH_QUEUED = 2
PH_RUNNING = 3
PH_DOWN = 4
PH_DELIVERED = 5
PH_NO_PLACEMENT = 6

STRATEGY_TRADE_OFF = 0
STRATEGY_ROUND_ROBIN = 1

NAN = float("nan")


@dataclass
class KernelInputs:
    """Flat, index-based description of one run (cheap to hand to C)."""

    # nodes, index-aligned
    mips_per_core: list[float]
    cores: list[int]
    weight: list[float]
    ram_capacity: list[float]
    storage_capacity: list[float]
    # scheduler candidates as node indices, in node-id order
    candidate_nodes: list[int]
    # links
    link_bandwidth: list[float]
    link_hop_delay: list[float]  # propagation + fixed, per traversal
    # hop code = link_index * 2 + direction; uplink order, Local hops omitted
    route_hops: list[list[int]]
    up_route: list[list[int]]  # device -> candidate slot -> route id
    # arrivals, sorted by (time, device)
    arrival_time: list[float]
    arrival_device: list[int]
    # per-task constants for this scenario
    length_mi: float
    request_bits: float
    result_bits: float
    task_ram_mb: float
    task_storage_mb: float
    # control
    strategy: int
    control_delay_s: float
    duration_s: float
    collect_trace: bool


@dataclass
class KernelOutputs:
    node_of: list[int]  # -1 when never placed
    uplink_done: list[float]  # NaN when the phase was not reached
    exec_start: list[float]
    exec_end: list[float]
    delivered_at: list[float]
    final_phase: list[int]
    processed_events: int
    trace: list[tuple[float, int, int, int, int]] | None


class _PyRun:
    """One single-threaded deterministic run over the event queue."""

    def __init__(self, inp: KernelInputs, node_specs):
        self.inp = inp
        n_tasks = len(inp.arrival_time)
        self.n_tasks = n_tasks
        self.queue = EventQueue()
        self.pools = [
            FairSharePool(inp.link_bandwidth[code >> 1])
            for code in range(2 * len(inp.link_bandwidth))
        ]
        self.nodes = [NodeState(spec) for spec in node_specs]
        self.rr_next = 0
        self.next_arrival = 0
        self.processed = 0
        self.trace: list | None = [] if inp.collect_trace else None

        self.t_node = [-1] * n_tasks
        self.t_phase = [PH_PENDING] * n_tasks
        self.t_route = [-1] * n_tasks
        self.t_hop = [0] * n_tasks
        self.t_leg = [0] * n_tasks
        self.t_epoch = [0] * n_tasks
        self.uplink_done = [NAN] * n_tasks
        self.exec_start = [NAN] * n_tasks
        self.exec_end = [NAN] * n_tasks
        self.delivered_at = [NAN] * n_tasks

    # -- helpers ----------------------------------------------------------

    def _trace(self, time, seq, kind, task, extra):
        if self.trace is not None:
            self.trace.append((time, seq, kind, task, extra))

    def _push(self, time, code, task, epoch=0):
        self.queue.schedule(time, (code, task, epoch))

    def _reschedule_pool(self, etas):
        # every member's serialization end moved; supersede their old events
        for token, eta in etas:
            self.t_epoch[token] += 1
            self._push(eta, EV_SER_END, token, self.t_epoch[token])

    def _current_hop_code(self, task):
        route = self.inp.route_hops[self.t_route[task]]
        if self.t_leg[task] == 0:
            return route[self.t_hop[task]]
        # downlink walks the route backwards with flipped direction
        return route[len(route) - 1 - self.t_hop[task]] ^ 1

    def _join_current_hop(self, task, now):
        code = self._current_hop_code(task)
        bits = self.inp.request_bits if self.t_leg[task] == 0 else self.inp.result_bits
        self._reschedule_pool(self.pools[code].join(now, task, bits))

    def _start_leg(self, task, now, delay):
        """Begin uplink/downlink; an empty route still completes via an event."""
        if delay > 0.0 or not self.inp.route_hops[self.t_route[task]]:
            self.t_hop[task] = -1
            self._push(now + delay, EV_HOP_ARRIVE, task)
        else:
            self.t_hop[task] = 0
            self._join_current_hop(task, now)

    def _leg_complete(self, task, now, seq):
        if self.t_leg[task] == 0:
            self.uplink_done[task] = now
            self._trace(now, seq, TR_TRANSFER_COMPLETE, task, 0)
            self._submit(task, now)
        else:
            self._trace(now, seq, TR_TRANSFER_COMPLETE, task, 1)
            self._push(now, EV_DELIVERED, task)

    def _submit(self, task, now):
        state = self.nodes[self.t_node[task]]
        exec_start, exec_end = state.submit(task, self.inp.length_mi, now)
        self.exec_start[task] = exec_start
        self.exec_end[task] = exec_end
        self.t_phase[task] = PH_QUEUED
        self._push(exec_start, EV_EXEC_START, task)
        self._push(exec_end, EV_EXEC_END, task)

    def _place(self, task, device, now):
        inp = self.inp
        cand = inp.candidate_nodes
        chosen_slot = -1
        if inp.strategy == STRATEGY_TRADE_OFF:
            best_score = 0.0
            for slot in range(len(cand)):
                state = self.nodes[cand[slot]]
                if state.admit(inp.task_ram_mb, inp.task_storage_mb) is not None:
                    continue
                node = cand[slot]
                score = (
                    (state.queued_and_running + 1)
                    * inp.weight[node]
                    * inp.length_mi
                    / inp.mips_per_core[node]
                )
                if chosen_slot < 0 or score < best_score:
                    chosen_slot = slot
                    best_score = score
        else:
            n = len(cand)
            for step in range(n):
                slot = (self.rr_next + step) % n
                state = self.nodes[cand[slot]]
                if state.admit(inp.task_ram_mb, inp.task_storage_mb) is None:
                    chosen_slot = slot
                    self.rr_next = (slot + 1) % n
                    break
        if chosen_slot < 0:
            self.t_phase[task] = PH_NO_PLACEMENT
            return
        node = cand[chosen_slot]
        self.nodes[node].reserve(inp.task_ram_mb, inp.task_storage_mb)
        self.t_node[task] = node
        self.t_route[task] = inp.up_route[device][chosen_slot]
        self.t_phase[task] = PH_UP
        self._start_leg(task, now, inp.control_delay_s)

    # -- event loop --------------------------------------------------------

    def _handle(self, now, seq, payload):
        code, task, epoch = payload
        if code == EV_SER_END:
            if epoch != self.t_epoch[task]:
                return  # superseded by a later share recomputation
            hop_code = self._current_hop_code(task)
            self._reschedule_pool(self.pools[hop_code].leave(now, task))
            self._push(now + self.inp.link_hop_delay[hop_code >> 1], EV_HOP_ARRIVE, task)
        elif code == EV_HOP_ARRIVE:
            self.t_hop[task] += 1
            if self.t_hop[task] < len(self.inp.route_hops[self.t_route[task]]):
                self._join_current_hop(task, now)
            else:
                self._leg_complete(task, now, seq)
        elif code == EV_EXEC_START:
            self.t_phase[task] = PH_RUNNING
            self._trace(now, seq, TR_EXECUTION_START, task, self.t_node[task])
        elif code == EV_EXEC_END:
            node_state = self.nodes[self.t_node[task]]
            node_state.complete(task)
            node_state.release(self.inp.task_ram_mb, self.inp.task_storage_mb)
            self._trace(now, seq, TR_EXECUTION_COMPLETE, task, self.t_node[task])
            self.t_phase[task] = PH_DOWN
            self.t_leg[task] = 1
            self._start_leg(task, now, 0.0)
        elif code == EV_ARRIVAL:
            self._trace(now, seq, TR_TASK_ARRIVAL, task, self.inp.arrival_device[task])
            if self.next_arrival < self.n_tasks:
                idx = self.next_arrival
                self.next_arrival += 1
                self._push(self.inp.arrival_time[idx], EV_ARRIVAL, idx)
            self._place(task, self.inp.arrival_device[task], now)
        elif code == EV_DELIVERED:
            self.delivered_at[task] = now
            self.t_phase[task] = PH_DELIVERED
            self._trace(now, seq, TR_RESULT_DELIVERED, task, self.t_node[task])
        else:  # EV_SIM_END
            self._trace(now, seq, TR_SIMULATION_END, task, -1)
        self.processed += 1

    def run(self) -> KernelOutputs:
        inp = self.inp
        self._push(inp.duration_s, EV_SIM_END, -1)
        if self.n_tasks:
            self.next_arrival = 1
            self._push(inp.arrival_time[0], EV_ARRIVAL, 0)
        self.queue.run_until(inp.duration_s, self._handle)
        return KernelOutputs(
            node_of=self.t_node,
            uplink_done=self.uplink_done,
            exec_start=self.exec_start,
            exec_end=self.exec_end,
            delivered_at=self.delivered_at,
            final_phase=self.t_phase,
            processed_events=self.processed,
            trace=self.trace,
        )


def run(inputs: KernelInputs, node_specs) -> KernelOutputs:
    return _PyRun(inputs, node_specs).run()
