# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False, language_level=3
"""Compiled twin of pykernel: same event codes, push order, and float math.

Every arithmetic expression is written exactly as in pykernel.py (plain IEEE
double adds/mults/divides, no libm calls), so both backends produce
bit-identical traces. Do not "optimize" expressions here without changing the
Python reference in lockstep.
"""

from libc.stdlib cimport free, malloc

from .pykernel import KernelOutputs

cdef double NAN_VALUE = float("nan")

cdef enum:
    EV_ARRIVAL = 0
    EV_SER_END = 1
    EV_HOP_ARRIVE = 2
    EV_EXEC_START = 3
    EV_EXEC_END = 4
    EV_DELIVERED = 5
    EV_SIM_END = 6

cdef enum:
    TR_TASK_ARRIVAL = 0
    TR_TRANSFER_COMPLETE = 1
    TR_EXECUTION_START = 2
    TR_EXECUTION_COMPLETE = 3
    TR_RESULT_DELIVERED = 4
    TR_SIMULATION_END = 5

cdef enum:
    PH_PENDING = 0
    PH_UP = 1
    PH_QUEUED = 2
    PH_RUNNING = 3
    PH_DOWN = 4
    PH_DELIVERED = 5
    PH_NO_PLACEMENT = 6

cdef int STRATEGY_TRADE_OFF = 0


cdef struct Event:
    double time
    long long seq
    int code
    int task
    long long epoch


cdef struct Pool:
    double bandwidth
    double last_update
    int count
    int capacity
    int* tasks
    double* remaining


cdef class _CRun:
    cdef:
        # heap
        Event* heap
        int heap_len, heap_cap
        long long next_seq
        # pools (one per link direction)
        Pool* pools
        int n_pools
        # nodes
        int n_nodes
        double* mips_per_core
        double* weight
        double* ram_remaining
        double* storage_remaining
        int* queued
        double* core_free  # flat, per-core
        int* core_offset
        int* cores
        # candidates
        int* cand
        int n_cand
        # links / routes
        double* hop_delay
        int* route_flat
        int* route_start
        int* route_len
        int* up_route  # device * n_cand + slot -> route id
        # tasks
        int n_tasks
        double* arrival_time
        int* arrival_device
        int* t_node
        int* t_phase
        int* t_route
        int* t_hop
        int* t_leg
        long long* t_epoch
        double* uplink_done
        double* exec_start
        double* exec_end
        double* delivered_at
        # scenario constants
        double length_mi, request_bits, result_bits
        double task_ram, task_storage
        int strategy
        double control_delay
        double duration
        int next_arrival
        long long processed
        int rr_next
        object trace  # None or list of tuples

    def __cinit__(self):
        self.heap = NULL
        self.pools = NULL
        self.mips_per_core = NULL
        self.weight = NULL
        self.ram_remaining = NULL
        self.storage_remaining = NULL
        self.queued = NULL
        self.core_free = NULL
        self.core_offset = NULL
        self.cores = NULL
        self.cand = NULL
        self.hop_delay = NULL
        self.route_flat = NULL
        self.route_start = NULL
        self.route_len = NULL
        self.up_route = NULL
        self.arrival_time = NULL
        self.arrival_device = NULL
        self.t_node = NULL
        self.t_phase = NULL
        self.t_route = NULL
        self.t_hop = NULL
        self.t_leg = NULL
        self.t_epoch = NULL
        self.uplink_done = NULL
        self.exec_start = NULL
        self.exec_end = NULL
        self.delivered_at = NULL
        self.n_pools = 0

    cdef void* _alloc(self, size_t nbytes) except NULL:
        cdef void* ptr = malloc(nbytes)
        if ptr == NULL:
            raise MemoryError()
        return ptr

    def __dealloc__(self):
        cdef int i
        if self.pools != NULL:
            for i in range(self.n_pools):
                free(self.pools[i].tasks)
                free(self.pools[i].remaining)
            free(self.pools)
        free(self.heap)
        free(self.mips_per_core)
        free(self.weight)
        free(self.ram_remaining)
        free(self.storage_remaining)
        free(self.queued)
        free(self.core_free)
        free(self.core_offset)
        free(self.cores)
        free(self.cand)
        free(self.hop_delay)
        free(self.route_flat)
        free(self.route_start)
        free(self.route_len)
        free(self.up_route)
        free(self.arrival_time)
        free(self.arrival_device)
        free(self.t_node)
        free(self.t_phase)
        free(self.t_route)
        free(self.t_hop)
        free(self.t_leg)
        free(self.t_epoch)
        free(self.uplink_done)
        free(self.exec_start)
        free(self.exec_end)
        free(self.delivered_at)

    # -- heap ---------------------------------------------------------------

    cdef void _push(self, double time, int code, int task, long long epoch):
        cdef Event* bigger
        cdef int i, parent
        cdef Event ev
        if self.heap_len == self.heap_cap:
            self.heap_cap *= 2
            bigger = <Event*> malloc(self.heap_cap * sizeof(Event))
            if bigger == NULL:
                raise MemoryError()
            for i in range(self.heap_len):
                bigger[i] = self.heap[i]
            free(self.heap)
            self.heap = bigger
        ev.time = time
        ev.seq = self.next_seq
        self.next_seq += 1
        ev.code = code
        ev.task = task
        ev.epoch = epoch
        i = self.heap_len
        self.heap_len += 1
        while i > 0:
            parent = (i - 1) >> 1
            if (self.heap[parent].time < ev.time
                    or (self.heap[parent].time == ev.time and self.heap[parent].seq < ev.seq)):
                break
            self.heap[i] = self.heap[parent]
            i = parent
        self.heap[i] = ev

    cdef Event _pop(self):
        cdef Event top = self.heap[0]
        cdef Event last
        cdef int i = 0, child
        self.heap_len -= 1
        if self.heap_len > 0:
            last = self.heap[self.heap_len]
            while True:
                child = 2 * i + 1
                if child >= self.heap_len:
                    break
                if child + 1 < self.heap_len:
                    if (self.heap[child + 1].time < self.heap[child].time
                            or (self.heap[child + 1].time == self.heap[child].time
                                and self.heap[child + 1].seq < self.heap[child].seq)):
                        child += 1
                if (last.time < self.heap[child].time
                        or (last.time == self.heap[child].time and last.seq < self.heap[child].seq)):
                    break
                self.heap[i] = self.heap[child]
                i = child
            self.heap[i] = last
        return top

    # -- fair-share pools ----------------------------------------------------

    cdef void _pool_advance(self, Pool* pool, double now):
        cdef double rate, elapsed
        cdef int i
        if pool.count > 0:
            rate = pool.bandwidth / pool.count
            elapsed = now - pool.last_update
            if elapsed > 0.0:
                for i in range(pool.count):
                    pool.remaining[i] -= rate * elapsed
        pool.last_update = now

    cdef void _pool_reschedule(self, Pool* pool, double now):
        # every member's serialization end moved; supersede their old events
        cdef double rate = pool.bandwidth / pool.count
        cdef int i, token
        for i in range(pool.count):
            token = pool.tasks[i]
            self.t_epoch[token] += 1
            self._push(now + pool.remaining[i] / rate, EV_SER_END, token, self.t_epoch[token])

    cdef void _pool_join(self, int code, double now, int token, double bits):
        cdef Pool* pool = &self.pools[code]
        cdef int* new_tasks
        cdef double* new_remaining
        cdef int i
        self._pool_advance(pool, now)
        if pool.count == pool.capacity:
            pool.capacity *= 2
            new_tasks = <int*> malloc(pool.capacity * sizeof(int))
            new_remaining = <double*> malloc(pool.capacity * sizeof(double))
            if new_tasks == NULL or new_remaining == NULL:
                raise MemoryError()
            for i in range(pool.count):
                new_tasks[i] = pool.tasks[i]
                new_remaining[i] = pool.remaining[i]
            free(pool.tasks)
            free(pool.remaining)
            pool.tasks = new_tasks
            pool.remaining = new_remaining
        pool.tasks[pool.count] = token
        pool.remaining[pool.count] = bits
        pool.count += 1
        self._pool_reschedule(pool, now)

    cdef void _pool_leave(self, int code, double now, int token):
        cdef Pool* pool = &self.pools[code]
        cdef int i, j
        self._pool_advance(pool, now)
        for i in range(pool.count):
            if pool.tasks[i] == token:
                for j in range(i + 1, pool.count):  # keep insertion order
                    pool.tasks[j - 1] = pool.tasks[j]
                    pool.remaining[j - 1] = pool.remaining[j]
                pool.count -= 1
                break
        if pool.count > 0:
            self._pool_reschedule(pool, now)

    # -- transfer / compute steps --------------------------------------------

    cdef int _current_hop_code(self, int task):
        cdef int rid = self.t_route[task]
        cdef int n = self.route_len[rid]
        if self.t_leg[task] == 0:
            return self.route_flat[self.route_start[rid] + self.t_hop[task]]
        return self.route_flat[self.route_start[rid] + n - 1 - self.t_hop[task]] ^ 1

    cdef void _join_current_hop(self, int task, double now):
        cdef int code = self._current_hop_code(task)
        cdef double bits = self.request_bits if self.t_leg[task] == 0 else self.result_bits
        self._pool_join(code, now, task, bits)

    cdef void _start_leg(self, int task, double now, double delay):
        if delay > 0.0 or self.route_len[self.t_route[task]] == 0:
            self.t_hop[task] = -1
            self._push(now + delay, EV_HOP_ARRIVE, task, 0)
        else:
            self.t_hop[task] = 0
            self._join_current_hop(task, now)

    cdef void _submit(self, int task, double now):
        cdef int node = self.t_node[task]
        cdef int base = self.core_offset[node]
        cdef int core = 0, idx
        cdef double free_at = self.core_free[base]
        cdef double start, end
        for idx in range(1, self.cores[node]):
            if self.core_free[base + idx] < free_at:
                core = idx
                free_at = self.core_free[base + idx]
        start = now if now > free_at else free_at
        end = start + self.length_mi / self.mips_per_core[node]
        self.core_free[base + core] = end
        self.queued[node] += 1
        self.exec_start[task] = start
        self.exec_end[task] = end
        self.t_phase[task] = PH_QUEUED
        self._push(start, EV_EXEC_START, task, 0)
        self._push(end, EV_EXEC_END, task, 0)

    cdef void _leg_complete(self, int task, double now, long long seq):
        if self.t_leg[task] == 0:
            self.uplink_done[task] = now
            if self.trace is not None:
                self.trace.append((now, seq, TR_TRANSFER_COMPLETE, task, 0))
            self._submit(task, now)
        else:
            if self.trace is not None:
                self.trace.append((now, seq, TR_TRANSFER_COMPLETE, task, 1))
            self._push(now, EV_DELIVERED, task, 0)

    cdef void _place(self, int task, int device, double now):
        cdef int chosen_slot = -1
        cdef int slot, node, step, n
        cdef double best_score = 0.0
        cdef double score
        if self.strategy == STRATEGY_TRADE_OFF:
            for slot in range(self.n_cand):
                node = self.cand[slot]
                if self.task_ram > self.ram_remaining[node]:
                    continue
                if self.task_storage > self.storage_remaining[node]:
                    continue
                score = (
                    (self.queued[node] + 1)
                    * self.weight[node]
                    * self.length_mi
                    / self.mips_per_core[node]
                )
                if chosen_slot < 0 or score < best_score:
                    chosen_slot = slot
                    best_score = score
        else:
            n = self.n_cand
            for step in range(n):
                slot = (self.rr_next + step) % n
                node = self.cand[slot]
                if self.task_ram > self.ram_remaining[node]:
                    continue
                if self.task_storage > self.storage_remaining[node]:
                    continue
                chosen_slot = slot
                self.rr_next = (slot + 1) % n
                break
        if chosen_slot < 0:
            self.t_phase[task] = PH_NO_PLACEMENT
            return
        node = self.cand[chosen_slot]
        self.ram_remaining[node] -= self.task_ram
        self.storage_remaining[node] -= self.task_storage
        self.t_node[task] = node
        self.t_route[task] = self.up_route[device * self.n_cand + chosen_slot]
        self.t_phase[task] = PH_UP
        self._start_leg(task, now, self.control_delay)

    # -- event loop ------------------------------------------------------------

    cdef void _handle(self, Event ev):
        cdef int task = ev.task
        cdef int hop_code, node, idx
        cdef double now = ev.time
        if ev.code == EV_SER_END:
            if ev.epoch != self.t_epoch[task]:
                return  # superseded by a later share recomputation
            hop_code = self._current_hop_code(task)
            self._pool_leave(hop_code, now, task)
            self._push(now + self.hop_delay[hop_code >> 1], EV_HOP_ARRIVE, task, 0)
        elif ev.code == EV_HOP_ARRIVE:
            self.t_hop[task] += 1
            if self.t_hop[task] < self.route_len[self.t_route[task]]:
                self._join_current_hop(task, now)
            else:
                self._leg_complete(task, now, ev.seq)
        elif ev.code == EV_EXEC_START:
            self.t_phase[task] = PH_RUNNING
            if self.trace is not None:
                self.trace.append((now, ev.seq, TR_EXECUTION_START, task, self.t_node[task]))
        elif ev.code == EV_EXEC_END:
            node = self.t_node[task]
            self.queued[node] -= 1
            self.ram_remaining[node] += self.task_ram
            self.storage_remaining[node] += self.task_storage
            if self.trace is not None:
                self.trace.append((now, ev.seq, TR_EXECUTION_COMPLETE, task, node))
            self.t_phase[task] = PH_DOWN
            self.t_leg[task] = 1
            self._start_leg(task, now, 0.0)
        elif ev.code == EV_ARRIVAL:
            if self.trace is not None:
                self.trace.append((now, ev.seq, TR_TASK_ARRIVAL, task, self.arrival_device[task]))
            if self.next_arrival < self.n_tasks:
                idx = self.next_arrival
                self.next_arrival += 1
                self._push(self.arrival_time[idx], EV_ARRIVAL, idx, 0)
            self._place(task, self.arrival_device[task], now)
        elif ev.code == EV_DELIVERED:
            self.delivered_at[task] = now
            self.t_phase[task] = PH_DELIVERED
            if self.trace is not None:
                self.trace.append((now, ev.seq, TR_RESULT_DELIVERED, task, self.t_node[task]))
        else:  # EV_SIM_END
            if self.trace is not None:
                self.trace.append((now, ev.seq, TR_SIMULATION_END, task, -1))
        self.processed += 1

    cdef void _setup(self, object inp) except *:
        cdef int i, j, total_cores, offset, pos
        mips = inp.mips_per_core
        cores = inp.cores
        weight = inp.weight
        ram = inp.ram_capacity
        storage = inp.storage_capacity
        self.n_nodes = len(mips)
        self.mips_per_core = <double*> self._alloc(self.n_nodes * sizeof(double))
        self.weight = <double*> self._alloc(self.n_nodes * sizeof(double))
        self.ram_remaining = <double*> self._alloc(self.n_nodes * sizeof(double))
        self.storage_remaining = <double*> self._alloc(self.n_nodes * sizeof(double))
        self.queued = <int*> self._alloc(self.n_nodes * sizeof(int))
        self.cores = <int*> self._alloc(self.n_nodes * sizeof(int))
        self.core_offset = <int*> self._alloc(self.n_nodes * sizeof(int))
        total_cores = 0
        for i in range(self.n_nodes):
            self.mips_per_core[i] = mips[i]
            self.weight[i] = weight[i]
            self.ram_remaining[i] = ram[i]
            self.storage_remaining[i] = storage[i]
            self.queued[i] = 0
            self.cores[i] = cores[i]
            self.core_offset[i] = total_cores
            total_cores += cores[i]
        self.core_free = <double*> self._alloc(total_cores * sizeof(double))
        for i in range(total_cores):
            self.core_free[i] = 0.0

        cand = inp.candidate_nodes
        self.n_cand = len(cand)
        self.cand = <int*> self._alloc(self.n_cand * sizeof(int))
        for i in range(self.n_cand):
            self.cand[i] = cand[i]

        bandwidth = inp.link_bandwidth
        delay = inp.link_hop_delay
        n_links = len(bandwidth)
        self.n_pools = 2 * n_links
        self.hop_delay = <double*> self._alloc(n_links * sizeof(double))
        self.pools = <Pool*> self._alloc(self.n_pools * sizeof(Pool))
        for i in range(n_links):
            self.hop_delay[i] = delay[i]
        for i in range(self.n_pools):
            self.pools[i].tasks = NULL
            self.pools[i].remaining = NULL
        for i in range(self.n_pools):
            self.pools[i].bandwidth = bandwidth[i >> 1]
            self.pools[i].last_update = 0.0
            self.pools[i].count = 0
            self.pools[i].capacity = 4
            self.pools[i].tasks = <int*> self._alloc(4 * sizeof(int))
            self.pools[i].remaining = <double*> self._alloc(4 * sizeof(double))

        routes = inp.route_hops
        n_routes = len(routes)
        total = 0
        for i in range(n_routes):
            total += len(routes[i])
        self.route_start = <int*> self._alloc(n_routes * sizeof(int))
        self.route_len = <int*> self._alloc(n_routes * sizeof(int))
        self.route_flat = <int*> self._alloc(max(total, 1) * sizeof(int))
        pos = 0
        for i in range(n_routes):
            self.route_start[i] = pos
            self.route_len[i] = len(routes[i])
            for j in range(len(routes[i])):
                self.route_flat[pos] = routes[i][j]
                pos += 1

        up = inp.up_route
        n_devices = len(up)
        self.up_route = <int*> self._alloc(max(n_devices * self.n_cand, 1) * sizeof(int))
        for i in range(n_devices):
            for j in range(self.n_cand):
                self.up_route[i * self.n_cand + j] = up[i][j]

        times = inp.arrival_time
        devices = inp.arrival_device
        self.n_tasks = len(times)
        self.arrival_time = <double*> self._alloc(max(self.n_tasks, 1) * sizeof(double))
        self.arrival_device = <int*> self._alloc(max(self.n_tasks, 1) * sizeof(int))
        self.t_node = <int*> self._alloc(max(self.n_tasks, 1) * sizeof(int))
        self.t_phase = <int*> self._alloc(max(self.n_tasks, 1) * sizeof(int))
        self.t_route = <int*> self._alloc(max(self.n_tasks, 1) * sizeof(int))
        self.t_hop = <int*> self._alloc(max(self.n_tasks, 1) * sizeof(int))
        self.t_leg = <int*> self._alloc(max(self.n_tasks, 1) * sizeof(int))
        self.t_epoch = <long long*> self._alloc(max(self.n_tasks, 1) * sizeof(long long))
        self.uplink_done = <double*> self._alloc(max(self.n_tasks, 1) * sizeof(double))
        self.exec_start = <double*> self._alloc(max(self.n_tasks, 1) * sizeof(double))
        self.exec_end = <double*> self._alloc(max(self.n_tasks, 1) * sizeof(double))
        self.delivered_at = <double*> self._alloc(max(self.n_tasks, 1) * sizeof(double))
        for i in range(self.n_tasks):
            self.arrival_time[i] = times[i]
            self.arrival_device[i] = devices[i]
            self.t_node[i] = -1
            self.t_phase[i] = PH_PENDING
            self.t_route[i] = -1
            self.t_hop[i] = 0
            self.t_leg[i] = 0
            self.t_epoch[i] = 0
            self.uplink_done[i] = NAN_VALUE
            self.exec_start[i] = NAN_VALUE
            self.exec_end[i] = NAN_VALUE
            self.delivered_at[i] = NAN_VALUE

        self.length_mi = inp.length_mi
        self.request_bits = inp.request_bits
        self.result_bits = inp.result_bits
        self.task_ram = inp.task_ram_mb
        self.task_storage = inp.task_storage_mb
        self.strategy = inp.strategy
        self.control_delay = inp.control_delay_s
        self.duration = inp.duration_s
        self.trace = [] if inp.collect_trace else None

        self.heap_cap = 1024
        self.heap_len = 0
        self.heap = <Event*> self._alloc(self.heap_cap * sizeof(Event))
        self.next_seq = 0
        self.next_arrival = 0
        self.processed = 0
        self.rr_next = 0

    def execute(self, object inp):
        cdef Event ev
        self._setup(inp)
        self._push(self.duration, EV_SIM_END, -1, 0)
        if self.n_tasks > 0:
            self.next_arrival = 1
            self._push(self.arrival_time[0], EV_ARRIVAL, 0, 0)
        while self.heap_len > 0 and self.heap[0].time <= self.duration:
            ev = self._pop()
            self._handle(ev)
        return KernelOutputs(
            node_of=[self.t_node[i] for i in range(self.n_tasks)],
            uplink_done=[self.uplink_done[i] for i in range(self.n_tasks)],
            exec_start=[self.exec_start[i] for i in range(self.n_tasks)],
            exec_end=[self.exec_end[i] for i in range(self.n_tasks)],
            delivered_at=[self.delivered_at[i] for i in range(self.n_tasks)],
            final_phase=[self.t_phase[i] for i in range(self.n_tasks)],
            processed_events=self.processed,
            trace=self.trace,
        )


def run(inputs):
    """Run one simulation on the compiled kernel."""
    return _CRun().execute(inputs)
