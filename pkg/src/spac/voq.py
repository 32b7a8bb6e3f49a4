"""Virtual output queue buffers: fully partitioned NxN and shared-pool variants."""

from __future__ import annotations

from collections import Counter, deque

from .arch import INFINITE


class NxNVoq:
    """One data queue per (input, output); broadcasts are copied per queue.

    `depth_flits` is a uniform int or a flat row-major list of N*N per-queue
    depths (queues can be sized independently)."""

    def __init__(self, ports: int, depth_flits):
        self.ports = ports
        if isinstance(depth_flits, (list, tuple)):
            if len(depth_flits) != ports * ports:
                raise ValueError(f"need {ports * ports} depths")
            self.depth = [list(depth_flits[i * ports:(i + 1) * ports])
                          for i in range(ports)]
        else:
            self.depth = [[depth_flits] * ports for _ in range(ports)]
        self.queues = [[deque() for _ in range(ports)] for _ in range(ports)]
        self.occ = [[0] * ports for _ in range(ports)]
        self.qmax = [[0] * ports for _ in range(ports)]
        self.hist = [[Counter() for _ in range(ports)] for _ in range(ports)]
        self.nonempty = [0] * ports  # bitmask of nonempty queues per input

    def enqueue(self, i: int, pkt, out_set) -> list[int]:
        """Store one copy per destination; returns accepted destinations."""
        accepted = []
        fc = pkt.fc
        for j in out_set:
            d = self.depth[i][j]
            if d != INFINITE and self.occ[i][j] + fc > d:
                continue
            self.queues[i][j].append(pkt)
            occ = self.occ[i][j] + fc
            self.occ[i][j] = occ
            if occ > self.qmax[i][j]:
                self.qmax[i][j] = occ
            self.hist[i][j][occ] += 1
            self.nonempty[i] |= 1 << j
            accepted.append(j)
        return accepted

    def head(self, i: int, j: int):
        q = self.queues[i][j]
        return q[0] if q else None

    def dequeue(self, i: int, j: int):
        pkt = self.queues[i][j].popleft()
        self.occ[i][j] -= pkt.fc
        if not self.queues[i][j]:
            self.nonempty[i] &= ~(1 << j)
        return pkt

    def residual_units(self) -> int:
        return sum(len(q) for row in self.queues for q in row)


class _Slot:
    __slots__ = ("pkt", "pending")

    def __init__(self, pkt, pending):
        self.pkt = pkt
        self.pending = pending


class SharedVoq:
    """Central slot pool storing each packet once; per-destination index
    queues hold slot references and a bitmap tracks pending destinations.
    The slot is freed when its bitmap empties."""

    def __init__(self, ports: int, pool_flits: int):
        self.ports = ports
        self.capacity = pool_flits
        self.pool_occ = 0
        self.pool_qmax = 0
        self.pool_hist = Counter()
        self.queues = [[deque() for _ in range(ports)] for _ in range(ports)]
        self.occ = [[0] * ports for _ in range(ports)]   # index-queue depth in flits
        self.qmax = [[0] * ports for _ in range(ports)]
        self.hist = [[Counter() for _ in range(ports)] for _ in range(ports)]
        self.nonempty = [0] * ports
        self.stored_packets = 0

    def enqueue(self, i: int, pkt, out_set) -> list[int]:
        fc = pkt.fc
        if self.capacity != INFINITE and self.pool_occ + fc > self.capacity:
            return []  # whole enqueue drops: no slot available
        slot = _Slot(pkt, set(out_set))
        self.pool_occ += fc
        self.stored_packets += 1
        if self.pool_occ > self.pool_qmax:
            self.pool_qmax = self.pool_occ
        self.pool_hist[self.pool_occ] += 1
        for j in out_set:
            self.queues[i][j].append(slot)
            occ = self.occ[i][j] + fc
            self.occ[i][j] = occ
            if occ > self.qmax[i][j]:
                self.qmax[i][j] = occ
            self.hist[i][j][occ] += 1
            self.nonempty[i] |= 1 << j
        return list(out_set)

    def head(self, i: int, j: int):
        q = self.queues[i][j]
        return q[0].pkt if q else None

    def dequeue(self, i: int, j: int):
        slot = self.queues[i][j].popleft()
        self.occ[i][j] -= slot.pkt.fc
        if not self.queues[i][j]:
            self.nonempty[i] &= ~(1 << j)
        slot.pending.discard(j)
        if not slot.pending:
            self.pool_occ -= slot.pkt.fc
            self.stored_packets -= 1
        return slot.pkt

    def pending_deliveries(self) -> int:
        return sum(len(q) for row in self.queues for q in row)

    def residual_units(self) -> int:
        return self.pending_deliveries()


class SingleFifo:
    """Diagnostic mode: one FIFO per input, exhibiting head-of-line blocking.

    Only the head packet's destination is visible to the scheduler.
    Requires unicast traffic.
    """

    def __init__(self, ports: int, depth_flits: int):
        self.ports = ports
        self.depth = depth_flits
        self.queues = [deque() for _ in range(ports)]
        self.occ = [0] * ports
        self.qmax = [[0] * ports for _ in range(ports)]
        self.hist = [[Counter() for _ in range(ports)] for _ in range(ports)]
        self.nonempty = [0] * ports

    def enqueue(self, i: int, pkt, out_set) -> list[int]:
        accepted = []
        for j in out_set:  # flooded copies queue up sequentially
            if self.depth != INFINITE and self.occ[i] + pkt.fc > self.depth:
                continue
            self.queues[i].append((pkt, j))
            self.occ[i] += pkt.fc
            occ = self.occ[i]
            if occ > self.qmax[i][j]:
                self.qmax[i][j] = occ
            self.hist[i][j][occ] += 1
            accepted.append(j)
        self.nonempty[i] = 1 << self.queues[i][0][1] if self.queues[i] else 0
        return accepted

    def head(self, i: int, j: int):
        q = self.queues[i]
        if q and q[0][1] == j:
            return q[0][0]
        return None

    def dequeue(self, i: int, j: int):
        pkt, out = self.queues[i].popleft()
        assert out == j
        self.occ[i] -= pkt.fc
        self.nonempty[i] = (1 << self.queues[i][0][1]) if self.queues[i] else 0
        return pkt

    def residual_units(self) -> int:
        return sum(len(q) for q in self.queues)
