"""Crossbar arbiters: round-robin, iterative three-phase, and exhaustive dual-RR.

Request state is passed as one bitmask per input (bit j set means VOQ(i,j)
has an eligible head and neither endpoint is busy).  All arbiters return a
partial injective input->output map.
"""

from __future__ import annotations


def _pick(mask: int, ptr: int, n: int) -> int:
    """Index of the set bit at/after ptr (circularly); -1 if mask empty."""
    if mask == 0:
        return -1
    rot = ((mask >> ptr) | (mask << (n - ptr))) & ((1 << n) - 1)
    lsb = (rot & -rot).bit_length() - 1
    return (ptr + lsb) % n


def _columns(rows: list[int], n: int) -> list[int]:
    cols = [0] * n
    for i, r in enumerate(rows):
        bit = 1 << i
        while r:
            j = (r & -r).bit_length() - 1
            cols[j] |= bit
            r &= r - 1
    return cols


def is_matching(pairs: dict[int, int]) -> bool:
    return len(set(pairs.values())) == len(pairs)


class RRScheduler:
    """Single-iteration request/grant/accept with rotating priority indices.

    An index advances to one past the position it served only when its
    choice is finalized (the grant was accepted).
    """

    def __init__(self, ports: int):
        self.n = ports
        self.grant_ptr = [0] * ports   # per output
        self.accept_ptr = [0] * ports  # per input

    def arbitrate(self, rows: list[int]) -> dict[int, int]:
        n = self.n
        cols = _columns(rows, n)
        grants = [0] * n  # per input: mask of outputs granting it
        for j in range(n):
            gi = _pick(cols[j], self.grant_ptr[j], n)
            if gi >= 0:
                grants[gi] |= 1 << j
        matching = {}
        for i in range(n):
            jo = _pick(grants[i], self.accept_ptr[i], n)
            if jo >= 0:
                matching[i] = jo
                self.grant_ptr[jo] = (i + 1) % n
                self.accept_ptr[i] = (jo + 1) % n
        return matching


class ISLIPScheduler:
    """Iterative three-phase matching with desynchronizing pointers.

    Grant/accept pointers advance only for matches made in the first
    iteration; later iterations fill the matching without moving pointers.
    """

    def __init__(self, ports: int, iterations: int = 1):
        self.n = ports
        self.iterations = iterations
        self.grant_ptr = [0] * ports
        self.accept_ptr = [0] * ports

    def arbitrate(self, rows: list[int], iterations: int | None = None) -> dict[int, int]:
        n = self.n
        iters = self.iterations if iterations is None else iterations
        matched_in = 0
        matched_out = 0
        matching: dict[int, int] = {}
        for it in range(iters):
            active = [rows[i] & ~matched_out if not (matched_in >> i) & 1 else 0
                      for i in range(n)]
            cols = _columns(active, n)
            grants = [0] * n
            for j in range(n):
                if (matched_out >> j) & 1:
                    continue
                gi = _pick(cols[j], self.grant_ptr[j], n)
                if gi >= 0:
                    grants[gi] |= 1 << j
            any_new = False
            for i in range(n):
                jo = _pick(grants[i], self.accept_ptr[i], n)
                if jo < 0:
                    continue
                matching[i] = jo
                matched_in |= 1 << i
                matched_out |= 1 << jo
                any_new = True
                if it == 0:
                    self.grant_ptr[jo] = (i + 1) % n
                    self.accept_ptr[i] = (jo + 1) % n
            if not any_new:
                break
        return matching


class EDRRMScheduler:
    """Two-phase request/grant with exhaustive service.

    A matched pair persists (is "held") until its VOQ drains; the caller
    releases drained pairs before arbitration.  Each unheld input sends one
    request, to the eligible VOQ at/after its request index; each unheld
    output grants the requester nearest its grant index.  Indices advance
    past served positions on grant.
    """

    def __init__(self, ports: int):
        self.n = ports
        self.request_ptr = [0] * ports  # per input
        self.grant_ptr = [0] * ports    # per output
        self.held: dict[int, int] = {}

    def release(self, i: int) -> None:
        self.held.pop(i, None)

    def arbitrate(self, rows: list[int]) -> dict[int, int]:
        n = self.n
        held_out = 0
        for j in self.held.values():
            held_out |= 1 << j
        requesters = [0] * n  # per output: mask of requesting inputs
        requested = [-1] * n  # per input: output it requested
        for i in range(n):
            if i in self.held:
                continue
            # requests are blind to other ports' holds: a request aimed at a
            # held output simply wins no grant this cycle
            j = _pick(rows[i], self.request_ptr[i], n)
            requested[i] = j
            if j >= 0:
                requesters[j] |= 1 << i
        granted = 0
        for j in range(n):
            if (held_out >> j) & 1 or requesters[j] == 0:
                continue
            gi = _pick(requesters[j], self.grant_ptr[j], n)
            if gi >= 0:
                self.held[gi] = j
                self.request_ptr[gi] = (j + 1) % n
                self.grant_ptr[j] = (gi + 1) % n
                granted |= 1 << gi
        # losers rotate past the output they tried so a single busy output
        # cannot pin an input down while its other queues back up
        for i in range(n):
            if requested[i] >= 0 and not (granted >> i) & 1 and i not in self.held:
                self.request_ptr[i] = (requested[i] + 1) % n
        return dict(self.held)


def make_scheduler(name: str, ports: int, islip_iterations: int = 1):
    if name == "rr":
        return RRScheduler(ports)
    if name == "islip":
        return ISLIPScheduler(ports, islip_iterations)
    if name == "edrrm":
        return EDRRMScheduler(ports)
    raise ValueError(f"unknown scheduler {name!r}")


def rows_from_matrix(matrix) -> list[int]:
    """Convert a boolean request matrix R[i][j] to per-input bitmask rows."""
    rows = []
    for row in matrix:
        m = 0
        for j, v in enumerate(row):
            if v:
                m |= 1 << j
        rows.append(m)
    return rows


def greedy_maximal(rows: list[int], n: int) -> dict[int, int]:
    """Greedy maximal-matching oracle for maximality checks."""
    used_out = 0
    matching = {}
    for i in range(n):
        r = rows[i] & ~used_out
        if r:
            j = (r & -r).bit_length() - 1
            matching[i] = j
            used_out |= 1 << j
    return matching


def is_maximal(rows: list[int], matching: dict[int, int], n: int) -> bool:
    """No request edge joins an unmatched input to an unmatched output."""
    matched_out = 0
    for j in matching.values():
        matched_out |= 1 << j
    for i in range(n):
        if i in matching:
            continue
        if rows[i] & ~matched_out:
            return False
    return True
