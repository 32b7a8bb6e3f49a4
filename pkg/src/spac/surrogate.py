"""Event-driven statistical surrogate of the switch datapath.

Instead of per-flit cycles, each packet is one transaction: a deterministic
pipeline delay plus queueing at its input and output ports, which it holds
simultaneously for flit_count x II cycles once both are free.  Forwarding
learn/lookup is replayed vectorially over the trace.  This trades scheduler
detail (all three arbiters share the service abstraction and differ only by
their arbitration-overhead constant) for orders-of-magnitude speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .arch import INFINITE, ArchConfig, check_table_compat
from .errors import ConfigTraceMismatch
from .protocol import ProtocolSpec
from .trace import BROADCAST, Trace


@njit(cache=True)
def _greedy_infinite(ready, inp, outp, service, n_ports):
    n = ready.shape[0]
    in_free = np.zeros(n_ports)
    out_free = np.zeros(n_ports)
    start = np.empty(n)
    end = np.empty(n)
    for k in range(n):
        s = ready[k]
        i = inp[k]
        j = outp[k]
        if in_free[i] > s:
            s = in_free[i]
        if out_free[j] > s:
            s = out_free[j]
        e = s + service[k]
        in_free[i] = e
        out_free[j] = e
        start[k] = s
        end[k] = e
    return start, end


@njit(cache=True)
def _greedy_finite(ready, inp, outp, service, fc, n_ports, depth, shared, pool_cap):
    """Finite-buffer variant: ring buffers track resident flits per queue
    (or in the central pool); a packet that does not fit is dropped."""
    n = ready.shape[0]
    in_free = np.zeros(n_ports)
    out_free = np.zeros(n_ports)
    start = np.empty(n)
    end = np.empty(n)
    dropped = np.zeros(n, dtype=np.uint8)

    nq = 1 if shared else n_ports * n_ports
    cap = pool_cap if shared else depth
    ring_t = np.zeros((nq, cap + 1))
    ring_f = np.zeros((nq, cap + 1), dtype=np.int64)
    head = np.zeros(nq, dtype=np.int64)
    tail = np.zeros(nq, dtype=np.int64)
    occ = np.zeros(nq, dtype=np.int64)
    size = cap + 1

    for k in range(n):
        r = ready[k]
        i = inp[k]
        j = outp[k]
        q = 0 if shared else i * n_ports + j
        while occ[q] > 0 and ring_t[q, head[q]] <= r:
            occ[q] -= ring_f[q, head[q]]
            head[q] = (head[q] + 1) % size
        if occ[q] + fc[k] > cap:
            dropped[k] = 1
            start[k] = -1.0
            end[k] = -1.0
            continue
        s = r
        if in_free[i] > s:
            s = in_free[i]
        if out_free[j] > s:
            s = out_free[j]
        e = s + service[k]
        in_free[i] = e
        out_free[j] = e
        start[k] = s
        end[k] = e
        ring_t[q, tail[q]] = s  # resident until transfer start
        ring_f[q, tail[q]] = fc[k]
        tail[q] = (tail[q] + 1) % size
        occ[q] += fc[k]
    return start, end, dropped


@dataclass
class SurrogateResult:
    latency_ns: dict
    per_out_p99: list
    delivered: int
    dropped: int
    qmax: list
    q_hist: list
    pool_qmax: int | None
    pool_hist: dict | None
    throughput_gbps: float
    duration_ns: float
    conservation: dict
    line_rate_feasible: bool
    latencies: np.ndarray

    def to_dict(self) -> dict:
        d = {
            "latency_ns": self.latency_ns,
            "throughput_gbps": self.throughput_gbps,
            "delivered": self.delivered,
            "dropped": self.dropped,
            "qmax": self.qmax,
            "q_hist": [[{str(k): v for k, v in sorted(h.items())} for h in row]
                       for row in self.q_hist],
            "conservation": self.conservation,
            "duration_ns": self.duration_ns,
            "per_out_p99": self.per_out_p99,
            "line_rate_feasible": self.line_rate_feasible,
        }
        if self.pool_qmax is not None:
            d["pool_qmax"] = self.pool_qmax
            d["pool_hist"] = {str(k): v for k, v in sorted(self.pool_hist.items())}
        return d


@njit(cache=True)
def _occupancy_after(ready, start, fc, qid, nq):
    """Flit occupancy of each packet's queue right after its enqueue, with
    packets resident from `ready` until their transfer `start`.  Starts are
    nondecreasing within a queue, so each queue is a FIFO drained from the
    front; a packet whose transfer starts at its own ready instant does not
    count toward its queue."""
    m = ready.shape[0]
    occ_after = np.empty(m, np.int64)
    occ = np.zeros(nq, np.int64)
    first = np.full(nq, -1, np.int64)
    last = np.full(nq, -1, np.int64)
    nxt = np.full(m, -1, np.int64)
    for k in range(m):
        q = qid[k]
        occ[q] += fc[k]
        if last[q] < 0:
            first[q] = k
        else:
            nxt[last[q]] = k
        last[q] = k
        f = first[q]
        r = ready[k]
        while f >= 0 and start[f] <= r:
            occ[q] -= fc[f]
            f = nxt[f]
        first[q] = f
        if f < 0:
            last[q] = -1
        occ_after[k] = occ[q]
    return occ_after


@njit(cache=True)
def _resolve_kernel(src_addr, dst_addr, src_port, key_mask, n_ports):
    """Learn-on-arrival replay: known destinations map to their learned
    port, unknown/broadcast flood all other ports.  Returns expanded
    (event row, out_port) arrays."""
    m = src_addr.shape[0]
    out = np.full(m, -1, np.int64)
    port_of = np.full(key_mask + 1, -1, np.int64)
    total = 0
    for k in range(m):
        d = dst_addr[k]
        if d != key_mask and port_of[d] >= 0:
            out[k] = port_of[d]
            total += 1
        else:
            total += n_ports - 1
        port_of[src_addr[k]] = src_port[k]  # last writer wins
    rows = np.empty(total, np.int64)
    ports = np.empty(total, np.int64)
    idx = 0
    for k in range(m):
        if out[k] >= 0:
            rows[idx] = k
            ports[idx] = out[k]
            idx += 1
        else:
            sp = src_port[k]
            for p in range(n_ports):
                if p != sp:
                    rows[idx] = k
                    ports[idx] = p
                    idx += 1
    return rows, ports


def _resolve_outputs_vec(trace: Trace, key_mask: int):
    cols = trace.columns
    n = trace.port_count
    dst = cols["dst_addr"]
    dst_key = np.where(dst == BROADCAST, key_mask, dst & key_mask)
    src_key = cols["src_addr"] & key_mask
    if key_mask < (1 << 24):
        return _resolve_kernel(src_key, dst_key, cols["src_port"],
                               key_mask, n)
    # wide routing keys: dict-based fallback
    port_of: dict[int, int] = {}
    src_port = cols["src_port"]
    rows = []
    ports = []
    for k in range(len(dst_key)):
        d = int(dst_key[k])
        p = port_of.get(d, -1) if d != key_mask else -1
        if p >= 0:
            rows.append(k)
            ports.append(p)
        else:
            sp = int(src_port[k])
            rows.extend([k] * (n - 1))
            ports.extend(q for q in range(n) if q != sp)
        port_of[int(src_key[k])] = int(src_port[k])
    return np.asarray(rows, np.int64), np.asarray(ports, np.int64)


def run_surrogate(config: ArchConfig, spec: ProtocolSpec, trace: Trace,
                  buffers: int = INFINITE) -> SurrogateResult:
    """Fast-path simulation; `buffers` is a per-VOQ depth (nxn) or pool size
    (shared) in flits, or INFINITE."""
    check_table_compat(config, spec.routing_key_field.width_bits)
    n = config.ports
    if trace.port_count != n:
        raise ConfigTraceMismatch(
            f"trace has {trace.port_count} ports, config has {n}")

    cyc = config.cycle_ns
    lat = config.stage_latency()
    pre_ns = (lat["parser"] + lat["table"] + lat["voq"]) * cyc
    post_ns = (lat["scheduler"] + lat["deparser"]) * cyc
    annotated = config.annotated_path_ns
    key_mask = (1 << self_key_bits(spec)) - 1
    header_bits = spec.padded_header_bits
    width = config.data_width_bits

    rows, outp = _resolve_outputs_vec(trace, key_mask)
    cols = trace.columns
    arrival = cols["time_ns"][rows]
    inp = cols["src_port"][rows]
    bits = (header_bits + 8 * cols["payload_bytes"])[rows]
    fc = np.maximum(1, -(-bits // width)).astype(np.int64)
    service = fc * config.pipeline_ii * cyc
    # ingress takes fc cycles (one flit per cycle) before the parse pipeline
    ready = arrival + (fc - 1) * cyc + pre_ns

    # packets contend in trace (arrival) order, which load_trace/gen_trace
    # guarantee to be time-sorted
    inp_o = inp
    outp_o = outp
    service_o = service
    fc_o = fc

    if buffers == INFINITE:
        start, end = _greedy_infinite(ready, inp_o, outp_o, service_o, n)
        dropped_mask = np.zeros(len(ready), dtype=bool)
    else:
        shared = config.voq == "shared"
        start, end, dm = _greedy_finite(
            ready, inp_o, outp_o, service_o, fc_o, n,
            0 if shared else int(buffers), shared, int(buffers) if shared else 0)
        dropped_mask = dm.astype(bool)

    ok = ~dropped_mask
    if annotated is not None:
        latencies = annotated + (end[ok] - (ready[ok] + service_o[ok]))
    else:
        latencies = end[ok] - arrival[ok] + post_ns

    # per-VOQ occupancy at enqueue (packets resident from ready to start)
    voq_id = inp_o * n + outp_o
    qmax = [[0] * n for _ in range(n)]
    q_hist = [[{} for _ in range(n)] for _ in range(n)]
    ok_idx = np.flatnonzero(ok)
    if len(ok_idx):
        qid = voq_id[ok_idx]
        occ_after = _occupancy_after(ready[ok_idx], start[ok_idx],
                                     fc_o[ok_idx], qid, n * n)
        stride = int(occ_after.max()) + 1
        counts = np.bincount(qid * stride + occ_after,
                             minlength=n * n * stride).reshape(n * n, stride)
        for q in range(n * n):
            nz = np.flatnonzero(counts[q])
            if len(nz):
                i, j = divmod(q, n)
                qmax[i][j] = int(nz[-1])
                q_hist[i][j] = {int(o): int(counts[q, o]) for o in nz}

    pool_qmax = None
    pool_hist = None
    if config.voq == "shared":
        sel = np.where(ok)[0]
        r = ready[sel]
        s = np.sort(start[sel])
        f = fc_o[sel]
        cum = np.cumsum(f)
        order_f = np.argsort(start[sel], kind="stable")
        cum_dep = np.cumsum(f[order_f])
        departed = np.searchsorted(s, r, side="right")
        dep_flits = np.where(departed > 0, cum_dep[np.maximum(departed - 1, 0)], 0)
        occ_after = cum - dep_flits
        pool_qmax = int(occ_after.max()) if len(occ_after) else 0
        vals, cnts = np.unique(occ_after, return_counts=True)
        pool_hist = {int(a): int(b) for a, b in zip(vals, cnts)}

    delivered = int(ok.sum())
    dropped = int(dropped_mask.sum())
    delivered_bits = int(bits[ok].sum())
    if delivered:
        duration = float(end[ok].max() - arrival.min())
    else:
        duration = 1.0
    return _finish(config, spec, trace, latencies, outp_o, ok, delivered, dropped,
                   delivered_bits, duration, qmax, q_hist, pool_qmax, pool_hist)


def self_key_bits(spec: ProtocolSpec) -> int:
    return spec.routing_key_field.width_bits


def _finish(config, spec, trace, latencies, outp_o, ok, delivered, dropped,
            delivered_bits, duration, qmax, q_hist, pool_qmax, pool_hist):
    from .cyclesim import latency_stats
    from .resources import timing_feasible

    n = config.ports
    ok_out = outp_o[ok]
    per_out_p99 = []
    for j in range(n):
        sel = ok_out == j
        per_out_p99.append(float(np.percentile(latencies[sel], 99)) if sel.any() else 0.0)

    s_min = int(trace.columns["payload_bytes"].min())
    feasible, _ = timing_feasible(config, max(1, s_min), trace.link_rate_gbps, 0.0,
                                  header_bytes=spec.padded_header_bytes)
    injected = delivered + dropped
    return SurrogateResult(
        latency_ns=latency_stats(latencies),
        per_out_p99=per_out_p99,
        delivered=delivered,
        dropped=dropped,
        qmax=qmax,
        q_hist=q_hist,
        pool_qmax=pool_qmax,
        pool_hist=pool_hist,
        throughput_gbps=delivered_bits / duration if duration > 0 else 0.0,
        duration_ns=duration,
        conservation={"injected": injected, "delivered": delivered,
                      "dropped": dropped, "residual": 0},
        line_rate_feasible=feasible,
        latencies=latencies,
    )
