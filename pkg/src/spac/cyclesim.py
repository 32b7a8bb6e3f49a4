"""Cycle-level switch model: ingress parsing, lookup/learn, VOQ buffering,
per-cycle arbitration, and egress, with hardware back-annotation support.

Time advances in clock cycles.  Each packet is admitted one flit per cycle,
walks the parser/table/voq pipeline stages, sits in its VOQ, and once
matched holds its (input, output) pair for flit_count cycles; packets are
never interleaved on a port.  Latency is ingress-first-flit to
egress-last-flit, reported in ns via cycle_ns = 1000 / clock_mhz.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .arch import INFINITE, ArchConfig, check_table_compat
from .errors import BadAnnotation, ConfigTraceMismatch
from .fwdtable import make_table, resolve_outputs
from .protocol import ProtocolSpec, SemanticBinding, default_binding
from .schedulers import EDRRMScheduler, make_scheduler
from .trace import BROADCAST, Trace
from .voq import NxNVoq, SharedVoq, SingleFifo


@dataclass
class SimOptions:
    max_cycles: int | None = None   # absolute stop; None = run to drain
    warmup_ns: float = 0.0          # packets arriving earlier are excluded from stats
    single_fifo: bool = False       # HoL-blocking diagnostic mode
    record_hist: bool = True
    depths: object = None           # buffer-size override: int / flat N*N list
                                    # (nxn), pool flits (shared)


@dataclass
class SimResult:
    latency_ns: dict
    throughput_gbps: float
    delivered: int
    dropped: int
    qmax: list
    q_hist: list
    conservation: dict
    duration_ns: float
    cycles: int
    delivered_bits: int
    latencies: np.ndarray = field(repr=False)
    per_out_p99: list = field(default_factory=list)
    q_drops: list = field(default_factory=list)     # per (in, out) drop counts
    q_attempts: list = field(default_factory=list)  # per (in, out) enqueue attempts
    pool_qmax: int | None = None
    pool_hist: dict | None = None

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
        }
        if self.pool_qmax is not None:
            d["pool_qmax"] = self.pool_qmax
            d["pool_hist"] = {str(k): v for k, v in sorted(self.pool_hist.items())}
        return d


def latency_stats(latencies) -> dict:
    if len(latencies) == 0:
        return {"p50": 0.0, "p99": 0.0, "max": 0.0, "mean": 0.0}
    arr = np.asarray(latencies, dtype=np.float64)
    p50, p99 = np.percentile(arr, (50, 99))
    return {
        "p50": float(p50),
        "p99": float(p99),
        "max": float(arr.max()),
        "mean": float(arr.mean()),
    }


class _Pkt:
    __slots__ = ("seq", "in_port", "ev_cycle", "ingress_start", "fc", "bits",
                 "enq_cycle", "arrival_ns")

    def __init__(self, seq, in_port, ev_cycle, ingress_start, fc, bits, arrival_ns):
        self.seq = seq
        self.in_port = in_port
        self.ev_cycle = ev_cycle
        self.ingress_start = ingress_start
        self.fc = fc
        self.bits = bits
        self.enq_cycle = 0
        self.arrival_ns = arrival_ns


class SwitchModel:
    """One simulated switch instance; single-run, single-threaded."""

    def __init__(self, config: ArchConfig, spec: ProtocolSpec,
                 binding: SemanticBinding | None = None):
        check_table_compat(config, spec.routing_key_field.width_bits)
        self.config = config
        self.spec = spec
        self.binding = binding or default_binding(spec)

    def annotated(self, total_path_ns: float | None = None,
                  stage_latency_ns: dict | None = None,
                  ii: int | None = None) -> "SwitchModel":
        """Return a model with externally measured timing injected."""
        cfg = self.config
        if total_path_ns is not None:
            if total_path_ns <= 0:
                raise BadAnnotation("total_path_ns must be positive")
            cfg = cfg.with_(annotated_path_ns=float(total_path_ns))
        if stage_latency_ns is not None:
            stages = dict(cfg.stage_latency_cycles)
            for name, ns in stage_latency_ns.items():
                if name not in stages:
                    raise BadAnnotation(f"unknown stage {name!r}")
                if ns <= 0:
                    raise BadAnnotation(f"stage {name!r} latency must be positive")
                stages[name] = max(1, round(ns / cfg.cycle_ns))
            cfg = cfg.with_(stage_latency_cycles=tuple(stages.items()))
        if ii is not None:
            if ii < 1:
                raise BadAnnotation("II must be >= 1")
            cfg = cfg.with_(pipeline_ii=ii)
        return SwitchModel(cfg, self.spec, self.binding)

    def clear_annotation(self) -> "SwitchModel":
        return SwitchModel(self.config.with_(annotated_path_ns=None), self.spec, self.binding)

    # ------------------------------------------------------------------
    def run(self, trace: Trace, options: SimOptions | None = None) -> SimResult:
        opts = options or SimOptions()
        cfg = self.config
        n = cfg.ports
        if trace.port_count != n:
            raise ConfigTraceMismatch(
                f"trace has {trace.port_count} ports, config has {n}")

        cycle_ns = cfg.cycle_ns
        lat = cfg.stage_latency()
        parser_lat, table_lat, voq_lat = lat["parser"], lat["table"], lat["voq"]
        post_cycles = lat["scheduler"] + lat["deparser"]
        ii = cfg.pipeline_ii
        key_bits = self.spec.routing_key_field.width_bits
        key_mask = (1 << key_bits) - 1
        bcast_key = self.spec.broadcast_key
        header_bits = self.spec.padded_header_bits
        width = cfg.data_width_bits
        annotated = cfg.annotated_path_ns

        table = make_table(cfg, key_bits)
        multibank = cfg.fwd_table == "multibank_hash"

        if opts.single_fifo:
            depth = cfg.voq_depth_flits if opts.depths is None else opts.depths
            voq = SingleFifo(n, depth)
        elif cfg.voq == "nxn":
            voq = NxNVoq(n, cfg.voq_depth_flits if opts.depths is None else opts.depths)
        else:
            pool = cfg.shared_buffer_slots if opts.depths is None else opts.depths
            voq = SharedVoq(n, pool)

        sched = make_scheduler(cfg.scheduler, n, cfg.islip_iterations)
        edrrm = isinstance(sched, EDRRMScheduler)

        # --- precompute admissions -----------------------------------------
        ingress_free = [0] * n
        admissions = []
        for seq, ev in enumerate(trace.events):
            ev_cycle = int(ev.time_ns / cycle_ns)
            start = max(ev_cycle, ingress_free[ev.src_port])
            bits = header_bits + 8 * ev.payload_bytes
            fc = max(1, math.ceil(bits / width))
            ingress_free[ev.src_port] = start + fc
            pkt = _Pkt(seq, ev.src_port, ev_cycle, start, fc, bits, ev.time_ns)
            dst_key = None if ev.dst_addr == BROADCAST else ev.dst_addr & key_mask
            lookup_cycle = start + fc - 1 + parser_lat
            admissions.append((lookup_cycle, seq, pkt, dst_key, ev.src_addr & key_mask))
        admissions.sort(key=lambda a: (a[0], a[1]))

        enq_heap: list = []       # (enq_cycle, seq, pkt, out_list)
        end_heap: list = []       # (end_cycle, seq, i, j) in-flight transfers
        busy_in = 0               # bitmask
        busy_out = 0
        injected = delivered = dropped = 0
        delivered_bits = 0
        latencies: list[float] = []
        lat_out: list[list[float]] = [[] for _ in range(n)]
        q_drops = [[0] * n for _ in range(n)]
        q_attempts = [[0] * n for _ in range(n)]
        warmup_ns = opts.warmup_ns
        stop = opts.max_cycles
        last_end = 0
        first_cycle = admissions[0][0] if admissions else 0
        adm_idx = 0
        n_adm = len(admissions)
        t = first_cycle
        all_out_mask = (1 << n) - 1

        def start_transfer(i, j, now):
            nonlocal busy_in, busy_out, delivered, delivered_bits, last_end
            pkt = voq.dequeue(i, j)
            end = now + pkt.fc
            busy_in |= 1 << i
            busy_out |= 1 << j
            heapq.heappush(end_heap, (end, pkt.seq, i, j))
            if stop is None or end <= stop:
                delivered += 1
                delivered_bits += pkt.bits
                if end > last_end:
                    last_end = end
                if pkt.arrival_ns >= warmup_ns:
                    if annotated is not None:
                        wait = (now - pkt.enq_cycle) + (pkt.ingress_start - pkt.ev_cycle)
                        val = annotated + wait * cycle_ns
                    else:
                        val = (now + pkt.fc - pkt.ingress_start + post_cycles) * cycle_ns
                    latencies.append(val)
                    lat_out[j].append(val)

        while True:
            if stop is not None and t > stop:
                break
            work = (adm_idx < n_adm or enq_heap or end_heap
                    or any(voq.nonempty))
            if not work:
                break

            # retire finished transfers
            while end_heap and end_heap[0][0] <= t:
                _, _, i, j = heapq.heappop(end_heap)
                busy_in &= ~(1 << i)
                busy_out &= ~(1 << j)

            # table lookups scheduled this cycle (batch for bank conflicts)
            batch = []
            while adm_idx < n_adm and admissions[adm_idx][0] == t:
                batch.append(admissions[adm_idx])
                adm_idx += 1
            if batch:
                bank_seen: dict[int, int] = {}
                for _, seq, pkt, dst_key, src_key in batch:
                    out = resolve_outputs(table, dst_key, src_key, pkt.in_port,
                                          bcast_key, n)
                    stall = 0
                    if multibank:
                        b = table.bank_of(dst_key if dst_key is not None else 0)
                        stall = bank_seen.get(b, 0)
                        bank_seen[b] = stall + 1
                    enq = t + table_lat + stall + voq_lat
                    heapq.heappush(enq_heap, (enq, seq, pkt, out))

            # VOQ enqueues landing this cycle
            while enq_heap and enq_heap[0][0] <= t:
                enq, _, pkt, out = heapq.heappop(enq_heap)
                pkt.enq_cycle = enq
                injected += len(out)
                accepted = voq.enqueue(pkt.in_port, pkt, out)
                dropped += len(out) - len(accepted)
                i = pkt.in_port
                for j in out:
                    q_attempts[i][j] += 1
                if len(accepted) != len(out):
                    for j in set(out) - set(accepted):
                        q_drops[i][j] += 1

            # arbitration + transfer starts
            if t % ii == 0:
                free_out = all_out_mask & ~busy_out
                if edrrm:
                    for i in list(sched.held):
                        if not (busy_in >> i) & 1 and voq.head(i, sched.held[i]) is None:
                            sched.release(i)
                    rows = [0] * n
                    for i in range(n):
                        if (busy_in >> i) & 1 or i in sched.held:
                            continue
                        rows[i] = voq.nonempty[i] & free_out
                    matching = sched.arbitrate(rows)
                    for i, j in matching.items():
                        if ((busy_in >> i) & 1) or ((busy_out >> j) & 1):
                            continue
                        if voq.head(i, j) is not None:
                            start_transfer(i, j, t)
                else:
                    rows = [0] * n
                    any_req = False
                    for i in range(n):
                        if (busy_in >> i) & 1:
                            continue
                        r = voq.nonempty[i] & free_out
                        rows[i] = r
                        any_req = any_req or r != 0
                    if any_req:
                        for i, j in sched.arbitrate(rows).items():
                            start_transfer(i, j, t)

            # advance; skip idle gaps
            if not any(voq.nonempty) and not end_heap:
                nxt = []
                if adm_idx < n_adm:
                    nxt.append(admissions[adm_idx][0])
                if enq_heap:
                    nxt.append(enq_heap[0][0])
                t = max(t + 1, min(nxt)) if nxt else t + 1
            else:
                t += 1

        # residual accounting for the conservation ledger
        residual = voq.residual_units()
        for end, _, _, _ in end_heap:
            if stop is not None and end > stop:
                residual += 1
        if stop is not None:
            # enqueues that never landed were not injected; nothing to add
            pass

        duration_ns = max(1, last_end - first_cycle) * cycle_ns
        lat_arr = np.asarray(latencies, dtype=np.float64)
        result = SimResult(
            latency_ns=latency_stats(lat_arr),
            throughput_gbps=delivered_bits / duration_ns if duration_ns > 0 else 0.0,
            delivered=delivered,
            dropped=dropped,
            qmax=[row[:] for row in voq.qmax],
            q_hist=[[dict(h) for h in row] for row in voq.hist],
            conservation={
                "injected": injected,
                "delivered": delivered,
                "dropped": dropped,
                "residual": residual,
            },
            duration_ns=duration_ns,
            cycles=max(0, t - first_cycle),
            delivered_bits=delivered_bits,
            latencies=lat_arr,
            per_out_p99=[float(np.percentile(v, 99)) if v else 0.0 for v in lat_out],
            q_drops=q_drops,
            q_attempts=q_attempts,
        )
        if isinstance(voq, SharedVoq):
            result.pool_qmax = voq.pool_qmax
            result.pool_hist = dict(voq.pool_hist)
        return result


def build_switch(config: ArchConfig, spec: ProtocolSpec,
                 binding: SemanticBinding | None = None) -> SwitchModel:
    return SwitchModel(config, spec, binding)


def run_cycle_sim(model: SwitchModel, trace: Trace,
                  options: SimOptions | None = None) -> SimResult:
    return model.run(trace, options)


def back_annotate(model: SwitchModel, measured: dict) -> SwitchModel:
    """Inject measured hardware timing (keys: total_path_ns, stage_latency_ns, ii)."""
    return model.annotated(
        total_path_ns=measured.get("total_path_ns"),
        stage_latency_ns=measured.get("stage_latency_ns"),
        ii=measured.get("ii"),
    )
