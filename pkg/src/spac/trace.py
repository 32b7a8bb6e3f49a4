"""Packet traces: CSV I/O, synthetic generators, and feature extraction.

The DSE feature vector is [burstiness (IDC), destination entropy, minimum
payload size].  IDC is the variance-to-mean ratio of arrival counts in fixed
windows: 0 for deterministic arrivals, 1 for Poisson, >1 for bursty traffic.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    BadParams,
    EmptyTrace,
    PortOutOfRange,
    TooFewWindows,
    TraceParseError,
)

# Broadcast destination sentinel.  On the wire it is the all-ones routing key;
# in traces and the simulator it is represented as -1 (CSV spelling: "*").
BROADCAST = -1

CSV_HEADER = ["time_ns", "src_port", "src_addr", "dst_addr", "payload_bytes"]


@dataclass(frozen=True)
class PacketEvent:
    time_ns: int
    src_port: int
    src_addr: int
    dst_addr: int          # BROADCAST for broadcast
    payload_bytes: int


@dataclass(frozen=True)
class Trace:
    port_count: int
    link_rate_gbps: float
    events: tuple[PacketEvent, ...]

    def duration_ns(self) -> int:
        if not self.events:
            return 0
        return self.events[-1].time_ns - self.events[0].time_ns

    @cached_property
    def columns(self) -> dict:
        """Event fields as parallel numpy arrays (computed once per trace)."""
        m = len(self.events)
        return {
            "time_ns": np.fromiter((e.time_ns for e in self.events),
                                   np.float64, m),
            "src_port": np.fromiter((e.src_port for e in self.events),
                                    np.int64, m),
            "src_addr": np.fromiter((e.src_addr for e in self.events),
                                    np.int64, m),
            "dst_addr": np.fromiter((e.dst_addr for e in self.events),
                                    np.int64, m),
            "payload_bytes": np.fromiter((e.payload_bytes for e in self.events),
                                         np.int64, m),
        }


@dataclass(frozen=True)
class TraceFeatures:
    idc_burst: float
    addr_entropy_bits: float
    min_payload_bytes: int
    window_ns: int

    def to_dict(self) -> dict:
        return {
            "idc_burst": self.idc_burst,
            "addr_entropy_bits": self.addr_entropy_bits,
            "min_payload_bytes": self.min_payload_bytes,
            "window_ns": self.window_ns,
        }


def load_trace(path, port_count: int, link_rate_gbps: float) -> Trace:
    events = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if not row or (line_no == 1 and row[0].strip() == "time_ns"):
                continue
            if len(row) != 5:
                raise TraceParseError(line_no, f"expected 5 columns, got {len(row)}")
            try:
                time_ns = int(row[0])
                src_port = int(row[1])
                src_addr = int(row[2])
                dst_addr = BROADCAST if row[3].strip() == "*" else int(row[3])
                payload = int(row[4])
            except ValueError as e:
                raise TraceParseError(line_no, str(e)) from None
            if time_ns < 0 or payload < 0:
                raise TraceParseError(line_no, "negative time or payload")
            if not 0 <= src_port < port_count:
                raise PortOutOfRange(line_no, src_port, port_count)
            events.append(PacketEvent(time_ns, src_port, src_addr, dst_addr, payload))
    if not events:
        raise EmptyTrace()
    events.sort(key=lambda e: e.time_ns)
    return Trace(port_count, link_rate_gbps, tuple(events))


def save_trace(trace: Trace, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for e in trace.events:
            dst = "*" if e.dst_addr == BROADCAST else e.dst_addr
            writer.writerow([e.time_ns, e.src_port, e.src_addr, dst, e.payload_bytes])


# ---------------------------------------------------------------------------
# Generators
#
# All generators are slotted: time advances in fixed slots of slot_ns and a
# port injects at most one packet per slot.  src_addr is the port index;
# destination addresses are the port indices of the receivers, so forwarding
# tables learn the full mapping after one round of traffic.
# ---------------------------------------------------------------------------

GEN_MODELS = ("uniform_bernoulli", "onoff_bursty", "incast", "hotspot", "constant_rate")


def _payload(params, rng) -> int:
    lo = int(params.get("payload_bytes", 64))
    hi = int(params.get("payload_bytes_max", lo))
    if hi < lo:
        raise BadParams("payload_bytes_max < payload_bytes")
    return lo if hi == lo else rng.randint(lo, hi)


def _require(params, *keys):
    for k in keys:
        if k not in params:
            raise BadParams(f"missing parameter {k!r}")


def gen_trace(model: str, params: dict, seed: int) -> Trace:
    """Generate a synthetic trace; deterministic given (model, params, seed)."""
    if model not in GEN_MODELS:
        raise BadParams(f"unknown model {model!r}")
    ports = int(params.get("ports", 8))
    link = float(params.get("link_rate_gbps", 10.0))
    slot_ns = int(params.get("slot_ns", 10))
    if ports < 2 or slot_ns < 1 or link <= 0:
        raise BadParams("need ports >= 2, slot_ns >= 1, link_rate_gbps > 0")
    rng = random.Random(seed)
    events: list[PacketEvent] = []

    if model == "constant_rate":
        _require(params, "period_ns", "duration_ns")
        period = int(params["period_ns"])
        duration = int(params["duration_ns"])
        if period < 1:
            raise BadParams("period_ns must be >= 1")
        stride = int(params.get("dest_stride", 1))
        for p in range(ports):
            for k, t in enumerate(range(0, duration, period)):
                dst = (p + stride + (k % (ports - 1))) % ports if params.get("sweep_dests") \
                    else (p + stride) % ports
                events.append(PacketEvent(t, p, p, dst, _payload(params, rng)))

    elif model == "uniform_bernoulli":
        _require(params, "load", "slots")
        load = float(params["load"])
        slots = int(params["slots"])
        if not 0 < load <= 1:
            raise BadParams("load must be in (0, 1]")
        for s in range(slots):
            t = s * slot_ns
            for p in range(ports):
                if rng.random() < load:
                    dst = rng.randrange(ports)
                    events.append(PacketEvent(t, p, p, dst, _payload(params, rng)))

    elif model == "onoff_bursty":
        _require(params, "load", "slots")
        load = float(params["load"])
        slots = int(params["slots"])
        burst = float(params.get("mean_burst", 32.0))
        if not 0 < load <= 1 or burst < 1:
            raise BadParams("load in (0,1], mean_burst >= 1")
        if load < 1:
            mean_off = burst * (1.0 - load) / load
        else:
            mean_off = 0.0
        p_end_on = 1.0 / burst
        p_end_off = 1.0 / mean_off if mean_off > 0 else 1.0
        for p in range(ports):
            on = rng.random() < load
            dst = rng.randrange(ports)
            for s in range(slots):
                if on:
                    events.append(PacketEvent(s * slot_ns, p, p, dst, _payload(params, rng)))
                    if rng.random() < p_end_on:
                        on = mean_off == 0.0
                        dst = rng.randrange(ports)
                else:
                    if rng.random() < p_end_off:
                        on = True
                        dst = rng.randrange(ports)

    elif model == "incast":
        _require(params, "slots")
        slots = int(params["slots"])
        fan_in = int(params.get("fan_in", ports - 1))
        epoch = int(params.get("epoch_slots", 64))
        burst = int(params.get("burst_len", 8))
        bg = float(params.get("background_load", 0.1))
        if not 1 <= fan_in < ports or epoch < burst:
            raise BadParams("need 1 <= fan_in < ports and epoch_slots >= burst_len")
        for s in range(slots):
            t = s * slot_ns
            phase = s % epoch
            victim = (s // epoch) % ports
            sources = [(victim + 1 + i) % ports for i in range(fan_in)]
            for p in range(ports):
                if phase < burst and p in sources:
                    events.append(PacketEvent(t, p, p, victim, _payload(params, rng)))
                elif bg > 0 and rng.random() < bg:
                    dst = rng.randrange(ports)
                    events.append(PacketEvent(t, p, p, dst, _payload(params, rng)))

    elif model == "hotspot":
        _require(params, "load", "slots")
        load = float(params["load"])
        slots = int(params["slots"])
        hot_frac = float(params.get("hot_fraction", 0.5))
        hot_dst = int(params.get("hot_dest", 0))
        if not 0 < load <= 1 or not 0 <= hot_frac <= 1:
            raise BadParams("load in (0,1], hot_fraction in [0,1]")
        for s in range(slots):
            t = s * slot_ns
            for p in range(ports):
                if rng.random() < load:
                    if rng.random() < hot_frac:
                        dst = hot_dst
                    else:
                        dst = rng.randrange(ports)
                    events.append(PacketEvent(t, p, p, dst, _payload(params, rng)))

    events.sort(key=lambda e: (e.time_ns, e.src_port))
    if not events:
        raise BadParams("generator produced an empty trace")
    return Trace(ports, link, tuple(events))


# ---------------------------------------------------------------------------
# Feature extraction
# ---------------------------------------------------------------------------

MIN_WINDOWS = 10


def default_window_ns(trace: Trace) -> int:
    """100x the mean inter-arrival time, so IDC is comparable across traces."""
    if len(trace.events) < 2:
        return 1
    mean_ia = trace.duration_ns() / (len(trace.events) - 1)
    return max(1, int(round(100 * mean_ia)))


def extract_features(trace: Trace, window_ns: int | None = None) -> TraceFeatures:
    """Compute [IDC, destination entropy, minimum payload] over the trace.

    Counts are aggregated over all ports per window; entropy is base-2 over
    the empirical destination-address distribution.
    """
    if not trace.events:
        raise EmptyTrace()
    if window_ns is None:
        window_ns = default_window_ns(trace)
    if window_ns <= 0:
        raise BadParams("window_ns must be positive")

    times = trace.columns["time_ns"].astype(np.int64)
    t0 = int(times[0])
    span = int(times[-1]) - t0 + 1
    n_windows = span // window_ns
    if n_windows < MIN_WINDOWS:
        raise TooFewWindows(n_windows, MIN_WINDOWS)
    idx = (times - t0) // window_ns
    counts = np.bincount(idx[idx < n_windows].astype(np.int64), minlength=n_windows)
    mean = counts.mean()
    if mean == 0:
        raise EmptyTrace()
    idc = float(counts.var() / mean)

    _, freq = np.unique(trace.columns["dst_addr"], return_counts=True)
    p = freq / freq.sum()
    entropy = float(-(p * np.log2(p)).sum())
    if entropy < 0:
        entropy = 0.0

    s_min = int(trace.columns["payload_bytes"].min())
    return TraceFeatures(idc, entropy, s_min, int(window_ns))


def offered_load(trace: Trace, slot_ns: int) -> float:
    """Packets per port per slot, for checking generator accuracy."""
    span_slots = (trace.duration_ns() // slot_ns) + 1
    return len(trace.events) / (trace.port_count * span_slots)
