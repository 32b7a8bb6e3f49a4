"""Switch architecture configuration: one point in the design space."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import BadConfig, IncompatibleTable

TABLE_KINDS = ("full_lookup", "multibank_hash")
VOQ_KINDS = ("nxn", "shared")
SCHEDULERS = ("rr", "islip", "edrrm")
DATA_WIDTHS = (128, 256, 512, 1024)

# Direct-indexed tables blow up exponentially with key width; cap the key.
FULL_LOOKUP_MAX_KEY_BITS = 16

INFINITE = -1  # buffer-depth sentinel, profiling mode only

# Per-scheduler arbitration overhead in cycles; applied as pipeline latency
# in both fidelities so unloaded latencies agree.  iSLIP scales with its
# iteration count (longer request/grant/accept chains).
def scheduler_overhead_cycles(scheduler: str, islip_iterations: int) -> int:
    if scheduler == "rr":
        return 1
    if scheduler == "edrrm":
        return 2
    return 2 * islip_iterations


# Pointer-managed shared buffers pay extra cycles over partitioned queues.
def voq_overhead_cycles(voq: str) -> int:
    return 1 if voq == "nxn" else 3


DEFAULT_STAGE_LATENCY = {"parser": 2, "table": 2, "voq": 1, "scheduler": 2, "deparser": 1}


@dataclass(frozen=True)
class ArchConfig:
    ports: int = 8
    data_width_bits: int = 256
    fwd_table: str = "multibank_hash"
    voq: str = "nxn"
    scheduler: str = "islip"
    islip_iterations: int = 1
    clock_mhz: float = 165.0
    pipeline_ii: int = 1
    voq_depth_flits: int = INFINITE
    shared_buffer_slots: int = 4096
    table_banks: int = 4
    hash_bits: int = 10
    stage_latency_cycles: tuple = (
        ("parser", 2), ("table", 2), ("voq", None), ("scheduler", None), ("deparser", 1))
    # Back-annotation override: exact unloaded first-flit-in to last-flit-out
    # path latency in ns.  None means derive from stage latencies.
    annotated_path_ns: float | None = None

    def __post_init__(self):
        if not 2 <= self.ports <= 64:
            raise BadConfig(f"ports must be in 2..64, got {self.ports}")
        if self.data_width_bits not in DATA_WIDTHS:
            raise BadConfig(f"data_width_bits must be one of {DATA_WIDTHS}")
        if self.fwd_table not in TABLE_KINDS:
            raise BadConfig(f"unknown fwd_table {self.fwd_table!r}")
        if self.voq not in VOQ_KINDS:
            raise BadConfig(f"unknown voq {self.voq!r}")
        if self.scheduler not in SCHEDULERS:
            raise BadConfig(f"unknown scheduler {self.scheduler!r}")
        if not 1 <= self.islip_iterations <= self.ports:
            raise BadConfig("islip_iterations must be in 1..ports")
        if self.clock_mhz <= 0 or self.pipeline_ii < 1:
            raise BadConfig("clock_mhz > 0 and pipeline_ii >= 1 required")
        if self.voq_depth_flits != INFINITE and self.voq_depth_flits < 1:
            raise BadConfig("voq_depth_flits must be >= 1 or INFINITE")
        if self.shared_buffer_slots < 1:
            raise BadConfig("shared_buffer_slots must be >= 1")
        b = self.table_banks
        if b < 1 or (b & (b - 1)) != 0:
            raise BadConfig("table_banks must be a power of two")
        if self.hash_bits < 1:
            raise BadConfig("hash_bits must be >= 1")

    @property
    def cycle_ns(self) -> float:
        return 1000.0 / self.clock_mhz

    def stage_latency(self) -> dict[str, int]:
        """Per-stage latencies; voq/scheduler defaults depend on the variant."""
        lat = {}
        for name, v in self.stage_latency_cycles:
            if v is not None:
                lat[name] = v
            elif name == "voq":
                lat[name] = voq_overhead_cycles(self.voq)
            elif name == "scheduler":
                lat[name] = scheduler_overhead_cycles(self.scheduler, self.islip_iterations)
        return lat

    def pipeline_cycles(self) -> int:
        return sum(self.stage_latency().values())

    def pre_voq_cycles(self) -> int:
        lat = self.stage_latency()
        return lat["parser"] + lat["table"] + lat["voq"]

    def post_voq_cycles(self) -> int:
        lat = self.stage_latency()
        return lat["scheduler"] + lat["deparser"]

    def unloaded_path_ns(self, flit_count: int) -> float:
        """Single-packet latency with no contention."""
        if self.annotated_path_ns is not None:
            return self.annotated_path_ns
        return (self.pipeline_cycles() + flit_count) * self.cycle_ns

    def flit_count(self, total_packet_bits: int) -> int:
        return max(1, math.ceil(total_packet_bits / self.data_width_bits))

    def key(self) -> str:
        """Stable identifier used for deterministic merge ordering."""
        sched = self.scheduler if self.scheduler != "islip" else f"islip{self.islip_iterations}"
        return (f"{self.fwd_table}/{self.voq}/{sched}/w{self.data_width_bits}"
                f"/n{self.ports}/ii{self.pipeline_ii}/f{self.clock_mhz:g}")

    def with_(self, **kw) -> "ArchConfig":
        return replace(self, **kw)


def check_table_compat(config: ArchConfig, routing_key_bits: int) -> None:
    if config.fwd_table == "full_lookup" and routing_key_bits > FULL_LOOKUP_MAX_KEY_BITS:
        raise IncompatibleTable(routing_key_bits, FULL_LOOKUP_MAX_KEY_BITS)
