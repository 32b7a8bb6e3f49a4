"""Named scenario presets: a protocol definition, a traffic generator
configuration, and default exploration constraints, bundled so that the CLI
and the validation suite reference workloads by name instead of repeating
parameter blocks.

Real deployment captures are replaced by synthetic generators with documented
parameters; the presets reproduce the statistical character (burstiness,
address skew, packet sizes) each scenario is known for.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import BadParams
from .protocol import ProtocolSpec, parse_spec
from .trace import Trace, gen_trace

TINY_HEADER = """\
# 2-byte header for latency-critical links: destination + source address only.
protocol tiny_addr
field dst_addr 8 role=routing_key
field src_addr 8 role=src_addr
"""

GENERIC_HEADER = """\
# 6-byte general-purpose header.
protocol generic_l2
field dst_addr 8 role=routing_key
field src_addr 8 role=src_addr
field pkt_type 8
field length 16 role=length
field qos 8 role=qos
"""


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    protocol_text: str
    gen_model: str
    gen_params: dict
    # default DSE constraint values (keys mirror the Constraints fields)
    constraints: dict = field(default_factory=dict)
    default_seed: int = 1

    def spec(self) -> ProtocolSpec:
        return parse_spec(self.protocol_text)

    def trace(self, seed: int | None = None, **overrides) -> Trace:
        params = dict(self.gen_params)
        params.update(overrides)
        return gen_trace(self.gen_model, params,
                         self.default_seed if seed is None else seed)


_P = []

_P.append(Preset(
    name="hft",
    description="Market-data fan-out: tiny packets at high arrival rate with "
                "a tight tail-latency budget.",
    protocol_text=TINY_HEADER,
    gen_model="uniform_bernoulli",
    gen_params={"ports": 8, "slot_ns": 16, "link_rate_gbps": 10.0,
                "load": 0.30, "slots": 4000, "payload_bytes": 2},
    constraints={"sla_latency_p99_ns": 34.0, "bram_budget_blocks": 300,
                 "drop_epsilon": 1e-3, "delta": 0.1, "link_rate_gbps": 10.0},
))

_P.append(Preset(
    name="underwater",
    description="Sensor telemetry: 4-byte total packets, sparse traffic, "
                "relaxed latency but scarce memory.",
    protocol_text=TINY_HEADER,
    gen_model="uniform_bernoulli",
    gen_params={"ports": 8, "slot_ns": 40, "link_rate_gbps": 10.0,
                "load": 0.15, "slots": 4000, "payload_bytes": 2},
    constraints={"sla_latency_p99_ns": 500.0, "bram_budget_blocks": 300,
                 "drop_epsilon": 1e-3, "delta": 0.1, "link_rate_gbps": 10.0},
))

_P.append(Preset(
    name="uniform",
    description="Uniform Bernoulli arrivals, uniformly random destinations.",
    protocol_text=GENERIC_HEADER,
    gen_model="uniform_bernoulli",
    gen_params={"ports": 8, "slot_ns": 60, "link_rate_gbps": 10.0,
                "load": 0.6, "slots": 5000, "payload_bytes": 64},
    constraints={"sla_latency_p99_ns": 2000.0, "bram_budget_blocks": 600,
                 "drop_epsilon": 1e-3, "delta": 0.1, "link_rate_gbps": 10.0},
))

_P.append(Preset(
    name="bursty",
    description="On-off sources with geometric burst lengths; destinations "
                "fixed within a burst (industrial / storage style flows).",
    protocol_text=GENERIC_HEADER,
    gen_model="onoff_bursty",
    gen_params={"ports": 8, "slot_ns": 60, "link_rate_gbps": 10.0,
                "load": 0.6, "slots": 5000, "mean_burst": 48.0,
                "payload_bytes": 64},
    constraints={"sla_latency_p99_ns": 30000.0, "bram_budget_blocks": 600,
                 "drop_epsilon": 1e-3, "delta": 0.1, "link_rate_gbps": 10.0},
))

_P.append(Preset(
    name="incast",
    description="Synchronized many-to-one epochs against a rotating victim "
                "port over light background traffic (datacenter style).",
    protocol_text=GENERIC_HEADER,
    gen_model="incast",
    gen_params={"ports": 8, "slot_ns": 60, "link_rate_gbps": 10.0,
                "slots": 4000, "fan_in": 6, "epoch_slots": 64,
                "burst_len": 12, "background_load": 0.05,
                "payload_bytes": 64},
    constraints={"sla_latency_p99_ns": 30000.0, "bram_budget_blocks": 600,
                 "drop_epsilon": 1e-2, "delta": 0.1, "link_rate_gbps": 10.0},
))

_P.append(Preset(
    name="hotspot",
    description="Skewed destinations: half of all traffic targets one port.",
    protocol_text=GENERIC_HEADER,
    gen_model="hotspot",
    gen_params={"ports": 8, "slot_ns": 60, "link_rate_gbps": 10.0,
                "load": 0.5, "slots": 5000, "hot_fraction": 0.5,
                "payload_bytes": 64},
    constraints={"sla_latency_p99_ns": 20000.0, "bram_budget_blocks": 600,
                 "drop_epsilon": 1e-3, "delta": 0.1, "link_rate_gbps": 10.0},
))

_P.append(Preset(
    name="poisson",
    description="Low-probability Bernoulli arrivals; windowed counts are "
                "near-Poisson (dispersion index about 1).",
    protocol_text=GENERIC_HEADER,
    gen_model="uniform_bernoulli",
    gen_params={"ports": 8, "slot_ns": 60, "link_rate_gbps": 10.0,
                "load": 0.02, "slots": 400_000, "payload_bytes": 64},
))

_P.append(Preset(
    name="benchmark",
    description="Million-packet uniform workload used for fidelity-speed "
                "comparisons.",
    protocol_text=GENERIC_HEADER,
    gen_model="uniform_bernoulli",
    gen_params={"ports": 8, "slot_ns": 60, "link_rate_gbps": 10.0,
                "load": 0.6, "slots": 208_500, "payload_bytes": 64},
))

PRESETS = {p.name: p for p in _P}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise BadParams(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None
