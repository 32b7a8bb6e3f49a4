"""Parametric FPGA resource and timing models.

Coefficients live in a named calibration profile (JSON) fitted to synthesis
reports for the reference configurations; users may re-fit against their own
reports and point the tools at a different profile file.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources as importlib_resources

from .arch import ArchConfig

BRAM_BLOCK_BITS = 36864  # one 36 Kb block


def load_profile(path=None) -> dict:
    if path is None:
        ref = importlib_resources.files("spac") / "profiles" / "default.json"
        return json.loads(ref.read_text())
    with open(path) as fh:
        return json.load(fh)


_DEFAULT_PROFILE = None


def default_profile() -> dict:
    global _DEFAULT_PROFILE
    if _DEFAULT_PROFILE is None:
        _DEFAULT_PROFILE = load_profile()
    return _DEFAULT_PROFILE


@dataclass(frozen=True)
class ResourceEstimate:
    lut_k: float
    ff_k: float
    bram_blocks: int
    freq_mhz: float

    def to_dict(self) -> dict:
        return {"lut_k": self.lut_k, "ff_k": self.ff_k,
                "bram_blocks": self.bram_blocks, "freq_mhz": self.freq_mhz}


@dataclass(frozen=True)
class TimingBudget:
    t_arrival_ns: float
    t_proc_ns: float
    delta: float

    def to_dict(self) -> dict:
        return {"t_arrival_ns": self.t_arrival_ns, "t_proc_ns": self.t_proc_ns,
                "delta": self.delta}


def align_to_bram(depth_flits: int, width_bits: int) -> tuple[int, int]:
    """Round a queue depth up to whole 36 Kb blocks at the given data width.

    Returns (aligned_depth_flits, blocks); blocks is the minimal count whose
    capacity covers the requested depth.
    """
    if depth_flits < 1:
        raise ValueError("depth_flits must be >= 1")
    blocks = math.ceil(depth_flits * width_bits / BRAM_BLOCK_BITS)
    aligned = blocks * BRAM_BLOCK_BITS // width_bits
    return aligned, blocks


def table_bram_blocks(config: ArchConfig, routing_key_bits: int) -> int:
    port_bits = max(1, (config.ports - 1).bit_length())
    if config.fwd_table == "full_lookup":
        entry = port_bits + 1
        return max(1, math.ceil((1 << routing_key_bits) * entry / BRAM_BLOCK_BITS))
    entry = routing_key_bits + port_bits + 1
    slots_per_bank = max(1, (1 << config.hash_bits) // config.table_banks)
    per_bank = max(1, math.ceil(slots_per_bank * entry / BRAM_BLOCK_BITS))
    return config.table_banks * per_bank


def buffer_bram_blocks(config: ArchConfig, depths) -> int:
    """BRAM for the packet buffers.

    `depths`: per-queue flit depth (int applied uniformly, or a flat list of
    N*N values) for partitioned VOQs; the central pool size in flits for the
    shared variant (index queues live in distributed RAM).
    """
    w = config.data_width_bits
    n = config.ports
    if config.voq == "shared":
        pool = depths if isinstance(depths, int) else sum(depths)
        return align_to_bram(max(1, pool), w)[1]
    if isinstance(depths, int):
        return n * n * align_to_bram(max(1, depths), w)[1]
    if len(depths) != n * n:
        raise ValueError(f"need {n * n} depths, got {len(depths)}")
    return sum(align_to_bram(max(1, d), w)[1] for d in depths)


def _poly(cfg: ArchConfig, coeff: dict) -> float:
    n = cfg.ports
    scale = (coeff["table_factor"][cfg.fwd_table]
             * coeff["voq_factor"][cfg.voq]
             * coeff["sched_factor"][cfg.scheduler])
    val = coeff["alpha0"] + coeff["alpha1"] * scale * n * (cfg.data_width_bits / 256.0)
    if cfg.voq == "nxn" or cfg.scheduler == "islip":
        val += coeff["alpha2"] * n * n
    val += coeff["voq_fixed_per_port"][cfg.voq] * n
    return max(coeff["floor"], val)


def predict_freq_mhz(config: ArchConfig, profile: dict | None = None) -> float:
    p = (profile or default_profile())["freq_mhz"]
    f = (p["beta0"][config.scheduler]
         - p["beta1"] * config.ports
         - p["width_penalty"] * (config.data_width_bits / 256.0 - 1.0))
    return max(p["floor"], f)


def estimate_resources(config: ArchConfig, depths=None, routing_key_bits: int = 8,
                       profile: dict | None = None) -> ResourceEstimate:
    """Parametric estimate of LUT/FF/BRAM/achievable clock for one design point."""
    prof = profile or default_profile()
    if depths is None:
        total = prof.get("default_total_depth_flits", 4096)
        if config.voq == "shared":
            depths = total
        else:
            depths = max(1, total // config.ports)
    bram = buffer_bram_blocks(config, depths) + table_bram_blocks(config, routing_key_bits)
    return ResourceEstimate(
        lut_k=round(_poly(config, prof["lut_k"]), 3),
        ff_k=round(_poly(config, prof["ff_k"]), 3),
        bram_blocks=bram,
        freq_mhz=round(predict_freq_mhz(config, prof), 2),
    )


def max_throughput_gbps(config: ArchConfig) -> float:
    """Peak datapath rate: width x clock / II (Gbps)."""
    return config.data_width_bits * config.clock_mhz / (1000.0 * config.pipeline_ii)


def timing_feasible(config: ArchConfig, min_payload_bytes: int,
                    link_rate_gbps: float, delta: float,
                    header_bytes: int = 0) -> tuple[bool, TimingBudget]:
    """Line-rate test: prune iff per-packet processing time exceeds the
    minimum-size packet arrival interval by more than the relaxation factor.

    The arrival interval is set by the smallest total on-wire packet
    (padded header + minimum payload); pass header_bytes=0 for the
    payload-only reading.
    """
    if min_payload_bytes < 1:
        raise ValueError("min_payload_bytes must be >= 1")
    total_bytes = header_bytes + min_payload_bytes
    t_arrival = total_bytes * 8.0 / link_rate_gbps
    t_proc = config.pipeline_ii * 1000.0 / config.clock_mhz
    budget = TimingBudget(t_arrival, t_proc, delta)
    return not (t_proc > (1.0 + delta) * t_arrival), budget
