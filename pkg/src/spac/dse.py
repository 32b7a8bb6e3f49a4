"""Progressive constraint-satisfaction design-space exploration.

Three barrier stages over a template cross-product:

  1. static pruning    — line-rate timing check and table feasibility,
  2. ideal profiling   — one infinite-buffer surrogate run per survivor,
                         filtered on worst-output-port p99 vs the SLA,
  3. size and verify   — per-queue tail-mass buffer sizing, BRAM alignment
                         and budget check, then cycle-accurate verification.

A brute-force enumerator over an explicit (config, depth) space provides the
Pareto-front oracle used for validation.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from itertools import product

from .arch import (DATA_WIDTHS, FULL_LOOKUP_MAX_KEY_BITS, INFINITE,
                   SCHEDULERS, TABLE_KINDS, VOQ_KINDS, ArchConfig)
from .cyclesim import SimOptions, SwitchModel
from .errors import AllPruned, NoFeasibleDesign, SpaceTooLarge
from .protocol import ProtocolSpec
from .resources import (ResourceEstimate, align_to_bram, estimate_resources,
                        predict_freq_mhz, timing_feasible)
from .surrogate import run_surrogate
from .trace import Trace, TraceFeatures, extract_features


@dataclass(frozen=True)
class Constraints:
    sla_latency_p99_ns: float
    bram_budget_blocks: int
    drop_epsilon: float = 1e-3
    delta: float = 0.1
    top_k: int = 5
    link_rate_gbps: float = 10.0

    def __post_init__(self):
        if self.sla_latency_p99_ns <= 0:
            raise ValueError("sla_latency_p99_ns must be positive")
        if self.bram_budget_blocks <= 0:
            raise ValueError("bram_budget_blocks must be positive")
        if not 0 <= self.drop_epsilon < 1:
            raise ValueError("drop_epsilon must be in [0, 1)")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.link_rate_gbps <= 0:
            raise ValueError("link_rate_gbps must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "Constraints":
        names = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass
class DesignPoint:
    config: ArchConfig
    depths: object                  # aligned: flat N*N list (nxn) or pool int
    raw_depths: object              # pre-alignment tail-mass depths
    resources: ResourceEstimate
    verified_latency_p99_ns: float | None = None
    verified_drop_rate: float | None = None

    @property
    def bram_blocks(self) -> int:
        return self.resources.bram_blocks

    def objectives(self) -> tuple:
        return (self.bram_blocks, self.verified_latency_p99_ns)

    def to_dict(self) -> dict:
        return {
            "config": config_summary(self.config),
            "depths": self.depths,
            "raw_depths": self.raw_depths,
            "resources": self.resources.to_dict(),
            "verified_latency_p99_ns": self.verified_latency_p99_ns,
            "verified_drop_rate": self.verified_drop_rate,
        }


@dataclass
class ParetoFront:
    points: list

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


@dataclass
class DSEReport:
    features: TraceFeatures
    ledger: list                    # [{config, stage, reason}]
    pareto: ParetoFront
    optimal: DesignPoint
    timing_ms: dict
    accepted: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "features": self.features.to_dict(),
            "ledger": self.ledger,
            "pareto": [[p.bram_blocks, p.verified_latency_p99_ns,
                        config_summary(p.config)] for p in self.pareto],
            "optimal": self.optimal.to_dict(),
            "timing": self.timing_ms,
        }


def config_summary(config: ArchConfig) -> dict:
    d = asdict(config)
    d.pop("stage_latency_cycles", None)
    return d


# ---------------------------------------------------------------------------
# Template space
# ---------------------------------------------------------------------------

def build_templates(ports: int = 8, arch_hints: dict | None = None,
                    widths=None, islip_iterations: int = 1,
                    profile: dict | None = None) -> list[ArchConfig]:
    """Cross-product of table x VOQ x scheduler x data width, with any
    dimension pinned by an `arch key=value` hint (value "auto" = free).
    Each template's clock is set from the frequency model."""
    hints = dict(arch_hints or {})

    def axis(key, default):
        v = hints.get(key)
        if v is None or v == "auto":
            return list(default)
        return [v]

    ports = int(hints.get("ports", ports)) if hints.get("ports") not in (None, "auto") \
        else ports
    tables = axis("fwd_table", TABLE_KINDS)
    voqs = axis("voq", VOQ_KINDS)
    scheds = axis("scheduler", SCHEDULERS)
    if widths is None:
        widths = [int(w) for w in axis("width_bits", DATA_WIDTHS[1:])]  # 256..1024
    templates = []
    for tab, voq, sched, w in product(tables, voqs, scheds, widths):
        cfg = ArchConfig(ports=ports, data_width_bits=int(w), fwd_table=tab,
                         voq=voq, scheduler=sched,
                         islip_iterations=islip_iterations)
        cfg = cfg.with_(clock_mhz=predict_freq_mhz(cfg, profile))
        templates.append(cfg)
    return templates


def _map(fn, items):
    threads = int(os.environ.get("SPAC_THREADS", "1"))
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))  # order-preserving merge


# ---------------------------------------------------------------------------
# Stage 1: static pruning
# ---------------------------------------------------------------------------

def stage1_prune(templates, features: TraceFeatures, constraints: Constraints,
                 routing_key_bits: int = 8, header_bytes: int = 0):
    """Line-rate timing prune plus direct-table key-width feasibility.
    Returns (survivors, ledger entries); raises AllPruned if nothing survives."""
    if not templates:
        raise ValueError("templates must be non-empty")
    survivors = []
    ledger = []
    for cfg in templates:
        if (cfg.fwd_table == "full_lookup"
                and routing_key_bits > FULL_LOOKUP_MAX_KEY_BITS):
            ledger.append({"config": cfg.key(), "stage": "stage1",
                           "reason": f"direct-indexed table infeasible for "
                                     f"{routing_key_bits}-bit keys "
                                     f"(limit {FULL_LOOKUP_MAX_KEY_BITS})"})
            continue
        ok, budget = timing_feasible(cfg, features.min_payload_bytes,
                                     constraints.link_rate_gbps,
                                     constraints.delta, header_bytes)
        if not ok:
            ledger.append({"config": cfg.key(), "stage": "stage1",
                           "reason": f"t_proc {budget.t_proc_ns:.3g} ns > "
                                     f"(1+{constraints.delta:g}) x t_arrival "
                                     f"{budget.t_arrival_ns:.3g} ns"})
            continue
        survivors.append(cfg)
    if not survivors:
        raise AllPruned(ledger)
    return survivors, ledger


# ---------------------------------------------------------------------------
# Stage 2: infinite-buffer profiling
# ---------------------------------------------------------------------------

def stage2_profile(survivors, spec: ProtocolSpec, trace: Trace,
                   constraints: Constraints):
    """One surrogate run per survivor with unbounded buffers; retain configs
    whose worst output-port p99 meets the SLA.  Returns (retained, ledger),
    where retained pairs each config with its surrogate profile."""
    if not survivors:
        raise ValueError("survivors must be non-empty")
    results = _map(lambda cfg: run_surrogate(cfg, spec, trace, INFINITE),
                   survivors)
    retained = []
    ledger = []
    for cfg, res in zip(survivors, results):
        p99 = max(res.per_out_p99)
        if p99 <= constraints.sla_latency_p99_ns:
            retained.append((cfg, res))
        else:
            ledger.append({"config": cfg.key(), "stage": "stage2",
                           "reason": f"ideal-buffer p99 {p99:.1f} ns > SLA "
                                     f"{constraints.sla_latency_p99_ns:g} ns"})
    return retained, ledger


# ---------------------------------------------------------------------------
# Stage 3: sizing and verification
# ---------------------------------------------------------------------------

def epsilon_depth(hist: dict, epsilon: float) -> int:
    """Smallest depth d >= 1 whose tail mass (occupancy-after-enqueue > d)
    does not exceed epsilon of all enqueues."""
    total = sum(hist.values())
    if total == 0:
        return 1
    allowed = epsilon * total
    tail = 0
    for occ, cnt in sorted(hist.items(), reverse=True):
        # lowering d below occ would move these cnt enqueues into the tail
        if tail + cnt > allowed:
            return max(1, occ)
        tail += cnt
    return 1


def size_buffers(config: ArchConfig, profile_result, epsilon: float):
    """Per-queue tail-mass sizing from the ideal-run occupancy histograms.
    Returns (raw_depths, aligned_depths, buffer_blocks)."""
    n = config.ports
    w = config.data_width_bits
    if config.voq == "shared":
        raw = epsilon_depth(profile_result.pool_hist or {}, epsilon)
        aligned, blocks = align_to_bram(raw, w)
        return raw, aligned, blocks
    raw = []
    aligned = []
    blocks = 0
    for i in range(n):
        for j in range(n):
            d = epsilon_depth(profile_result.q_hist[i][j], epsilon)
            a, b = align_to_bram(d, w)
            raw.append(d)
            aligned.append(a)
            blocks += b
    return raw, aligned, blocks


def verify_point(config: ArchConfig, spec: ProtocolSpec, trace: Trace,
                 depths) -> tuple:
    """Cycle-accurate run with exact finite buffers; returns
    (worst-port p99 ns, drop rate, SimResult)."""
    model = SwitchModel(config, spec)
    res = model.run(trace, SimOptions(depths=depths))
    injected = res.conservation["injected"]
    drop_rate = res.dropped / injected if injected else 0.0
    return max(res.per_out_p99), drop_rate, res


def stage3_size_and_verify(candidates, spec: ProtocolSpec, trace: Trace,
                           constraints: Constraints,
                           routing_key_bits: int = 8,
                           profile: dict | None = None):
    """Size the top-k lowest-latency candidates, prune on the BRAM budget,
    and verify survivors with the cycle simulator.  Returns
    (optimal, ParetoFront, ledger, accepted)."""
    ranked = sorted(candidates, key=lambda cr: (max(cr[1].per_out_p99),
                                                cr[0].key()))
    top = ranked[:constraints.top_k]
    ledger = []
    for cfg, _ in ranked[constraints.top_k:]:
        ledger.append({"config": cfg.key(), "stage": "stage3",
                       "reason": f"outside top-{constraints.top_k} by ideal p99"})

    sized = []
    for cfg, prof in top:
        raw, aligned, _ = size_buffers(cfg, prof, constraints.drop_epsilon)
        est = estimate_resources(cfg, depths=aligned,
                                 routing_key_bits=routing_key_bits,
                                 profile=profile)
        if est.bram_blocks > constraints.bram_budget_blocks:
            ledger.append({"config": cfg.key(), "stage": "stage3",
                           "reason": f"BRAM {est.bram_blocks} blocks > budget "
                                     f"{constraints.bram_budget_blocks}"})
            continue
        sized.append((cfg, raw, aligned, est))

    verified = _map(lambda s: verify_point(s[0], spec, trace, s[2]), sized)
    accepted = []
    for (cfg, raw, aligned, est), (p99, drop, _res) in zip(sized, verified):
        if p99 > constraints.sla_latency_p99_ns:
            ledger.append({"config": cfg.key(), "stage": "stage3",
                           "reason": f"verified p99 {p99:.1f} ns > SLA "
                                     f"{constraints.sla_latency_p99_ns:g} ns"})
            continue
        if drop > constraints.drop_epsilon:
            ledger.append({"config": cfg.key(), "stage": "stage3",
                           "reason": f"verified drop rate {drop:.2e} > eps "
                                     f"{constraints.drop_epsilon:g}"})
            continue
        accepted.append(DesignPoint(cfg, aligned, raw, est,
                                    verified_latency_p99_ns=p99,
                                    verified_drop_rate=drop))
    if not accepted:
        raise NoFeasibleDesign(ledger)
    optimal = min(accepted, key=lambda p: (p.bram_blocks,
                                           p.verified_latency_p99_ns,
                                           p.resources.lut_k))
    return optimal, pareto_front(accepted), ledger, accepted


# ---------------------------------------------------------------------------
# Pareto utilities
# ---------------------------------------------------------------------------

def _objectives(p):
    if isinstance(p, DesignPoint):
        return p.objectives()
    return (p[0], p[1])


def dominates(a, b) -> bool:
    """a dominates b iff a <= b in both objectives and < in at least one."""
    (ab, ap), (bb, bp) = _objectives(a), _objectives(b)
    return ab <= bb and ap <= bp and (ab < bb or ap < bp)


def pareto_front(points) -> ParetoFront:
    """Exact non-dominated filtering; coordinate ties keep all tied points."""
    pts = list(points)
    front = [p for p in pts
             if not any(dominates(q, p) for q in pts if q is not p)]
    return ParetoFront(front)


# ---------------------------------------------------------------------------
# Full pipeline and brute-force oracle
# ---------------------------------------------------------------------------

def run_dse(spec: ProtocolSpec, trace: Trace, constraints: Constraints,
            templates=None, window_ns: int | None = None,
            profile: dict | None = None) -> DSEReport:
    """Analyze the trace, then run the three pruning stages.  Raises
    AllPruned / NoFeasibleDesign with the ledger attached."""
    key_bits = spec.routing_key_field.width_bits
    timing = {}

    t0 = time.perf_counter()
    features = extract_features(trace, window_ns)
    timing["analyze"] = (time.perf_counter() - t0) * 1000.0

    if templates is None:
        templates = build_templates(ports=trace.port_count,
                                    arch_hints=spec.arch_hints,
                                    profile=profile)

    t0 = time.perf_counter()
    survivors, ledger = stage1_prune(templates, features, constraints,
                                     routing_key_bits=key_bits,
                                     header_bytes=spec.padded_header_bytes)
    timing["stage1"] = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    try:
        candidates, led2 = stage2_profile(survivors, spec, trace, constraints)
    finally:
        timing["stage2"] = (time.perf_counter() - t0) * 1000.0
    ledger += led2
    if not candidates:
        raise NoFeasibleDesign(ledger)

    t0 = time.perf_counter()
    try:
        optimal, front, led3, accepted = stage3_size_and_verify(
            candidates, spec, trace, constraints,
            routing_key_bits=key_bits, profile=profile)
    except NoFeasibleDesign as exc:
        raise NoFeasibleDesign(ledger + exc.ledger) from None
    finally:
        timing["stage3"] = (time.perf_counter() - t0) * 1000.0
    ledger += led3

    return DSEReport(features=features, ledger=ledger, pareto=front,
                     optimal=optimal, timing_ms=timing, accepted=accepted)


def cross_space(templates, depth_blocks=(1, 2, 4, 8)):
    """Explicit enumeration space: each template at each buffer size, sizes
    given in whole memory blocks per queue (nxn) or for the pool (shared)."""
    from .resources import BRAM_BLOCK_BITS
    space = []
    for cfg in templates:
        for blk in depth_blocks:
            depth = blk * BRAM_BLOCK_BITS // cfg.data_width_bits
            space.append((cfg, depth))
    return space


def brute_force_enumerate(space, spec: ProtocolSpec, trace: Trace,
                          constraints: Constraints, cap: int = 512,
                          profile: dict | None = None):
    """Cycle-simulate every (config, uniform depth) point exactly; return
    (ParetoFront of constraint-satisfying points, all evaluated points)."""
    space = list(space)
    if len(space) > cap:
        raise SpaceTooLarge(len(space), cap)
    key_bits = spec.routing_key_field.width_bits

    def evaluate(item):
        cfg, depth = item
        n = cfg.ports
        depths = depth if cfg.voq == "shared" else [depth] * (n * n)
        est = estimate_resources(cfg, depths=depths,
                                 routing_key_bits=key_bits, profile=profile)
        p99, drop, _ = verify_point(cfg, spec, trace, depths)
        return DesignPoint(cfg, depths, depths, est,
                           verified_latency_p99_ns=p99,
                           verified_drop_rate=drop)

    points = _map(evaluate, space)
    satisfying = [p for p in points
                  if p.verified_latency_p99_ns <= constraints.sla_latency_p99_ns
                  and p.verified_drop_rate <= constraints.drop_epsilon
                  and p.bram_blocks <= constraints.bram_budget_blocks]
    return pareto_front(satisfying), points
