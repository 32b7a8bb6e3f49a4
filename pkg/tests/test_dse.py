"""Design-space exploration tests: sizing, Pareto logic, staging, errors."""

import pytest

from spac.arch import ArchConfig
from spac.dse import (Constraints, DesignPoint, brute_force_enumerate,
                      build_templates, cross_space, dominates, epsilon_depth,
                      pareto_front, run_dse, stage1_prune, stage2_profile)
from spac.errors import AllPruned, NoFeasibleDesign, SpaceTooLarge
from spac.presets import get_preset
from spac.resources import BRAM_BLOCK_BITS
from spac.trace import TraceFeatures


def test_constraints_validation():
    with pytest.raises(ValueError):
        Constraints(sla_latency_p99_ns=0, bram_budget_blocks=10)
    with pytest.raises(ValueError):
        Constraints(sla_latency_p99_ns=10, bram_budget_blocks=0)
    with pytest.raises(ValueError):
        Constraints(sla_latency_p99_ns=10, bram_budget_blocks=10,
                    drop_epsilon=1.0)
    c = Constraints.from_dict({"sla_latency_p99_ns": 10.0,
                               "bram_budget_blocks": 5, "ignored": 1})
    assert c.top_k == 5


def test_epsilon_depth_peak_when_zero():
    hist = {1: 50, 3: 30, 7: 5}
    assert epsilon_depth(hist, 0.0) == 7


def test_epsilon_depth_trims_tail():
    hist = {1: 90, 5: 9, 9: 1}
    # 1% tail allowance removes exactly the single occupancy-9 enqueue
    assert epsilon_depth(hist, 0.01) == 5
    # 10% allowance also absorbs the occupancy-5 mass
    assert epsilon_depth(hist, 0.10) == 1
    assert epsilon_depth({}, 0.0) == 1


def test_dominates_and_front():
    assert dominates((10, 100.0), (20, 120.0))
    assert dominates((10, 100.0), (10, 120.0))
    assert not dominates((10, 100.0), (10, 100.0))   # equal: no strict gain
    assert not dominates((10, 120.0), (20, 100.0))
    pts = [(10, 100.0), (20, 80.0), (15, 120.0)]
    front = pareto_front(pts)
    assert sorted(front.points) == [(10, 100.0), (20, 80.0)]


def test_front_keeps_ties():
    pts = [(10, 100.0), (10, 100.0), (30, 50.0)]
    assert len(pareto_front(pts)) == 3


def test_build_templates_hints_pin_axes():
    free = build_templates(ports=8)
    assert len(free) == 2 * 2 * 3 * 3          # table x voq x sched x width
    pinned = build_templates(ports=8, arch_hints={"scheduler": "rr",
                                                  "voq": "auto"})
    assert len(pinned) == 2 * 2 * 1 * 3
    assert all(c.scheduler == "rr" for c in pinned)
    # clocks come from the frequency model, not the dataclass default
    assert any(c.clock_mhz != 165.0 for c in pinned)


def _features(min_payload=64):
    return TraceFeatures(idc_burst=1.0, addr_entropy_bits=3.0,
                         min_payload_bytes=min_payload, window_ns=1000)


def test_stage1_prunes_all_raises():
    templates = build_templates(ports=8)
    constraints = Constraints(sla_latency_p99_ns=1000.0, bram_budget_blocks=500,
                              link_rate_gbps=100.0)
    with pytest.raises(AllPruned) as ei:
        stage1_prune(templates, _features(min_payload=4), constraints)
    assert len(ei.value.ledger) == len(templates)


def test_stage1_key_width_prunes_direct_table():
    templates = build_templates(ports=8)
    constraints = Constraints(sla_latency_p99_ns=1000.0, bram_budget_blocks=500)
    survivors, ledger = stage1_prune(templates, _features(), constraints,
                                     routing_key_bits=24)
    assert all(c.fwd_table != "full_lookup" for c in survivors)
    assert any("direct-indexed" in e["reason"] for e in ledger)


def test_stage2_filters_on_sla():
    p = get_preset("hft")
    templates = build_templates(ports=8, widths=(256,))
    constraints = Constraints(sla_latency_p99_ns=34.0, bram_budget_blocks=300)
    survivors, _ = stage1_prune(templates, _features(min_payload=2),
                                constraints, header_bytes=2)
    retained, ledger = stage2_profile(survivors, p.spec(), p.trace(),
                                      constraints)
    assert retained and ledger            # some kept, some filtered
    assert len(retained) + len(ledger) == len(survivors)
    for _, res in retained:
        assert max(res.per_out_p99) <= 34.0


def test_run_dse_budget_exhausted():
    p = get_preset("hft")
    constraints = Constraints.from_dict({**p.constraints,
                                         "bram_budget_blocks": 1})
    with pytest.raises(NoFeasibleDesign) as ei:
        run_dse(p.spec(), p.trace(), constraints)
    assert any("budget" in e["reason"] for e in ei.value.ledger)


def test_run_dse_deterministic():
    p = get_preset("underwater")
    c = Constraints.from_dict(p.constraints)
    r1 = run_dse(p.spec(), p.trace(), c)
    r2 = run_dse(p.spec(), p.trace(), c)
    d1, d2 = r1.to_dict(), r2.to_dict()
    d1.pop("timing"), d2.pop("timing")
    assert d1 == d2


def test_run_dse_report_shape():
    p = get_preset("underwater")
    report = run_dse(p.spec(), p.trace(), Constraints.from_dict(p.constraints))
    assert len(report.pareto) >= 1
    assert report.optimal.verified_latency_p99_ns <= p.constraints["sla_latency_p99_ns"]
    assert report.optimal.bram_blocks <= p.constraints["bram_budget_blocks"]
    d = report.to_dict()
    assert set(d) == {"features", "ledger", "pareto", "optimal", "timing"}
    # no accepted point dominates another point on the front
    for pt in report.pareto:
        assert not any(dominates(q, pt) for q in report.accepted)


def test_cross_space_depths():
    templates = build_templates(ports=8, widths=(256,),
                                arch_hints={"scheduler": "rr", "voq": "nxn",
                                            "fwd_table": "full_lookup"})
    space = cross_space(templates, depth_blocks=(1, 2))
    assert len(space) == 2
    depths = sorted(d for _, d in space)
    assert depths == [BRAM_BLOCK_BITS // 256, 2 * BRAM_BLOCK_BITS // 256]


def test_brute_force_space_cap():
    templates = build_templates(ports=8)
    space = cross_space(templates, depth_blocks=(1, 2, 4, 8))
    p = get_preset("hft")
    with pytest.raises(SpaceTooLarge):
        brute_force_enumerate(space, p.spec(), p.trace(),
                              Constraints.from_dict(p.constraints), cap=10)


def test_verified_points_meet_constraints():
    p = get_preset("incast")
    templates = build_templates(
        ports=8, widths=(256,),
        arch_hints={"scheduler": "rr", "fwd_table": "full_lookup"})
    space = cross_space(templates, depth_blocks=(1, 8))
    c = Constraints.from_dict(p.constraints)
    front, points = brute_force_enumerate(space, p.spec(), p.trace(), c)
    assert len(points) == len(space)
    for pt in front:
        assert pt.verified_latency_p99_ns <= c.sla_latency_p99_ns
        assert pt.verified_drop_rate <= c.drop_epsilon
