"""Resource/timing model tests: calibration anchors, block alignment, and
the line-rate feasibility rule."""

import pytest

from spac.arch import ArchConfig
from spac.resources import (BRAM_BLOCK_BITS, align_to_bram, default_profile,
                            estimate_resources, load_profile,
                            max_throughput_gbps, predict_freq_mhz,
                            timing_feasible)

REF = ArchConfig(ports=8, data_width_bits=256, fwd_table="multibank_hash",
                 voq="nxn", scheduler="islip")


def test_reference_point_anchors():
    est = estimate_resources(REF, depths=1024, routing_key_bits=8)
    assert est.lut_k == pytest.approx(38.9, abs=0.05)
    assert est.ff_k == pytest.approx(30.5, abs=0.05)
    assert est.freq_mhz == pytest.approx(165.0, abs=0.5)


def test_frequency_by_scheduler():
    assert predict_freq_mhz(REF) == pytest.approx(165.0)
    assert predict_freq_mhz(REF.with_(scheduler="rr")) == pytest.approx(327.0)
    assert predict_freq_mhz(REF.with_(scheduler="edrrm")) == pytest.approx(257.0)
    # wider datapath and more ports cost frequency
    assert predict_freq_mhz(REF.with_(data_width_bits=512)) < 165.0
    assert predict_freq_mhz(REF.with_(ports=16)) < 165.0
    # never below the floor
    assert predict_freq_mhz(REF.with_(ports=64, data_width_bits=1024)) >= 100.0


def test_buffer_bram_64_queues_plus_table():
    # 576 flits x 256 b = 4 blocks per queue; 64 queues + 4 hash banks
    est = estimate_resources(REF, depths=[576] * 64, routing_key_bits=8)
    assert est.bram_blocks == 64 * 4 + 4 == 260


def test_align_to_bram():
    assert align_to_bram(1, 256) == (144, 1)       # one block holds 144 flits
    assert align_to_bram(144, 256) == (144, 1)
    assert align_to_bram(145, 256) == (288, 2)
    assert align_to_bram(1, 1024) == (36, 1)
    with pytest.raises(ValueError):
        align_to_bram(0, 256)


def test_block_capacity_consistent():
    for w in (128, 256, 512, 1024):
        aligned, blocks = align_to_bram(1000, w)
        assert aligned * w == blocks * BRAM_BLOCK_BITS
        assert aligned >= 1000


def test_max_throughput():
    cfg = ArchConfig(ports=8, data_width_bits=512, clock_mhz=175.0,
                     scheduler="islip")
    assert max_throughput_gbps(cfg) == pytest.approx(89.6)
    assert max_throughput_gbps(cfg.with_(pipeline_ii=2)) == pytest.approx(44.8)


def test_timing_feasibility_minimum_packets():
    # 4-byte packets at 100 Gbps arrive every 0.32 ns: nothing at realistic
    # clock rates can keep up even with 10% relaxation
    slow = ArchConfig(ports=8, clock_mhz=327.0, scheduler="rr")
    ok, budget = timing_feasible(slow, 4, 100.0, 0.1)
    assert not ok
    assert budget.t_arrival_ns == pytest.approx(0.32)
    # 1500-byte packets at 10 Gbps leave a 1200 ns budget: easy
    ok, budget = timing_feasible(slow, 1500, 10.0, 0.1)
    assert ok
    assert budget.t_arrival_ns == pytest.approx(1200.0)


def test_timing_feasibility_monotone_in_delta():
    cfg = ArchConfig(ports=8, clock_mhz=250.0, scheduler="rr")
    # t_proc = 4 ns; 4-byte packets at 10G arrive every 3.2 ns
    assert not timing_feasible(cfg, 4, 10.0, 0.0)[0]
    assert not timing_feasible(cfg, 4, 10.0, 0.1)[0]
    assert timing_feasible(cfg, 4, 10.0, 0.3)[0]


def test_timing_feasibility_header_bytes_tighten():
    cfg = ArchConfig(ports=8, clock_mhz=300.0, scheduler="rr")
    ok_bare, b_bare = timing_feasible(cfg, 4, 10.0, 0.0, header_bytes=0)
    ok_hdr, b_hdr = timing_feasible(cfg, 4, 10.0, 0.0, header_bytes=2)
    assert b_hdr.t_arrival_ns > b_bare.t_arrival_ns


def test_profile_loading(tmp_path):
    prof = default_profile()
    assert prof["name"] == "default"
    p = tmp_path / "p.json"
    import json
    custom = json.loads(json.dumps(prof))
    custom["freq_mhz"]["beta0"]["rr"] = 400.0
    p.write_text(json.dumps(custom))
    loaded = load_profile(p)
    assert predict_freq_mhz(REF.with_(scheduler="rr"), loaded) == pytest.approx(377.0)
