"""Trace I/O, generators, and feature-extraction tests."""

import pytest

from spac.errors import (BadParams, EmptyTrace, PortOutOfRange, TooFewWindows,
                         TraceParseError)
from spac.presets import PRESETS, get_preset
from spac.trace import (BROADCAST, Trace, extract_features, gen_trace,
                        load_trace, offered_load, save_trace)


def test_csv_roundtrip(tmp_path):
    t = gen_trace("uniform_bernoulli",
                  {"ports": 4, "slot_ns": 10, "load": 0.5, "slots": 50}, seed=3)
    path = tmp_path / "t.csv"
    save_trace(t, path)
    back = load_trace(path, 4, 10.0)
    assert back.events == t.events
    assert back.port_count == 4


def test_broadcast_csv_spelling(tmp_path):
    path = tmp_path / "b.csv"
    path.write_text("time_ns,src_port,src_addr,dst_addr,payload_bytes\n"
                    "0,0,0,*,8\n10,1,1,0,8\n")
    t = load_trace(path, 2, 10.0)
    assert t.events[0].dst_addr == BROADCAST
    assert t.events[1].dst_addr == 0


@pytest.mark.parametrize("row,exc", [
    ("0,0,0,1", TraceParseError),            # 4 columns
    ("x,0,0,1,8", TraceParseError),
    ("-5,0,0,1,8", TraceParseError),
    ("0,9,0,1,8", PortOutOfRange),
])
def test_load_errors(tmp_path, row, exc):
    path = tmp_path / "bad.csv"
    path.write_text(f"time_ns,src_port,src_addr,dst_addr,payload_bytes\n{row}\n")
    with pytest.raises(exc):
        load_trace(path, 4, 10.0)


def test_load_empty(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("time_ns,src_port,src_addr,dst_addr,payload_bytes\n")
    with pytest.raises(EmptyTrace):
        load_trace(path, 4, 10.0)


def test_generator_determinism_and_sorting():
    for model, params in [
        ("uniform_bernoulli", {"load": 0.4, "slots": 100}),
        ("onoff_bursty", {"load": 0.4, "slots": 100, "mean_burst": 8.0}),
        ("incast", {"slots": 100}),
        ("hotspot", {"load": 0.4, "slots": 100}),
        ("constant_rate", {"period_ns": 20, "duration_ns": 1000}),
    ]:
        a = gen_trace(model, params, seed=9)
        b = gen_trace(model, params, seed=9)
        assert a.events == b.events, model
        times = [e.time_ns for e in a.events]
        assert times == sorted(times), model


def test_generator_bad_params():
    with pytest.raises(BadParams):
        gen_trace("nope", {}, 1)
    with pytest.raises(BadParams):
        gen_trace("uniform_bernoulli", {"load": 1.5, "slots": 10}, 1)
    with pytest.raises(BadParams):
        gen_trace("uniform_bernoulli", {"load": 0.5}, 1)  # missing slots
    with pytest.raises(BadParams):
        gen_trace("incast", {"slots": 10, "fan_in": 9}, 1)


def test_offered_load_accuracy():
    t = gen_trace("uniform_bernoulli",
                  {"ports": 8, "slot_ns": 10, "load": 0.6, "slots": 5000}, seed=2)
    assert offered_load(t, 10) == pytest.approx(0.6, abs=0.02)


def test_constant_rate_idc_zero():
    t = gen_trace("constant_rate",
                  {"ports": 4, "slot_ns": 10, "period_ns": 100,
                   "duration_ns": 100_000}, seed=1)
    f = extract_features(t)
    assert f.idc_burst == pytest.approx(0.0, abs=0.05)


def test_poisson_like_idc_near_one():
    t = get_preset("poisson").trace(seed=4)
    f = extract_features(t)
    assert f.idc_burst == pytest.approx(1.0, abs=0.1)


def test_bursty_idc_above_one():
    t = get_preset("bursty").trace(seed=4)
    assert extract_features(t).idc_burst > 2.0


def test_uniform_dest_entropy_eight_ports():
    t = get_preset("uniform").trace(seed=4)
    f = extract_features(t)
    assert f.addr_entropy_bits == pytest.approx(3.0, abs=0.01)
    assert f.min_payload_bytes == 64


def test_too_few_windows():
    t = gen_trace("uniform_bernoulli",
                  {"ports": 2, "slot_ns": 10, "load": 1.0, "slots": 5}, seed=1)
    with pytest.raises(TooFewWindows):
        extract_features(t, window_ns=10_000)


def test_columns_cached_and_consistent():
    t = gen_trace("uniform_bernoulli",
                  {"ports": 4, "slot_ns": 10, "load": 0.5, "slots": 50}, seed=3)
    cols = t.columns
    assert cols is t.columns  # cached
    assert len(cols["time_ns"]) == len(t.events)
    assert cols["src_port"].max() < 4


def test_presets_all_generate():
    for name in PRESETS:
        p = get_preset(name)
        if name == "benchmark":
            continue  # large; covered by the validation suite
        t = p.trace()
        assert len(t.events) > 0
        assert t.port_count == 8


def test_get_preset_unknown():
    with pytest.raises(BadParams):
        get_preset("nope")
