"""End-to-end CLI tests: exit codes and emitted artifacts."""

import json

import pytest

from spac.cli import main

PROTO = """\
protocol demo
field dst 8 role=routing_key
field src 8 role=src_addr
"""


@pytest.fixture
def proto_file(tmp_path):
    p = tmp_path / "demo.proto"
    p.write_text(PROTO)
    return str(p)


def test_protocol_check(proto_file, capsys):
    assert main(["protocol", "check", proto_file]) == 0
    out = capsys.readouterr().out
    assert "header 16 bits" in out and "dst" in out


def test_protocol_check_missing_file(capsys):
    assert main(["protocol", "check", "/nonexistent.proto"]) == 1
    assert "error" in capsys.readouterr().err


def test_protocol_check_bad_spec(tmp_path, capsys):
    p = tmp_path / "bad.proto"
    p.write_text("protocol x\nfield a 8\n")  # no routing key
    assert main(["protocol", "check", str(p)]) == 1


def test_trace_gen_and_analyze(tmp_path, capsys):
    assert main(["trace", "gen", "--model", "uniform_bernoulli",
                 "--param", "load=0.5", "--param", "slots=2000",
                 "--param", "payload_bytes=64",
                 "--seed", "3", "--out", str(tmp_path), "--name", "t.csv"]) == 0
    capsys.readouterr()
    assert main(["trace", "analyze", str(tmp_path / "t.csv")]) == 0
    feats = json.loads(capsys.readouterr().out)
    assert set(feats) == {"idc_burst", "addr_entropy_bits",
                          "min_payload_bytes", "window_ns"}
    assert feats["min_payload_bytes"] == 64


def test_trace_gen_preset_deterministic(tmp_path):
    for name in ("a.csv", "b.csv"):
        assert main(["trace", "gen", "--preset", "hft", "--seed", "9",
                     "--out", str(tmp_path), "--name", name]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_trace_gen_needs_model_or_preset(capsys):
    assert main(["trace", "gen"]) == 1
    assert "need --model or --preset" in capsys.readouterr().err


@pytest.mark.parametrize("fidelity", ["cycle", "surrogate"])
def test_sim_run_both_fidelities(tmp_path, fidelity, capsys):
    assert main(["sim", "run", "--preset", "hft", "--seed", "2",
                 "--fidelity", fidelity, "--arch", "scheduler=rr",
                 "--arch", "fwd_table=full_lookup",
                 "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / f"sim_{fidelity}.json").read_text())
    assert doc["conservation"]["injected"] == (
        doc["conservation"]["delivered"] + doc["conservation"]["dropped"]
        + doc["conservation"]["residual"])
    assert doc["config"]["scheduler"] == "rr"
    assert doc["manifest"]["seed"] == 2
    assert "p50" in capsys.readouterr().out


def test_sim_run_annotated(tmp_path, capsys):
    ann = tmp_path / "ann.json"
    ann.write_text(json.dumps({"total_path_ns": 57.3}))
    assert main(["sim", "run", "--preset", "underwater", "--seed", "2",
                 "--arch", "scheduler=rr", "--annotate", str(ann),
                 "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "sim_cycle.json").read_text())
    assert doc["config"]["annotated_path_ns"] == 57.3


def test_dse_run_writes_report_and_scatter(tmp_path, capsys):
    assert main(["dse", "run", "--preset", "underwater",
                 "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "dse_report.json").read_text())
    assert doc["optimal"]["resources"]["bram_blocks"] <= 300
    assert (tmp_path / "pareto.svg").exists()
    csv_lines = (tmp_path / "pareto.csv").read_text().splitlines()
    assert csv_lines[0].startswith("bram_blocks,p99_ns")
    assert len(csv_lines) > 1


def test_dse_run_impossible_sla_exits_2(tmp_path, capsys):
    assert main(["dse", "run", "--preset", "underwater",
                 "--sla-latency-p99-ns", "1e-3",
                 "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "stage2" in err or "stage3" in err


def test_dse_run_missing_constraints(tmp_path, capsys):
    assert main(["dse", "run", "--protocol", "/nonexistent", "--trace",
                 "/nonexistent", "--out", str(tmp_path)]) == 1


def test_dse_oracle_artifacts(tmp_path, capsys):
    assert main(["dse", "oracle", "--preset", "underwater",
                 "--oracle-widths", "256",
                 "--oracle-depth-blocks", "1",
                 "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "oracle_front.json").read_text())
    assert doc["evaluated"] == 12        # 2 tables x 2 voqs x 3 scheds
    assert len(doc["front"]) >= 1
    assert (tmp_path / "oracle_pareto.svg").exists()


def test_validate_quick(capsys):
    assert main(["validate", "--quick"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 3
