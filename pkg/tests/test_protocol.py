"""Protocol parsing, layout, and codec tests."""

import pytest
from hypothesis import given, settings, strategies as st

from spac.errors import (DuplicateField, DuplicateRole, MissingRoutingKey,
                         SpecSyntaxError, Truncated, ValueOverflow, ZeroWidth)
from spac.protocol import (FieldSpec, SemanticBinding, compute_layout,
                           default_binding, deserialize_packet,
                           extract_routing_key, header_overhead_ratio,
                           parse_spec, serialize_packet, validate_spec)

SIMPLE = """\
protocol demo
field dst 8 role=routing_key
field src 8 role=src_addr
field flags 3
"""


def test_parse_simple():
    spec = parse_spec(SIMPLE)
    assert spec.name == "demo"
    assert [f.name for f in spec.fields] == ["dst", "src", "flags"]
    assert spec.header_bits == 19
    assert spec.padded_header_bits == 24
    assert spec.padded_header_bytes == 3
    assert spec.routing_key_field.name == "dst"
    assert spec.broadcast_key == 0xFF


def test_parse_comments_and_arch_hints():
    spec = parse_spec("# c\nprotocol p\nfield k 4 role=routing_key  # inline\n"
                      "arch scheduler=rr voq=auto\n")
    assert spec.arch_hints == {"scheduler": "rr", "voq": "auto"}


@pytest.mark.parametrize("text,exc", [
    ("field k 8 role=routing_key", SpecSyntaxError),          # no protocol line
    ("protocol p\nfield k x role=routing_key", SpecSyntaxError),
    ("protocol p\nfield k 8 role=bogus", SpecSyntaxError),
    ("protocol p\nbogus k", SpecSyntaxError),
    ("protocol p\nfield a 8", MissingRoutingKey),
    ("protocol p\nfield a 8 role=routing_key\nfield a 4", DuplicateField),
    ("protocol p\nfield a 8 role=routing_key\nfield b 4 role=routing_key",
     DuplicateRole),
    ("protocol p\nfield a 0 role=routing_key", ZeroWidth),
    ("protocol p\nfield a 65 role=routing_key", SpecSyntaxError),
])
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse_spec(text)


def test_layout_offsets_and_straddle():
    fields = [FieldSpec("a", 60, "routing_key"), FieldSpec("b", 60),
              FieldSpec("c", 10)]
    spec = validate_spec("p", fields)
    plan = compute_layout(spec, 128)
    a, b, c = plan.entries
    assert (a.first_flit_index, a.bit_offset_in_flit) == (0, 0)
    assert (b.first_flit_index, b.bit_offset_in_flit) == (0, 60)
    assert (c.first_flit_index, c.bit_offset_in_flit) == (0, 120)
    assert not a.straddles_boundary and not b.straddles_boundary
    assert c.straddles_boundary  # 120 + 10 > 128


def test_roundtrip_explicit():
    spec = parse_spec(SIMPLE)
    values = {"dst": 0xAB, "src": 0x3C, "flags": 0b101}
    wire = serialize_packet(spec, values, b"payload")
    assert len(wire) == 3 + 7
    got, payload = deserialize_packet(spec, wire)
    assert got == values
    assert payload == b"payload"


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_roundtrip_property(data):
    nf = data.draw(st.integers(1, 6))
    widths = [data.draw(st.integers(1, 64)) for _ in range(nf)]
    rk = data.draw(st.integers(0, nf - 1))
    fields = [FieldSpec(f"f{i}", w, "routing_key" if i == rk else "none")
              for i, w in enumerate(widths)]
    spec = validate_spec("p", fields)
    values = {f.name: data.draw(st.integers(0, (1 << f.width_bits) - 1))
              for f in fields}
    payload = data.draw(st.binary(max_size=16))
    got, got_payload = deserialize_packet(spec, serialize_packet(spec, values, payload))
    assert got == values and got_payload == payload


def test_serialize_overflow_and_truncated():
    spec = parse_spec(SIMPLE)
    with pytest.raises(ValueOverflow):
        serialize_packet(spec, {"dst": 256})
    with pytest.raises(Truncated):
        deserialize_packet(spec, b"\x00\x01")


def test_extract_routing_key_matches_deserialize():
    spec = parse_spec(SIMPLE)
    binding = default_binding(spec)
    assert binding == SemanticBinding("dst", "src", None, None)
    wire = serialize_packet(spec, {"dst": 0x5A, "src": 1, "flags": 2})
    assert extract_routing_key(spec, binding, wire) == 0x5A
    with pytest.raises(Truncated):
        extract_routing_key(spec, binding, b"")


def test_header_overhead_ratio():
    spec = parse_spec(SIMPLE)  # 3 B padded header
    assert header_overhead_ratio(spec, 0) == 1.0
    assert header_overhead_ratio(spec, 61) == pytest.approx(3 / 64)
    with pytest.raises(ValueError):
        header_overhead_ratio(spec, -1)
