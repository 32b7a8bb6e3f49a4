"""Protocol definitions: bit-field layouts, codecs, and routing-key extraction.

A protocol is an ordered list of named bit-fields.  Fields are packed
MSB-first in declaration order (network order); the header region is padded
with zero bits to the next byte boundary before the payload is appended, so
payloads stay byte addressable.  Individual fields are capped at 64 bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .errors import (
    DuplicateField,
    DuplicateRole,
    MissingRoutingKey,
    SpecSyntaxError,
    Truncated,
    ValueOverflow,
    ZeroWidth,
)

ROLES = ("routing_key", "src_addr", "qos", "length", "payload", "none")
MAX_FIELD_WIDTH = 64


@dataclass(frozen=True)
class FieldSpec:
    name: str
    width_bits: int
    role: str = "none"


@dataclass(frozen=True)
class ProtocolSpec:
    name: str
    fields: tuple[FieldSpec, ...]
    arch_hints: dict = dc_field(default_factory=dict, compare=False)

    @property
    def header_bits(self) -> int:
        return sum(f.width_bits for f in self.fields if f.role != "payload")

    @property
    def padded_header_bits(self) -> int:
        return (self.header_bits + 7) // 8 * 8

    @property
    def padded_header_bytes(self) -> int:
        return (self.header_bits + 7) // 8

    def header_fields(self) -> tuple[FieldSpec, ...]:
        return tuple(f for f in self.fields if f.role != "payload")

    def field_by_role(self, role: str) -> FieldSpec | None:
        for f in self.fields:
            if f.role == role:
                return f
        return None

    @property
    def routing_key_field(self) -> FieldSpec:
        f = self.field_by_role("routing_key")
        assert f is not None
        return f

    @property
    def broadcast_key(self) -> int:
        """All-ones routing key value, the broadcast sentinel on the wire."""
        return (1 << self.routing_key_field.width_bits) - 1


@dataclass(frozen=True)
class PlanEntry:
    name: str
    first_flit_index: int
    bit_offset_in_flit: int
    width_bits: int
    straddles_boundary: bool


@dataclass(frozen=True)
class ParsePlan:
    flit_width_bits: int
    entries: tuple[PlanEntry, ...]


@dataclass(frozen=True)
class SemanticBinding:
    routing_key: str
    src_addr: str | None = None
    qos: str | None = None
    length: str | None = None


def validate_spec(name, fields, arch_hints=None) -> ProtocolSpec:
    seen = set()
    roles_seen = set()
    routing = None
    for f in fields:
        if f.width_bits < 1:
            raise ZeroWidth(f.name)
        if f.width_bits > MAX_FIELD_WIDTH:
            raise SpecSyntaxError(0, f"field {f.name!r} wider than {MAX_FIELD_WIDTH} bits")
        if f.name in seen:
            raise DuplicateField(f.name)
        seen.add(f.name)
        if f.role != "none":
            if f.role in roles_seen:
                raise DuplicateRole(f.role)
            roles_seen.add(f.role)
        if f.role == "routing_key":
            routing = f
    if routing is None:
        raise MissingRoutingKey()
    return ProtocolSpec(name=name, fields=tuple(fields), arch_hints=dict(arch_hints or {}))


def parse_spec(text: str) -> ProtocolSpec:
    """Parse the line-oriented protocol file format.

    Grammar::

        protocol <name>
        field <name> <width_bits> [role=<role>]
        arch <key>=<value|auto>          # optional hints for the DSE engine

    ``#`` starts a comment.  Exactly one field must carry role=routing_key.
    """
    name = None
    fields: list[FieldSpec] = []
    hints: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kw = parts[0]
        if kw == "protocol":
            if len(parts) != 2:
                raise SpecSyntaxError(line_no, "expected: protocol <name>")
            if name is not None:
                raise SpecSyntaxError(line_no, "duplicate protocol line")
            name = parts[1]
        elif kw == "field":
            if len(parts) not in (3, 4):
                raise SpecSyntaxError(line_no, "expected: field <name> <width_bits> [role=<role>]")
            fname = parts[1]
            try:
                width = int(parts[2])
            except ValueError:
                raise SpecSyntaxError(line_no, f"bad width {parts[2]!r}") from None
            role = "none"
            if len(parts) == 4:
                if not parts[3].startswith("role="):
                    raise SpecSyntaxError(line_no, f"bad attribute {parts[3]!r}")
                role = parts[3][5:]
                if role not in ROLES:
                    raise SpecSyntaxError(line_no, f"unknown role {role!r}")
            if width < 1:
                raise ZeroWidth(fname)
            fields.append(FieldSpec(fname, width, role))
        elif kw == "arch":
            for kv in parts[1:]:
                if "=" not in kv:
                    raise SpecSyntaxError(line_no, f"bad arch hint {kv!r}")
                k, v = kv.split("=", 1)
                hints[k] = v
        else:
            raise SpecSyntaxError(line_no, f"unknown directive {kw!r}")
    if name is None:
        raise SpecSyntaxError(0, "missing protocol line")
    return validate_spec(name, fields, hints)


def compute_layout(spec: ProtocolSpec, flit_width_bits: int) -> ParsePlan:
    """Assign each header field its flit index and in-flit bit offset.

    Packing is MSB-first and contiguous; a field straddles the flit boundary
    iff its in-flit offset plus width exceeds the flit width.
    """
    entries = []
    pos = 0
    for f in spec.header_fields():
        flit = pos // flit_width_bits
        off = pos % flit_width_bits
        entries.append(PlanEntry(
            name=f.name,
            first_flit_index=flit,
            bit_offset_in_flit=off,
            width_bits=f.width_bits,
            straddles_boundary=off + f.width_bits > flit_width_bits,
        ))
        pos += f.width_bits
    return ParsePlan(flit_width_bits=flit_width_bits, entries=tuple(entries))


def _pack_bits(buf: bytearray, bit_pos: int, value: int, width: int) -> int:
    """Write `width` bits of `value` MSB-first at absolute bit_pos."""
    for i in range(width - 1, -1, -1):
        bit = (value >> i) & 1
        byte, off = divmod(bit_pos, 8)
        if bit:
            buf[byte] |= 0x80 >> off
        bit_pos += 1
    return bit_pos


def _slice_bits(data: bytes, bit_pos: int, width: int) -> int:
    value = 0
    for _ in range(width):
        byte, off = divmod(bit_pos, 8)
        value = (value << 1) | ((data[byte] >> (7 - off)) & 1)
        bit_pos += 1
    return value


def serialize_packet(spec: ProtocolSpec, values: dict[str, int], payload: bytes = b"") -> bytes:
    """Pack field values MSB-first, pad the header to a byte boundary, append payload."""
    header_bytes = spec.padded_header_bytes
    buf = bytearray(header_bytes)
    pos = 0
    for f in spec.header_fields():
        v = int(values.get(f.name, 0))
        if v < 0 or v >= (1 << f.width_bits):
            raise ValueOverflow(f.name, v, f.width_bits)
        pos = _pack_bits(buf, pos, v, f.width_bits)
    return bytes(buf) + bytes(payload)


def deserialize_packet(spec: ProtocolSpec, data: bytes) -> tuple[dict[str, int], bytes]:
    """Inverse of serialize_packet."""
    header_bytes = spec.padded_header_bytes
    if len(data) < header_bytes:
        raise Truncated(header_bytes * 8, len(data) * 8)
    values = {}
    pos = 0
    for f in spec.header_fields():
        values[f.name] = _slice_bits(data, pos, f.width_bits)
        pos += f.width_bits
    return values, bytes(data[header_bytes:])


def extract_routing_key(spec: ProtocolSpec, binding: SemanticBinding, data: bytes) -> int:
    """Slice the routing-key field straight out of the wire bytes.

    Offset comes from the field layout; no full deserialization is done.
    """
    pos = 0
    for f in spec.header_fields():
        if f.name == binding.routing_key:
            if len(data) * 8 < pos + f.width_bits:
                raise Truncated(pos + f.width_bits, len(data) * 8)
            return _slice_bits(data, pos, f.width_bits)
        pos += f.width_bits
    raise KeyError(binding.routing_key)


def default_binding(spec: ProtocolSpec) -> SemanticBinding:
    """Binding implied by the roles declared in the protocol itself."""
    def name_of(role):
        f = spec.field_by_role(role)
        return f.name if f else None

    return SemanticBinding(
        routing_key=spec.routing_key_field.name,
        src_addr=name_of("src_addr"),
        qos=name_of("qos"),
        length=name_of("length"),
    )


def header_overhead_ratio(spec: ProtocolSpec, payload_bytes: int) -> float:
    """Fraction of on-wire bytes spent on the (padded) header."""
    if payload_bytes < 0:
        raise ValueError("payload_bytes must be >= 0")
    h = spec.padded_header_bytes
    return h / (h + payload_bytes)
