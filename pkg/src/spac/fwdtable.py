"""Forwarding tables: direct-indexed full lookup and multi-bank hash.

Both variants learn the source address on every arrival and answer lookups
with either a singleton output port or broadcast (all ports except the
ingress) when the destination is unknown.
"""

from __future__ import annotations

# Fixed odd multiplier for the multiply-shift hash.
HASH_MULT = 0x9E3779B1


class FullLookupTable:
    """Address-indexed array; single-cycle access, no bank conflicts."""

    def __init__(self, key_bits: int, ports: int):
        self.key_bits = key_bits
        self.ports = ports
        self.entries: list[int | None] = [None] * (1 << key_bits)

    def learn(self, src_key: int, in_port: int) -> None:
        self.entries[src_key] = in_port

    def lookup(self, dst_key: int) -> int | None:
        return self.entries[dst_key]

    def bank_of(self, key: int) -> int:
        return 0

    @property
    def banks(self) -> int:
        return 1


class MultiBankHashTable:
    """Hash-indexed banked table.

    bank = h(key) mod B; the slot stores the full key, which is verified on
    lookup (a mismatch reads as unknown).  Learning overwrites the slot.
    Same-cycle accesses to one bank serialize; the simulator charges the
    extra cycles, this class only exposes the bank mapping.
    """

    def __init__(self, key_bits: int, ports: int, banks: int, hash_bits: int):
        self.key_bits = key_bits
        self.ports = ports
        self.n_banks = banks
        self.hash_bits = min(hash_bits, key_bits)
        self.slots: dict[int, tuple[int, int]] = {}  # hash index -> (key, port)

    def _hash(self, key: int) -> int:
        if self.key_bits <= self.hash_bits:
            return key
        prod = (key * HASH_MULT) & ((1 << self.key_bits) - 1)
        return prod >> (self.key_bits - self.hash_bits)

    def bank_of(self, key: int) -> int:
        return self._hash(key) % self.n_banks

    @property
    def banks(self) -> int:
        return self.n_banks

    def learn(self, src_key: int, in_port: int) -> None:
        self.slots[self._hash(src_key)] = (src_key, in_port)

    def lookup(self, dst_key: int) -> int | None:
        entry = self.slots.get(self._hash(dst_key))
        if entry is None or entry[0] != dst_key:
            return None
        return entry[1]


def make_table(config, key_bits: int):
    if config.fwd_table == "full_lookup":
        return FullLookupTable(key_bits, config.ports)
    return MultiBankHashTable(key_bits, config.ports, config.table_banks, config.hash_bits)


def resolve_outputs(table, dst_key, src_key, in_port, broadcast_key, ports) -> list[int]:
    """Lookup + learn, returning the destination port set.

    Unknown destination or the broadcast key floods all ports except the
    ingress.  The source mapping is recorded on every arrival.
    """
    if dst_key == broadcast_key or dst_key is None:
        out = [p for p in range(ports) if p != in_port]
    else:
        hit = table.lookup(dst_key)
        out = [hit] if hit is not None else [p for p in range(ports) if p != in_port]
    table.learn(src_key, in_port)
    return out
