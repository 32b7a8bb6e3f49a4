"""Exception types shared across the package."""


class SpacError(Exception):
    """Base class for all package errors."""


# --- protocol ---------------------------------------------------------------

class ProtocolError(SpacError):
    pass


class SpecSyntaxError(ProtocolError):
    def __init__(self, line_no, message):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class DuplicateField(ProtocolError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"duplicate field name {name!r}")


class DuplicateRole(ProtocolError):
    def __init__(self, role):
        self.role = role
        super().__init__(f"role {role!r} assigned to more than one field")


class MissingRoutingKey(ProtocolError):
    def __init__(self):
        super().__init__("protocol defines no routing_key field")


class ZeroWidth(ProtocolError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"field {name!r} has zero width")


class ValueOverflow(ProtocolError):
    def __init__(self, field, value, width):
        self.field = field
        super().__init__(f"value {value} does not fit in {width}-bit field {field!r}")


class Truncated(ProtocolError):
    def __init__(self, expected_bits, got_bits):
        self.expected_bits = expected_bits
        self.got_bits = got_bits
        super().__init__(f"need {expected_bits} bits, got {got_bits}")


# --- traces -----------------------------------------------------------------

class TraceError(SpacError):
    pass


class TraceParseError(TraceError):
    def __init__(self, line_no, message):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class PortOutOfRange(TraceError):
    def __init__(self, line_no, port, port_count):
        self.line_no = line_no
        super().__init__(f"line {line_no}: src_port {port} out of range for {port_count} ports")


class EmptyTrace(TraceError):
    def __init__(self):
        super().__init__("trace contains no events")


class TooFewWindows(TraceError):
    def __init__(self, got, need):
        super().__init__(f"trace spans {got} analysis windows, need at least {need}")


class BadParams(TraceError):
    pass


# --- simulation -------------------------------------------------------------

class SimError(SpacError):
    pass


class BadConfig(SimError):
    pass


class IncompatibleTable(BadConfig):
    def __init__(self, key_width, limit):
        super().__init__(
            f"full_lookup table cannot index a {key_width}-bit routing key (limit {limit})")


class ConfigTraceMismatch(SimError):
    pass


class BadAnnotation(SimError):
    pass


# --- DSE --------------------------------------------------------------------

class DseError(SpacError):
    pass


class AllPruned(DseError):
    def __init__(self, ledger):
        self.ledger = ledger
        super().__init__("every template was pruned in stage 1")


class NoFeasibleDesign(DseError):
    def __init__(self, ledger):
        self.ledger = ledger
        super().__init__("no design satisfied the SLA/resource constraints")


class SpaceTooLarge(DseError):
    def __init__(self, size, cap):
        super().__init__(f"enumeration space has {size} points, cap is {cap}")
