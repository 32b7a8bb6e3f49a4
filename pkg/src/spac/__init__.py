"""Protocol/switch co-design toolkit: trace-driven switch simulation at two
fidelities plus progressive constraint-satisfaction design-space exploration
over FPGA switch micro-architectures."""

__version__ = "0.1.0"
