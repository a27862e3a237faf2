"""Numerical toolkit for multi-mode tunable couplers between transmon qubits."""

__version__ = "0.1.0"
