"""Simulation of a quantum copy-protection scheme.

A medium stores classical bits in rotated qubits; the rotation angles ship as
key strings of phase states that let the holder apply, but never learn, each
rotation. A SWAP-test hash authenticates the key, and measure-and-reprepare
pirates fail both checks with exponentially small margin.
"""

__version__ = "0.1.0"
