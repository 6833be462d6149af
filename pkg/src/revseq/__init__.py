"""Reversible logic synthesis, optimization, quantum-cost evaluation and
sequential (latch / flip-flop) design."""
from revseq.circuit import (
    C,
    CATALOG,
    FREDKIN,
    MCT,
    N,
    SWAP,
    T,
    V,
    Circuit,
    Gate,
    Kind,
    Permutation,
    Vdag,
    invert_circuit,
    simulate_permutation,
    validate_circuit,
)
from revseq.unitary import ExactUnitary, GScalar, circuit_unitary, gate_unitary, unitary_equivalent

__all__ = [
    "C", "CATALOG", "FREDKIN", "MCT", "N", "SWAP", "T", "V", "Vdag",
    "Circuit", "Gate", "Kind", "Permutation",
    "invert_circuit", "simulate_permutation", "validate_circuit",
    "ExactUnitary", "GScalar", "circuit_unitary", "gate_unitary", "unitary_equivalent",
]
__version__ = "0.1.0"
