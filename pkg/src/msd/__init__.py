"""Magic state distillation with small stabilizer and CWS codes."""
__version__ = "0.1.0"

from .analysis import CodeReport, analyze_fixed_point, canonicalize_bloch, iterate, p_oct_for, threshold
from .cws import CwsCode, Graph, enumerate_graphs, graph_state, logical_basis
from .distill import DistillationMap, compile_map, octahedral_rotations, rotation
from .pauli import GeneratorSet, PauliOperator, commutes, generator_set, multiply, parse_pauli, realize
from .registry import CodeSpec, builtin

__all__ = [
    "CodeReport", "CodeSpec", "CwsCode", "DistillationMap", "GeneratorSet", "Graph", "PauliOperator",
    "analyze_fixed_point", "builtin", "canonicalize_bloch", "commutes", "compile_map", "enumerate_graphs",
    "generator_set", "graph_state", "iterate", "logical_basis", "multiply", "octahedral_rotations", "p_oct_for",
    "parse_pauli", "realize", "rotation", "threshold",
]
