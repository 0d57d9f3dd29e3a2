"""Graphs, graph states and codeword-stabilized (CWS) codes.

A CWS code here is a graph state ``|Γ>`` together with one nonzero codeword
``w``; the logical basis is ``|0_L> = |Γ>`` and ``|1_L> = Z^w |Γ>``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .pauli import MAX_QUBITS, GeneratorSet, PauliOperator, apply_pauli, multiply

MAX_SEARCH_VERTICES = 6


class CodeConstructionError(RuntimeError):
    """A derived code object failed an internal consistency check."""


@dataclass(frozen=True)
class Graph:
    n: int
    adj: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"vertex count must be in 1..{MAX_QUBITS}, got {self.n}")
        adj = tuple(tuple(int(v) for v in row) for row in self.adj)
        if len(adj) != self.n or any(len(row) != self.n for row in adj):
            raise ValueError("adjacency matrix must be n x n")
        for i in range(self.n):
            if adj[i][i]:
                raise ValueError(f"self-loop at vertex {i}")
            for j in range(self.n):
                if adj[i][j] not in (0, 1):
                    raise ValueError("adjacency entries must be 0/1")
                if adj[i][j] != adj[j][i]:
                    raise ValueError(f"adjacency not symmetric at ({i}, {j})")
        object.__setattr__(self, "adj", adj)

    @classmethod
    def from_matrix(cls, m) -> Graph:
        m = np.asarray(m, dtype=int)
        return cls(m.shape[0], tuple(map(tuple, m)))

    @classmethod
    def from_edges(cls, n: int, edges) -> Graph:
        m = np.zeros((n, n), dtype=int)
        for i, j in edges:
            m[i, j] = m[j, i] = 1
        return cls.from_matrix(m)

    @classmethod
    def from_bits(cls, n: int, bits: str) -> Graph:
        """From the upper-triangle bitstring (row-major over i < j)."""
        pairs = _pairs(n)
        if len(bits) != len(pairs):
            raise ValueError(f"expected {len(pairs)} edge bits for n={n}, got {len(bits)}")
        return cls.from_edges(n, [p for p, b in zip(pairs, bits) if b == "1"])

    @classmethod
    def from_rows(cls, text: str) -> Graph:
        """From semicolon-separated bit rows, e.g. ``"011;101;110"``."""
        rows = [r.strip() for r in text.strip().split(";") if r.strip()]
        for r in rows:
            if set(r) - {"0", "1"}:
                raise ValueError(f"graph row {r!r} is not a bit string")
        return cls.from_matrix([[int(c) for c in r] for r in rows])

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.adj, dtype=np.int64)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, j in _pairs(self.n) if self.adj[i][j]]

    def bits(self) -> str:
        return "".join(str(self.adj[i][j]) for i, j in _pairs(self.n))

    def rows(self) -> str:
        return ";".join("".join(map(str, r)) for r in self.adj)

    def permuted(self, perm) -> Graph:
        """Relabel vertex ``i`` as ``perm[i]``."""
        return Graph.from_edges(self.n, [(perm[i], perm[j]) for i, j in self.edges()])


@lru_cache(maxsize=None)
def _pairs(n: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


@lru_cache(maxsize=None)
def _perm_position_maps(n: int) -> np.ndarray:
    """For every permutation p, the source pair index of each (i, j) slot of p·g."""
    pairs = _pairs(n)
    index = {p: k for k, p in enumerate(pairs)}
    return np.array(
        [[index[tuple(sorted((p[i], p[j])))] for i, j in pairs] for p in itertools.permutations(range(n))],
        dtype=np.int64,
    ).reshape(-1, len(pairs))


def _canonical_codes(n: int, codes: np.ndarray) -> np.ndarray:
    """Vectorized canonical integer (minimal bitstring, first pair = MSB) of graph codes."""
    m = len(_pairs(n))
    if m == 0:
        return codes.copy()
    bits = (codes[:, None] >> (m - 1 - np.arange(m))) & 1
    weights = 1 << (m - 1 - np.arange(m))
    best = None
    for pmap in _perm_position_maps(n):
        val = bits[:, pmap] @ weights
        best = val if best is None else np.minimum(best, val)
    return best


def _graph_code(g: Graph) -> int:
    return int(g.bits(), 2) if g.bits() else 0


def _graph_from_code(n: int, code: int) -> Graph:
    m = len(_pairs(n))
    return Graph.from_bits(n, format(code, f"0{m}b") if m else "")


def canonical_graph(g: Graph) -> Graph:
    """Isomorphism-class representative with the lexicographically smallest edge bitstring."""
    code = _canonical_codes(g.n, np.array([_graph_code(g)], dtype=np.int64))[0]
    return _graph_from_code(g.n, int(code))


@lru_cache(maxsize=None)
def _non_isomorphic_codes(n: int) -> tuple[int, ...]:
    m = len(_pairs(n))
    canon = _canonical_codes(n, np.arange(1 << m, dtype=np.int64))
    return tuple(int(c) for c in np.unique(canon))


def enumerate_graphs(n: int, mode: str = "all") -> Iterator[Graph]:
    """All labelled graphs on n vertices, or one canonical graph per isomorphism class."""
    if not 2 <= n <= MAX_SEARCH_VERTICES:
        raise ValueError(f"graph enumeration supports 2 <= n <= {MAX_SEARCH_VERTICES}, got {n}")
    if mode == "all":
        codes = range(1 << len(_pairs(n)))
    elif mode == "non_isomorphic":
        codes = _non_isomorphic_codes(n)
    else:
        raise ValueError(f"unknown graph mode {mode!r}")
    for c in codes:
        yield _graph_from_code(n, c)


def _basis_bits(n: int) -> np.ndarray:
    """Rows are the bit vectors of basis states 0..2^n-1, qubit 0 first."""
    return (np.arange(1 << n)[:, None] >> (n - 1 - np.arange(n))) & 1


def graph_state(g: Graph) -> np.ndarray:
    """Normalized ``|Γ> = 2^{-n/2} Σ_x i^{x^T Γ x} |x>``."""
    xs = _basis_bits(g.n)
    quad = np.einsum("ki,ij,kj->k", xs, g.matrix, xs)
    return (1j ** (quad % 4)) / 2 ** (g.n / 2)


@dataclass(frozen=True)
class LogicalBasis:
    ket0: np.ndarray
    ket1: np.ndarray


@dataclass(frozen=True)
class CwsCode:
    graph: Graph
    codeword: tuple[int, ...]
    correction: str | None = None

    def __post_init__(self):
        w = tuple(int(b) for b in self.codeword)
        if len(w) != self.graph.n or any(b not in (0, 1) for b in w):
            raise ValueError(f"codeword must be a length-{self.graph.n} bit vector")
        if not any(w):
            raise ValueError("codeword w = 0 gives a degenerate code (|1_L> = |0_L>)")
        object.__setattr__(self, "codeword", w)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def codeword_bits(self) -> str:
        return "".join(map(str, self.codeword))


def logical_basis(c: CwsCode) -> LogicalBasis:
    ket0 = graph_state(c.graph)
    signs = 1 - 2 * ((_basis_bits(c.n) @ np.array(c.codeword)) & 1)
    return LogicalBasis(ket0, signs * ket0)


def graph_stabilizer(g: Graph, i: int) -> PauliOperator:
    """``K_i = X_i Z^{Γ_i}``."""
    x = tuple(int(j == i) for j in range(g.n))
    return PauliOperator(x, g.adj[i])


def z_string(w) -> PauliOperator:
    return PauliOperator((0,) * len(w), tuple(w))


def codespace_generators(c: CwsCode) -> GeneratorSet:
    """Stabilizers of span{|0_L>, |1_L>} plus the fixed logical frame.

    logical_x is ``Z^w`` and logical_z is ``K_j`` for the smallest j with
    ``w_j = 1``; the generators are the ``n - 1`` products of graph
    stabilizers that commute with ``Z^w``.
    """
    g, w = c.graph, c.codeword
    n = c.n
    j0 = w.index(1)
    ks = [graph_stabilizer(g, i) for i in range(n)]
    gens = []
    for i in range(n):
        if i == j0:
            continue
        gens.append(ks[i] if w[i] == 0 else multiply(ks[i], ks[j0]))
    gs = GeneratorSet(tuple(gens), ks[j0], z_string(w))
    gs.validate()

    basis = logical_basis(c)
    k0, k1 = basis.ket0, basis.ket1
    checks = [np.allclose(apply_pauli(gen, k), k, atol=1e-12) for gen in gens for k in (k0, k1)]
    checks += [
        np.allclose(apply_pauli(gs.logical_z, k0), k0, atol=1e-12),
        np.allclose(apply_pauli(gs.logical_z, k1), -k1, atol=1e-12),
        np.allclose(apply_pauli(gs.logical_x, k0), k1, atol=1e-12),
    ]
    if not all(checks):
        raise CodeConstructionError(f"generator set inconsistent with logical basis for {c}")
    return gs


def emit_encoding_circuit(c: CwsCode) -> str:
    """Graph-state preparation circuit: H on every qubit then CZ along every edge."""
    lines = [f"H q{i}" for i in range(c.n)]
    lines += [f"CZ q{i} q{j}" for i, j in c.graph.edges()]
    lines.append(f"# logical_x: {z_string(c.codeword).letters}")
    return "\n".join(lines) + "\n"
