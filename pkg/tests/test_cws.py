import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msd.cws import (
    CodeConstructionError,
    CwsCode,
    Graph,
    canonical_graph,
    codespace_generators,
    emit_encoding_circuit,
    enumerate_graphs,
    graph_stabilizer,
    graph_state,
    logical_basis,
)
from msd.pauli import apply_pauli
from msd.verify import circuit_state


def graphs(min_n=2, max_n=6):
    return st.integers(min_n, max_n).flatmap(
        lambda n: st.lists(st.integers(0, 1), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2).map(
            lambda bits: Graph.from_bits(n, "".join(map(str, bits)))))


def codes(max_n=5):
    return graphs(2, max_n).flatmap(
        lambda g: st.lists(st.integers(0, 1), min_size=g.n, max_size=g.n)
        .filter(any).map(lambda w: CwsCode(g, tuple(w))))


class TestGraph:
    def test_validation(self):
        with pytest.raises(ValueError, match="self-loop"):
            Graph.from_rows("10;00")
        with pytest.raises(ValueError, match="symmetric"):
            Graph.from_rows("01;00")
        with pytest.raises(ValueError, match="bit string"):
            Graph.from_rows("0a;a0")

    def test_formats_agree(self):
        g = Graph.from_rows("011;101;110")
        assert g == Graph.from_edges(3, [(0, 1), (0, 2), (1, 2)]) == Graph.from_bits(3, "111")
        assert g.rows() == "011;101;110" and g.bits() == "111"

    @given(graphs())
    def test_bits_round_trip(self, g):
        assert Graph.from_bits(g.n, g.bits()) == g
        assert Graph.from_rows(g.rows()) == g


class TestGraphState:
    def test_empty_graph(self):
        np.testing.assert_allclose(graph_state(Graph.from_bits(2, "0")), np.ones(4) / 2)

    def test_single_edge(self):
        np.testing.assert_allclose(graph_state(Graph.from_bits(2, "1")), np.array([1, 1, 1, -1]) / 2)

    @given(graphs(2, 5))
    def test_matches_circuit(self, g):
        c = CwsCode(g, (1,) + (0,) * (g.n - 1))
        np.testing.assert_allclose(circuit_state(c), graph_state(g), atol=1e-12)

    @given(graphs(2, 5), st.integers(0, 4))
    def test_stabilized_by_vertex_operators(self, g, i):
        i %= g.n
        psi = graph_state(g)
        np.testing.assert_allclose(apply_pauli(graph_stabilizer(g, i), psi), psi, atol=1e-12)


class TestCode:
    def test_zero_codeword_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            CwsCode(Graph.from_bits(2, "1"), (0, 0))

    def test_codeword_length(self):
        with pytest.raises(ValueError):
            CwsCode(Graph.from_bits(2, "1"), (1, 0, 1))

    @given(codes())
    def test_basis_orthonormal(self, c):
        b = logical_basis(c)
        assert abs(np.vdot(b.ket0, b.ket0) - 1) < 1e-12
        assert abs(np.vdot(b.ket1, b.ket1) - 1) < 1e-12
        assert abs(np.vdot(b.ket0, b.ket1)) < 1e-12

    @settings(max_examples=60)
    @given(codes())
    def test_generators_fix_basis(self, c):
        gs = codespace_generators(c)
        b = logical_basis(c)
        for g in gs.generators:
            np.testing.assert_allclose(apply_pauli(g, b.ket0), b.ket0, atol=1e-12)
            np.testing.assert_allclose(apply_pauli(g, b.ket1), b.ket1, atol=1e-12)
        np.testing.assert_allclose(apply_pauli(gs.logical_x, b.ket0), b.ket1, atol=1e-12)
        proj = gs.projector()
        assert np.linalg.matrix_rank(proj, tol=1e-9) == 2
        np.testing.assert_allclose(proj @ b.ket0, b.ket0, atol=1e-12)

    def test_construction_error_is_runtime(self):
        assert issubclass(CodeConstructionError, RuntimeError)


class TestEnumeration:
    @pytest.mark.parametrize("n, count", [(2, 2), (3, 4), (4, 11), (5, 34), (6, 156)])
    def test_non_isomorphic_counts(self, n, count):
        assert sum(1 for _ in enumerate_graphs(n, "non_isomorphic")) == count

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_all_graphs(self, n):
        assert sum(1 for _ in enumerate_graphs(n)) == 2 ** (n * (n - 1) // 2)

    def test_bad_mode_and_size(self):
        with pytest.raises(ValueError):
            list(enumerate_graphs(3, "some"))
        with pytest.raises(ValueError):
            list(enumerate_graphs(7))

    @settings(max_examples=200)
    @given(graphs(), st.randoms(use_true_random=False))
    def test_canonical_permutation_invariant(self, g, rnd):
        perm = list(range(g.n))
        rnd.shuffle(perm)
        assert canonical_graph(g.permuted(perm)) == canonical_graph(g)

    def test_canonical_is_lex_smallest(self):
        for g in enumerate_graphs(4):
            images = {g.permuted(p).bits() for p in itertools.permutations(range(4))}
            assert canonical_graph(g).bits() == min(images)


class TestCircuit:
    def test_single_edge(self):
        text = emit_encoding_circuit(CwsCode(Graph.from_bits(2, "1"), (0, 1)))
        lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
        assert sum(ln.startswith("H ") for ln in lines) == 2
        assert sum(ln.startswith("CZ ") for ln in lines) == 1

    def test_triangle(self):
        text = emit_encoding_circuit(CwsCode(Graph.from_rows("011;101;110"), (1, 1, 1)))
        assert text.count("H q") == 3 and text.count("CZ q") == 3
        assert text.rstrip().endswith("# logical_x: ZZZ")
