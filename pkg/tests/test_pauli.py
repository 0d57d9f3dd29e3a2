import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msd.pauli import (
    MAX_QUBITS,
    PauliError,
    PauliOperator,
    apply_pauli,
    commutes,
    format_pauli,
    generator_set,
    multiply,
    parse_pauli,
    product,
    realize,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]])
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1, -1])
DENSE = {"I": I2, "X": X, "Y": Y, "Z": Z}


def dense(letters: str, coeff: complex = 1.0) -> np.ndarray:
    out = np.eye(1)
    for c in letters:
        out = np.kron(out, DENSE[c])
    return coeff * out


pauli_strings = st.integers(1, 4).flatmap(
    lambda n: st.tuples(st.sampled_from(["", "+", "-"]), st.text("IXYZ", min_size=n, max_size=n))
).map("".join)


def ops(n):
    return st.tuples(st.lists(st.integers(0, 1), min_size=n, max_size=n),
                     st.lists(st.integers(0, 1), min_size=n, max_size=n),
                     st.integers(0, 3)).map(lambda t: PauliOperator(tuple(t[0]), tuple(t[1]), t[2]))


op_pairs = st.integers(1, 4).flatmap(lambda n: st.tuples(ops(n), ops(n)))


class TestParse:
    def test_letter_mapping(self):
        p = parse_pauli("ZIZ")
        assert (p.x, p.z, p.phase) == ((0, 0, 0), (1, 0, 1), 0)
        p = parse_pauli("XZX")
        assert (p.x, p.z, p.phase) == ((1, 0, 1), (0, 1, 0), 0)

    def test_minus_y(self):
        np.testing.assert_allclose(realize(parse_pauli("-Y")), [[0, 1j], [-1j, 0]])

    def test_y_is_standard(self):
        np.testing.assert_allclose(realize(parse_pauli("Y")), Y)

    @pytest.mark.parametrize("text, bad", [("XQZ", "Q"), ("-XYa", "a"), ("X Z", " ")])
    def test_error_names_character(self, text, bad):
        with pytest.raises(PauliError, match=repr(bad)):
            parse_pauli(text)

    @pytest.mark.parametrize("text", ["", "+", "-"])
    def test_empty(self, text):
        with pytest.raises(PauliError):
            parse_pauli(text)

    def test_size_cap(self):
        parse_pauli("X" * MAX_QUBITS)
        with pytest.raises(PauliError):
            parse_pauli("X" * (MAX_QUBITS + 1))

    @given(pauli_strings)
    def test_round_trip(self, s):
        p = parse_pauli(s)
        assert parse_pauli(format_pauli(p)) == p
        assert format_pauli(p) == s.lstrip("+")


class TestAlgebra:
    def test_x_times_z(self):
        xz = multiply(parse_pauli("X"), parse_pauli("Z"))
        assert xz.letters == "Y" and xz.coefficient == -1j

    @given(ops(3))
    def test_hermitian_square_is_identity(self, p):
        if p.is_hermitian:
            sq = p * p
            assert sq == PauliOperator.identity(3)

    @settings(max_examples=300)
    @given(op_pairs)
    def test_multiply_matches_dense(self, pair):
        a, b = pair
        np.testing.assert_allclose(realize(a * b), realize(a) @ realize(b), atol=1e-12)

    @given(ops(3))
    def test_realize_matches_letters(self, p):
        np.testing.assert_allclose(realize(p), dense(p.letters, p.coefficient), atol=1e-12)

    @given(ops(3))
    def test_realize_unitary(self, p):
        m = realize(p)
        np.testing.assert_allclose(m @ m.conj().T, np.eye(8), atol=1e-12)
        if p.is_hermitian:
            np.testing.assert_allclose(m, m.conj().T, atol=1e-12)

    def test_commutes_examples(self):
        assert not commutes(parse_pauli("X"), parse_pauli("Z"))
        assert commutes(parse_pauli("ZIZ"), parse_pauli("XZX"))
        assert commutes(parse_pauli("XYZ"), parse_pauli("XYZ"))

    def test_commutes_against_dense_1000_pairs(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            n = int(rng.integers(1, 5))
            a = PauliOperator(tuple(rng.integers(0, 2, n)), tuple(rng.integers(0, 2, n)))
            b = PauliOperator(tuple(rng.integers(0, 2, n)), tuple(rng.integers(0, 2, n)))
            ma, mb = realize(a), realize(b)
            assert commutes(a, b) == np.allclose(ma @ mb, mb @ ma)

    def test_size_mismatch(self):
        with pytest.raises(PauliError):
            multiply(parse_pauli("X"), parse_pauli("XX"))
        with pytest.raises(PauliError):
            commutes(parse_pauli("X"), parse_pauli("XX"))

    @given(ops(3), st.integers(0, 7))
    def test_apply_matches_dense(self, p, seed):
        rng = np.random.default_rng(seed)
        psi = rng.normal(size=8) + 1j * rng.normal(size=8)
        np.testing.assert_allclose(apply_pauli(p, psi), realize(p) @ psi, atol=1e-12)

    def test_product(self):
        assert product([parse_pauli("X"), parse_pauli("Z"), parse_pauli("Y")]) == PauliOperator((0,), (0,), 3)


class TestGeneratorSet:
    def test_three_qubit_code(self):
        gs = generator_set(["ZIZ", "XZX"], "XXY", "IXZ")
        proj = gs.projector()
        assert np.linalg.matrix_rank(proj, tol=1e-9) == 2
        np.testing.assert_allclose(proj @ proj, proj, atol=1e-12)

    def test_logical_basis_eigen_actions(self):
        gs = generator_set(["ZIZ", "XZX"], "XXY", "IXZ")
        k0, k1 = gs.logical_basis()
        for g in gs.generators:
            np.testing.assert_allclose(apply_pauli(g, k0), k0, atol=1e-12)
            np.testing.assert_allclose(apply_pauli(g, k1), k1, atol=1e-12)
        np.testing.assert_allclose(apply_pauli(gs.logical_z, k0), k0, atol=1e-12)
        np.testing.assert_allclose(apply_pauli(gs.logical_z, k1), -k1, atol=1e-12)
        assert abs(np.vdot(k0, k1)) < 1e-12

    @pytest.mark.parametrize("gens, lz, lx, msg", [
        (["ZIZ"], "XXY", "IXZ", "expected 2 generators"),
        (["ZII", "XII"], "IZI", "IXI", "anticommute"),
        (["ZIZ", "XZX"], "ZII", "IXZ", "anticommutes with generator"),
        (["ZIZ", "XZX"], "XXY", "XXY", "must anticommute"),
        (["ZIZ", "ZIZ"], "XXY", "IXZ", "not independent"),
    ])
    def test_rejections(self, gens, lz, lx, msg):
        with pytest.raises(PauliError, match=msg):
            generator_set(gens, lz, lx)

    def test_non_hermitian_rejected(self):
        with pytest.raises(PauliError, match="Hermitian"):
            generator_set([PauliOperator((0, 0, 0), (1, 0, 1), 1), "XZX"], "XXY", "IXZ")
