import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msd.cws import CwsCode, Graph
from msd.distill import (
    IDENTITY,
    ConsistencyError,
    _compress,
    compile_map,
    dense_evaluate,
    dense_logical_matrix,
    evaluate,
    evaluate_tensor,
    octahedral_rotations,
    rotation,
    sequential_measurement_check,
    twirl_projector,
)
from msd.registry import builtin
from msd.verify import sample_codes, small_codes

from .test_cws import codes


def ball_points(draw_size=3):
    return st.lists(st.floats(-1, 1), min_size=draw_size, max_size=draw_size).map(np.array).filter(
        lambda v: np.linalg.norm(v) <= 1)


class TestRotations:
    def test_group(self):
        rots = octahedral_rotations()
        assert len(rots) == 24 and rots[0] is IDENTITY and IDENTITY.is_identity
        mats = [r.matrix for r in rots]
        for m in mats:
            assert round(np.linalg.det(m)) == 1
            np.testing.assert_allclose(m @ m.T, np.eye(3))
        keys = {m.tobytes() for m in mats}
        for a in mats:
            for b in mats:
                assert (a @ b).tobytes() in keys

    @pytest.mark.parametrize("alias, image", [
        ("X", (1, -1, -1)), ("Z", (-1, -1, 1)), ("Y", (-1, 1, -1)), ("I", (1, 1, 1)),
    ])
    def test_pauli_aliases(self, alias, image):
        np.testing.assert_allclose(rotation(alias)((1, 1, 1)), image)

    def test_hadamard_and_phase(self):
        np.testing.assert_allclose(rotation("H")((1, 0, 0)), (0, 0, 1))
        np.testing.assert_allclose(rotation("S")((1, 0, 0)), (0, 1, 0))
        np.testing.assert_allclose(rotation("sdg")((1, 0, 0)), (0, -1, 0))

    def test_unknown(self):
        with pytest.raises(ValueError):
            rotation("+x+x+z")

    def test_twirl_projectors(self):
        h = np.array([1, 0, 1]) / math.sqrt(2)
        np.testing.assert_allclose(twirl_projector(tuple(h)), np.outer(h, h), atol=1e-12)
        t = np.ones(3) / math.sqrt(3)
        np.testing.assert_allclose(twirl_projector(tuple(t)), np.outer(t, t), atol=1e-12)
        np.testing.assert_allclose(twirl_projector((0.6, 0.0, 0.8)), np.eye(3), atol=1e-12)


class TestEvaluationRoutes:
    @pytest.mark.parametrize("code", small_codes(), ids=lambda c: f"{c.graph.bits()}-{c.codeword_bits}")
    def test_exhaustive_small(self, code):
        m = compile_map(code)
        rng = np.random.default_rng(1)
        for r in rng.uniform(-0.57, 0.57, size=(4, 3)):
            dense = dense_evaluate(code, r)
            for route in (evaluate(m, r), evaluate_tensor(m, r)):
                np.testing.assert_allclose(route.bloch, dense.bloch, atol=1e-10)
                assert abs(route.p_success - dense.p_success) <= 1e-10

    def test_sampled_larger(self):
        rng = np.random.default_rng(2)
        for code in sample_codes(rng, 40):
            m = compile_map(code)
            r = rng.uniform(-0.57, 0.57, size=3)
            dense = dense_evaluate(code, r)
            np.testing.assert_allclose(m.apply(r).bloch, dense.bloch, atol=1e-10)
            assert abs(sequential_measurement_check(code, r) - dense.p_success) <= 1e-10

    @settings(max_examples=40, deadline=None)
    @given(codes(4), st.integers(0, 10_000))
    def test_per_copy_tensor_matches_dense(self, code, seed):
        rng = np.random.default_rng(seed)
        rs = rng.uniform(-0.57, 0.57, size=(code.n, 3))
        m = compile_map(code)
        got = evaluate_tensor(m, rs)
        want = dense_logical_matrix(m.ket0, m.ket1, rs)
        s = float(np.trace(want).real)
        assert abs(got.p_success - s) <= 1e-10
        if s > 1e-9:
            bloch = np.array([2 * want[0, 1].real, -2 * want[0, 1].imag, (want[0, 0] - want[1, 1]).real]) / s
            np.testing.assert_allclose(got.bloch, bloch, atol=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(codes(5), st.integers(0, 10_000))
    def test_sequential_measurement(self, code, seed):
        r = np.random.default_rng(seed).uniform(-0.57, 0.57, size=3)
        assert abs(sequential_measurement_check(code, r) - dense_evaluate(code, r).p_success) <= 1e-10

    def test_builtins_against_dense(self):
        rng = np.random.default_rng(3)
        for name in ("eq8_3qubit", "perfect_5qubit_cws", "steane_7qubit"):
            spec = builtin(name)
            m = compile_map(spec)
            for r in rng.uniform(-0.57, 0.57, size=(3, 3)):
                np.testing.assert_allclose(m.apply(r).bloch, dense_evaluate(spec, r).bloch, atol=1e-10)


class TestMapProperties:
    def test_maximally_mixed_input(self):
        m = compile_map(builtin("eq8_3qubit"))
        ev = m.apply(np.zeros(3))
        np.testing.assert_allclose(ev.bloch, 0, atol=1e-15)
        assert ev.p_success == pytest.approx(0.25)

    @settings(max_examples=30, deadline=None)
    @given(codes(5))
    def test_mixed_input_success_probability(self, code):
        # only the 2-dim codespace survives: p_s = 2 / 2^n
        assert compile_map(code).apply(np.zeros(3)).p_success == pytest.approx(2 / 2**code.n)

    @settings(max_examples=30, deadline=None)
    @given(codes(5), st.integers(0, 1000))
    def test_octahedron_closure(self, code, seed):
        m = compile_map(code)
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-1, 1, size=(200, 3))
        pts = pts[np.abs(pts).sum(axis=1) < 1]
        for r in pts:
            ev = m.apply(r)
            if not ev.dead:
                assert np.abs(ev.bloch).sum() <= 1 + 1e-9

    @settings(max_examples=30, deadline=None)
    @given(codes(5))
    def test_pure_inputs_stay_pure(self, code):
        m = compile_map(code)
        rng = np.random.default_rng(0)
        for r in rng.normal(size=(5, 3)):
            ev = m.apply(r / np.linalg.norm(r))
            if ev.p_success > 1e-6:
                assert np.linalg.norm(ev.bloch) == pytest.approx(1.0, abs=1e-9)

    def test_correction_composes(self):
        code = CwsCode(Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]), (1,) * 5)
        m = compile_map(code)
        mx = m.with_correction("X")
        r = np.array([0.3, -0.2, 0.5])
        np.testing.assert_allclose(mx.apply(r).bloch, rotation("X")(m.apply(r).bloch))
        assert compile_map(CwsCode(code.graph, code.codeword, "+x-y-z")).correction.label == "+x-y-z"

    def test_twirl_composes_after_correction(self):
        spec = builtin("steane_7qubit")
        m = compile_map(spec)
        bare = m.with_twirl(None)
        r = np.array([0.3, -0.2, 0.5])
        np.testing.assert_allclose(m.apply(r).bloch, twirl_projector(spec.twirl) @ bare.apply(r).bloch)

    def test_norm_check(self):
        m = compile_map(builtin("eq8_3qubit"))
        with pytest.raises(ValueError):
            evaluate(m, (1.0, 1.0, 0.0))

    def test_imaginary_residue_is_flagged(self):
        tensor = np.zeros((4, 3), dtype=complex)
        tensor[0, 0] = 1.0 + 1e-3j
        with pytest.raises(ConsistencyError):
            _compress(tensor, 1)
