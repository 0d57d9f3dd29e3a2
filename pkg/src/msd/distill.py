"""One round of postselected magic state distillation as a map on Bloch vectors.

A code with logical basis ``|0_L>, |1_L>`` is compiled once into its transfer
tensor ``T^{ij}_a = <i_L| P_a |j_L>`` over all Pauli strings ``a``.  For an
i.i.d. input ``rho(r)^{⊗n}`` the unnormalized logical state is

    M_ij(r) = 2^{-n} Σ_a T^{ij}_a Π_t r_{a_t},      r_I = 1.

Because every copy carries the same ``r``, the sum collapses onto monomials
``x^i y^j z^k`` (at most C(n+3, 3) of them), which is what the iteration
kernels evaluate.  The full tensor is kept for per-copy evaluation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import kernels
from .cws import CwsCode, codespace_generators, logical_basis
from .pauli import GeneratorSet, apply_pauli

IMAG_TOLERANCE = 1e-10
NORM_SLACK = 1e-9

_AXES = "xyz"


class ConsistencyError(RuntimeError):
    """Numerical residue too large to be float noise; indicates a logic bug."""


@dataclass(frozen=True)
class CliffordRotation:
    """Bloch-space action of a single-qubit Clifford: a rotation of the octahedron."""

    label: str
    matrix: np.ndarray = field(repr=False, compare=False)

    def __call__(self, r) -> np.ndarray:
        return self.matrix @ np.asarray(r, dtype=float)

    @property
    def is_identity(self) -> bool:
        return self.label == "+x+y+z"


def _label(m: np.ndarray) -> str:
    out = []
    for row in m:
        k = int(np.flatnonzero(row)[0])
        out.append(("+" if row[k] > 0 else "-") + _AXES[k])
    return "".join(out)


@lru_cache(maxsize=None)
def octahedral_rotations() -> tuple[CliffordRotation, ...]:
    """The 24 proper signed permutation matrices, identity first.

    Labels list the image components, e.g. ``"-x-y+z"`` maps (x, y, z) to
    (-x, -y, z), which is the action of a Z gate.
    """
    mats = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1, -1), repeat=3):
            m = np.zeros((3, 3))
            for i in range(3):
                m[i, perm[i]] = signs[i]
            if round(np.linalg.det(m)) == 1:
                m.setflags(write=False)
                mats.append(m)
    return tuple(CliffordRotation(_label(m), m) for m in mats)


ROTATION_ALIASES = {
    "I": "+x+y+z",
    "X": "+x-y-z",
    "Y": "-x+y-z",
    "Z": "-x-y+z",
    "H": "+z-y+x",
    "S": "-y+x+z",
    "SDG": "+y-x+z",
}


def rotation(label: str) -> CliffordRotation:
    """Look up a rotation by signed-axis label or gate alias (I, X, Y, Z, H, S, Sdg)."""
    key = ROTATION_ALIASES.get(label.strip().upper(), label.strip().lower())
    for rot in octahedral_rotations():
        if rot.label == key:
            return rot
    raise ValueError(f"unknown Clifford rotation {label!r}")


IDENTITY = octahedral_rotations()[0]


@lru_cache(maxsize=None)
def twirl_projector(axis: tuple[float, float, float]) -> np.ndarray:
    """Mean of the octahedral rotations fixing ``axis``.

    For H- and T-type axes this is the orthogonal projector onto the axis;
    for an axis with trivial stabilizer it is the identity.
    """
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    stab = [rot.matrix for rot in octahedral_rotations() if np.allclose(rot.matrix @ a, a, atol=1e-9)]
    return np.mean(stab, axis=0)


class Evaluation(NamedTuple):
    bloch: np.ndarray
    p_success: float
    dead: bool


@dataclass(frozen=True, eq=False)
class DistillationMap:
    n: int
    tensor: np.ndarray = field(repr=False)  # (4^n, 3) complex: T00, T01, T11; letters I,X,Y,Z per qubit
    exps: np.ndarray = field(repr=False)  # (K, 3) powers of x, y, z
    coef: np.ndarray = field(repr=False)  # (K, 4) numerators of p_s, p_s*x', p_s*y', p_s*z'
    correction: CliffordRotation | None = None
    ket0: np.ndarray | None = field(default=None, repr=False)
    ket1: np.ndarray | None = field(default=None, repr=False)
    twirl_axis: tuple[float, float, float] | None = None

    @property
    def rotation_matrix(self) -> np.ndarray:
        """Linear post-map on the output Bloch vector: twirl after correction."""
        mat = (self.correction or IDENTITY).matrix
        if self.twirl_axis is not None:
            mat = twirl_projector(self.twirl_axis) @ mat
        return mat

    def with_correction(self, correction: CliffordRotation | str | None) -> DistillationMap:
        if isinstance(correction, str):
            correction = rotation(correction)
        if correction is not None and correction.is_identity:
            correction = None
        return DistillationMap(self.n, self.tensor, self.exps, self.coef, correction, self.ket0, self.ket1,
                               self.twirl_axis)

    def with_twirl(self, axis) -> DistillationMap:
        """Average the output over the octahedral rotations that fix ``axis``."""
        axis = None if axis is None else tuple(float(v) for v in axis)
        return DistillationMap(self.n, self.tensor, self.exps, self.coef, self.correction, self.ket0, self.ket1,
                               axis)

    def apply(self, r) -> Evaluation:
        out = np.empty(3)
        ps = kernels.map_point(self.exps, self.coef, self.rotation_matrix, self.n, np.asarray(r, dtype=float), out)
        dead = ps < kernels.DEAD_PROBABILITY
        return Evaluation(out, max(float(ps), 0.0), bool(dead))


def code_basis(code) -> tuple[np.ndarray, np.ndarray]:
    """Logical kets of a CWS code, generator set, or registry entry."""
    body = getattr(code, "body", code)
    if isinstance(body, CwsCode):
        b = logical_basis(body)
        return b.ket0, b.ket1
    if isinstance(body, GeneratorSet):
        body.validate()
        return body.logical_basis()
    raise TypeError(f"cannot build a logical basis from {type(body).__name__}")


def code_generators(code) -> GeneratorSet:
    body = getattr(code, "body", code)
    if isinstance(body, CwsCode):
        return codespace_generators(body)
    body.validate()
    return body


def _code_correction(code) -> CliffordRotation | None:
    label = getattr(code, "correction", None)
    if label is None:
        body = getattr(code, "body", None)
        label = getattr(body, "correction", None)
    return rotation(label) if label else None


def _walsh_hadamard(a: np.ndarray, n: int) -> np.ndarray:
    """Transform along the last axis: out[..., z] = Σ_m a[..., m] (-1)^{popcount(z & m)}."""
    lead = a.shape[:-1]
    v = a.reshape(lead + (2,) * n)
    for ax in range(len(lead), len(lead) + n):
        lo = np.take(v, 0, axis=ax)
        hi = np.take(v, 1, axis=ax)
        v = np.stack((lo + hi, lo - hi), axis=ax)
    return v.reshape(a.shape)


@lru_cache(maxsize=None)
def _letter_layout(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Map (x-mask, z-mask) pairs to letter-major flat indices and letter counts.

    Returns ``order`` with ``order[x * 2^n + z]`` the flat index of the Pauli
    string in {I,X,Y,Z}^n ordering, and ``counts[a] = (#X, #Y, #Z)``.
    """
    d = 1 << n
    shifts = n - 1 - np.arange(n)
    xb = (np.arange(d)[:, None] >> shifts) & 1  # (d, n)
    xbits = np.repeat(xb, d, axis=0)
    zbits = np.tile(xb, (d, 1))
    letters = np.array([0, 1, 3, 2])[xbits + 2 * zbits]  # I X Z Y -> 0 1 3 2
    order = letters @ (4 ** shifts)
    counts = np.zeros((4**n, 3), dtype=np.int64)
    for k, letter in enumerate((1, 2, 3)):
        counts[order, k] = (letters == letter).sum(axis=1)
    return order, counts


def transfer_tensor(ket0: np.ndarray, ket1: np.ndarray) -> np.ndarray:
    """``T[a] = (<0|P_a|0>, <0|P_a|1>, <1|P_a|1>)`` for every Pauli string a."""
    d = ket0.shape[0]
    n = d.bit_length() - 1
    idx = np.arange(d)
    flip = idx[:, None] ^ idx[None, :]  # [x, m] -> m ^ x
    xz = np.array([bin(v).count("1") for v in range(d)])
    letter_phase = 1j ** (xz[(idx[:, None] & idx[None, :])] % 4)  # i^{popcount(x & z)}
    order, _ = _letter_layout(n)
    kets = (ket0, ket1)
    tensor = np.empty((4**n, 3), dtype=complex)
    for col, (i, j) in enumerate(((0, 0), (0, 1), (1, 1))):
        u = np.conj(kets[i][flip]) * kets[j][None, :]
        t = _walsh_hadamard(u, n) * letter_phase
        tensor[order, col] = t.reshape(-1)
    return tensor


def _compress(tensor: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    _, counts = _letter_layout(n)
    keys = (counts[:, 0] * (n + 1) + counts[:, 1]) * (n + 1) + counts[:, 2]
    uniq, inverse = np.unique(keys, return_inverse=True)
    summed = np.zeros((uniq.size, 3), dtype=complex)
    np.add.at(summed, inverse, tensor)
    summed /= 2**n
    c00, c01, c11 = summed.T
    resid = max(np.abs(c00.imag).max(), np.abs(c11.imag).max())
    if resid > IMAG_TOLERANCE:
        raise ConsistencyError(f"diagonal logical coefficients have imaginary residue {resid:.3g}")
    coef = np.stack((c00.real + c11.real, 2 * c01.real, -2 * c01.imag, c00.real - c11.real), axis=1)
    exps = np.stack((uniq // (n + 1) ** 2, (uniq // (n + 1)) % (n + 1), uniq % (n + 1)), axis=1)
    return np.ascontiguousarray(exps, dtype=np.int64), np.ascontiguousarray(coef)


def compile_map(code, correction: CliffordRotation | str | None = None) -> DistillationMap:
    """Compile a code into its one-round distillation map.

    ``code`` is a :class:`CwsCode`, a :class:`GeneratorSet`, or anything with a
    ``body`` attribute holding one of those.  An explicit ``correction``
    overrides the one attached to the code.
    """
    if isinstance(code, GeneratorSet) or isinstance(getattr(code, "body", None), GeneratorSet):
        code_generators(code)  # validates
    ket0, ket1 = code_basis(code)
    n = ket0.shape[0].bit_length() - 1
    tensor = transfer_tensor(ket0, ket1)
    exps, coef = _compress(tensor, n)
    for arr in (tensor, exps, coef, ket0, ket1):
        arr.setflags(write=False)
    m = DistillationMap(n, tensor, exps, coef, None, ket0, ket1, getattr(code, "twirl", None))
    return m.with_correction(correction if correction is not None else _code_correction(code))


def _check_bloch(r) -> np.ndarray:
    r = np.asarray(r, dtype=float).reshape(3)
    if np.linalg.norm(r) > 1 + NORM_SLACK:
        raise ValueError(f"Bloch vector {r} has norm > 1")
    return r


def evaluate(m: DistillationMap, r) -> Evaluation:
    """Output Bloch vector and success probability for input ``rho(r)^{⊗n}``.

    A zero-probability round returns ``dead=True`` and the origin.
    """
    return m.apply(_check_bloch(r))


def _bloch_from_logical(mat: np.ndarray) -> tuple[np.ndarray, float]:
    m00, m01, m10, m11 = mat[0, 0], mat[0, 1], mat[1, 0], mat[1, 1]
    s = m00 + m11
    comps = np.array([m01 + m10, 1j * (m01 - m10), m00 - m11])
    if abs(s.imag) > IMAG_TOLERANCE or np.abs(comps.imag).max() > IMAG_TOLERANCE:
        raise ConsistencyError("logical state is not Hermitian")
    s = s.real
    if s < kernels.DEAD_PROBABILITY:
        return np.zeros(3), s
    return comps.real / s, s


def logical_matrix(m: DistillationMap, rs) -> np.ndarray:
    """Unnormalized 2x2 logical state via full tensor contraction.

    ``rs`` is either one Bloch vector (used for every copy) or an (n, 3)
    array giving a different input per copy.
    """
    rs = np.asarray(rs, dtype=float)
    if rs.ndim == 1:
        rs = np.tile(rs, (m.n, 1))
    t = m.tensor.reshape((4,) * m.n + (3,))
    for row in rs:
        t = np.tensordot(np.array([1.0, *row]), t, axes=(0, 0))
    t = t / 2**m.n
    return np.array([[t[0], t[1]], [np.conj(t[1]), t[2]]])


def evaluate_tensor(m: DistillationMap, rs) -> Evaluation:
    """Same as :func:`evaluate` but through the uncompressed tensor."""
    out, s = _bloch_from_logical(logical_matrix(m, rs))
    return Evaluation(m.rotation_matrix @ out, max(float(s), 0.0), s < kernels.DEAD_PROBABILITY)


_SINGLE = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def bloch_density(r) -> np.ndarray:
    x, y, z = r
    return (_SINGLE[0] + x * _SINGLE[1] + y * _SINGLE[2] + z * _SINGLE[3]) / 2


def product_state(rs) -> np.ndarray:
    rho = np.eye(1, dtype=complex)
    for r in rs:
        rho = np.kron(rho, bloch_density(r))
    return rho


def dense_logical_matrix(ket0: np.ndarray, ket1: np.ndarray, rs) -> np.ndarray:
    """Reference path: explicit ``rho^{⊗n}`` sandwiched between the logical kets."""
    n = ket0.shape[0].bit_length() - 1
    rs = np.asarray(rs, dtype=float)
    if rs.ndim == 1:
        rs = np.tile(rs, (n, 1))
    rho = product_state(rs)
    kets = np.stack((ket0, ket1), axis=1)
    return kets.conj().T @ rho @ kets


def dense_evaluate(code, r, correction: CliffordRotation | None = None) -> Evaluation:
    ket0, ket1 = code_basis(code)
    out, s = _bloch_from_logical(dense_logical_matrix(ket0, ket1, r))
    rot = (correction or _code_correction(code) or IDENTITY).matrix
    axis = getattr(code, "twirl", None)
    if axis is not None:
        rot = twirl_projector(tuple(axis)) @ rot
    return Evaluation(rot @ out, max(float(s), 0.0), s < kernels.DEAD_PROBABILITY)


def sequential_measurement_check(code, r) -> float:
    """Success probability from measuring the generators one at a time.

    Projects ``rho(r)^{⊗n}`` onto the +1 eigenspace of each generator in turn
    and multiplies the conditional probabilities.
    """
    gens = code_generators(code)
    n = gens.n
    rho = product_state(np.tile(np.asarray(r, dtype=float), (n, 1)))
    total = 1.0
    for g in gens.generators:
        # G rho and rho G without building G: apply to columns, then to rows
        g_rho = np.stack([apply_pauli(g, col) for col in rho.T], axis=1)
        proj_rho = (rho + g_rho) / 2
        p = float(np.trace(proj_rho).real)
        if p < kernels.DEAD_PROBABILITY:
            return 0.0
        proj_rho_proj = (proj_rho + np.stack([apply_pauli(g, row) for row in proj_rho.conj()], axis=1).conj().T) / 2
        total *= p
        rho = proj_rho_proj / p
    return total
