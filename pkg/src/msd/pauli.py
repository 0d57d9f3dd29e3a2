"""n-qubit Pauli operators in binary symplectic form.

An operator is stored as ``phase * P_0 ⊗ ... ⊗ P_{n-1}`` where each factor is
one of the Hermitian letters I, X, Y, Z, encoded as ``(x, z)`` bits::

    I = (0, 0)   X = (1, 0)   Y = (1, 1)   Z = (0, 1)

so that Y = iXZ.  ``phase`` is kept as a power of i (0..3).  Qubit 0 is the
leftmost letter and the most significant bit of a computational basis index.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce

import numpy as np

MAX_QUBITS = 8

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}

_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_PHASES = (1, 1j, -1, -1j)


class PauliError(ValueError):
    """Malformed Pauli string or incompatible operands."""


@dataclass(frozen=True)
class PauliOperator:
    x: tuple[int, ...]
    z: tuple[int, ...]
    phase: int = 0  # exponent of i

    def __post_init__(self):
        if len(self.x) != len(self.z):
            raise PauliError("x and z parts must have the same length")
        if not 1 <= len(self.x) <= MAX_QUBITS:
            raise PauliError(f"qubit count must be in 1..{MAX_QUBITS}, got {len(self.x)}")
        object.__setattr__(self, "x", tuple(int(b) & 1 for b in self.x))
        object.__setattr__(self, "z", tuple(int(b) & 1 for b in self.z))
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def letters(self) -> str:
        return "".join(_BITS_LETTER[b] for b in zip(self.x, self.z))

    @property
    def coefficient(self) -> complex:
        return _PHASES[self.phase]

    @property
    def is_hermitian(self) -> bool:
        return self.phase in (0, 2)

    @classmethod
    def identity(cls, n: int) -> PauliOperator:
        return cls((0,) * n, (0,) * n)

    @classmethod
    def from_bits(cls, x, z, phase: int = 0) -> PauliOperator:
        return cls(tuple(x), tuple(z), phase)

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        return multiply(self, other)

    def __neg__(self) -> PauliOperator:
        return PauliOperator(self.x, self.z, self.phase + 2)

    def __str__(self) -> str:
        return format_pauli(self)

    def symplectic(self) -> np.ndarray:
        """The length-2n vector (x | z) as uint8."""
        return np.array(self.x + self.z, dtype=np.uint8)


_PAULI_RE = re.compile(r"^[+-]?[IXYZ]+$")


def parse_pauli(s: str) -> PauliOperator:
    """Parse ``[+-]?[IXYZ]{1..8}``, e.g. ``"-XZY"``."""
    text = s.strip()
    if not _PAULI_RE.match(text):
        body = text[1:] if text[:1] in "+-" else text
        for pos, ch in enumerate(body):
            if ch not in _LETTER_BITS:
                raise PauliError(f"invalid character {ch!r} at position {pos} in Pauli string {s!r}")
        raise PauliError(f"empty Pauli string {s!r}")
    phase = 0
    if text[0] in "+-":
        phase = 2 if text[0] == "-" else 0
        text = text[1:]
    if len(text) > MAX_QUBITS:
        raise PauliError(f"at most {MAX_QUBITS} qubits supported, got {len(text)}")
    bits = [_LETTER_BITS[c] for c in text]
    return PauliOperator(tuple(b[0] for b in bits), tuple(b[1] for b in bits), phase)


def format_pauli(p: PauliOperator, explicit_plus: bool = False) -> str:
    """Inverse of :func:`parse_pauli`; imaginary phases print as ``+i``/``-i``."""
    prefix = ("+" if explicit_plus else "", "+i", "-", "-i")[p.phase]
    return prefix + p.letters


def _check_sizes(a: PauliOperator, b: PauliOperator) -> None:
    if a.n != b.n:
        raise PauliError(f"size mismatch: {a.n} vs {b.n} qubits")


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    _check_sizes(a, b)
    s = sum(xa * zb + za * xb for xa, za, xb, zb in zip(a.x, a.z, b.x, b.z))
    return s % 2 == 0


def multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Product ``a @ b`` with exact phase tracking."""
    _check_sizes(a, b)
    phase = a.phase + b.phase
    x, z = [], []
    for x1, z1, x2, z2 in zip(a.x, a.z, b.x, b.z):
        x3, z3 = x1 ^ x2, z1 ^ z2
        # letter(x,z) = i^{xz} X^x Z^z, and Z^z1 X^x2 = (-1)^{z1 x2} X^x2 Z^z1
        phase += x1 * z1 + x2 * z2 + 2 * z1 * x2 - x3 * z3
        x.append(x3)
        z.append(z3)
    return PauliOperator(tuple(x), tuple(z), phase)


def product(ops, n: int | None = None) -> PauliOperator:
    ops = list(ops)
    if not ops:
        if n is None:
            raise PauliError("empty product needs an explicit qubit count")
        return PauliOperator.identity(n)
    return reduce(multiply, ops)


def realize(p: PauliOperator) -> np.ndarray:
    """Dense 2^n x 2^n matrix."""
    mat = reduce(np.kron, (_MATRICES[c] for c in p.letters))
    return p.coefficient * mat


def apply_pauli(p: PauliOperator, psi: np.ndarray) -> np.ndarray:
    """``realize(p) @ psi`` without building the matrix."""
    n = p.n
    idx = np.arange(1 << n)
    xmask = sum(b << (n - 1 - t) for t, b in enumerate(p.x))
    zmask = sum(b << (n - 1 - t) for t, b in enumerate(p.z))
    src = idx ^ xmask
    # (X^x Z^z psi)[k] = (-1)^{popcount(z & (k ^ x))} psi[k ^ x]
    signs = 1 - 2 * (_popcount(src & zmask) & 1)
    coeff = p.coefficient * (1j ** sum(a & b for a, b in zip(p.x, p.z)))
    return coeff * signs * np.asarray(psi)[src]


def _popcount(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    count = np.zeros_like(a)
    while np.any(a):
        count += a & 1
        a = a >> 1
    return count


def gf2_rank(rows: np.ndarray) -> int:
    m = np.array(rows, dtype=np.uint8) % 2
    rank = 0
    n_rows, n_cols = m.shape
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if m[r, col]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(n_rows):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
        if rank == n_rows:
            break
    return rank


@dataclass(frozen=True)
class GeneratorSet:
    """Stabilizer generators and logical operators of an [[n, 1]] code."""

    generators: tuple[PauliOperator, ...]
    logical_z: PauliOperator
    logical_x: PauliOperator

    @property
    def n(self) -> int:
        return self.logical_z.n

    def validate(self) -> None:
        """Raise :class:`PauliError` unless this describes a valid k=1 code."""
        n = self.n
        ops = list(self.generators) + [self.logical_z, self.logical_x]
        if any(op.n != n for op in ops):
            raise PauliError("all operators must act on the same number of qubits")
        if len(self.generators) != n - 1:
            raise PauliError(f"expected {n - 1} generators for an [[{n},1]] code, got {len(self.generators)}")
        for op in ops:
            if not op.is_hermitian:
                raise PauliError(f"operator {op} is not Hermitian")
        for i, g in enumerate(self.generators):
            for h in self.generators[i + 1:]:
                if not commutes(g, h):
                    raise PauliError(f"generators {g} and {h} anticommute")
            for name, op in (("logical_z", self.logical_z), ("logical_x", self.logical_x)):
                if not commutes(g, op):
                    raise PauliError(f"{name} {op} anticommutes with generator {g}")
        if commutes(self.logical_z, self.logical_x):
            raise PauliError("logical_z and logical_x must anticommute")
        # Hermitian, commuting and independent => group of order 2^n without -1.
        rows = np.array([op.symplectic() for op in list(self.generators) + [self.logical_z]])
        if gf2_rank(rows) != n:
            raise PauliError("generators together with logical_z are not independent")

    def projector(self) -> np.ndarray:
        """Dense codespace projector prod_i (1 + G_i)/2."""
        dim = 1 << self.n
        proj = np.eye(dim, dtype=complex)
        for g in self.generators:
            proj = proj @ (np.eye(dim) + realize(g)) / 2
        return proj

    def logical_basis(self) -> tuple[np.ndarray, np.ndarray]:
        """``(|0_L>, |1_L>)`` with |0_L> the +1 eigenstate of logical Z and |1_L> = X_L|0_L>."""
        dim = 1 << self.n
        proj = self.projector() @ (np.eye(dim) + realize(self.logical_z)) / 2
        col = int(np.argmax(np.linalg.norm(proj, axis=0)))
        ket0 = proj[:, col]
        ket0 = ket0 / np.linalg.norm(ket0)
        ket1 = apply_pauli(self.logical_x, ket0)
        return ket0, ket1


def generator_set(generators, logical_z, logical_x) -> GeneratorSet:
    """Build and validate a :class:`GeneratorSet` from strings or operators."""
    conv = lambda p: parse_pauli(p) if isinstance(p, str) else p  # noqa: E731
    gs = GeneratorSet(tuple(conv(g) for g in generators), conv(logical_z), conv(logical_x))
    gs.validate()
    return gs
