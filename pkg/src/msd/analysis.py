"""Fixed points, thresholds, tightness, convergence order and yield of distillation maps."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .distill import DistillationMap, octahedral_rotations

DEFAULT_MAX_ITERS = 500
DEFAULT_TOL = 1e-12
OCTAHEDRON_MARGIN = 1e-6
OCTAHEDRON_PATIENCE = 10
SAME_POINT_TOL = 1e-6
THRESHOLD_RESOLUTION = 1e-7
THRESHOLD_BRACKET_PAD = 0.05
TIGHT_TOLERANCE = 1e-3
ORDER_EPSILONS = (1e-3, 1e-4, 1e-5, 1e-6)
ORDER_FLOOR = 1e-14
DEFAULT_TARGET_EPS = 1e-10
CANONICAL_TIE_TOL = 1e-9


class NotDistillableError(ValueError):
    """The requested depolarizing rate is outside the map's convergence region."""


def infidelity(r, target) -> float:
    """``1 - <M|rho|M>`` for a Bloch vector r and a pure target direction."""
    return (1.0 - float(np.dot(r, target))) / 2.0


@lru_cache(maxsize=None)
def _rotation_stack() -> np.ndarray:
    return np.stack([rot.matrix for rot in octahedral_rotations()])


def canonicalize_many(points) -> np.ndarray:
    """Row-wise :func:`canonicalize_bloch` for an (N, 3) array."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    images = np.einsum("rij,nj->nri", _rotation_stack(), pts) + 0.0  # (N, 24, 3)
    keep = np.ones(images.shape[:2], dtype=bool)
    for tol in (CANONICAL_TIE_TOL, 0.0):
        for k in range(3):
            col = np.where(keep, images[:, :, k], -np.inf)
            keep &= col >= col.max(axis=1, keepdims=True) - tol
    idx = keep.argmax(axis=1)
    return images[np.arange(len(pts)), idx] + 0.0


def canonicalize_bloch(r) -> np.ndarray:
    """Lexicographically maximal image of r under the 24 octahedral rotations.

    Near-ties (within 1e-9) are treated as ties so that float noise cannot
    flip the choice; remaining ties are broken by exact lexicographic order.
    """
    return canonicalize_many(np.asarray(r, dtype=float).reshape(1, 3))[0]


def same_canonical(a, b, tol: float = SAME_POINT_TOL) -> bool:
    return bool(np.max(np.abs(canonicalize_bloch(a) - canonicalize_bloch(b))) <= tol)


def p_oct_for(target) -> float:
    """Depolarizing rate at which ``(1-p) * target`` reaches the stabilizer octahedron."""
    target = np.asarray(target, dtype=float)
    l1 = np.abs(target).sum()
    if l1 == 0:
        raise ValueError("target Bloch vector must be nonzero")
    return float(min(1.0, max(0.0, 1.0 - 1.0 / l1)))


@dataclass(frozen=True)
class DepolarizedInput:
    target: np.ndarray
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("depolarizing rate must lie in [0, 1]")

    @property
    def bloch(self) -> np.ndarray:
        return (1.0 - self.p) * np.asarray(self.target, dtype=float)


@dataclass
class IterationOutcome:
    status: str
    final: np.ndarray
    iterations: int
    p_success: float
    trajectory: list | None = None

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def fixed_point(self) -> np.ndarray | None:
        return self.final if self.converged else None


@dataclass
class BatchOutcome:
    final: np.ndarray
    status: np.ndarray
    iterations: np.ndarray
    p_success: np.ndarray

    @property
    def converged(self) -> np.ndarray:
        return self.status == kernels.CONVERGED


def iterate_many(m: DistillationMap, starts, max_iters: int = DEFAULT_MAX_ITERS, tol: float = DEFAULT_TOL) -> BatchOutcome:
    starts = np.ascontiguousarray(np.atleast_2d(starts), dtype=float)
    nb = starts.shape[0]
    out = BatchOutcome(np.empty((nb, 3)), np.empty(nb, np.int64), np.empty(nb, np.int64), np.empty(nb))
    kernels.iterate_batch(
        m.exps, m.coef, np.ascontiguousarray(m.rotation_matrix), m.n, starts, int(max_iters), float(tol),
        OCTAHEDRON_MARGIN, OCTAHEDRON_PATIENCE, out.final, out.status, out.iterations, out.p_success,
    )
    return out


def iterate(m: DistillationMap, start, max_iters: int = DEFAULT_MAX_ITERS, tol: float = DEFAULT_TOL,
            record: bool = False) -> IterationOutcome:
    """Apply the map until the step falls below ``tol`` or another stop condition fires.

    Iterates that rounding pushes outside the unit ball are projected back
    onto the sphere.  Stops are: converged (a fixed point inside the octahedron counts as
    ``entered_octahedron``), ``entered_octahedron`` after 10 consecutive
    rounds inside it, ``dead`` when p_success < 1e-14, or ``max_iters``.
    """
    start = np.asarray(start, dtype=float)
    if not record:
        b = iterate_many(m, start[None, :], max_iters, tol)
        return IterationOutcome(kernels.STATUS_NAMES[int(b.status[0])], b.final[0], int(b.iterations[0]),
                                float(b.p_success[0]))
    # Python loop so every round can be kept; same stop rules as the kernels.
    r = start.copy()
    traj = [(r.copy(), float("nan"))]
    inside = 0
    status, ps, it = "max_iters", 0.0, 0
    while it < max_iters:
        it += 1
        ev = m.apply(r)
        ps = ev.p_success
        if ev.dead:
            status = "dead"
            break
        new = ev.bloch
        nrm = np.linalg.norm(new)
        if nrm > 1.0:
            new = new / nrm
        step = np.linalg.norm(new - r)
        r = new
        traj.append((r.copy(), ps))
        in_oct = np.abs(r).sum() < 1.0 - OCTAHEDRON_MARGIN
        inside = inside + 1 if in_oct else 0
        if step < tol:
            status = "entered_octahedron" if in_oct else "converged"
            break
        if inside >= OCTAHEDRON_PATIENCE:
            status = "entered_octahedron"
            break
    return IterationOutcome(status, r, it, ps, traj)


def converges_to(m: DistillationMap, starts, target, max_iters: int = DEFAULT_MAX_ITERS) -> np.ndarray:
    """Boolean per start: converged to a point canonically equal to ``target``."""
    b = iterate_many(m, starts, max_iters)
    ok = b.converged.copy()
    if ok.any():
        dist = np.abs(canonicalize_many(b.final[ok]) - canonicalize_bloch(target)).max(axis=1)
        ok[ok] = dist <= SAME_POINT_TOL
    return ok


def threshold(m: DistillationMap, target, resolution: float = THRESHOLD_RESOLUTION,
              max_iters: int = DEFAULT_MAX_ITERS) -> float:
    """Largest depolarizing rate p for which ``(1-p) * target`` still converges to target.

    Bisection on [0, p_oct + 0.05]; returns 0 when even the pure target fails
    and for Pauli eigenstates, which have no room outside the octahedron.
    """
    target = np.asarray(target, dtype=float)
    if p_oct_for(target) == 0.0:
        return 0.0

    def ok(p: float) -> bool:
        return bool(converges_to(m, ((1.0 - p) * target)[None, :], target, max_iters)[0])

    lo, hi = 0.0, min(1.0, p_oct_for(target) + THRESHOLD_BRACKET_PAD)
    if not ok(lo):
        return 0.0
    if ok(hi):
        return hi
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def face_normal(target) -> np.ndarray:
    """Signs of the target's nonzero components; zeros leave that axis unconstrained."""
    target = np.asarray(target, dtype=float)
    return np.where(np.abs(target) > 1e-6, np.sign(target), 0.0)


def sample_region(target, samples: int, seed: int | np.random.Generator | None = 0) -> np.ndarray:
    """Uniform points of the unit ball in the target's face cone ``{s·r > 1}``.

    ``s`` holds the signs of the target's nonzero components, so for a target
    (x, 0, z) with x, z > 0 this is the region ``x + z > 1``; components
    where s is nonzero must also match its sign.
    """
    s = face_normal(target)
    if np.abs(s).sum() < 2:
        raise ValueError("target lies on a Pauli axis; its distillable region is empty")
    rng = np.random.default_rng(seed)
    found = []
    total = 0
    while total < samples:
        batch = rng.normal(size=(4096, 3))
        batch *= (rng.random(4096) ** (1 / 3) / np.linalg.norm(batch, axis=1))[:, None]
        keep = (batch @ s > 1.0) & np.all((batch * s >= 0) | (s == 0), axis=1)
        found.append(batch[keep])
        total += int(keep.sum())
    return np.concatenate(found)[:samples]


def tightness_fraction(m: DistillationMap, target, samples: int = 1000, seed=0,
                       max_iters: int = DEFAULT_MAX_ITERS) -> float:
    """Fraction of uniform region samples that converge to the target."""
    pts = sample_region(target, samples, seed)
    return float(converges_to(m, pts, target, max_iters).mean())


def tightness(m: DistillationMap, target, samples: int = 1000, seed=0,
              max_iters: int = DEFAULT_MAX_ITERS) -> bool:
    """True when every sampled non-stabilizer state in the target's face cone converges to it."""
    if np.abs(face_normal(target)).sum() < 2:
        return False
    return tightness_fraction(m, target, samples, seed, max_iters) == 1.0


def convergence_order(m, target, epsilons=ORDER_EPSILONS) -> float:
    """Slope of log(eps_out) against log(eps_in) along the depolarizing line.

    ``m`` only needs an ``apply(r) -> (bloch, p_success, ...)`` method.
    """
    target = np.asarray(target, dtype=float)
    xs, ys = [], []
    for eps in epsilons:
        out = m.apply((1.0 - 2.0 * eps) * target)[0]
        eps_out = infidelity(out, target)
        if eps_out < ORDER_FLOOR:
            continue
        xs.append(math.log(eps))
        ys.append(math.log(eps_out))
    if len(xs) < 2:
        return float("nan")
    return float(np.polyfit(xs, ys, 1)[0])


@dataclass
class YieldResult:
    value: float
    log_value: float
    rounds: int
    p_successes: list = field(default_factory=list)


def yield_details(m: DistillationMap, p: float, target, target_eps: float = DEFAULT_TARGET_EPS,
                  max_rounds: int = 20000) -> YieldResult:
    """Product over rounds of ``p_s / n`` until the infidelity reaches ``target_eps``."""
    target = np.asarray(target, dtype=float)
    r = (1.0 - p) * target
    p_succ = []
    while infidelity(r, target) > target_eps:
        if len(p_succ) >= max_rounds:
            raise NotDistillableError(f"p = {p} not distillable at this rate (no convergence in {max_rounds} rounds)")
        ev = m.apply(r)
        if ev.dead or np.abs(ev.bloch).sum() < 1.0 - OCTAHEDRON_MARGIN:
            raise NotDistillableError(f"p = {p} not distillable at this rate")
        r = ev.bloch
        p_succ.append(ev.p_success)
    log_value = float(sum(math.log(ps / m.n) for ps in p_succ))
    value = 1.0
    for ps in p_succ:
        value *= ps / m.n
    return YieldResult(value, log_value, len(p_succ), p_succ)


def distillation_yield(m: DistillationMap, p: float, target, target_eps: float = DEFAULT_TARGET_EPS) -> float:
    return yield_details(m, p, target, target_eps).value


@dataclass
class CodeReport:
    fixed_point: np.ndarray
    canonical_fixed_point: np.ndarray
    threshold: float
    p_oct: float
    tight: bool
    convergence_order: float
    correction_used: str | None = None
    p_success: float = float("nan")
    tight_fraction: float | None = None

    def as_dict(self) -> dict:
        return {
            "fixed_point": [float(v) for v in self.fixed_point],
            "canonical_fixed_point": [float(v) for v in self.canonical_fixed_point],
            "threshold": self.threshold,
            "p_oct": self.p_oct,
            "tight": self.tight,
            "convergence_order": self.convergence_order,
            "correction": self.correction_used,
            "p_success": self.p_success,
            "tight_fraction": self.tight_fraction,
        }


def analyze_fixed_point(m: DistillationMap, fixed_point, samples: int = 1000, seed=0,
                        tight_tolerance: float = TIGHT_TOLERANCE, prune: bool = True) -> CodeReport:
    """Full report for one fixed point of ``m``.

    With ``prune`` the sampling stage is skipped when the threshold already
    sits more than ``tight_tolerance`` below p_oct.
    """
    fp = np.asarray(fixed_point, dtype=float)
    fp = fp / np.linalg.norm(fp)
    p_oct = p_oct_for(fp)
    thr = threshold(m, fp)
    frac = None
    near = abs(thr - p_oct) <= tight_tolerance and np.abs(face_normal(fp)).sum() >= 2
    if near or not prune:
        frac = tightness_fraction(m, fp, samples, seed) if np.abs(face_normal(fp)).sum() >= 2 else 0.0
    tight = bool(near and frac == 1.0)
    return CodeReport(
        fixed_point=fp,
        canonical_fixed_point=canonicalize_bloch(fp),
        threshold=thr,
        p_oct=p_oct,
        tight=tight,
        convergence_order=convergence_order(m, fp),
        correction_used=None if m.correction is None else m.correction.label,
        p_success=m.apply(fp).p_success,
        tight_fraction=frac,
    )
