"""Reproduction claims checked end to end, with the expected values pinned here.

Each check returns :class:`ClaimResult` rows.  ``tol_scale`` multiplies every
numeric tolerance; a scale of 0 is a quick way to confirm the failure path.
Search sweeps are memoized per process so the CLI and the test-suite share
one run.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .analysis import (
    analyze_fixed_point,
    canonicalize_bloch,
    canonicalize_many,
    convergence_order,
    converges_to,
    infidelity,
    iterate,
    p_oct_for,
    threshold,
    tightness,
    yield_details,
)
from .cws import CwsCode, Graph, canonical_graph, emit_encoding_circuit, enumerate_graphs, graph_state
from .distill import (
    DistillationMap,
    code_basis,
    code_generators,
    compile_map,
    dense_evaluate,
    evaluate_tensor,
    sequential_measurement_check,
)
from .registry import builtin
from .search import SearchConfig, SearchRecord, code_sort_key, discover_fixed_points, run_search

POINT_TOL = 1e-4
SEARCH_SEED = 0
TIGHT_SAMPLES = 1000

EQ8_KET0 = np.array([1, 0, -1j, 0, 0, 1, 0, 1j]) / 2
EQ8_KET1 = np.array([-1j, 0, 1, 0, 0, -1j, 0, -1]) / 2
EQ8_FIXED_POINT = (0.0, -0.83929, -0.54369)
EQ8_THRESHOLD = 0.276921

_THETA = math.atan(math.sqrt((math.sqrt(5) - 1) / 2))
GOLDEN_POINT = (math.sin(_THETA), 0.0, math.cos(_THETA))
H_POINT = (1 / math.sqrt(2), 0.0, 1 / math.sqrt(2))
T_POINT = (1 / math.sqrt(3),) * 3

# (point, tight?) for the larger search; the last two are reported as non-tight
EXTENDED_POINTS = (
    ((0.66796, 0.0, 0.7442), True),
    ((0.81281, 0.0, 0.58252), True),
    ((0.64969, 0.0, 0.7602), True),
    ((0.84893, 0.0, 0.52851), True),
    ((0.63544, 0.0, 0.77215), True),
    ((0.84534, 0.0, 0.53423), True),
    ((0.58252, 0.0, 0.81281), True),
    ((0.5, 0.0, math.sqrt(3) / 2), False),
    ((0.60965, 0.0, 0.79267), False),
)

NONISO_COUNTS = {2: 2, 3: 4, 4: 11, 5: 34, 6: 156}


@dataclass
class ClaimResult:
    claim: str
    location: str
    expected: str
    computed: str
    tolerance: str
    passed: bool
    tier: str = "mandatory"

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict}  {self.claim:<26} [{self.location}] expected {self.expected}; "
                f"computed {self.computed}; tol {self.tolerance}")


def _fmt(v) -> str:
    if isinstance(v, (tuple, list, np.ndarray)):
        return "(" + ", ".join(f"{float(x):.6f}" for x in v) + ")"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _normalized(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def phase_overlap(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>| for unit vectors, i.e. the overlap maximized over a global phase."""
    return float(abs(np.vdot(a / np.linalg.norm(a), b / np.linalg.norm(b))))


# ---------------------------------------------------------------- search runs

_SWEEPS: dict[tuple, list[SearchRecord]] = {}


def sweep(n: int, corrections: bool, threads: int = 1) -> list[SearchRecord]:
    """Records for one vertex count with the default graph mode, memoized."""
    key = (n, corrections)
    if key not in _SWEEPS:
        cfg = SearchConfig(n_values=(n,), enable_corrections=corrections, tightness_samples=TIGHT_SAMPLES,
                           seed=SEARCH_SEED, threads=threads)
        _SWEEPS[key] = list(run_search(cfg))
    return _SWEEPS[key]


def mandatory_records(threads: int = 1) -> list[SearchRecord]:
    return [rec for n in (2, 3, 4, 5) for rec in sweep(n, True, threads)]


def extended_records(threads: int = 1) -> list[SearchRecord]:
    return mandatory_records(threads) + sweep(6, False, threads)


def records_at(records: Iterable[SearchRecord], point, tol: float = POINT_TOL) -> list[SearchRecord]:
    ok = [r for r in records if r.report is not None]
    if not ok:
        return []
    want = canonicalize_bloch(_normalized(point))
    canon = np.array([r.report.canonical_fixed_point for r in ok])
    hit = np.abs(canon - want).max(axis=1) <= tol
    return [r for r, h in zip(ok, hit) if h]


def representative(records: Iterable[SearchRecord]) -> SearchRecord:
    """Deterministic pick: smallest (n, canonical graph, codeword, correction)."""
    return min(records, key=lambda r: (code_sort_key(r.code), r.code.correction or ""))


# ---------------------------------------------------------------- claims

def claim_logical_basis(tol_scale: float = 1.0) -> list[ClaimResult]:
    ket0, ket1 = code_basis(builtin("eq8_3qubit"))
    tol = 1e-10 * tol_scale
    out = []
    for name, mine, printed in (("ket0", ket0, EQ8_KET0), ("ket1", ket1, EQ8_KET1)):
        ov = phase_overlap(mine, printed)
        out.append(ClaimResult(f"C1 3-qubit basis {name}", "3-qubit code logical basis",
                               ">= 1 - 1e-10 overlap", f"{ov:.15f}", f"{tol:.0e}", ov >= 1 - tol))
    return out


def eq8_fixed_point() -> np.ndarray:
    m = compile_map(builtin("eq8_3qubit"))
    return iterate(m, 0.9 * _normalized(EQ8_FIXED_POINT)).final


def claim_eq8_dynamics(tol_scale: float = 1.0) -> list[ClaimResult]:
    m = compile_map(builtin("eq8_3qubit"))
    tol = POINT_TOL * tol_scale
    fp = eq8_fixed_point()
    thr = threshold(m, fp)
    tight = tightness(m, fp, TIGHT_SAMPLES, seed=SEARCH_SEED)
    gap = p_oct_for(fp) - thr
    loc = "3-qubit code dynamics"
    return [
        ClaimResult("C2 fixed point", loc, _fmt(EQ8_FIXED_POINT), _fmt(fp), f"{tol:.0e}",
                    float(np.abs(fp - EQ8_FIXED_POINT).max()) <= tol),
        ClaimResult("C2 threshold", loc, _fmt(EQ8_THRESHOLD), f"{thr:.7f}", f"{tol:.0e}",
                    abs(thr - EQ8_THRESHOLD) <= tol),
        ClaimResult("C2 tight", loc, "True", str(tight), f"{TIGHT_SAMPLES} samples, seed {SEARCH_SEED}", tight),
        ClaimResult("C2 p_oct - threshold", loc, "0", f"{gap:.2e}", f"{tol:.0e}", abs(gap) <= tol),
    ]


def claim_octahedron(tol_scale: float = 1.0) -> list[ClaimResult]:
    tol = 1e-6 * tol_scale
    out = []
    for name, pt, want in (("H", H_POINT, 0.292893), ("T", T_POINT, 0.422650)):
        got = p_oct_for(pt)
        out.append(ClaimResult(f"C3 p_oct({name})", "octahedron geometry", f"{want:.6f}", f"{got:.8f}",
                               f"{tol:.0e}", abs(got - want) <= tol))
    return out


def claim_rediscovery(records: list[SearchRecord], tol_scale: float = 1.0) -> list[ClaimResult]:
    tol = POINT_TOL * tol_scale
    out = []
    for name, pt, need_tight in (("golden", GOLDEN_POINT, True), ("H tight", H_POINT, True), ("T", T_POINT, False)):
        hits = records_at(records, pt, tol)
        if need_tight:
            hits = [r for r in hits if r.report.tight]
        found = bool(hits)
        where = _describe(representative(hits)) if found else "not found"
        out.append(ClaimResult(f"C4 search {name}", "small-code search, n <= 5",
                               _fmt(canonicalize_bloch(_normalized(pt))) + (" tight" if need_tight else ""),
                               where, f"{tol:.0e}", found))
    return out


def claim_extended(records: list[SearchRecord], tol_scale: float = 1.0) -> list[ClaimResult]:
    """Tight points need a tight record; non-tight points need a non-tight record there."""
    tol = POINT_TOL * tol_scale
    out = []
    for pt, want_tight in EXTENDED_POINTS:
        hits = records_at(records, pt, tol)
        tight = [r for r in hits if r.report.tight]
        loose = [r for r in hits if not r.report.tight]
        chosen = tight if want_tight else loose
        passed = bool(chosen)
        if not hits:
            computed = "not found"
        else:
            computed = f"{len(hits)} records ({len(tight)} tight)"
            best = representative(chosen or hits)
            computed += f", e.g. {_describe(best)}"
            if want_tight and not tight:
                near = max(hits, key=lambda r: r.report.tight_fraction or 0.0)
                computed += (f"; best cone fraction {near.report.tight_fraction}, "
                             f"in-plane fraction {plane_fraction(near):.3f}")
        out.append(ClaimResult(f"C5 search {_fmt(pt)}", "extended search, n <= 6",
                               f"present, {'tight' if want_tight else 'non-tight'} code", computed, f"{tol:.0e}",
                               passed, tier="extended"))
    return out


def plane_fraction(rec: SearchRecord, samples: int = TIGHT_SAMPLES, seed: int = SEARCH_SEED) -> float:
    """Diagnostic only: tightness fraction with samples confined to the plane of an equatorial target."""
    fp = np.asarray(rec.report.fixed_point, dtype=float)
    zero = np.abs(fp) < 1e-9
    sign = np.where(zero, 0.0, np.sign(fp))
    rng = np.random.default_rng(seed)
    pts = np.empty((0, 3))
    while len(pts) < samples:
        cand = rng.uniform(-1, 1, size=(4 * samples, 3))
        cand[:, zero] = 0.0
        keep = (np.linalg.norm(cand, axis=1) <= 1) & (cand @ sign > 1)
        pts = np.vstack([pts, cand[keep]])
    m = compile_map(rec.code)
    return float(converges_to(m, pts[:samples], fp).mean())


def _describe(rec: SearchRecord) -> str:
    c = rec.code
    corr = f" corr {c.correction}" if c.correction else ""
    return f"n={c.n} graph {c.graph.bits()} w {c.codeword_bits}{corr} thr {rec.report.threshold:.6f}"


def claim_corrections(records: list[SearchRecord], tol_scale: float = 1.0) -> list[ClaimResult]:
    tol = POINT_TOL * tol_scale
    five = builtin("perfect_5qubit_cws")
    m5 = compile_map(five)
    fp5 = iterate(m5, 0.95 * _normalized(five.expected["fixed_point"])).final
    thr5 = threshold(m5, fp5)
    corrected = [r for r in records_at(records, T_POINT, tol) if r.code.n <= 4 and r.code.correction]
    needs_correction = []
    for rec in corrected:
        bare = discover_fixed_points(compile_map(CwsCode(rec.code.graph, rec.code.codeword)), SearchConfig())
        bare_canon = canonicalize_many(np.array([fp.bloch for fp in bare])) if bare else np.empty((0, 3))
        reaches = bool(len(bare_canon)) and bool(
            (np.abs(bare_canon - canonicalize_bloch(T_POINT)).max(axis=1) <= tol).any())
        if not reaches:
            needs_correction.append(rec)
    best = min(needs_correction, key=lambda r: r.report.threshold) if needs_correction else None
    loc = "T-type codes with a correction"
    return [
        ClaimResult("C6 T needs correction", loc, "some n <= 4 code", _describe(best) if best else "none",
                    f"{tol:.0e}", best is not None),
        ClaimResult("C6 threshold below 5-qubit", loc, f"< {thr5:.6f}",
                    f"{best.report.threshold:.6f}" if best else "n/a", "strict", bool(best) and best.report.threshold < thr5),
    ]


@dataclass
class YieldCase:
    label: str
    m: DistillationMap
    target: np.ndarray


def yield_cases(records: list[SearchRecord]) -> list[YieldCase]:
    """The four codes compared at a fixed noise rate, most to least efficient."""
    cases = [YieldCase("3-qubit generator code", compile_map(builtin("eq8_3qubit")), eq8_fixed_point())]
    golden = [r for r in records_at(records, GOLDEN_POINT) if r.code.n == 3 and r.report.tight]
    h5 = [r for r in records_at(records, H_POINT) if r.code.n == 5 and r.report.tight]
    for label, hits in (("3-qubit golden-angle code", golden), ("5-qubit H code", h5)):
        if hits:
            rec = representative(hits)
            cases.append(YieldCase(f"{label} ({_describe(rec)})", compile_map(rec.code), rec.report.fixed_point))
    steane = builtin("steane_7qubit")
    cases.append(YieldCase("Steane", compile_map(steane), _normalized(steane.expected["fixed_point"])))
    return cases


def claim_yield_order(records: list[SearchRecord], p: float = 0.2, target_eps: float = 1e-10,
                      tol_scale: float = 1.0) -> list[ClaimResult]:
    cases = yield_cases(records)
    loc = "yield comparison"
    if len(cases) != 4:
        return [ClaimResult("C7 yield ordering", loc, "4 codes", f"{len(cases)} codes available", "-", False)]
    logs = []
    for case in cases:
        res = yield_details(case.m, p, case.target, target_eps)
        logs.append(res.log_value)
    in_range = all(-math.inf < lv < 0.0 for lv in logs)
    ordered = all(a > b for a, b in zip(logs, logs[1:]))
    shown = ", ".join(f"{c.label.split(' (')[0]}: ln Y={lv:.2f}" for c, lv in zip(cases, logs))
    return [
        ClaimResult("C7 yield ordering", loc, "decreasing in listed order", shown, "strict", ordered),
        ClaimResult("C7 yields in (0,1)", loc, "0 < Y < 1", shown, "-", in_range),
    ]


def claim_steane(tol_scale: float = 1.0) -> list[ClaimResult]:
    spec = builtin("steane_7qubit")
    m = compile_map(spec)
    fp = _normalized(spec.expected["fixed_point"])
    thr = threshold(m, fp)
    tol = 1e-3 * tol_scale
    return [ClaimResult("C8 Steane threshold", "Steane tightness", "0.29289", f"{thr:.6f}", f"{tol:.0e}",
                        abs(thr - 0.29289) <= tol)]


class QuadraticDouble:
    """Synthetic map with eps_out = eps_in^2 along the axis through ``target``."""

    def __init__(self, target):
        self.target = _normalized(target)
        self.n = 1

    def apply(self, r):
        eps = infidelity(r, self.target)
        return ((1.0 - 2.0 * eps * eps) * self.target, 1.0, False)


def claim_linear_order(records: list[SearchRecord], tol_scale: float = 1.0) -> list[ClaimResult]:
    half = 0.1 * tol_scale
    orders = [convergence_order(compile_map(builtin("eq8_3qubit")), eq8_fixed_point())]
    tight = [r for r in records if r.report is not None and r.report.tight and r.code.n <= 5]
    orders += [r.report.convergence_order for r in tight]
    lo, hi = min(orders), max(orders)
    quad = convergence_order(QuadraticDouble(H_POINT), H_POINT)
    loc = "error suppression order"
    return [
        ClaimResult("C9 linear order", loc, f"in [{1 - half:.2f}, {1 + half:.2f}]",
                    f"{len(orders)} codes, range [{lo:.4f}, {hi:.4f}]", f"{half:.2g}",
                    1 - half <= lo and hi <= 1 + half),
        ClaimResult("C9 quadratic double", loc, "2.0", f"{quad:.4f}", f"{0.05 * tol_scale:.2g}",
                    abs(quad - 2.0) <= 0.05 * tol_scale),
    ]


# ---------------------------------------------------------------- consistency suite

def _random_interior(rng: np.random.Generator, count: int) -> np.ndarray:
    v = rng.normal(size=(count, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    return v * rng.uniform(0, 1, size=(count, 1)) ** (1 / 3)


def sample_codes(rng: np.random.Generator, count: int, ns=(4, 5)) -> list[CwsCode]:
    out = []
    for _ in range(count):
        n = int(rng.choice(ns))
        m = n * (n - 1) // 2
        bits = "".join(rng.choice(["0", "1"], size=m))
        w = tuple(int(b) for b in rng.integers(0, 2, size=n))
        if not any(w):
            w = (1,) + w[1:]
        out.append(CwsCode(Graph.from_bits(n, bits), w))
    return out


def small_codes() -> list[CwsCode]:
    return [CwsCode(g, w) for n in (2, 3) for g in enumerate_graphs(n)
            for w in itertools.product((0, 1), repeat=n) if any(w)]


def consistency_errors(codes: Iterable, rng: np.random.Generator, points: int = 3) -> dict[str, float]:
    """Worst deviations between the independent evaluation routes."""
    worst = {"compressed_vs_dense": 0.0, "tensor_vs_dense": 0.0, "sequential_vs_projector": 0.0}
    for code in codes:
        m = compile_map(code)
        for r in _random_interior(rng, points):
            dense = dense_evaluate(code, r)
            fast = m.apply(r)
            tens = evaluate_tensor(m, r)
            worst["compressed_vs_dense"] = max(worst["compressed_vs_dense"], float(np.abs(fast.bloch - dense.bloch).max()),
                                               abs(fast.p_success - dense.p_success))
            worst["tensor_vs_dense"] = max(worst["tensor_vs_dense"], float(np.abs(tens.bloch - dense.bloch).max()),
                                           abs(tens.p_success - dense.p_success))
            seq = sequential_measurement_check(code, r)
            worst["sequential_vs_projector"] = max(worst["sequential_vs_projector"], abs(seq - dense.p_success))
    return worst


def closure_violation(code, rng: np.random.Generator, samples: int = 1000) -> float:
    """Largest excess of |x|+|y|+|z| over 1 after one round from inside the octahedron."""
    m = compile_map(code)
    pts = _random_interior(rng, samples * 3)
    pts = pts[np.abs(pts).sum(axis=1) < 1.0][:samples]
    worst = 0.0
    for r in pts:
        ev = m.apply(r)
        if not ev.dead:
            worst = max(worst, float(np.abs(ev.bloch).sum() - 1.0))
    return worst


def projector_error(code) -> tuple[int, float]:
    p = code_generators(code).projector()
    rank = int(np.linalg.matrix_rank(p, tol=1e-9))
    return rank, float(np.abs(p @ p - p).max())


def canonicalization_failures(rng: np.random.Generator, cases: int = 1000) -> int:
    bad = 0
    for _ in range(cases):
        n = int(rng.integers(2, 7))
        g = Graph.from_bits(n, "".join(rng.choice(["0", "1"], size=n * (n - 1) // 2)))
        perm = tuple(int(v) for v in rng.permutation(n))
        bad += canonical_graph(g) != canonical_graph(g.permuted(perm))
    return bad


def circuit_state(code: CwsCode) -> np.ndarray:
    """Simulate the emitted encoding circuit on |0...0>."""
    n = code.n
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    bits = (np.arange(1 << n)[:, None] >> (n - 1 - np.arange(n))) & 1
    for line in emit_encoding_circuit(code).splitlines():
        if line.startswith("#"):
            continue
        gate, *qs = line.split()
        qs = [int(q[1:]) for q in qs]
        if gate == "H":
            q = qs[0]
            flip = np.arange(1 << n) ^ (1 << (n - 1 - q))
            sign = 1 - 2 * bits[:, q]
            psi = (psi[flip] + sign * psi) / math.sqrt(2)
        elif gate == "CZ":
            psi = psi * (1 - 2 * (bits[:, qs[0]] & bits[:, qs[1]]))
    return psi


def claim_properties(tol_scale: float = 1.0, seed: int = 0) -> list[ClaimResult]:
    rng = np.random.default_rng(seed)
    tol = 1e-10 * tol_scale
    loc = "internal consistency"
    small = small_codes()
    sampled = sample_codes(rng, 200)
    builtins = [builtin(name) for name in ("eq8_3qubit", "steane_7qubit", "perfect_5qubit_cws")]
    e_small = consistency_errors(small, rng)
    e_sampled = consistency_errors(sampled, rng, points=1)
    closure = max(closure_violation(c, rng) for c in sample_codes(rng, 20, ns=(2, 3, 4, 5)))
    proj = [projector_error(c) for c in small + sampled + builtins]
    ranks_ok = all(r == 2 for r, _ in proj)
    idem = max(e for _, e in proj)
    canon_bad = canonicalization_failures(rng)
    counts = {n: sum(1 for _ in enumerate_graphs(n, "non_isomorphic")) for n in NONISO_COUNTS}
    worst_tensor = max(e_small["tensor_vs_dense"], e_small["compressed_vs_dense"],
                       e_sampled["tensor_vs_dense"], e_sampled["compressed_vs_dense"])
    worst_seq = max(e_small["sequential_vs_projector"], e_sampled["sequential_vs_projector"])
    circuit = max(1 - phase_overlap(circuit_state(c), graph_state(c.graph)) for c in small)
    return [
        ClaimResult("C10 tensor vs dense", loc, f"<= {tol:.0e}",
                    f"{worst_tensor:.2e} over {len(small)} exhaustive + {len(sampled)} sampled codes", f"{tol:.0e}",
                    worst_tensor <= tol),
        ClaimResult("C10 sequential vs projector", loc, f"<= {tol:.0e}", f"{worst_seq:.2e}", f"{tol:.0e}", worst_seq <= tol),
        ClaimResult("C10 octahedron closure", loc, "<= 1e-09 excess", f"{closure:.2e} over 20 codes", f"{1e-9 * tol_scale:.0e}",
                    closure <= 1e-9 * tol_scale),
        ClaimResult("C10 projector rank/idempotence", loc, "rank 2, |P^2-P| <= 1e-10",
                    f"ranks ok={ranks_ok}, {idem:.2e} over {len(proj)} codes", f"{tol:.0e}", ranks_ok and idem <= tol),
        ClaimResult("C10 canonical invariance", loc, "0 failures", f"{canon_bad} of 1000", "exact", canon_bad == 0),
        ClaimResult("C10 non-isomorphic counts", loc, str(NONISO_COUNTS), str(counts), "exact", counts == NONISO_COUNTS),
        ClaimResult("C10 circuit vs graph state", loc, f"overlap >= 1 - {tol:.0e}", f"{circuit:.2e}", f"{tol:.0e}",
                    circuit <= tol),
    ]


def run_claims(extended: bool = False, tol_scale: float = 1.0, threads: int = 1,
               progress: Callable[[str], None] | None = None) -> list[ClaimResult]:
    """Every claim in order; ``extended`` adds the n = 6 sweep."""
    say = progress or (lambda _msg: None)
    results: list[ClaimResult] = []
    say("basis, dynamics and geometry")
    results += claim_logical_basis(tol_scale)
    results += claim_eq8_dynamics(tol_scale)
    results += claim_octahedron(tol_scale)
    say("search n = 2..5 with corrections")
    records = mandatory_records(threads)
    results += claim_rediscovery(records, tol_scale)
    if extended:
        say("search n = 6")
        results += claim_extended(extended_records(threads), tol_scale)
    results += claim_corrections(records, tol_scale)
    say("yields")
    results += claim_yield_order(records, tol_scale=tol_scale)
    results += claim_steane(tol_scale)
    results += claim_linear_order(records, tol_scale)
    say("consistency suite")
    results += claim_properties(tol_scale)
    return results
