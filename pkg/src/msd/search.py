"""Exhaustive sweep over small CWS codes (graph, codeword) for distillation behaviour."""
from __future__ import annotations

import itertools
import logging
import os
from functools import lru_cache
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .analysis import (
    DEFAULT_MAX_ITERS,
    CodeReport,
    analyze_fixed_point,
    canonicalize_bloch,
    canonicalize_many,
    converges_to,
    iterate_many,
)
from .cws import CwsCode, Graph, canonical_graph, enumerate_graphs
from .distill import DistillationMap, compile_map, octahedral_rotations

log = logging.getLogger(__name__)

SURFACE_TOL = 1e-6
DEDUPE_TOL = 1e-5
# a fixed point is kept only if it pulls back a point this far down the depolarizing line
ATTRACTION_PROBE = 1e-4


@dataclass(frozen=True)
class SearchConfig:
    n_values: tuple[int, ...] = (2, 3, 4, 5)
    graph_mode: str = "auto"  # auto: all graphs for n <= 4, non-isomorphic above
    tightness_samples: int = 1000
    seed: int = 0
    enable_corrections: bool = False
    random_starts: int = 50
    max_iters: int = DEFAULT_MAX_ITERS
    threads: int = 1

    def __post_init__(self):
        for n in self.n_values:
            if not 2 <= n <= 6:
                raise ValueError(f"search supports 2 <= n <= 6, got {n}")
        if self.graph_mode not in ("auto", "all", "non_isomorphic"):
            raise ValueError(f"unknown graph mode {self.graph_mode!r}")

    def mode_for(self, n: int) -> str:
        if self.graph_mode == "auto":
            return "all" if n <= 4 else "non_isomorphic"
        return self.graph_mode


@dataclass
class FixedPoint:
    bloch: np.ndarray
    correction: str | None = None


@dataclass
class SearchRecord:
    code: CwsCode
    report: CodeReport | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def sort_key(self) -> tuple:
        canon = tuple(np.round(self.report.canonical_fixed_point, 6)) if self.report else ()
        return code_sort_key(self.code) + (self.code.correction or "", canon)


def octahedron_grid() -> np.ndarray:
    """26 unit vectors: octahedron vertices, edge midpoints and face centres."""
    pts = [v for v in itertools.product((-1, 0, 1), repeat=3) if any(v)]
    pts = np.array(pts, dtype=float)
    return pts / np.linalg.norm(pts, axis=1)[:, None]


def starting_points(random_starts: int = 50, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    rand = rng.normal(size=(random_starts, 3))
    rand /= np.linalg.norm(rand, axis=1)[:, None]
    return np.concatenate([octahedron_grid(), rand])


def discover_fixed_points(m: DistillationMap, config: SearchConfig = SearchConfig()) -> list[FixedPoint]:
    """Surface fixed points reached from a fixed grid of pure starting states.

    With corrections enabled every octahedral rotation is tried as an
    inter-round correction, identity first; a canonical point reached with
    the identity is not repeated for other rotations.  Pauli eigenstates
    are skipped since they sit on the octahedron.  Points that do not
    attract a slightly depolarized copy of themselves (repelling or saddle
    points hit by starting exactly on them) are dropped.
    """
    starts = starting_points(config.random_starts, config.seed)
    rotations = octahedral_rotations() if config.enable_corrections else (None,)
    found: list[FixedPoint] = []
    accepted = np.empty((0, 3))
    for rot in rotations:
        mm = m.with_correction(rot) if rot is not None else m
        b = iterate_many(mm, starts, config.max_iters)
        ok = b.converged & (np.abs(np.linalg.norm(b.final, axis=1) - 1.0) < SURFACE_TOL)
        ok &= np.abs(b.final).sum(axis=1) > 1.0 + SURFACE_TOL  # Pauli eigenstates are not magic
        if not ok.any():
            continue
        finals = b.final[ok]
        canon = canonicalize_many(finals)
        rejected = np.empty((0, 3))
        for r, c in zip(finals, canon):
            if _near_any(c, accepted) or _near_any(c, rejected):
                continue
            if converges_to(mm, ((1.0 - ATTRACTION_PROBE) * r)[None, :], r, config.max_iters)[0]:
                accepted = np.vstack([accepted, c])
                found.append(FixedPoint(r.copy(), None if mm.correction is None else mm.correction.label))
            else:
                rejected = np.vstack([rejected, c])
    return found


def _near_any(c: np.ndarray, pts: np.ndarray) -> bool:
    return bool(pts.size) and bool((np.abs(pts - c).max(axis=1) <= DEDUPE_TOL).any())


def _code_seed(seed: int, code: CwsCode) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, code.n, int(code.graph.bits() or "0", 2), int(code.codeword_bits, 2)])


def analyze_code(code: CwsCode, config: SearchConfig) -> list[SearchRecord]:
    """All records for one (graph, codeword) pair; failures become error records."""
    try:
        m = compile_map(code)
        records = []
        for k, fp in enumerate(discover_fixed_points(m, config)):
            mm = m.with_correction(fp.correction)
            rng = np.random.default_rng(_code_seed(config.seed, code).spawn(k + 1)[-1])
            report = analyze_fixed_point(mm, fp.bloch, config.tightness_samples, rng)
            rec_code = CwsCode(code.graph, code.codeword, fp.correction)
            records.append(SearchRecord(rec_code, report))
        return records
    except Exception as exc:  # one bad code must not abort the sweep
        log.warning("code %s failed: %s", code, exc)
        return [SearchRecord(code, None, f"{type(exc).__name__}: {exc}")]


def candidate_codes(config: SearchConfig) -> Iterator[CwsCode]:
    for n in config.n_values:
        for g in enumerate_graphs(n, config.mode_for(n)):
            for w in itertools.product((0, 1), repeat=n):
                if any(w):
                    yield CwsCode(g, w)


def _job(args) -> list[SearchRecord]:
    code, config = args
    return analyze_code(code, config)


def default_threads() -> int:
    env = os.environ.get("MSD_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_search(config: SearchConfig) -> Iterator[SearchRecord]:
    """Stream records for every candidate code, in candidate order."""
    jobs = ((code, config) for code in candidate_codes(config))
    if config.threads <= 1:
        for job in jobs:
            yield from _job(job)
        return
    with ProcessPoolExecutor(max_workers=config.threads) as pool:
        for recs in pool.map(_job, jobs, chunksize=8):
            yield from recs


def sorted_records(records: Iterable[SearchRecord]) -> list[SearchRecord]:
    return sorted(records, key=SearchRecord.sort_key)


@dataclass
class RecordGroup:
    canonical_fixed_point: tuple[float, ...]
    threshold: float
    records: list[SearchRecord] = field(default_factory=list)

    @property
    def representative(self) -> SearchRecord:
        return self.records[0]


def dedupe(records: Iterable[SearchRecord]) -> list[RecordGroup]:
    """Group by (canonical fixed point to 1e-4, threshold to 1e-3).

    Each group lists its records with the smallest (n, canonical graph,
    codeword) first.  Error records are dropped.
    """
    groups: dict[tuple, RecordGroup] = {}
    for rec in records:
        if rec.report is None:
            continue
        canon = tuple(float(v) + 0.0 for v in np.round(rec.report.canonical_fixed_point, 4))
        thr = round(rec.report.threshold, 3) + 0.0
        groups.setdefault((canon, thr), RecordGroup(canon, thr)).records.append(rec)
    for g in groups.values():
        g.records.sort(key=lambda r: (code_sort_key(r.code), r.code.correction or ""))
    return sorted(groups.values(), key=lambda g: code_sort_key(g.representative.code))


@lru_cache(maxsize=4096)
def _canonical_relabel(graph: Graph, codeword: tuple[int, ...]) -> tuple[Graph, tuple[int, ...]]:
    target = canonical_graph(graph)
    best = None
    for perm in itertools.permutations(range(graph.n)):
        if graph.permuted(perm) == target:
            w = [0] * graph.n
            for i, b in enumerate(codeword):
                w[perm[i]] = b
            best = tuple(w) if best is None else min(best, tuple(w))
    return target, best


def canonical_code(code: CwsCode) -> CwsCode:
    """Relabel a CWS code onto the canonical graph, choosing the smallest codeword."""
    g, w = _canonical_relabel(code.graph, code.codeword)
    return CwsCode(g, w, code.correction)


def code_sort_key(code: CwsCode) -> tuple:
    c = canonical_code(code)
    return (c.n, c.graph.bits(), c.codeword_bits)


__all__ = [
    "FixedPoint", "RecordGroup", "SearchConfig", "SearchRecord", "analyze_code", "candidate_codes",
    "canonical_code", "code_sort_key", "dedupe", "default_threads", "discover_fixed_points", "run_search",
    "sorted_records",
]
