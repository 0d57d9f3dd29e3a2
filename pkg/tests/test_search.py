import math

import numpy as np
import pytest

from msd.analysis import analyze_fixed_point, canonicalize_bloch, p_oct_for
from msd.cws import CwsCode, Graph
from msd.distill import compile_map
from msd.registry import builtin
from msd.search import (
    SearchConfig,
    analyze_code,
    candidate_codes,
    canonical_code,
    code_sort_key,
    dedupe,
    discover_fixed_points,
    octahedron_grid,
    run_search,
    sorted_records,
    starting_points,
)
from msd.verify import GOLDEN_POINT, T_POINT, eq8_fixed_point

CFG3 = SearchConfig(n_values=(3,), tightness_samples=300, enable_corrections=True)


@pytest.fixture(scope="module")
def sweep3():
    return list(run_search(CFG3))


def at(records, point, tol=1e-4):
    c = canonicalize_bloch(point)
    return [r for r in records if np.abs(r.report.canonical_fixed_point - c).max() <= tol]


class TestConfig:
    def test_bounds(self):
        with pytest.raises(ValueError):
            SearchConfig(n_values=(7,))
        with pytest.raises(ValueError):
            SearchConfig(graph_mode="some")

    def test_auto_mode(self):
        cfg = SearchConfig()
        assert [cfg.mode_for(n) for n in (2, 4, 5, 6)] == ["all", "all", "non_isomorphic", "non_isomorphic"]

    def test_candidate_count(self):
        assert sum(1 for _ in candidate_codes(SearchConfig(n_values=(3,)))) == 8 * 7


class TestStarts:
    def test_grid(self):
        g = octahedron_grid()
        assert g.shape == (26, 3)
        np.testing.assert_allclose(np.linalg.norm(g, axis=1), 1)
        assert len({tuple(np.round(v, 9)) for v in g}) == 26

    def test_seeded(self):
        assert starting_points(50, 1).shape == (76, 3)
        assert np.array_equal(starting_points(50, 1), starting_points(50, 1))


class TestDiscovery:
    def test_eq8_single_point(self):
        pts = discover_fixed_points(compile_map(builtin("eq8_3qubit")))
        canon = {tuple(np.round(canonicalize_bloch(p.bloch), 5)) for p in pts}
        assert canon == {tuple(np.round(canonicalize_bloch(eq8_fixed_point()), 5))}

    def test_dead_map(self):
        assert discover_fixed_points(compile_map(CwsCode(Graph.from_bits(2, "1"), (1, 1)))) == []

    def test_five_cycle_t_type(self):
        code = CwsCode(Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]), (1,) * 5)
        pts = discover_fixed_points(compile_map(code), SearchConfig(enable_corrections=True))
        canon = [canonicalize_bloch(p.bloch) for p in pts]
        assert any(np.abs(c - canonicalize_bloch(T_POINT)).max() < 1e-6 for c in canon)

    def test_no_pauli_eigenstates(self, sweep3):
        for r in sweep3:
            assert np.abs(r.report.fixed_point).sum() > 1 + 1e-6
            assert r.report.threshold <= r.report.p_oct + 1e-6


class TestSweep:
    def test_n2_has_nothing(self):
        # two-qubit codes cannot distill: nothing survives
        assert list(run_search(SearchConfig(n_values=(2,), enable_corrections=True))) == []

    def test_golden_tight(self, sweep3):
        hits = [r for r in at(sweep3, GOLDEN_POINT) if r.report.tight]
        assert hits
        theta = math.atan(math.sqrt((math.sqrt(5) - 1) / 2))
        np.testing.assert_allclose(GOLDEN_POINT, (math.sin(theta), 0, math.cos(theta)))
        np.testing.assert_allclose(hits[0].report.canonical_fixed_point, (0.78615, 0.61803, 0), atol=1e-4)

    def test_records_well_formed(self, sweep3):
        for r in sweep3:
            assert r.ok
            rep = r.report
            assert abs(np.linalg.norm(rep.fixed_point) - 1) < 1e-6
            assert rep.p_oct == pytest.approx(p_oct_for(rep.fixed_point))
            if rep.tight:
                assert abs(rep.threshold - rep.p_oct) <= 1e-3

    def test_deterministic(self, sweep3):
        again = list(run_search(CFG3))
        a, b = sorted_records(sweep3), sorted_records(again)
        assert [(r.code, r.report.threshold, tuple(r.report.fixed_point)) for r in a] == \
            [(r.code, r.report.threshold, tuple(r.report.fixed_point)) for r in b]

    def test_threads_match_serial(self):
        cfg = SearchConfig(n_values=(3,), tightness_samples=200)
        serial = list(run_search(cfg))
        par = list(run_search(SearchConfig(n_values=(3,), tightness_samples=200, threads=2)))
        assert [(r.code, r.report.threshold, r.report.tight) for r in serial] == \
            [(r.code, r.report.threshold, r.report.tight) for r in par]

    def test_failures_are_records(self, monkeypatch):
        import msd.search as search

        def boom(code):
            raise RuntimeError("synthetic failure")

        monkeypatch.setattr(search, "compile_map", boom)
        recs = list(run_search(SearchConfig(n_values=(3,))))
        assert len(recs) == 56 and all(not r.ok and "synthetic" in r.error for r in recs)


class TestDedupe:
    def test_partition(self, sweep3):
        groups = dedupe(sweep3)
        members = [id(r) for g in groups for r in g.records]
        assert len(members) == len(set(members)) == len(sweep3)

    def test_isomorphic_relabeling_groups_together(self):
        g, w, perm = Graph.from_bits(3, "001"), (1, 0, 1), (2, 0, 1)
        moved = [0] * 3
        for i, b in enumerate(w):
            moved[perm[i]] = b
        relabeled = CwsCode(g.permuted(perm), tuple(moved))
        assert canonical_code(relabeled) == canonical_code(CwsCode(g, w))
        cfg = SearchConfig(n_values=(3,), tightness_samples=200)
        recs = [r for c in (CwsCode(g, w), relabeled) for r in analyze_code(c, cfg)]
        groups = dedupe(recs)
        assert len(groups) == 1 and len(groups[0].records) == 2

    def test_eq8_and_cws_equivalent_share_group(self, sweep3):
        m = compile_map(builtin("eq8_3qubit"))
        raw = analyze_fixed_point(m, eq8_fixed_point(), samples=300)
        hits = [r for r in at(sweep3, raw.canonical_fixed_point) if r.report.tight]
        assert hits
        assert round(hits[0].report.threshold, 3) == round(raw.threshold, 3)

    def test_representative_is_smallest(self, sweep3):
        for g in dedupe(sweep3):
            assert code_sort_key(g.representative.code) == min(code_sort_key(r.code) for r in g.records)
