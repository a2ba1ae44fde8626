import types

import numpy
import pandas
import pytest

from tempoca import DiscoveryParams, TimeSeriesPanel, pc_pmime
from tempoca.errors import TooShort
from tempoca.pc_pmime import (
    EdgeTestRecord, Skeleton, audit_frame, discover, orient_edges,
    skeleton_phase, write_audit)
from tempoca.simulate import StructureSpec, generate


def noise_panel(g, n=200, seed=0):
    data = numpy.random.default_rng(seed).standard_normal((n, g))
    return TimeSeriesPanel(tuple(f"X{i}" for i in range(g)), data)


def fake_pmime(table, default=0.5):
    """pmime_r stand-in reading R from {(source, target, cond): r}."""
    def pmime_r(panel, source, target, cond, params, cache=None):
        return types.SimpleNamespace(
            r=table.get((source, target, tuple(cond)), default))
    return pmime_r


class TestSkeletonPhase:

    def test_levels_without_removals(self, monkeypatch, params):
        monkeypatch.setattr(pc_pmime, "pmime_r", fake_pmime({}))
        skeleton, records = skeleton_phase(noise_panel(4), params)
        assert len(skeleton.edges) == 12
        levels = [r.level for r in records]
        assert levels == [0] * 12 + [1] * 24 + [2] * 12
        assert all(len(r.cond_set) == r.level for r in records)
        level_one = [(r.source, r.target, r.cond_set) for r in records if r.level == 1]
        assert level_one[:2] == [(0, 1, (2,)), (0, 1, (3,))]

    def test_removals_apply_after_the_level(self, monkeypatch, params):
        monkeypatch.setattr(pc_pmime, "pmime_r", fake_pmime({(0, 1, (2,)): 0.0}))
        skeleton, records = skeleton_phase(noise_panel(4), params)
        assert (0, 1) not in skeleton.edges
        assert (1, 0) in skeleton.edges

        def tested(source, target, level):
            return [r.cond_set for r in records
                    if (r.source, r.target, r.level) == (source, target, level)]

        assert tested(0, 1, 1) == [(2,)]
        # Same level: 3 -> 1 still conditions on 0.
        assert tested(3, 1, 1) == [(0,), (2,)]
        assert tested(3, 1, 2) == []
        assert tested(3, 2, 2) == [(0, 1)]

    def test_removed_at_level_zero(self, monkeypatch, params):
        monkeypatch.setattr(pc_pmime, "pmime_r", fake_pmime({}, default=0.0))
        skeleton, records = skeleton_phase(noise_panel(3), params)
        assert skeleton.edges == set()
        assert len(records) == 6
        assert all(r.removed and r.level == 0 and r.cond_set == () for r in records)

    def test_sibling_edge_removed_given_common_parent(self, monkeypatch, params):
        table = {(1, 0, ()): 0.0, (2, 0, ()): 0.0, (2, 1, ()): 0.0,
                 (1, 2, ()): 0.4, (1, 2, (0,)): 0.0}
        monkeypatch.setattr(pc_pmime, "pmime_r", fake_pmime(table))
        skeleton, records = skeleton_phase(noise_panel(3), params)
        assert skeleton.edges == {(0, 1), (0, 2)}
        assert [(r.cond_set, r.level, r.removed) for r in records
                if (r.source, r.target) == (1, 2)] == [((), 0, False), ((0,), 1, True)]
        assert orient_edges(skeleton, records).directed_edges() == [(0, 1), (0, 2)]

    def test_independent_autocorrelated_pair(self, params):
        rng = numpy.random.default_rng(5)
        data = numpy.zeros((2000, 2))
        e = rng.standard_normal((2000, 2))
        for t in range(1, 2000):
            data[t] = 0.9 * data[t - 1] + e[t]
        graph = discover(TimeSeriesPanel(("a", "b"), data), params)
        assert graph.num_edges() == 0
        assert len(graph.audit) == 2
        assert all(r.level == 0 and r.removed for r in graph.audit)


class TestOrientEdges:

    def test_single_direction(self):
        skeleton = Skeleton(("a", "b"), {(0, 1)})
        records = [EdgeTestRecord(0, 1, (), 0.6, False, 0),
                   EdgeTestRecord(1, 0, (), 0.0, True, 0)]
        graph = orient_edges(skeleton, records)
        assert graph.directed_edges() == [(0, 1)]
        assert graph.weight(0, 1) == 0.6
        assert graph.method == "pc_pmime"

    def test_weight_is_smallest_r(self):
        skeleton = Skeleton(("a", "b", "c"), {(0, 1)})
        records = [EdgeTestRecord(0, 1, (), 0.6, False, 0),
                   EdgeTestRecord(0, 1, (2,), 0.4, False, 1)]
        assert orient_edges(skeleton, records).weight(0, 1) == 0.4

    def test_both_directions(self):
        skeleton = Skeleton(("a", "b"), {(0, 1), (1, 0)})
        records = [EdgeTestRecord(0, 1, (), 0.6, False, 0),
                   EdgeTestRecord(1, 0, (), 0.2, False, 0)]
        graph = orient_edges(skeleton, records)
        assert graph.directed_edges() == []
        assert graph.bidirected_edges() == [(0, 1)]
        assert graph.weight(1, 0) == 0.2

    def test_empty(self):
        graph = orient_edges(Skeleton(("a", "b"), set()), [])
        assert graph.num_edges() == 0


class TestDiscover:

    @pytest.fixture(scope="class")
    def fork(self):
        panel, truth = generate(StructureSpec("fork", n=1000, seed=0))
        return panel, discover(panel, DiscoveryParams())

    def test_audit_covers_every_ordered_pair(self, fork):
        panel, graph = fork
        level_zero = {(r.source, r.target) for r in graph.audit if r.level == 0}
        assert len(level_zero) == panel.g * (panel.g - 1)

    def test_audit_consistent_with_graph(self, fork):
        _, graph = fork
        params = DiscoveryParams()
        for record in graph.audit:
            assert record.removed == (record.r < params.indep_threshold)
            assert len(record.cond_set) == record.level
            assert record.source not in record.cond_set
            assert record.target not in record.cond_set
        removed = {(r.source, r.target) for r in graph.audit if r.removed}
        for i, j in graph.directed_edges():
            assert (i, j) not in removed
            assert graph.weight(i, j) >= params.indep_threshold
        for i, j in removed:
            assert graph.mark(i, j).value != "directed"

    def test_deterministic(self, fork):
        panel, graph = fork
        again = discover(panel, DiscoveryParams())
        assert again == graph
        assert again.audit == graph.audit

    def test_threads_match_serial(self, fork):
        panel, graph = fork
        assert discover(panel, DiscoveryParams(), n_jobs=2) == graph

    def test_too_short(self):
        with pytest.raises(TooShort):
            discover(noise_panel(3, n=7))

    @pytest.mark.slow
    def test_series_order_does_not_matter(self):
        panel, _ = generate(StructureSpec("fork", n=1000, seed=2))
        graph = discover(panel)
        rng = numpy.random.default_rng(0)
        for _ in range(10):
            order = rng.permutation(panel.g)
            permuted = discover(panel.permute(order))
            assert permuted.permute(numpy.argsort(order)) == graph, f"order {order}"


@pytest.mark.slow
class TestRecovery:
    """End-to-end discovery on the benchmark structures at n=4000."""

    seeds = range(5)

    @pytest.fixture(scope="class")
    def fork(self):
        return self.run("fork")

    @pytest.fixture(scope="class")
    def v_structure(self):
        return self.run("v_structure")

    def run(self, kind):
        runs = []
        for seed in self.seeds:
            panel, truth = generate(StructureSpec(kind, n=4000, seed=seed))
            runs.append((discover(panel), truth))
        return runs

    def test_fork_edges(self, fork):
        exact = 0
        for graph, truth in fork:
            assert truth.directed_edges() == [(0, 1), (0, 2)]
            assert truth.adjacencies() <= graph.adjacencies()
            exact += (graph.directed_edges() == [(0, 1), (0, 2)]
                      and not graph.bidirected_edges())
        assert exact >= 3

    def test_fork_siblings_separated_by_parent(self, fork):
        separated = 0
        for graph, _ in fork:
            tests = {(r.level, r.cond_set): r.removed for r in graph.audit
                     if (r.source, r.target) == (1, 2)}
            # X1 lag 1 carries the X0 lag 2 that drives X2.
            assert not tests[0, ()]
            separated += tests.get((1, (0,)), False)
        assert separated >= 3

    def test_v_structure_edges(self, v_structure):
        exact = 0
        for graph, truth in v_structure:
            assert truth.directed_edges() == [(0, 1), (2, 1)]
            assert truth.adjacencies() <= graph.adjacencies()
            exact += (graph.directed_edges() == [(0, 1), (2, 1)]
                      and not graph.bidirected_edges())
        assert exact >= 3


class TestAudit:

    def test_columns(self, tmp_path):
        records = [EdgeTestRecord(0, 1, (), 0.5, False, 0),
                   EdgeTestRecord(0, 1, (2, 3), 0.0, True, 2)]
        path = tmp_path / "out" / "audit.csv"
        write_audit(records, path)
        rows = pandas.read_csv(path, keep_default_na=False, dtype={"cond_set": str})
        assert list(rows.columns) == ["from", "to", "level", "cond_set", "r", "removed"]
        assert list(rows["cond_set"]) == ["", "2;3"]
        assert list(rows["removed"]) == [False, True]

    def test_frame_of_nothing(self):
        assert audit_frame([]).empty
