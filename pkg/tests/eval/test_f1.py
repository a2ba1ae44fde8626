import pytest

from tempoca import SummaryCausalGraph
from tempoca.errors import NodeMismatch
from tempoca.evaluation import f1_score
from tempoca.simulate import ground_truth

NAMES = ("X0", "X1", "X2")


def graph(directed=(), bidirected=(), names=NAMES):
    return SummaryCausalGraph(names, directed=directed, bidirected=bidirected)


class TestF1Score:

    def test_perfect(self):
        truth = ground_truth("fork")
        score = f1_score(truth, truth)
        assert (score.precision, score.recall, score.f1) == (1.0, 1.0, 1.0)

    def test_empty_estimate(self):
        score = f1_score(graph(), ground_truth("fork"))
        assert (score.precision, score.recall, score.f1) == (0.0, 0.0, 0.0)
        assert score.fn == 2

    def test_extra_edge(self):
        estimate = graph(directed=[(0, 1), (0, 2), (1, 2)])
        score = f1_score(estimate, ground_truth("fork"))
        assert score.precision == pytest.approx(2 / 3)
        assert score.recall == 1.0
        assert score.f1 == pytest.approx(0.8)

    def test_reversed_edge_is_wrong(self):
        score = f1_score(graph(directed=[(1, 0), (0, 2)]), ground_truth("fork"))
        assert (score.tp, score.fp, score.fn) == (1, 1, 1)

    def test_bidirected_matches_only_bidirected(self):
        truth = graph(bidirected=[(1, 2)])
        assert f1_score(graph(bidirected=[(2, 1)]), truth).f1 == 1.0
        assert f1_score(graph(directed=[(1, 2)]), truth).f1 == 0.0
        assert f1_score(graph(bidirected=[(0, 1)]), graph(directed=[(0, 1)])).f1 == 0.0

    def test_adjacency_only(self):
        estimate = graph(directed=[(1, 0)], bidirected=[(0, 2)])
        score = f1_score(estimate, ground_truth("fork"), adjacency_only=True)
        assert score.f1 == 1.0

    def test_node_mismatch(self):
        with pytest.raises(NodeMismatch):
            f1_score(ground_truth("diamond"), ground_truth("fork"))

    def test_both_empty(self):
        assert f1_score(graph(), graph()).f1 == 0.0

    def test_relabelling_both_keeps_score(self):
        estimate = graph(directed=[(0, 1), (1, 2)], bidirected=[(0, 2)])
        truth = ground_truth("mediator")
        order = [2, 0, 1]
        assert f1_score(estimate.permute(order), truth.permute(order)) == \
            f1_score(estimate, truth)

    def test_dropping_false_positive(self):
        truth = ground_truth("fork")
        noisy = f1_score(graph(directed=[(0, 1), (2, 1)]), truth)
        cleaned = f1_score(graph(directed=[(0, 1)]), truth)
        assert cleaned.precision >= noisy.precision
        assert cleaned.recall == noisy.recall
