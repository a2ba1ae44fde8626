import json

import pytest

from tempoca import Mark, SummaryCausalGraph, read_graph, write_graph
from tempoca.errors import InvalidGraph

NAMES = ("X0", "X1", "X2", "X3")


class TestMarks:

    def test_directed(self):
        graph = SummaryCausalGraph(NAMES, directed=[(0, 1)])
        assert graph.mark(0, 1) is Mark.directed
        assert graph.mark(1, 0) is Mark.absent
        assert graph.directed_edges() == [(0, 1)]

    def test_mutual_directed_pair_becomes_bidirected(self):
        graph = SummaryCausalGraph(NAMES, directed=[(0, 1), (1, 0), (2, 3)])
        assert graph.mark(0, 1) is Mark.bidirected
        assert graph.mark(1, 0) is Mark.bidirected
        assert graph.directed_edges() == [(2, 3)]
        assert graph.bidirected_edges() == [(0, 1)]
        assert graph.num_edges() == 2

    def test_bidirected_is_symmetric(self):
        graph = SummaryCausalGraph(NAMES, bidirected=[(3, 1)])
        assert graph.mark(1, 3) is Mark.bidirected
        assert graph.bidirected_edges() == [(1, 3)]

    def test_directed_over_bidirected(self):
        graph = SummaryCausalGraph(NAMES, directed=[(0, 1)], bidirected=[(0, 1)])
        assert graph.directed_edges() == []
        assert graph.bidirected_edges() == [(0, 1)]

    @pytest.mark.parametrize("edge", [(1, 1), (0, 4), (-1, 2)])
    def test_invalid_edges(self, edge):
        with pytest.raises(InvalidGraph):
            SummaryCausalGraph(NAMES, directed=[edge])

    def test_weights_only_on_edges(self):
        graph = SummaryCausalGraph(
            NAMES, directed=[(0, 1)], weights={(0, 1): 0.4, (2, 3): 0.9})
        assert graph.weight(0, 1) == 0.4
        assert graph.weight(2, 3) is None

    def test_adjacencies(self):
        graph = SummaryCausalGraph(NAMES, directed=[(0, 1), (2, 1)], bidirected=[(0, 3)])
        assert graph.adjacencies() == {
            frozenset((0, 1)), frozenset((1, 2)), frozenset((0, 3))}


class TestGraphIO:

    def graph(self):
        return SummaryCausalGraph(
            NAMES, directed=[(0, 1), (1, 2), (2, 1)], bidirected=[(0, 3)],
            weights={(0, 1): 0.25, (1, 2): 0.5, (2, 1): 0.125}, method="pc_pmime")

    def test_json_round_trip(self, tmp_path):
        graph = self.graph()
        write_graph(graph, tmp_path / "graph.json")
        loaded = read_graph(tmp_path / "graph.json")
        assert loaded == graph
        assert loaded.method == "pc_pmime"

    def test_json_layout(self):
        document = self.graph().to_json()
        assert document["nodes"] == list(NAMES)
        assert {"from": 0, "to": 1, "mark": "directed", "r": 0.25} in document["edges"]
        bidirected = [e for e in document["edges"] if e["mark"] == "bidirected"]
        assert {"from": 1, "to": 2, "mark": "bidirected", "r": 0.5,
                "r_reverse": 0.125} in bidirected
        json.dumps(document)

    def test_unknown_mark(self):
        with pytest.raises(InvalidGraph):
            SummaryCausalGraph.from_json(
                {"nodes": ["a", "b"], "edges": [{"from": 0, "to": 1, "mark": "circle"}]})

    def test_missing_key(self):
        with pytest.raises(InvalidGraph):
            SummaryCausalGraph.from_json({"edges": []})

    def test_dot(self, tmp_path):
        write_graph(self.graph(), tmp_path / "graph.dot")
        dot = (tmp_path / "graph.dot").read_text()
        assert dot.startswith("digraph {")
        assert "0 -> 1" in dot
        assert "1 -> 2 [dir=both]" in dot
        assert "0 -> 3 [dir=both]" in dot

    def test_dot_escapes_labels(self):
        graph = SummaryCausalGraph(('say "hi"', "C:\\data", "plain"), directed=[(0, 1)])
        lines = graph.to_dot().splitlines()
        assert lines[1] == '  0 [label="say \\"hi\\""];'
        assert lines[2] == '  1 [label="C:\\\\data"];'
        assert lines[3] == '  2 [label="plain"];'


class TestPermute:

    def test_relabels_nodes(self):
        graph = SummaryCausalGraph(NAMES, directed=[(0, 1)], bidirected=[(2, 3)],
                                   weights={(0, 1): 0.3})
        permuted = graph.permute([3, 2, 1, 0])
        assert permuted.names == ("X3", "X2", "X1", "X0")
        assert permuted.directed_edges() == [(3, 2)]
        assert permuted.bidirected_edges() == [(0, 1)]
        assert permuted.weight(3, 2) == 0.3

    def test_inverse_restores(self):
        graph = SummaryCausalGraph(NAMES, directed=[(0, 1), (3, 1)], bidirected=[(0, 2)])
        order = [2, 0, 3, 1]
        inverse = [order.index(i) for i in range(4)]
        assert graph.permute(order).permute(inverse) == graph
