import itertools

import pytest

from holobf.common import DomainError, ResourceError
from holobf.graphs import (
    VERTEX_LIBRARY, ChiralGraph, ChiralVertex, Edge, GraphClass, betti_number,
    classify, cycle_edges, enumerate_graphs, format_graph, graph_id,
    parse_graph, weight, wheel,
)

CUBIC = VERTEX_LIBRARY["cubic"]
CS = VERTEX_LIBRARY["cs"]


class TestVertices:

    def test_library(self):
        assert CUBIC.alpha_legs == 2 and CUBIC.beta_legs == 1
        assert CS.weight == 0 and CUBIC.weight == 1
        assert CS.deriv_orders == (0, 1)

    def test_validation(self):
        with pytest.raises(DomainError):
            ChiralVertex(2, 2)
        with pytest.raises(DomainError):
            ChiralVertex(0, 1)
        with pytest.raises(DomainError):
            ChiralVertex(2, 1, (0, 0))
        with pytest.raises(DomainError):
            ChiralVertex(2, 1, (0, -1, 0))
        assert ChiralVertex(3, 1).deriv_orders == (0, 0, 0, 0)

    def test_weight_of_functionals(self):
        assert weight("<alpha, d alpha>") == 0
        assert weight("<beta, [alpha, alpha]>") == 1
        assert weight("1") == 0
        assert weight(CUBIC) == 1


class TestGraphs:

    def test_leg_constraints(self):
        with pytest.raises(DomainError):
            ChiralGraph((CUBIC, CUBIC), [Edge(0, 1, 0), Edge(0, 1, 1)])
        with pytest.raises(DomainError):
            ChiralGraph((CUBIC, CUBIC, CUBIC), [Edge(0, 2, 0), Edge(1, 2, 0)])
        with pytest.raises(DomainError):
            ChiralGraph((CS, CUBIC), [Edge(0, 1, 0)])
        with pytest.raises(DomainError):
            ChiralGraph((CUBIC, CUBIC), [Edge(0, 1, 2)])

    def test_single_cubic_vertex(self):
        assert classify(ChiralGraph((CUBIC,))) is GraphClass.BETA_ROOTED_TREE

    def test_single_cs_vertex(self):
        assert classify(ChiralGraph((CS,))) is GraphClass.ISOLATED_VERTEX

    def test_two_vertex_wheel(self):
        g = ChiralGraph((CUBIC, CUBIC), [Edge(0, 1, 0), Edge(1, 0, 0)])
        assert classify(g) is GraphClass.ONE_LOOP_WHEEL
        assert betti_number(g) == 1
        assert g.external_beta_legs() == []
        assert g.external_alpha_legs() == [(0, 1), (1, 1)]

    def test_cubic_into_cs(self):
        g = ChiralGraph((CUBIC, CS), [Edge(0, 1, 0)])
        assert classify(g) is GraphClass.ISOLATED_VERTEX
        assert g.external_beta_legs() == []
        assert len(g.external_alpha_legs()) == 3

    def test_disconnected(self):
        with pytest.raises(DomainError):
            classify(ChiralGraph((CUBIC, CUBIC)))
        with pytest.raises(DomainError):
            classify(ChiralGraph(()))

    def test_wheel_cycle(self):
        g = wheel(4)
        edges = cycle_edges(g)
        assert len(edges) == 4
        for a, b in zip(edges, edges[1:] + edges[:1]):
            assert a.target == b.source
        assert classify(wheel(1)) is GraphClass.ONE_LOOP_WHEEL
        with pytest.raises(DomainError):
            cycle_edges(ChiralGraph((CUBIC, CUBIC), [Edge(0, 1, 0)]))
        with pytest.raises(DomainError):
            wheel(3, "cs")

    def test_graph_id_is_isomorphism_invariant(self):
        relabeled = ChiralGraph((CUBIC,)*3, [Edge(0, 2, 0), Edge(2, 1, 0), Edge(1, 0, 0)])
        assert graph_id(relabeled) == graph_id(wheel(3))
        assert graph_id(wheel(3)) != graph_id(wheel(2))


class TestEnumeration:

    def test_empty(self):
        assert enumerate_graphs([]) == []

    def test_two_cubic_vertices(self):
        graphs = enumerate_graphs(["cubic", "cubic"])
        classes = sorted(classify(g).value for g in graphs)
        assert classes == ["beta_rooted_tree", "one_loop_wheel"]

    def test_three_cubic_vertices(self):
        graphs = enumerate_graphs(["cubic"] * 3)
        classes = [classify(g) for g in graphs]
        assert classes.count(GraphClass.BETA_ROOTED_TREE) == 2
        assert classes.count(GraphClass.ONE_LOOP_WHEEL) == 2

    def test_cubic_and_cs(self):
        graphs = enumerate_graphs(["cubic", "cs"])
        # the cubic beta-leg feeds either the plain or the differentiated cs leg
        assert len(graphs) == 2
        assert all(classify(g) is GraphClass.ISOLATED_VERTEX for g in graphs)

    def test_self_loops(self):
        assert len(enumerate_graphs(["cubic"])) == 1
        graphs = enumerate_graphs(["cubic"], self_loops=True)
        assert sorted(classify(g).value for g in graphs) == ["beta_rooted_tree", "one_loop_wheel"]

    def test_no_duplicates(self):
        graphs = enumerate_graphs(["cubic"] * 4)
        ids = [graph_id(g) for g in graphs]
        assert len(set(ids)) == len(ids)

    def test_budget(self):
        with pytest.raises(ResourceError):
            enumerate_graphs(["cubic"] * 8)

    @pytest.mark.parametrize("multiset", [
        ["cubic"] * 7,
        ["cubic"] * 6 + ["cs"],
        ["quad", "cubic", "cubic", "dcubic", "dcubic", "cubic", "cs"],
        ["dcubic"] * 3 + ["quad"] * 2,
    ])
    def test_one_loop_closure(self, multiset):
        graphs = enumerate_graphs(multiset)
        assert graphs
        for g in graphs:
            assert betti_number(g) <= 1
            cls = classify(g)
            assert cls is not GraphClass.INADMISSIBLE
            if cls is GraphClass.ONE_LOOP_WHEEL:
                assert g.external_beta_legs() == []
            G = g.to_networkx()
            for v, vertex in enumerate(g.vertices):
                assert G.out_degree(v) <= 1
                assert G.in_degree(v) <= vertex.alpha_legs

    def test_small_multisets_exhaustively(self):
        names = sorted(VERTEX_LIBRARY)
        for size in range(1, 5):
            for multiset in itertools.combinations_with_replacement(names, size):
                for g in enumerate_graphs(multiset, self_loops=True):
                    assert classify(g) is not GraphClass.INADMISSIBLE


class TestTextFormat:

    def test_wheel_shorthand(self):
        assert parse_graph("wheel 3") == wheel(3)
        assert parse_graph("wheel 2 dcubic") == wheel(2, "dcubic")

    def test_round_trip(self):
        g = ChiralGraph((CUBIC, CS, ChiralVertex(3, 1, (1, 0, 0, 2), "custom")),
                        [Edge(0, 1, 1), Edge(2, 0, 0)])
        assert parse_graph(format_graph(g)) == g

    def test_semicolons_and_comments(self):
        g = parse_graph("vertex cubic; vertex cs  # the CS term\nedge 0 -> 1 leg=1")
        assert classify(g) is GraphClass.ISOLATED_VERTEX
        assert g.edges == (Edge(0, 1, 1),)

    def test_line_diagnostics(self):
        with pytest.raises(DomainError, match="line 2"):
            parse_graph("vertex cubic\nvertx cs")
        with pytest.raises(DomainError):
            parse_graph("vertex nonsense")
        with pytest.raises(DomainError):
            parse_graph("vertex cubic\nwheel 2")
