import io
import random

import pytest
from hypothesis import given, settings, strategies as st

from netfiber.graphcore import degrees
from netfiber.hyper import (
    Hypergraph,
    build_hypergraph,
    degree_report,
    graph_projection,
    hyper_degrees,
    top_k_by_collaborators,
)
from netfiber.ingest import coauthor_counts, parse_bipartite, threshold_graph


def hypergraphs(max_n=10, max_edges=15):
    return st.integers(1, max_n).flatmap(lambda n: st.builds(
        lambda es: Hypergraph(n, tuple(str(i) for i in range(n)), tuple(es)),
        st.lists(st.sets(st.integers(0, n - 1), min_size=1), max_size=max_edges),
    ))


def test_single_ten_author_paper_projects_to_clique():
    h = Hypergraph(10, tuple("abcdefghij"), (frozenset(range(10)),))
    g = graph_projection(h)
    assert len(g.edges) == 45
    assert degrees(g) == [9] * 10


def test_build_from_bipartite():
    b = parse_bipartite(io.StringIO("a,p\nb,p\nc,p\na,q"))
    h = build_hypergraph(b)
    assert h.edges == (frozenset({0, 1, 2}), frozenset({0}))
    prof = hyper_degrees(h)
    assert prof.by_size[0] == {1: 1, 3: 1}
    assert prof.edge_counts == {1: 1, 3: 1}


def test_repeated_hyperedges_kept():
    h = Hypergraph(2, ("a", "b"), (frozenset({0, 1}), frozenset({0, 1})))
    assert hyper_degrees(h).total == [2, 2]
    assert h.distinct_edges()[frozenset({0, 1})] == 2


def test_empty_hyperedge_rejected():
    with pytest.raises(ValueError):
        Hypergraph(2, ("a", "b"), (frozenset(),))


@settings(max_examples=100, deadline=None)
@given(hypergraphs())
def test_degree_size_identity(h):
    prof = hyper_degrees(h)
    # each size-s edge contributes s to the summed size-s degrees
    for s, count in prof.edge_counts.items():
        assert sum(d.get(s, 0) for d in prof.by_size) == s * count
    assert sum(prof.total) == sum(len(e) for e in h.edges)


@settings(max_examples=100, deadline=None)
@given(hypergraphs())
def test_projection_dominance(h):
    g = graph_projection(h)
    prof = hyper_degrees(h)
    deg = degrees(g)
    for v in range(h.n):
        # neighbours in the projection are bounded by the summed co-author slots
        assert deg[v] <= sum((s - 1) * c for s, c in prof.by_size[v].items())
        biggest = max((s for s in prof.by_size[v]), default=1)
        assert deg[v] >= biggest - 1


def test_projection_matches_threshold_one():
    rng = random.Random(1)
    rows = [f"a{rng.randrange(25)},p{rng.randrange(40)}" for _ in range(120)]
    b = parse_bipartite(io.StringIO("\n".join(rows)))
    g = graph_projection(build_hypergraph(b))
    assert g.edges == threshold_graph(coauthor_counts(b), 1).edges


def test_top_by_collaborators():
    h = Hypergraph(4, ("w", "x", "y", "z"), (
        frozenset({0, 1, 2}), frozenset({1, 2}), frozenset({1, 3}), frozenset({0, 1, 2, 3}),
    ))
    r = top_k_by_collaborators(h, 3, 2)
    assert r.entries == (("w", 2), ("x", 2))
    r = top_k_by_collaborators(h, 1, 10)
    assert r.labels[0] == "x" and r.truncated


def test_degree_report_shape():
    h = Hypergraph(3, ("a", "b", "c"), (frozenset({0, 1}), frozenset({0}), frozenset({0, 1, 2})))
    rep = degree_report(h, top=2)
    assert rep["edge_size_counts"] == {"1": 1, "2": 1, "3": 1}
    assert rep["degree_histograms"]["2"] == {"1": 2}
    assert [e["author"] for e in rep["top_by_total_degree"]] == ["a", "b"]
    assert rep["top_by_total_degree"][0]["by_size"] == {"1": 1, "2": 1, "3": 1}
