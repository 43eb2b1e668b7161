"""Hypergraph view of authorship: one hyperedge per paper."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations

from .graphcore import Ranking, SimpleGraph
from .ingest import AuthorPaperBipartite


@dataclass(frozen=True)
class Hypergraph:
    """Multiset of author-index sets over ``n`` labelled nodes."""

    n: int
    labels: tuple
    edges: tuple

    def __post_init__(self):
        edges = tuple(frozenset(e) for e in self.edges)
        for e in edges:
            if not e:
                raise ValueError("hyperedges must be non-empty")
            if min(e) < 0 or max(e) >= self.n:
                raise ValueError(f"hyperedge {sorted(e)} out of range")
        object.__setattr__(self, "edges", edges)

    def distinct_edges(self) -> Counter:
        """Deduplicated view: hyperedge -> multiplicity."""
        return Counter(self.edges)


@dataclass(frozen=True)
class HyperDegreeProfile:
    labels: tuple
    by_size: tuple  # per author: {edge size: count}
    edge_counts: dict  # edge size -> number of hyperedges

    @property
    def total(self) -> list[int]:
        return [sum(d.values()) for d in self.by_size]

    def histogram(self, size: int) -> dict[int, int]:
        """Size-``size`` degree -> number of authors with that degree (zeros omitted)."""
        return dict(sorted(Counter(d[size] for d in self.by_size if d.get(size)).items()))


def build_hypergraph(b: AuthorPaperBipartite) -> Hypergraph:
    groups = b.paper_authors()
    return Hypergraph(len(b.authors), b.authors, tuple(groups[p] for p in b.papers))


def hyper_degrees(h: Hypergraph) -> HyperDegreeProfile:
    by_size: list[Counter] = [Counter() for _ in range(h.n)]
    for e in h.edges:
        for v in e:
            by_size[v][len(e)] += 1
    edge_counts = Counter(len(e) for e in h.edges)
    return HyperDegreeProfile(
        h.labels, tuple(dict(sorted(c.items())) for c in by_size), dict(sorted(edge_counts.items()))
    )


def top_k_by_collaborators(h: Hypergraph, min_size: int, k: int) -> Ranking:
    """Authors ranked by number of papers with at least ``min_size`` authors."""
    if min_size < 1:
        raise ValueError("min_size must be >= 1")
    counts = [0] * h.n
    for e in h.edges:
        if len(e) >= min_size:
            for v in e:
                counts[v] += 1
    order = sorted(range(h.n), key=lambda v: (-counts[v], h.labels[v]))
    return Ranking(tuple((h.labels[v], counts[v]) for v in order[:k]), truncated=k > h.n)


def graph_projection(h: Hypergraph) -> SimpleGraph:
    """Clique expansion: {i, j} is an edge iff some hyperedge holds both."""
    edges = set()
    for e in h.edges:
        edges.update(combinations(sorted(e), 2))
    return SimpleGraph(h.n, frozenset(edges), h.labels)


def degree_report(h: Hypergraph, top: int = 3) -> dict:
    """JSON-ready degree profile binned by edge size."""
    prof = hyper_degrees(h)
    total = prof.total
    order = sorted(range(h.n), key=lambda v: (-total[v], h.labels[v]))[:top]
    return {
        "n_authors": h.n,
        "n_hyperedges": len(h.edges),
        "n_distinct_hyperedges": len(h.distinct_edges()),
        "edge_size_counts": {str(s): c for s, c in prof.edge_counts.items()},
        "degree_histograms": {
            str(s): {str(d): c for d, c in prof.histogram(s).items()}
            for s in prof.edge_counts
        },
        "top_by_total_degree": [
            {
                "author": h.labels[v],
                "total": total[v],
                "by_size": {str(s): c for s, c in prof.by_size[v].items()},
            }
            for v in order
        ],
    }
