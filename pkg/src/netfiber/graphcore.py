"""Simple graph/digraph types, degree statistics, dyad census and k-cores."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union


def _default_labels(n: int) -> tuple[str, ...]:
    return tuple(str(i) for i in range(n))


@dataclass(frozen=True)
class SimpleGraph:
    """Loop-free undirected 0/1 network. Edges are stored as ``(i, j)`` with ``i < j``."""

    n: int
    edges: frozenset
    labels: tuple = ()

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", _default_labels(self.n))
        if len(self.labels) != self.n:
            raise ValueError(f"expected {self.n} labels, got {len(self.labels)}")
        norm = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            norm.add((i, j) if i < j else (j, i))
        object.__setattr__(self, "edges", frozenset(norm))

    directed = False

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in sorted(self.edges):
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def subgraph(self, nodes: Sequence[int]) -> "SimpleGraph":
        """Induced subgraph; nodes are renumbered in ascending original order."""
        keep = sorted(set(nodes))
        index = {v: k for k, v in enumerate(keep)}
        edges = frozenset(
            (index[i], index[j]) for i, j in self.edges if i in index and j in index
        )
        return SimpleGraph(len(keep), edges, tuple(self.labels[v] for v in keep))


@dataclass(frozen=True)
class SimpleDigraph:
    """Loop-free directed 0/1 network with ordered edges ``(i, j)`` meaning i -> j."""

    n: int
    edges: frozenset
    labels: tuple = ()

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", _default_labels(self.n))
        if len(self.labels) != self.n:
            raise ValueError(f"expected {self.n} labels, got {len(self.labels)}")
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
        object.__setattr__(self, "edges", frozenset(self.edges))

    directed = True

    def successors(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in sorted(self.edges):
            out[i].append(j)
        return out

    def predecessors(self) -> list[list[int]]:
        inn: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in sorted(self.edges):
            inn[j].append(i)
        return inn

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self.edges

    def mutual_dyads(self) -> frozenset:
        return frozenset((i, j) for i, j in self.edges if i < j and (j, i) in self.edges)

    def subgraph(self, nodes: Sequence[int]) -> "SimpleDigraph":
        keep = sorted(set(nodes))
        index = {v: k for k, v in enumerate(keep)}
        edges = frozenset(
            (index[i], index[j]) for i, j in self.edges if i in index and j in index
        )
        return SimpleDigraph(len(keep), edges, tuple(self.labels[v] for v in keep))


Network = Union[SimpleGraph, SimpleDigraph]


@dataclass(frozen=True)
class DyadCensus:
    mutual: int
    asymmetric: int
    null: int


@dataclass(frozen=True)
class CoreDecomposition:
    core_number: tuple
    mode: str = "undirected"
    degeneracy: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "degeneracy", max(self.core_number, default=0))

    def k_core(self, k: int) -> list[int]:
        return [v for v, c in enumerate(self.core_number) if c >= k]


@dataclass(frozen=True)
class Ranking:
    """Ranked ``(label, score)`` entries; ``truncated`` is set when fewer than requested exist."""

    entries: tuple
    truncated: bool = False

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.entries]


def degrees(g: SimpleGraph) -> list[int]:
    deg = [0] * g.n
    for i, j in g.edges:
        deg[i] += 1
        deg[j] += 1
    return deg


def in_out_degrees(d: SimpleDigraph) -> tuple[list[int], list[int]]:
    indeg = [0] * d.n
    outdeg = [0] * d.n
    for i, j in d.edges:
        outdeg[i] += 1
        indeg[j] += 1
    return indeg, outdeg


def dyad_census(d: SimpleDigraph) -> DyadCensus:
    mutual = asym = 0
    for i, j in d.edges:
        if (j, i) in d.edges:
            mutual += 1
        else:
            asym += 1
    mutual //= 2
    return DyadCensus(mutual, asym, d.n * (d.n - 1) // 2 - mutual - asym)


def _bucket_peel(deg: list[int], lower: list[list[int]]) -> list[int]:
    """Batagelj-Zaversnik bucket peeling.

    ``lower[v]`` lists the nodes whose peeling degree drops when ``v`` is removed.
    """
    n = len(deg)
    if n == 0:
        return []
    deg = list(deg)
    maxdeg = max(deg)
    bins = [0] * (maxdeg + 1)
    for d in deg:
        bins[d] += 1
    start = 0
    for d in range(maxdeg + 1):
        bins[d], start = start, start + bins[d]
    pos = [0] * n
    vert = [0] * n
    for v in range(n):
        pos[v] = bins[deg[v]]
        vert[pos[v]] = v
        bins[deg[v]] += 1
    for d in range(maxdeg, 0, -1):
        bins[d] = bins[d - 1]
    bins[0] = 0
    for i in range(n):
        v = vert[i]
        for u in lower[v]:
            if deg[u] > deg[v]:
                du = deg[u]
                pu = pos[u]
                pw = bins[du]
                w = vert[pw]
                if u != w:
                    pos[u], pos[w] = pw, pu
                    vert[pu], vert[pw] = w, u
                bins[du] += 1
                deg[u] -= 1
    return deg


def core_decomposition(g: SimpleGraph) -> CoreDecomposition:
    """Undirected core numbers in O(n + m)."""
    return CoreDecomposition(tuple(_bucket_peel(degrees(g), g.neighbors())), "undirected")


def directed_core_in(d: SimpleDigraph) -> CoreDecomposition:
    """Core numbers under in-degree peeling.

    Removing a node deletes its out-edges, lowering the in-degree of its successors.
    """
    indeg, _ = in_out_degrees(d)
    return CoreDecomposition(tuple(_bucket_peel(indeg, d.successors())), "directed-in")


def innermost_core(c: CoreDecomposition, g: Network) -> tuple[list[int], Network]:
    if g.n == 0:
        raise ValueError("innermost core of an empty graph is undefined")
    nodes = [v for v, k in enumerate(c.core_number) if k == c.degeneracy]
    return nodes, g.subgraph(nodes)


def top_k_by_core_degree(c: CoreDecomposition, g: Network, k: int) -> Ranking:
    """Rank innermost-core nodes by (in-)degree inside the core subgraph.

    Ties break on label ascending. Asking for more nodes than the core holds
    returns the whole core with ``truncated=True``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    _, core = innermost_core(c, g)
    if isinstance(core, SimpleDigraph):
        score, _ = in_out_degrees(core)
    else:
        score = degrees(core)
    order = sorted(range(core.n), key=lambda v: (-score[v], core.labels[v]))
    entries = tuple((core.labels[v], score[v]) for v in order[:k])
    return Ranking(entries, truncated=k > core.n)
