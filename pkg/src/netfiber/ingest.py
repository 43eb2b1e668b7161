"""Raw authorship/citation CSV ingestion and derived author networks."""

from __future__ import annotations

import csv
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .graphcore import Network, SimpleDigraph, SimpleGraph

log = logging.getLogger(__name__)

UNKNOWN = "unknown"


class IngestError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass(frozen=True)
class AuthorPaperBipartite:
    authors: tuple
    papers: tuple
    incidence: tuple
    paper_meta: dict = field(default_factory=dict)
    duplicates: int = 0

    def __post_init__(self):
        authors, papers = set(self.authors), set(self.papers)
        seen = set()
        for a, p in self.incidence:
            if a not in authors or p not in papers:
                raise IngestError(f"incidence ({a}, {p}) references an undeclared node")
            if (a, p) in seen:
                raise IngestError(f"duplicate incidence ({a}, {p})")
            seen.add((a, p))
        if {p for _, p in self.incidence} != papers:
            raise IngestError("every paper needs at least one author")

    def paper_authors(self) -> dict[str, list[int]]:
        """Paper id -> author indices, in incidence order."""
        index = {a: i for i, a in enumerate(self.authors)}
        groups: dict[str, list[int]] = {p: [] for p in self.papers}
        for a, p in self.incidence:
            groups[p].append(index[a])
        return groups


@dataclass(frozen=True)
class PaperCitationDigraph:
    edges: tuple
    dropped_self_citations: int = 0
    duplicates: int = 0


@dataclass(frozen=True)
class WeightedDigraph:
    n: int
    labels: tuple
    weights: dict

    def __post_init__(self):
        for (i, j), w in self.weights.items():
            if i == j:
                raise ValueError(f"self-loop weight at {i}")
            if w < 1:
                raise ValueError(f"non-positive weight {w} at ({i}, {j})")


@dataclass(frozen=True)
class WeightedGraph:
    """Counts on unordered pairs, keyed ``(i, j)`` with ``i < j``."""

    n: int
    labels: tuple
    weights: dict

    def __post_init__(self):
        for (i, j), w in self.weights.items():
            if not i < j:
                raise ValueError(f"key ({i}, {j}) must satisfy i < j")
            if w < 1:
                raise ValueError(f"non-positive weight {w} at ({i}, {j})")


@dataclass(frozen=True)
class CitationTable:
    """Sparse author x author x area x journal citation counts."""

    labels: tuple
    areas: tuple
    journals: tuple
    entries: dict

    @property
    def dims(self) -> tuple[int, int, int, int]:
        n = len(self.labels)
        return n, n, len(self.areas), len(self.journals)


def _rows(reader: Iterable[str], header_token: str):
    """Yield ``(line_number, fields)`` for data rows, skipping a detected header."""
    first = True
    for lineno, row in enumerate(csv.reader(reader), start=1):
        if not row or all(not f.strip() for f in row):
            continue
        row = [f.strip() for f in row]
        if first:
            first = False
            if row[0] == header_token:
                continue
        yield lineno, row


def parse_bipartite(reader: Iterable[str]) -> AuthorPaperBipartite:
    """Parse ``author_id,paper_id[,area,journal]`` rows."""
    authors: dict[str, None] = {}
    papers: dict[str, None] = {}
    incidence: dict[tuple, None] = {}
    meta: dict[str, tuple] = {}
    duplicates = 0
    for lineno, row in _rows(reader, "author_id"):
        if len(row) not in (2, 4) or not all(row):
            raise IngestError(f"line {lineno}: expected author_id,paper_id[,area,journal]")
        a, p = row[0], row[1]
        if len(row) == 4:
            m = (row[2], row[3])
            if meta.setdefault(p, m) != m:
                raise IngestError(f"line {lineno}: conflicting area/journal for paper {p}")
        authors.setdefault(a)
        papers.setdefault(p)
        if (a, p) in incidence:
            duplicates += 1
        else:
            incidence[(a, p)] = None
    if not incidence:
        raise IngestError("empty authorship file")
    if duplicates:
        log.warning("dropped %d duplicate authorship rows", duplicates)
    return AuthorPaperBipartite(
        tuple(authors), tuple(papers), tuple(incidence), meta, duplicates
    )


def parse_citations(reader: Iterable[str]) -> PaperCitationDigraph:
    """Parse ``citing_paper,cited_paper`` rows; self-citing papers are dropped."""
    edges: dict[tuple, None] = {}
    dropped = duplicates = 0
    for lineno, row in _rows(reader, "citing_paper"):
        if len(row) != 2 or not all(row):
            raise IngestError(f"line {lineno}: expected citing_paper,cited_paper")
        if row[0] == row[1]:
            dropped += 1
            continue
        key = (row[0], row[1])
        if key in edges:
            duplicates += 1
        edges[key] = None
    if dropped:
        log.warning("dropped %d self-citation rows", dropped)
    return PaperCitationDigraph(tuple(edges), dropped, duplicates)


def coauthor_counts(b: AuthorPaperBipartite) -> WeightedGraph:
    weights: dict[tuple, int] = defaultdict(int)
    for members in b.paper_authors().values():
        for i, j in combinations(sorted(members), 2):
            weights[(i, j)] += 1
    return WeightedGraph(len(b.authors), b.authors, dict(weights))


def _check_papers(b: AuthorPaperBipartite, pc: PaperCitationDigraph) -> dict:
    groups = b.paper_authors()
    for src, dst in pc.edges:
        for p in (src, dst):
            if p not in groups:
                raise IngestError(f"citation references unknown paper {p!r}")
    return groups


def author_citation_counts(
    b: AuthorPaperBipartite, pc: PaperCitationDigraph
) -> WeightedDigraph:
    """Author-to-author citation counts with self-citations removed.

    Every (citing author, cited author) pair of a paper citation adds one count.
    """
    groups = _check_papers(b, pc)
    weights: dict[tuple, int] = defaultdict(int)
    for src, dst in pc.edges:
        for i in groups[src]:
            for j in groups[dst]:
                if i != j:
                    weights[(i, j)] += 1
    return WeightedDigraph(len(b.authors), b.authors, dict(weights))


def _check_c(c: int) -> None:
    if c < 1:
        raise ValueError("threshold must be >= 1")


def threshold_digraph(w: WeightedDigraph, c: int) -> SimpleDigraph:
    _check_c(c)
    return SimpleDigraph(w.n, frozenset(k for k, v in w.weights.items() if v >= c), w.labels)


def threshold_graph(w: WeightedGraph, c: int) -> SimpleGraph:
    _check_c(c)
    return SimpleGraph(w.n, frozenset(k for k, v in w.weights.items() if v >= c), w.labels)


def connected_components(g: Network) -> list[list[int]]:
    """Components (weak for digraphs) as sorted node lists, ordered by smallest member."""
    parent = list(range(g.n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in g.edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    comps: dict[int, list[int]] = defaultdict(list)
    for v in range(g.n):
        comps[find(v)].append(v)
    return sorted(comps.values(), key=lambda c: c[0])


def largest_connected_component(g: Network) -> Network:
    """Induced subgraph on the largest (weakly) connected component.

    Ties go to the component containing the smallest node index.
    """
    if g.n == 0:
        raise ValueError("graph has no nodes")
    comps = connected_components(g)
    best = max(comps, key=lambda c: (len(c), -c[0]))
    return g.subgraph(best)


def citation_table(
    b: AuthorPaperBipartite,
    pc: PaperCitationDigraph,
    areas: Optional[Sequence[str]] = None,
    journals: Optional[Sequence[str]] = None,
) -> CitationTable:
    """Citation counts split by the citing paper's area and journal.

    Papers without metadata fall into the ``"unknown"`` category. When
    ``areas``/``journals`` are omitted the observed categories are used, sorted.
    """
    groups = _check_papers(b, pc)

    def category(p: str, k: int) -> str:
        m = b.paper_meta.get(p)
        return m[k] if m else UNKNOWN

    cited = [(src, dst) for src, dst in pc.edges]
    if areas is None:
        areas = sorted({category(src, 0) for src, _ in cited})
    if journals is None:
        journals = sorted({category(src, 1) for src, _ in cited})
    area_ix = {a: k for k, a in enumerate(areas)}
    journal_ix = {a: k for k, a in enumerate(journals)}
    entries: dict[tuple, int] = defaultdict(int)
    for src, dst in cited:
        try:
            ja, jk = area_ix[category(src, 0)], journal_ix[category(src, 1)]
        except KeyError as exc:
            raise IngestError(f"paper {src!r}: category {exc.args[0]!r} not listed") from None
        for i in groups[src]:
            for j in groups[dst]:
                if i != j:
                    entries[(i, j, ja, jk)] += 1
    return CitationTable(b.authors, tuple(areas), tuple(journals), dict(entries))


def collapse_table(t: CitationTable) -> WeightedDigraph:
    weights: dict[tuple, int] = defaultdict(int)
    for (i, j, _, _), v in t.entries.items():
        if v:
            weights[(i, j)] += v
    return WeightedDigraph(len(t.labels), t.labels, dict(weights))
