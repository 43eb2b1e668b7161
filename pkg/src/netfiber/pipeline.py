"""Reusable analysis pipelines: load CSVs, build thresholded networks, export DOT."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .graphcore import (
    Network,
    SimpleDigraph,
    SimpleGraph,
    core_decomposition,
    degrees,
    directed_core_in,
    dyad_census,
    in_out_degrees,
    innermost_core,
    top_k_by_core_degree,
)
from .hyper import Hypergraph
from .ingest import (
    AuthorPaperBipartite,
    IngestError,
    PaperCitationDigraph,
    author_citation_counts,
    citation_table,
    coauthor_counts,
    collapse_table,
    connected_components,
    largest_connected_component,
    parse_bipartite,
    parse_citations,
    threshold_digraph,
    threshold_graph,
)

AUTHORS_FILE = "authorship.csv"
CITATIONS_FILE = "citations.csv"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


@dataclass(frozen=True)
class Inputs:
    bipartite: AuthorPaperBipartite
    citations: Optional[PaperCitationDigraph]
    paths: tuple  # (path, sha256) pairs in load order


def resolve_paths(authors=None, citations=None, data=None) -> tuple[Path, Optional[Path]]:
    """Explicit files win; otherwise look for the standard names inside ``data``."""
    if data is not None:
        data = Path(data)
        authors = authors or data / AUTHORS_FILE
        if citations is None and (data / CITATIONS_FILE).exists():
            citations = data / CITATIONS_FILE
    if authors is None:
        raise IngestError("no authorship file given (use --authors or --data)")
    return Path(authors), Path(citations) if citations is not None else None


def load_inputs(authors, citations=None) -> Inputs:
    paths = []
    with open(authors, encoding="utf-8", newline="") as fh:
        b = parse_bipartite(fh)
    paths.append((str(authors), sha256_file(authors)))
    pc = None
    if citations is not None:
        with open(citations, encoding="utf-8", newline="") as fh:
            pc = parse_citations(fh)
        paths.append((str(citations), sha256_file(citations)))
    return Inputs(b, pc, tuple(paths))


def _need_citations(inp: Inputs) -> PaperCitationDigraph:
    if inp.citations is None:
        raise IngestError("this analysis needs a citation file (use --citations or --data)")
    return inp.citations


def citation_network(inp: Inputs, c: int, lcc: bool = False) -> SimpleDigraph:
    d = threshold_digraph(author_citation_counts(inp.bipartite, _need_citations(inp)), c)
    return largest_connected_component(d) if lcc else d


def coauthor_network(inp: Inputs, c: int, lcc: bool = False) -> SimpleGraph:
    g = threshold_graph(coauthor_counts(inp.bipartite), c)
    return largest_connected_component(g) if lcc else g


def network_summary(g: Network) -> dict:
    comps = connected_components(g)
    out = {
        "directed": g.directed,
        "n_nodes": g.n,
        "n_edges": len(g.edges),
        "n_components": len(comps),
        "largest_component_size": max((len(c) for c in comps), default=0),
        "connectivity": "weak" if g.directed else "undirected",
    }
    if g.directed:
        census = dyad_census(g)
        out["dyad_census"] = {
            "mutual": census.mutual, "asymmetric": census.asymmetric, "null": census.null,
        }
        indeg, outdeg = in_out_degrees(g)
        out["isolates"] = sum(1 for a, b in zip(indeg, outdeg) if a == b == 0)
    else:
        out["isolates"] = sum(1 for d in degrees(g) if d == 0)
    return out


def ingest_summary(inp: Inputs) -> dict:
    b = inp.bipartite
    co = coauthor_counts(b)
    out = {
        "n_authors": len(b.authors),
        "n_papers": len(b.papers),
        "n_authorships": len(b.incidence),
        "duplicate_authorship_rows": b.duplicates,
        "papers_with_metadata": len(b.paper_meta),
        "coauthor_pairs": len(co.weights),
        "coauthor_total": sum(co.weights.values()),
    }
    if inp.citations is not None:
        pc = inp.citations
        w = author_citation_counts(b, pc)
        table = citation_table(b, pc)
        out.update({
            "n_paper_citations": len(pc.edges),
            "dropped_self_citing_papers": pc.dropped_self_citations,
            "duplicate_citation_rows": pc.duplicates,
            "author_citation_pairs": len(w.weights),
            "author_citation_total": sum(w.weights.values()),
            "citation_table": {
                "dims": list(table.dims),
                "areas": list(table.areas),
                "journals": list(table.journals),
                "nonzero_cells": len(table.entries),
                "collapses_to_author_counts": collapse_table(table).weights == w.weights,
            },
        })
    return out


def degree_summary(g: Network, top: int) -> dict:
    def ranked(score):
        order = sorted(range(g.n), key=lambda v: (-score[v], g.labels[v]))[:top]
        return [{"node": g.labels[v], "degree": score[v]} for v in order]

    def hist(score):
        counts: dict[int, int] = {}
        for s in score:
            counts[s] = counts.get(s, 0) + 1
        return {str(k): counts[k] for k in sorted(counts)}

    if g.directed:
        indeg, outdeg = in_out_degrees(g)
        return {
            "in_degree_histogram": hist(indeg),
            "out_degree_histogram": hist(outdeg),
            "top_in_degree": ranked(indeg),
            "top_out_degree": ranked(outdeg),
        }
    deg = degrees(g)
    return {"degree_histogram": hist(deg), "top_degree": ranked(deg)}


def core_analysis(g: Network, top: int) -> dict:
    c = directed_core_in(g) if g.directed else core_decomposition(g)
    nodes, core = innermost_core(c, g)
    ranking = top_k_by_core_degree(c, g, top)
    return {
        "mode": c.mode,
        "degeneracy": c.degeneracy,
        "innermost_core": {
            "size": len(nodes),
            "edges": len(core.edges),
            "members": sorted(g.labels[v] for v in nodes),
            "components": [
                [core.labels[v] for v in comp] for comp in connected_components(core)
            ],
        },
        "ranking": [{"node": lab, "score": s} for lab, s in ranking.entries],
        "ranking_score": "in-degree within the innermost core" if g.directed
        else "degree within the innermost core",
        "truncated": ranking.truncated,
    }


def _quote(s: str) -> str:
    return json.dumps(str(s), ensure_ascii=False)


def network_dot(g: Network, name: str = "G") -> str:
    """DOT source for a simple (di)graph, nodes and edges in sorted order."""
    arrow = "->" if g.directed else "--"
    lines = [f"{'digraph' if g.directed else 'graph'} {name} {{"]
    for v in range(g.n):
        lines.append(f"  n{v} [label={_quote(g.labels[v])}];")
    for i, j in sorted(g.edges):
        lines.append(f"  n{i} {arrow} n{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def core_dot(g: Network) -> str:
    c = directed_core_in(g) if g.directed else core_decomposition(g)
    _, core = innermost_core(c, g)
    return network_dot(core, "innermost_core")


def hypergraph_dot(h: Hypergraph, min_size: int = 1, papers: Optional[tuple] = None) -> str:
    """Bipartite view: authors as ellipses, each hyperedge as a small square junction."""
    lines = ["graph hypergraph {", "  node [shape=ellipse];"]
    keep = [(k, e) for k, e in enumerate(h.edges) if len(e) >= min_size]
    used = sorted({v for _, e in keep for v in e})
    for v in used:
        lines.append(f"  a{v} [label={_quote(h.labels[v])}];")
    for k, e in keep:
        tip = papers[k] if papers else str(k)
        lines.append(f"  e{k} [shape=square, label=\"\", width=0.12, tooltip={_quote(tip)}];")
        for v in sorted(e):
            lines.append(f"  e{k} -- a{v};")
    lines.append("}")
    return "\n".join(lines) + "\n"
