"""Author citation and coauthorship networks: beta and p1 fits, exact fiber tests, k-cores."""

__version__ = "0.1.0"

from .exacttest import (  # noqa: E402
    FiberConstraints,
    FiberWalkConfig,
    GofResult,
    beta_fiber_move,
    enumerate_fiber,
    exact_gof_test,
    p1_fiber_move,
    run_chains,
)
from .graphcore import (  # noqa: E402
    CoreDecomposition,
    DyadCensus,
    SimpleDigraph,
    SimpleGraph,
    core_decomposition,
    directed_core_in,
    dyad_census,
    innermost_core,
    top_k_by_core_degree,
)
from .hyper import Hypergraph, build_hypergraph, graph_projection, hyper_degrees  # noqa: E402
from .ingest import (  # noqa: E402
    author_citation_counts,
    citation_table,
    coauthor_counts,
    collapse_table,
    largest_connected_component,
    parse_bipartite,
    parse_citations,
    threshold_digraph,
    threshold_graph,
)
from .models import (  # noqa: E402
    BetaParams,
    DyadProbabilities,
    P1Params,
    beta_edge_probs,
    dyad_probs,
    fit_beta,
    fit_p1,
    gof_statistic,
)
