"""Command-line front end. Every subcommand prints one JSON report (or DOT text)."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .exacttest import FiberWalkConfig, dump_samples, run_chains
from .hyper import build_hypergraph, degree_report, top_k_by_collaborators
from .ingest import IngestError
from .models import NonexistenceError, beta_report, fit_beta, fit_p1, p1_report
from .pipeline import (
    citation_network,
    coauthor_network,
    core_analysis,
    core_dot,
    degree_summary,
    hypergraph_dot,
    ingest_summary,
    load_inputs,
    network_summary,
    resolve_paths,
)

SEED_ENV = "NETFIBER_SEED"
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _threshold(text: str) -> int:
    try:
        c = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if c < 1:
        raise argparse.ArgumentTypeError("threshold must be ≥ 1")
    return c


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be ≥ 1")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be ≥ 0")
    return v


def _inputs(p: argparse.ArgumentParser, citations: bool = True) -> None:
    g = p.add_argument_group("inputs")
    g.add_argument("--authors", metavar="CSV", help="author_id,paper_id[,area,journal] rows")
    if citations:
        g.add_argument("--citations", metavar="CSV", help="citing_paper,cited_paper rows")
    g.add_argument("--data", metavar="DIR",
                   help="directory holding authorship.csv and citations.csv")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--record-time", action="store_true",
                   help="store wall-clock seconds in the manifest (output no longer byte-stable)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="netfiber", description=__doc__)
    parser.add_argument("--version", action="version", version=f"netfiber {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="parse CSVs and summarize derived counts")
    _inputs(p)
    _common(p)

    p = sub.add_parser("threshold", help="threshold a count network at c")
    _inputs(p)
    p.add_argument("--network", choices=["citation", "coauthor"], default="citation")
    p.add_argument("--c", "--threshold", dest="c", type=_threshold, required=True)
    p.add_argument("--lcc", action="store_true", help="keep only the largest component")
    p.add_argument("--edges", action="store_true", help="include the edge list")
    _common(p)

    p = sub.add_parser("cores", help="k-core decomposition and innermost-core ranking")
    _inputs(p)
    p.add_argument("--mode", choices=["undirected", "directed-in"], default="directed-in")
    p.add_argument("--c", "--threshold", dest="c", type=_threshold, default=1)
    p.add_argument("--top", type=_positive, default=10)
    _common(p)

    p = sub.add_parser("degrees", help="degree histograms and top nodes")
    _inputs(p)
    p.add_argument("--network", choices=["citation", "coauthor"], default="citation")
    p.add_argument("--c", "--threshold", dest="c", type=_threshold, default=1)
    p.add_argument("--lcc", action="store_true")
    p.add_argument("--top", type=_positive, default=10)
    _common(p)

    p = sub.add_parser("hyper", help="hypergraph degrees binned by paper size")
    _inputs(p, citations=False)
    p.add_argument("--top", type=_positive, default=3)
    p.add_argument("--min-size", type=_positive, action="append",
                   help="also rank authors by papers with at least this many authors "
                        "(repeatable)")
    _common(p)

    p = sub.add_parser("fit-beta", help="fit the beta model to a coauthorship network")
    _inputs(p, citations=False)
    p.add_argument("--c", "--threshold", dest="c", type=_threshold, default=2)
    p.add_argument("--lcc", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=_positive, default=100_000)
    _common(p)

    p = sub.add_parser("fit-p1", help="fit a p1 model to the author citation network")
    _inputs(p)
    p.add_argument("--c", "--threshold", dest="c", type=_threshold, default=1)
    p.add_argument("--lcc", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--rho", choices=["zero", "constant", "dyadic"], default="dyadic")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=_positive, default=10_000)
    _common(p)

    p = sub.add_parser("gof", help="exact goodness-of-fit test by fiber sampling")
    _inputs(p)
    p.add_argument("--model", choices=["beta", "p1"], required=True)
    p.add_argument("--rho", choices=["zero", "constant", "dyadic"], default="dyadic")
    p.add_argument("--c", "--threshold", dest="c", type=_threshold,
                   help="threshold (default 1 for p1 citations, 2 for beta coauthorship)")
    p.add_argument("--lcc", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--steps", type=_positive, default=100_000)
    p.add_argument("--burn-in", type=_nonneg, help="default: 10%% of --steps")
    p.add_argument("--thin", type=_positive, default=1)
    p.add_argument("--seed", type=int, help=f"default: ${SEED_ENV}, else 0")
    p.add_argument("--chains", type=_positive, default=1)
    p.add_argument("--dump-samples", metavar="PATH",
                   help="raw sampled statistics, little-endian float64")
    _common(p)

    p = sub.add_parser("export-dot", help="DOT source for figure drawing")
    _inputs(p)
    p.add_argument("--what", choices=["core", "hypergraph"], default="core")
    p.add_argument("--mode", choices=["undirected", "directed-in"], default="directed-in")
    p.add_argument("--c", "--threshold", dest="c", type=_threshold, default=1)
    p.add_argument("--min-size", type=_positive, default=1,
                   help="hypergraph: only papers with at least this many authors")
    _common(p)
    return parser


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _config(args) -> dict:
    skip = {"command", "authors", "citations", "data", "out", "record_time", "seed"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _manifest(args, inputs, seed, started) -> dict:
    return {
        "command": args.command,
        "inputs": [{"path": p, "sha256": h} for p, h in inputs.paths],
        "config": _config(args),
        "seed": seed,
        "version": __version__,
        "wall_clock_seconds": round(time.perf_counter() - started, 3)
        if args.record_time else None,
    }


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _gof(args, inp, seed) -> dict:
    # resolved defaults go back into args so the manifest records them
    if args.c is None:
        args.c = 1 if args.model == "p1" else 2
    if args.burn_in is None:
        args.burn_in = args.steps // 10
    if args.model == "p1":
        net = citation_network(inp, args.c, args.lcc)
        fitted = fit_p1(net, args.rho)
        fit = p1_report(fitted)
    else:
        net = coauthor_network(inp, args.c, args.lcc)
        fitted = fit_beta(net)
        fit = beta_report(fitted)
    cfg = FiberWalkConfig(args.steps, args.burn_in, args.thin, seed)
    result = run_chains(net, fitted, cfg, args.chains)
    if args.dump_samples:
        dump_samples(result, args.dump_samples)
    fit.pop("parameters")
    return {"network": network_summary(net), "fit": fit, "test": result.to_dict()}


def run(args) -> str:
    started = time.perf_counter()
    seed = _seed(args) if args.command == "gof" else None
    authors, citations = resolve_paths(
        args.authors, getattr(args, "citations", None), args.data)
    inp = load_inputs(authors, citations)
    cmd = args.command

    if cmd == "export-dot":
        if args.what == "core":
            net = (citation_network(inp, args.c) if args.mode == "directed-in"
                   else coauthor_network(inp, args.c))
            text = core_dot(net)
        else:
            h = build_hypergraph(inp.bipartite)
            text = hypergraph_dot(h, args.min_size, inp.bipartite.papers)
        header = json.dumps(_manifest(args, inp, seed, started), sort_keys=True)
        return f"// manifest: {header}\n{text}"

    if cmd == "ingest":
        result = ingest_summary(inp)
    elif cmd == "threshold":
        net = (citation_network(inp, args.c, args.lcc) if args.network == "citation"
               else coauthor_network(inp, args.c, args.lcc))
        result = network_summary(net)
        if args.edges:
            result["edges"] = [[net.labels[i], net.labels[j]] for i, j in sorted(net.edges)]
    elif cmd == "cores":
        net = (citation_network(inp, args.c) if args.mode == "directed-in"
               else coauthor_network(inp, args.c))
        result = core_analysis(net, args.top)
    elif cmd == "degrees":
        net = (citation_network(inp, args.c, args.lcc) if args.network == "citation"
               else coauthor_network(inp, args.c, args.lcc))
        result = degree_summary(net, args.top)
    elif cmd == "hyper":
        h = build_hypergraph(inp.bipartite)
        result = degree_report(h, args.top)
        if args.min_size:
            result["top_by_papers_of_min_size"] = {
                str(s): [{"author": lab, "papers": v}
                         for lab, v in top_k_by_collaborators(h, s, args.top).entries]
                for s in sorted(set(args.min_size))
            }
    elif cmd == "fit-beta":
        net = coauthor_network(inp, args.c, args.lcc)
        result = {"network": network_summary(net),
                  "fit": beta_report(fit_beta(net, args.tol, args.max_iter))}
    elif cmd == "fit-p1":
        net = citation_network(inp, args.c, args.lcc)
        result = {"network": network_summary(net),
                  "fit": p1_report(fit_p1(net, args.rho, args.tol, args.max_iter))}
    elif cmd == "gof":
        result = _gof(args, inp, seed)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown command {cmd}")

    report = {"manifest": _manifest(args, inp, seed, started), "result": result}
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        text = run(args)
    except UsageError as exc:
        print(f"netfiber: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IngestError, NonexistenceError, ValueError, OSError) as exc:
        print(f"netfiber: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    _emit(text, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
