"""Exact goodness-of-fit tests by Markov chains on fibers.

A fiber is the set of networks sharing the observed sufficient statistics of
a model. The chains here are lazy: a proposal that would leave the fiber (or
break simplicity) is rejected and the chain stays put. All proposals are
symmetric, so the stationary distribution is uniform on the connected part of
the fiber containing the start.

Undirected (beta model) moves are 2-switches of two disjoint edges. Directed
moves are receiver rotations of two or three edges,

    (i1 -> j1, i2 -> j2)            =>  (i1 -> j2, i2 -> j1)
    (i1 -> j1, i2 -> j2, i3 -> j3)  =>  (i1 -> j2, i2 -> j3, i3 -> j1)

which preserve in- and out-degrees; the 3-rotation covers directed-triangle
reversal, without which 2-swaps alone do not connect loop-free digraph fibers.
Each p1 variant then filters moves by the extra statistics it fixes: the total
number of mutual dyads (``rho-constant``) or the exact set of mutual dyads
(``rho-dyadic``). For those two, half the proposals chain two rotations and
keep only the net change, since one rotation may create a mutual dyad that a
second one removes elsewhere.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import permutations
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .graphcore import SimpleDigraph, SimpleGraph, degrees, in_out_degrees
from .models import (
    BetaParams,
    DyadProbabilities,
    P1Params,
    beta_edge_probs,
    dyad_contribution,
    dyad_probs,
    gof_statistic,
    normalize_variant,
)

Network = Union[SimpleGraph, SimpleDigraph]
MAX_ENUM_NODES = 8
DOUBLE_CHECK_LIMIT = 12
_BLOCK = 4096


@dataclass(frozen=True)
class FiberWalkConfig:
    n_steps: int = 100_000
    burn_in: Optional[int] = None  # defaults to 10% of n_steps
    thin: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", self.n_steps // 10)
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if not 0 <= self.burn_in < self.n_steps:
            raise ValueError("burn_in must satisfy 0 <= burn_in < n_steps")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")


@dataclass(frozen=True)
class GofResult:
    observed_statistic: float
    sampled_statistics: np.ndarray
    p_value: float
    accepted_moves: int
    rejected_moves: int
    seed: int
    model: str = ""
    degenerate: bool = False
    config: Optional[FiberWalkConfig] = None
    chains: int = 1

    def to_dict(self, include_samples: bool = False) -> dict:
        s = self.sampled_statistics
        out = {
            "model": self.model,
            "observed_statistic": self.observed_statistic,
            "p_value": self.p_value,
            "n_samples": int(len(s)),
            "accepted_moves": self.accepted_moves,
            "rejected_moves": self.rejected_moves,
            "acceptance_rate": self.accepted_moves
            / max(1, self.accepted_moves + self.rejected_moves),
            "degenerate": self.degenerate,
            "seed": self.seed,
            "chains": self.chains,
            "p_value_estimator": "(1 + #{sampled >= observed}) / (1 + #samples)",
            "sampled_summary": {
                "min": float(s.min()) if len(s) else None,
                "mean": float(s.mean()) if len(s) else None,
                "max": float(s.max()) if len(s) else None,
            },
        }
        if self.config is not None:
            out["config"] = {
                "n_steps": self.config.n_steps,
                "burn_in": self.config.burn_in,
                "thin": self.config.thin,
            }
        if include_samples:
            out["sampled_statistics"] = [float(v) for v in s]
        return out


def add_one_p_value(observed: float, sampled: Sequence[float]) -> float:
    s = np.asarray(sampled, dtype=float)
    eps = 1e-9 * max(1.0, abs(observed))
    return float((1 + np.count_nonzero(s >= observed - eps)) / (1 + len(s)))


# --------------------------------------------------------------------------- chain state


class _Uniforms:
    """Block-buffered uniform draws from a numpy Generator."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.buf = rng.random(_BLOCK)
        self.pos = 0

    def __call__(self) -> float:
        if self.pos == _BLOCK:
            self.buf = self.rng.random(_BLOCK)
            self.pos = 0
        u = self.buf[self.pos]
        self.pos += 1
        return u

    def index(self, m: int) -> int:
        return min(int(self() * m), m - 1)


class _Tracker:
    """Incremental Pearson statistic over dyad states."""

    def __init__(self, contrib: Callable[[int, int, int], float], value: float):
        self.contrib = contrib
        self.value = value


class FiberChain:
    """Mutable lazy random walk on the fiber of ``network``.

    ``model`` is ``"beta"`` for undirected graphs or a p1 variant name.
    """

    def __init__(self, network: Network, model: str, rng: np.random.Generator):
        self.directed = isinstance(network, SimpleDigraph)
        if model == "beta":
            if self.directed:
                raise TypeError("beta-model chain needs an undirected graph")
        else:
            model = normalize_variant(model)
            if not self.directed:
                raise TypeError("p1 chain needs a digraph")
        self.model = model
        self.n = network.n
        self.labels = network.labels
        self.edges = sorted(network.edges)
        self.edge_set = set(self.edges)
        self.index = {e: k for k, e in enumerate(self.edges)}
        self.u = _Uniforms(rng)
        self.tracker: Optional[_Tracker] = None

    # -- state helpers

    def state(self, i: int, j: int) -> int:
        """Dyad state seen from i: 0 null, 1 i->j, 2 j->i, 3 mutual (undirected: 0/1)."""
        if not self.directed:
            return int((min(i, j), max(i, j)) in self.edge_set)
        return int((i, j) in self.edge_set) + 2 * int((j, i) in self.edge_set)

    def network(self) -> Network:
        cls = SimpleDigraph if self.directed else SimpleGraph
        return cls(self.n, frozenset(self.edge_set), self.labels)

    # -- proposals

    def propose(self) -> Optional[tuple[list, list]]:
        """Draw one proposal; returns ``(removed, added)`` or None for a rejected draw."""
        m = len(self.edges)
        if not self.directed:
            if m < 2:
                return None
            a = self.u.index(m)
            b = self.u.index(m)
            coin = self.u() < 0.5
            if a == b:
                return None
            (i, j), (k, l) = self.edges[a], self.edges[b]
            if len({i, j, k, l}) < 4:
                return None
            new = [(i, l), (k, j)] if coin else [(i, k), (j, l)]
            new = [(min(x, y), max(x, y)) for x, y in new]
            if any(e in self.edge_set for e in new):
                return None
            return [self.edges[a], self.edges[b]], new

        if self.model == "rho-zero" or self.u() < 0.5:
            move = self._rotation()
            if move is None or (self.model != "rho-zero" and not self._mutual_ok(*move)):
                return None
            return move
        # two rotations in a row, kept only if the pair preserves the mutual statistic
        first = self._rotation()
        if first is None:
            return None
        self._swap(*first)
        second = self._rotation()
        self._swap(first[1], first[0])
        if second is None:
            return None
        return self._compose(first, second)

    def _rotation(self) -> Optional[tuple[list, list]]:
        m = len(self.edges)
        r = 3 if self.u() < 0.5 else 2
        if m < r:
            return None
        picks = [self.u.index(m) for _ in range(r)]
        if len(set(picks)) < r:
            return None
        old = [self.edges[p] for p in picks]
        new = [(old[t][0], old[(t + 1) % r][1]) for t in range(r)]
        if len(set(new)) < r or any(i == j or (i, j) in self.edge_set for i, j in new):
            return None
        return old, new

    def _compose(self, first, second) -> Optional[tuple[list, list]]:
        after = (self.edge_set - set(first[0]) | set(first[1])) - set(second[0]) | set(second[1])
        old = sorted(self.edge_set - after)
        new = sorted(after - self.edge_set)
        if not old or not self._mutual_ok(old, new):
            return None
        return old, new

    def _mutual_ok(self, old: list, new: list) -> bool:
        dyads = {(min(i, j), max(i, j)) for i, j in old + new}
        before = {dy for dy in dyads if self.state(*dy) == 3}
        self._swap(old, new)
        after = {dy for dy in dyads if self.state(*dy) == 3}
        self._swap(new, old)
        if self.model == "rho-dyadic":
            return before == after
        return len(before) == len(after)

    def _swap(self, old: list, new: list) -> None:
        for e, f in zip(old, new):
            k = self.index.pop(e)
            self.edge_set.discard(e)
            self.edges[k] = f
            self.index[f] = k
        self.edge_set.update(new)

    def apply(self, old: list, new: list) -> None:
        tr = self.tracker
        if tr is None:
            self._swap(old, new)
            return
        dyads = {(min(i, j), max(i, j)) for i, j in old + new}
        before = sum(tr.contrib(i, j, self.state(i, j)) for i, j in dyads)
        self._swap(old, new)
        after = sum(tr.contrib(i, j, self.state(i, j)) for i, j in dyads)
        tr.value += after - before

    def step(self) -> bool:
        move = self.propose()
        if move is None:
            return False
        self.apply(*move)
        return True

    def has_any_move(self, limit: int = 150) -> Optional[bool]:
        """Exhaustively check for a valid move from the current state.

        Returns None when the edge count exceeds ``limit`` (not checked).
        """
        m = len(self.edges)
        if m > limit:
            return None
        if not self.directed:
            for a in range(m):
                for b in range(a + 1, m):
                    (i, j), (k, l) = self.edges[a], self.edges[b]
                    if len({i, j, k, l}) < 4:
                        continue
                    for new in ([(i, l), (k, j)], [(i, k), (j, l)]):
                        if not any((min(x, y), max(x, y)) in self.edge_set for x, y in new):
                            return True
            return False
        for move in self.rotations():
            if self.model == "rho-zero" or self._mutual_ok(*move):
                return True
        if self.model == "rho-zero" or m > DOUBLE_CHECK_LIMIT:
            return False if self.model == "rho-zero" else None
        for first in list(self.rotations()):
            self._swap(*first)
            seconds = list(self.rotations())
            self._swap(first[1], first[0])
            if any(self._compose(first, second) for second in seconds):
                return True
        return False

    def rotations(self):
        """Every valid 2- and 3-rotation from the current state, mutual filter not applied."""
        edges = list(self.edges)
        for r in (2, 3):
            for picks in permutations(range(len(edges)), r):
                old = [edges[p] for p in picks]
                new = [(old[t][0], old[(t + 1) % r][1]) for t in range(r)]
                if len(set(new)) < r or any(i == j or (i, j) in self.edge_set for i, j in new):
                    continue
                yield old, new


# --------------------------------------------------------------------------- single moves


def beta_fiber_move(g: SimpleGraph, rng: np.random.Generator) -> Optional[SimpleGraph]:
    """One lazy 2-switch proposal; returns the new graph or None to stay."""
    chain = FiberChain(g, "beta", rng)
    return chain.network() if chain.step() else None


def p1_fiber_move(
    d: SimpleDigraph, variant: str, rng: np.random.Generator
) -> Optional[SimpleDigraph]:
    """One lazy statistic-preserving proposal; returns the new digraph or None to stay."""
    chain = FiberChain(d, variant, rng)
    return chain.network() if chain.step() else None


def sufficient_statistics(network: Network, model: str) -> tuple:
    """Exact sufficient statistics the chain for ``model`` keeps fixed."""
    if model == "beta":
        return (tuple(degrees(network)),)
    variant = normalize_variant(model)
    indeg, outdeg = in_out_degrees(network)
    mutual = network.mutual_dyads()
    if variant == "rho-zero":
        return tuple(outdeg), tuple(indeg)
    if variant == "rho-constant":
        return tuple(outdeg), tuple(indeg), len(mutual)
    return tuple(outdeg), tuple(indeg), tuple(sorted(mutual))


# --------------------------------------------------------------------------- exact test


def _tracker_for(network: Network, fitted) -> _Tracker:
    if isinstance(fitted, BetaParams):
        p = beta_edge_probs(fitted)

        def contrib(i, j, s):
            q = p[i, j]
            return dyad_contribution(np.array([1.0 - q, q]), s)

        return _Tracker(contrib, gof_statistic(network, p))
    probs = dyad_probs(fitted)
    return _Tracker(lambda i, j, s: dyad_contribution(probs.pair(i, j), s),
                    gof_statistic(network, probs))


def _model_name(fitted) -> str:
    if isinstance(fitted, BetaParams):
        return "beta"
    if isinstance(fitted, P1Params):
        return fitted.variant
    raise TypeError(f"unsupported fitted model {type(fitted).__name__}")


def exact_gof_test(
    network: Network, fitted: Union[BetaParams, P1Params], cfg: FiberWalkConfig
) -> GofResult:
    """Run the lazy fiber chain from ``network`` and compare Pearson statistics.

    After ``cfg.burn_in`` steps the statistic is recorded every ``cfg.thin``
    steps. When no move is ever accepted and none exists from the start the
    fiber is (as far as the move set can tell) a singleton: the result is
    flagged degenerate with p = 1.
    """
    model = _model_name(fitted)
    if fitted.labels != network.labels:
        raise ValueError("fitted model and network have different node sets")
    chain = FiberChain(network, model, np.random.default_rng(cfg.seed))
    chain.tracker = _tracker_for(network, fitted)
    observed = chain.tracker.value

    samples = []
    accepted = rejected = 0
    for t in range(cfg.n_steps):
        ok = chain.step()
        if t >= cfg.burn_in:
            if ok:
                accepted += 1
            else:
                rejected += 1
            if (t - cfg.burn_in) % cfg.thin == 0:
                samples.append(chain.tracker.value)
    sampled = np.asarray(samples, dtype=float)

    degenerate = False
    if accepted == 0 and chain.has_any_move() is False:
        degenerate = True
    p_value = 1.0 if degenerate else add_one_p_value(observed, sampled)
    return GofResult(observed, sampled, p_value, accepted, rejected, cfg.seed, model,
                     degenerate, cfg)


def chain_seeds(seed: int, n_chains: int) -> list[int]:
    if n_chains == 1:
        return [seed]
    return [int(np.random.SeedSequence([seed, k]).generate_state(1, np.uint64)[0])
            for k in range(n_chains)]


def merge_results(results: Sequence[GofResult], seed: int) -> GofResult:
    """Concatenate sampled statistics of independent chains."""
    first = results[0]
    sampled = np.concatenate([r.sampled_statistics for r in results])
    degenerate = all(r.degenerate for r in results)
    p = 1.0 if degenerate else add_one_p_value(first.observed_statistic, sampled)
    return GofResult(
        first.observed_statistic, sampled, p,
        sum(r.accepted_moves for r in results), sum(r.rejected_moves for r in results),
        seed, first.model, degenerate, replace(first.config, seed=seed), len(results),
    )


def _run_one(args):
    network, fitted, cfg = args
    return exact_gof_test(network, fitted, cfg)


def run_chains(
    network: Network,
    fitted: Union[BetaParams, P1Params],
    cfg: FiberWalkConfig,
    n_chains: int = 1,
    workers: Optional[int] = None,
) -> GofResult:
    """Run ``n_chains`` independently seeded chains (in parallel) and merge them."""
    if n_chains < 1:
        raise ValueError("n_chains must be >= 1")
    cfgs = [replace(cfg, seed=s) for s in chain_seeds(cfg.seed, n_chains)]
    if n_chains == 1:
        return exact_gof_test(network, fitted, cfgs[0])
    with ProcessPoolExecutor(max_workers=workers or n_chains) as pool:
        results = list(pool.map(_run_one, [(network, fitted, c) for c in cfgs]))
    return merge_results(results, cfg.seed)


def dump_samples(result: GofResult, path) -> None:
    """Raw sampled statistics as little-endian float64."""
    np.asarray(result.sampled_statistics, dtype="<f8").tofile(path)


# --------------------------------------------------------------------------- enumeration


@dataclass(frozen=True)
class FiberConstraints:
    """Sufficient-statistic constraints defining a fiber.

    Undirected fibers fix ``degrees``; directed ones fix ``out_degrees`` and
    ``in_degrees`` plus optionally the mutual-dyad total or the exact mutual set.
    """

    n: int
    directed: bool
    degrees: tuple = ()
    out_degrees: tuple = ()
    in_degrees: tuple = ()
    mutual_count: Optional[int] = None
    mutual_dyads: Optional[frozenset] = None
    labels: tuple = ()

    @classmethod
    def of(cls, network: Network, model: str) -> "FiberConstraints":
        if model == "beta":
            return cls(network.n, False, degrees=tuple(degrees(network)),
                       labels=network.labels)
        variant = normalize_variant(model)
        indeg, outdeg = in_out_degrees(network)
        mutual = network.mutual_dyads()
        return cls(
            network.n, True, out_degrees=tuple(outdeg), in_degrees=tuple(indeg),
            mutual_count=len(mutual) if variant == "rho-constant" else None,
            mutual_dyads=mutual if variant == "rho-dyadic" else None,
            labels=network.labels,
        )


def enumerate_fiber(c: FiberConstraints, cap: int = MAX_ENUM_NODES) -> list[Network]:
    """All simple (di)graphs meeting ``c``, by pruned backtracking over dyads."""
    if c.n > cap:
        raise ValueError(f"fiber enumeration capped at {cap} nodes (got {c.n})")
    n = c.n
    dyads = [(i, j) for i in range(n) for j in range(i + 1, n)]
    left = [n - 1] * n  # unassigned dyads per node
    out: list = []

    if not c.directed:
        need = list(c.degrees)
        if len(need) != n:
            raise ValueError("degree sequence length does not match n")
        chosen: list = []

        def rec(k: int) -> None:
            if k == len(dyads):
                if not any(need):
                    out.append(SimpleGraph(n, frozenset(chosen), c.labels))
                return
            i, j = dyads[k]
            left[i] -= 1
            left[j] -= 1
            for s in (0, 1):
                if s:
                    need[i] -= 1
                    need[j] -= 1
                    chosen.append((i, j))
                if need[i] >= 0 and need[j] >= 0 and need[i] <= left[i] and need[j] <= left[j]:
                    rec(k + 1)
                if s:
                    need[i] += 1
                    need[j] += 1
                    chosen.pop()
            left[i] += 1
            left[j] += 1

        rec(0)
        return out

    need_out = list(c.out_degrees)
    need_in = list(c.in_degrees)
    mut_left = [c.mutual_count if c.mutual_count is not None else -1]
    chosen = []

    def allowed(dy, s) -> bool:
        if c.mutual_dyads is not None:
            return (s == 3) == (dy in c.mutual_dyads)
        return True

    def ok(v: int) -> bool:
        return 0 <= need_out[v] <= left[v] and 0 <= need_in[v] <= left[v]

    def rec(k: int) -> None:
        if k == len(dyads):
            if not any(need_out) and not any(need_in) and mut_left[0] <= 0:
                out.append(SimpleDigraph(n, frozenset(chosen), c.labels))
            return
        dy = dyads[k]
        i, j = dy
        left[i] -= 1
        left[j] -= 1
        for s in range(4):
            if not allowed(dy, s):
                continue
            ij, ji = s & 1, s >> 1
            if s == 3 and c.mutual_count is not None:
                if mut_left[0] == 0:
                    continue
                mut_left[0] -= 1
            need_out[i] -= ij
            need_in[j] -= ij
            need_out[j] -= ji
            need_in[i] -= ji
            if ij:
                chosen.append((i, j))
            if ji:
                chosen.append((j, i))
            if ok(i) and ok(j) and (c.mutual_count is None or mut_left[0] <= len(dyads) - k - 1):
                rec(k + 1)
            if ji:
                chosen.pop()
            if ij:
                chosen.pop()
            need_out[i] += ij
            need_in[j] += ij
            need_out[j] += ji
            need_in[i] += ji
            if s == 3 and c.mutual_count is not None:
                mut_left[0] += 1
        left[i] += 1
        left[j] += 1

    for v in range(n):
        if not ok(v):
            return []
    rec(0)
    return out
