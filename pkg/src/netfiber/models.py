"""Maximum-likelihood fitting of the beta model and the p1 model family.

The p1 model assigns each unordered dyad {i, j} the state probabilities

    P(null)   ∝ 1
    P(i -> j) ∝ exp(theta + alpha_i + beta_j)
    P(j -> i) ∝ exp(theta + alpha_j + beta_i)
    P(mutual) ∝ exp(2 theta + alpha_i + alpha_j + beta_i + beta_j + rho_ij)

with ``rho_ij`` equal to 0 (``rho-zero``), a shared constant (``rho-constant``)
or a free per-dyad value (``rho-dyadic``). The per-dyad variant saturates the
mutual state of every dyad, so its fit conditions on the observed set of
mutual dyads: those are mutual with probability one, all others never.

When observed degrees sit on a face of the model polytope (an author nobody
cites, a node adjacent to everyone) the MLE does not exist. Both fitters then
pin the affected edges to probability 0 or 1, fit the remaining free edges
(the extended MLE) and report ``exists=False``. Pinned edges are found by
propagating degree facets to a fixpoint; faces not visible at the degree
level surface as diverging parameters or a stagnating residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .graphcore import SimpleDigraph, SimpleGraph

VARIANTS = ("rho-zero", "rho-constant", "rho-dyadic")
PARAM_CAP = 30.0
PROB_FLOOR = 1e-12
STAGNATION_WINDOW = 500
LP_FACE_MAX_NODES = 80  # exact face by linear programming up to this many nodes
_LP_POSITIVE = 1e-7

# dyad states seen from row i: bit 0 is i -> j, bit 1 is j -> i
NULL, OUT, IN, MUTUAL = 0, 1, 2, 3


class NonexistenceError(ValueError):
    """The MLE does not exist: observed statistics lie on the polytope boundary."""


def normalize_variant(variant: str) -> str:
    v = variant.lower().replace("_", "-")
    if not v.startswith("rho-"):
        v = "rho-" + v
    if v not in VARIANTS:
        raise ValueError(f"unknown p1 variant {variant!r}; expected one of {VARIANTS}")
    return v


@dataclass(frozen=True, eq=False)
class BetaParams:
    labels: tuple
    beta: np.ndarray
    converged: bool
    iterations: int
    max_residual: float
    exists: bool = True
    diagnostic: str = ""
    forbid: Optional[np.ndarray] = None  # pinned absent edges (symmetric)
    force: Optional[np.ndarray] = None   # pinned present edges (symmetric)

    @property
    def n(self) -> int:
        return len(self.beta)


@dataclass(frozen=True, eq=False)
class P1Params:
    variant: str
    labels: tuple
    theta: float
    alpha: np.ndarray
    beta: np.ndarray
    rho: Optional[float] = None
    mutual_dyads: frozenset = frozenset()
    converged: bool = True
    iterations: int = 0
    max_residual: float = 0.0
    exists: bool = True
    diagnostic: str = ""
    pinned: Optional[np.ndarray] = None  # pinned[i, j, s]: dyad state s has probability 0

    @property
    def n(self) -> int:
        return len(self.alpha)

    def rho_of(self, i: int, j: int) -> float:
        if self.variant == "rho-zero":
            return 0.0
        if self.variant == "rho-constant":
            return float(self.rho)
        return math.inf if (min(i, j), max(i, j)) in self.mutual_dyads else -math.inf


def _reduce_facets(y: np.ndarray, free: np.ndarray, symmetric: bool):
    """Pin edges whose value is forced by degree facets, to a fixpoint.

    ``y`` is the 0/1 adjacency, ``free`` marks cells that may vary. Returns
    boolean ``(forbid, force)`` matrices over the free cells.
    """
    forbid = np.zeros_like(free)
    force = np.zeros_like(free)
    axes = (1,) if symmetric else (1, 0)
    changed = True
    while changed:
        changed = False
        for ax in axes:
            unc = free & ~forbid & ~force
            obs = (y * free).sum(axis=ax)
            forced = force.sum(axis=ax)
            n_unc = unc.sum(axis=ax)
            low = (n_unc > 0) & (obs == forced)
            high = (n_unc > 0) & (obs == forced + n_unc)
            if not (low.any() or high.any()):
                continue
            changed = True
            if ax == 1:
                lo, hi = unc & low[:, None], unc & high[:, None]
            else:
                lo, hi = unc & low[None, :], unc & high[None, :]
            if symmetric:
                lo, hi = lo | lo.T, hi | hi.T
            forbid |= lo
            force |= hi
    return forbid, force


def _positive_support(group: np.ndarray, margins, rhs: np.ndarray) -> np.ndarray:
    """Which cell probabilities can be positive on the fiber polytope.

    Cells are grouped into dyads whose probabilities sum to one; ``margins``
    (a sparse matrix) times the cell vector must equal ``rhs``. Repeatedly
    maximizes the sum of ``min(p_v, .)`` over the cells not yet known to be
    positive; by convexity the union of supports found is the maximal one, and
    a zero optimum proves the remaining cells vanish on every feasible point.
    """
    nv = len(group)
    n_groups = int(group.max()) + 1 if nv else 0
    G = sparse.csr_matrix((np.ones(nv), (group, np.arange(nv))), shape=(n_groups, nv))
    A_eq = sparse.vstack([sparse.hstack([G, sparse.csr_matrix((n_groups, nv))]),
                          sparse.hstack([margins, sparse.csr_matrix((margins.shape[0], nv))])])
    b_eq = np.concatenate([np.ones(n_groups), rhs])
    eye = sparse.identity(nv, format="csr")
    A_ub = sparse.hstack([-eye, eye])
    sizes = np.bincount(group, minlength=n_groups)
    positive = sizes[group] == 1
    while not positive.all():
        c = np.concatenate([np.zeros(nv), -(~positive).astype(float)])
        bounds = [(0, 1)] * nv + [(0, 0) if v else (0, 1) for v in positive]
        res = linprog(c, A_ub=A_ub, b_ub=np.zeros(nv), A_eq=A_eq, b_eq=b_eq,
                      bounds=bounds, method="highs")
        if res.status != 0:
            raise RuntimeError(f"face LP failed: {res.message}")
        found = (res.x[nv:] > _LP_POSITIVE) & ~positive
        if not found.any():
            break
        positive |= found
    return positive


# --------------------------------------------------------------------------- beta


def _beta_lp_face(y: np.ndarray, forbid: np.ndarray, force: np.ndarray) -> None:
    """Extend the pinned sets in place with everything the degree polytope fixes."""
    n = len(y)
    iu, ju = np.nonzero(np.triu(~forbid & ~force, 1))
    if not len(iu):
        return
    k = np.arange(len(iu))
    group = np.repeat(k, 2)  # cells (absent, present) per edge
    cols = 2 * k + 1
    margins = sparse.csr_matrix(
        (np.ones(2 * len(k)), (np.concatenate([iu, ju]), np.concatenate([cols, cols]))),
        shape=(n, 2 * len(k)))
    rhs = y.sum(axis=1) - force.sum(axis=1)
    ok = _positive_support(group, margins, rhs)
    absent, present = ok[0::2], ok[1::2]
    forbid[iu[~present], ju[~present]] = forbid[ju[~present], iu[~present]] = True
    force[iu[~absent], ju[~absent]] = force[ju[~absent], iu[~absent]] = True


def beta_edge_probs(b: BetaParams) -> np.ndarray:
    s = np.add.outer(b.beta, b.beta)
    p = 1.0 / (1.0 + np.exp(-s))
    if b.forbid is not None:
        p[b.forbid] = 0.0
        p[b.force] = 1.0
    np.fill_diagonal(p, 0.0)
    return p


def fit_beta(
    g: SimpleGraph,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    cap: float = PARAM_CAP,
    strict: bool = False,
) -> BetaParams:
    """Fit the beta model by the fixed-point map

        beta_i <- log d_i - log sum_{j != i} 1 / (exp(-beta_j) + exp(beta_i))

    iterated until the largest degree residual drops below ``tol``.

    Degree sequences on the polytope boundary (e.g. a degree of 0 or n-1)
    have no MLE; this is reported as ``exists=False`` with a diagnostic, or
    raised as :class:`NonexistenceError` when ``strict``.
    """
    if g.n < 2:
        raise ValueError("beta model needs at least 2 nodes")
    n = g.n
    y = np.zeros((n, n))
    for i, j in g.edges:
        y[i, j] = y[j, i] = 1.0
    d = y.sum(axis=1)
    offdiag = ~np.eye(n, dtype=bool)
    forbid, force = _reduce_facets(y, offdiag, symmetric=True)
    if n <= LP_FACE_MAX_NODES:
        _beta_lp_face(y, forbid, force)
    pinned = bool(forbid.any() or force.any())
    unc = offdiag & ~forbid & ~force
    target = d - force.sum(axis=1)
    active = unc.any(axis=1)
    masks = (forbid, force) if pinned else (None, None)

    def make(beta, converged, it, res, exists=True, why="") -> BetaParams:
        if not exists and strict:
            raise NonexistenceError(why)
        return BetaParams(g.labels, beta, converged, it, res, exists, why, *masks)

    def residual(beta) -> float:
        p = beta_edge_probs(make(beta, False, 0, 0.0))
        return float(np.max(np.abs(p.sum(axis=1) - d)))

    beta = np.zeros(n)
    face = "MLE does not exist: degree facets pin some edges (e.g. degree 0 or n-1)"
    if not active.any():
        return make(beta, True, 0, residual(beta), not pinned, face if pinned else "")

    idx = np.flatnonzero(active)
    u = unc[np.ix_(idx, idx)]
    t = target[idx]
    logt = np.log(t)
    b = np.log(t / (u.sum(axis=1) - t)) / 2
    history = []
    res = math.inf
    for it in range(1, max_iter + 1):
        m = np.where(u, 1.0 / (np.exp(-b)[None, :] + np.exp(b)[:, None]), 0.0)
        b = logt - np.log(m.sum(axis=1))
        beta[idx] = b
        res = residual(beta)
        history.append(res)
        if res < tol:
            return make(beta, True, it, res, not pinned, face if pinned else "")
        if not np.all(np.isfinite(b)) or np.max(np.abs(b)) > cap:
            return make(beta, False, it, res, False,
                        f"MLE does not exist: parameters exceeded |beta| > {cap}")
        if it > STAGNATION_WINDOW and res > 0.9 * history[-STAGNATION_WINDOW - 1]:
            return make(beta, False, it, res, False,
                        "MLE does not exist: residual stagnated (boundary suspected)")
    return make(beta, False, max_iter, res, not pinned,
                "not converged within max_iter" + ("; " + face if pinned else ""))


# --------------------------------------------------------------------------- p1


def _adjacency(d: SimpleDigraph) -> np.ndarray:
    y = np.zeros((d.n, d.n))
    for i, j in d.edges:
        y[i, j] = 1.0
    return y


_SWAP = [NULL, IN, OUT, MUTUAL]  # the same state seen from the other endpoint
_HAS_OUT = np.array([False, True, False, True])
_HAS_IN = np.array([False, False, True, True])


def _reduce_states(y: np.ndarray, variant: str) -> np.ndarray:
    """Dyad states pinned to probability zero by local faces, to a fixpoint.

    Returns a boolean ``(n, n, 4)`` mask ``bad[i, j, s]`` over rows (i, j),
    consistent between (i, j) and (j, i). Besides the variant's own structure
    it propagates: per-node out/in-degree (and, for ``rho-dyadic``, null-dyad)
    counts that equal the number of dyads where the state is certain, or
    possible; and for ``rho-constant`` the global mutual/asymmetric/null totals.
    """
    n = len(y)
    bad = np.zeros((n, n, 4), dtype=bool)
    eye = np.eye(n, dtype=bool)
    mut = (y * y.T).astype(bool)
    if variant == "rho-dyadic":
        bad[mut, :3] = True
        bad[~mut, MUTUAL] = True
    states = (y + 2 * y.T).astype(int)

    def per_node(has: np.ndarray) -> bool:
        allowed = ~bad
        allowed[eye] = False
        possible = (allowed & has).any(axis=2)
        certain = possible & ~(allowed & ~has).any(axis=2)
        unc = possible & ~certain
        obs = has[states].sum(axis=1) - has[0]  # diagonal reads as state 0
        forced = certain.sum(axis=1)
        n_pos = possible.sum(axis=1)
        low = (obs == forced) & unc.any(axis=1)
        high = (obs == n_pos) & unc.any(axis=1)
        if not (low.any() or high.any()):
            return False
        bad[unc & low[:, None]] |= has
        bad[unc & high[:, None]] |= ~has
        return True

    def global_count(has: np.ndarray, target: int) -> bool:
        allowed = ~bad
        allowed[eye] = False
        upper = np.triu(np.ones((n, n), dtype=bool), 1)
        possible = (allowed & has).any(axis=2) & upper
        certain = possible & ~(allowed & ~has).any(axis=2)
        unc = possible & ~certain
        if not unc.any():
            return False
        if target == certain.sum():
            bad[unc] |= has
        elif target == possible.sum():
            bad[unc] |= ~has
        else:
            return False
        return True

    n_mut = int(mut.sum()) // 2
    n_asym = int(y.sum()) - 2 * n_mut
    n_null = n * (n - 1) // 2 - n_mut - n_asym
    rules = [lambda: per_node(_HAS_OUT), lambda: per_node(_HAS_IN)]
    if variant == "rho-dyadic":
        rules.append(lambda: per_node(np.array([True, False, False, False])))
    if variant == "rho-constant":
        rules += [
            lambda: global_count(np.array([False, False, False, True]), n_mut),
            lambda: global_count(np.array([False, True, True, False]), n_asym),
            lambda: global_count(np.array([True, False, False, False]), n_null),
        ]
    changed = True
    while changed:
        changed = False
        for rule in rules:
            if rule():
                bad |= bad.transpose(1, 0, 2)[:, :, _SWAP]
                changed = True
    bad[eye] = False
    return bad


def _p1_lp_face(y: np.ndarray, bad: np.ndarray, variant: str) -> None:
    """Pin (in place) every dyad state that is zero on the whole fiber polytope."""
    n = len(y)
    iu, ju = np.triu_indices(n, 1)
    cells = [(k, s) for k in range(len(iu)) for s in range(4) if not bad[iu[k], ju[k], s]]
    if not cells:
        return
    dyad, state = (np.array(v) for v in zip(*cells))
    i, j = iu[dyad], ju[dyad]
    col = np.arange(len(cells))
    sends = _HAS_OUT[state]   # i -> j present
    gets = _HAS_IN[state]     # j -> i present
    rows, cols_ = [], []
    for mask, node in ((sends, i), (gets, j)):       # out-degree rows 0..n-1
        rows.append(node[mask])
        cols_.append(col[mask])
    for mask, node in ((sends, j), (gets, i)):       # in-degree rows n..2n-1
        rows.append(n + node[mask])
        cols_.append(col[mask])
    rhs = [y.sum(axis=1), y.sum(axis=0)]
    if variant == "rho-constant":
        mut = state == MUTUAL
        rows.append(np.full(int(mut.sum()), 2 * n))
        cols_.append(col[mut])
        rhs.append([(y * y.T).sum() / 2])
    r = np.concatenate(rows)
    margins = sparse.csr_matrix((np.ones(len(r)), (r, np.concatenate(cols_))),
                                shape=(2 * n + (variant == "rho-constant"), len(cells)))
    ok = _positive_support(dyad, margins, np.concatenate(rhs))
    for (k, s_), good in zip(cells, ok):
        if not good:
            bad[iu[k], ju[k], s_] = True
            bad[ju[k], iu[k], _SWAP[s_]] = True


class _OrderedTable:
    """Fitted values of the n x n x 2 x 2 ordered-pair table of a p1 model.

    Cell (i, j, k, l) holds the probability that i -> j is ``k`` and j -> i is
    ``l``; each observed dyad appears twice, as rows (i, j) and (j, i). Only
    log-linear parameters are stored. Every margin update is followed by
    renormalizing each row, which is the [ij] IPF step.
    """

    def __init__(self, n: int, forbidden4: np.ndarray):
        self.n = n
        self.A = np.zeros(n)   # sender effect on k
        self.A2 = np.zeros(n)  # sender effect on l
        self.B = np.zeros(n)   # receiver effect on l
        self.B2 = np.zeros(n)  # receiver effect on k
        self.T = np.zeros((2, 2))
        # state s = k + 2 l
        self.forbidden = forbidden4[:, :, [0, 2, 1, 3]].reshape(n, n, 2, 2)
        self.offdiag = ~np.eye(n, dtype=bool)

    def probs(self) -> np.ndarray:
        k_term = self.A[:, None] + self.B2[None, :]
        l_term = self.A2[None, :] + self.B[:, None]
        eta = np.empty((self.n, self.n, 2, 2))
        eta[:, :, 0, 0] = self.T[0, 0]
        eta[:, :, 1, 0] = k_term + self.T[1, 0]
        eta[:, :, 0, 1] = l_term + self.T[0, 1]
        eta[:, :, 1, 1] = k_term + l_term + self.T[1, 1]
        eta[self.forbidden] = -np.inf
        eta -= eta.max(axis=(2, 3), keepdims=True)
        w = np.exp(eta)
        w /= w.sum(axis=(2, 3), keepdims=True)
        w[~self.offdiag] = 0.0
        return w

    def gauge(self, a_on, b_on) -> None:
        for vec, on, cells in (
            (self.A, a_on, ((1, 0), (1, 1))),
            (self.B2, b_on, ((1, 0), (1, 1))),
            (self.A2, a_on, ((0, 1), (1, 1))),
            (self.B, b_on, ((0, 1), (1, 1))),
        ):
            if not on.any():
                continue
            c = vec[on].mean()
            vec[on] -= c
            for cell in cells:
                self.T[cell] += c
        self.T -= self.T[0, 0]

    def p1(self, a_on, b_on) -> tuple[float, np.ndarray, np.ndarray, float]:
        a = np.where(a_on, (self.A + self.A2) / 2, 0.0)
        b = np.where(b_on, (self.B + self.B2) / 2, 0.0)
        ma = a[a_on].mean() if a_on.any() else 0.0
        mb = b[b_on].mean() if b_on.any() else 0.0
        theta = ma + mb + (self.T[1, 0] + self.T[0, 1]) / 2 - self.T[0, 0]
        rho = self.T[1, 1] + self.T[0, 0] - self.T[1, 0] - self.T[0, 1]
        return (float(theta), np.where(a_on, a - ma, 0.0), np.where(b_on, b - mb, 0.0),
                float(rho))


def _log_ratio(obs, cur, total):
    """log(obs / cur) - log((total - obs) / (total - cur)); 0 where total == 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(obs / cur) - np.log((total - obs) / (total - cur))
    return np.where(total > 0, out, 0.0)


def fit_p1(
    d: SimpleDigraph,
    variant: str = "rho-constant",
    tol: float = 1e-9,
    max_iter: int = 10_000,
    cap: float = PARAM_CAP,
    strict: bool = False,
) -> P1Params:
    """Fit a p1 model by iterative proportional fitting.

    IPF runs on the ordered-pair table with margins [ij], [ik], [jl], [il],
    [jk] (plus [kl] for ``rho-constant``) and stops once expected out-degrees,
    in-degrees (and the mutual total) are within ``tol`` of the observed ones.
    The gauge ``sum(alpha) = sum(beta) = 0`` is re-applied after every sweep;
    nodes whose edges are all pinned carry parameter 0 and are left out of it.
    """
    variant = normalize_variant(variant)
    n = d.n
    if n < 2:
        raise ValueError("p1 model needs at least 2 nodes")
    y = _adjacency(d)
    indeg = y.sum(axis=0)
    outdeg = y.sum(axis=1)
    n_mutual = len(d.mutual_dyads())
    n_asym = int(outdeg.sum()) - 2 * n_mutual
    n_null = n * (n - 1) // 2 - n_mutual - n_asym
    mutual_dyads = d.mutual_dyads()

    bad = _reduce_states(y, variant)
    if n <= LP_FACE_MAX_NODES:
        _p1_lp_face(y, bad, variant)
    structural = np.zeros_like(bad)
    if variant == "rho-dyadic":
        structural = np.zeros((n, n, 4), dtype=bool)
        mut = (y * y.T).astype(bool)
        structural[mut, :3] = True
        structural[~mut, MUTUAL] = True
        np.fill_diagonal(structural[..., MUTUAL], False)
    face = bool((bad & ~structural).any())
    allowed = ~bad
    allowed[np.eye(n, dtype=bool)] = False
    possible = (allowed & _HAS_OUT).any(axis=2)
    U = possible & (allowed & ~_HAS_OUT).any(axis=2)  # edge i -> j uncertain
    a_on = U.any(axis=1)
    b_on = U.any(axis=0)
    obs_out = (y * U).sum(axis=1)
    obs_in = (y * U).sum(axis=0)
    n_out = U.sum(axis=1)
    n_in = U.sum(axis=0)
    kl_obs = np.array([[2.0 * n_null, n_asym], [n_asym, 2.0 * n_mutual]])
    no_mutual = variant == "rho-constant" and not allowed[..., MUTUAL].any()
    tab = _OrderedTable(n, bad)
    pinned = bad if (face or variant == "rho-dyadic") else None

    def make(converged, it, res, exists=True, why="") -> P1Params:
        if not exists and strict:
            raise NonexistenceError(why)
        theta, a, b, rho = tab.p1(a_on, b_on)
        if variant != "rho-constant":
            rho = None
        elif no_mutual:
            rho = -math.inf
        return P1Params(
            variant, d.labels, theta, a, b, rho,
            mutual_dyads if variant == "rho-dyadic" else frozenset(),
            converged, it, res, exists, why, pinned,
        )

    def residual() -> float:
        e_out, e_in, e_mut = dyad_probs(make(False, 0, 0.0)).expected_stats()
        r = max(np.max(np.abs(e_out - outdeg)), np.max(np.abs(e_in - indeg)))
        if variant == "rho-constant":
            r = max(r, abs(e_mut - n_mutual))
        return float(r)

    why = "MLE does not exist: observed statistics on a face; some dyad states pinned" if face else ""
    history = []
    for it in range(1, max_iter + 1):
        # [ik] i sends, [jl] j sends, [il] i receives, [jk] j receives
        p = tab.probs()
        e = (p[:, :, 1, :].sum(axis=2) * U).sum(axis=1)
        tab.A += np.where(a_on, _log_ratio(obs_out, e, n_out), 0.0)
        p = tab.probs()
        e = (p[:, :, :, 1].sum(axis=2) * U.T).sum(axis=0)
        tab.A2 += np.where(a_on, _log_ratio(obs_out, e, n_out), 0.0)
        p = tab.probs()
        e = (p[:, :, :, 1].sum(axis=2) * U.T).sum(axis=1)
        tab.B += np.where(b_on, _log_ratio(obs_in, e, n_in), 0.0)
        p = tab.probs()
        e = (p[:, :, 1, :].sum(axis=2) * U).sum(axis=0)
        tab.B2 += np.where(b_on, _log_ratio(obs_in, e, n_in), 0.0)
        if variant == "rho-constant":
            p = tab.probs()
            cur = p.sum(axis=(0, 1))
            with np.errstate(divide="ignore", invalid="ignore"):
                tab.T += np.where(kl_obs > 0, np.log(kl_obs / cur), 0.0)
        tab.gauge(a_on, b_on)

        res = residual()
        history.append(res)
        if res < tol:
            return make(True, it, res, not face, why)
        theta, a, b, rho = tab.p1(a_on, b_on)
        norm = max(abs(theta), np.max(np.abs(a)), np.max(np.abs(b)),
                   abs(rho) if variant == "rho-constant" and not no_mutual else 0.0)
        if not np.isfinite(norm) or norm > cap:
            return make(False, it, res, False,
                        f"MLE does not exist: parameters exceeded {cap} in absolute value")
        if it > STAGNATION_WINDOW and res > 0.9 * history[-STAGNATION_WINDOW - 1]:
            return make(False, it, res, False,
                        "MLE does not exist: residual stagnated (boundary suspected)")
    return make(False, max_iter, history[-1], not face,
                "not converged within max_iter" + ("; " + why if why else ""))


# --------------------------------------------------------------------------- dyad probabilities


class DyadProbabilities:
    """State probabilities (null, i->j, j->i, mutual) for every dyad of a p1 fit."""

    def __init__(self, params: P1Params):
        self.params = params
        self.n = params.n
        p = params
        self._rho = p.rho if p.variant == "rho-constant" and np.isfinite(p.rho) else 0.0

    def block(self, rows: slice = slice(None)) -> np.ndarray:
        """Array ``P[i, j, s]`` for i in ``rows`` and all j (diagonal rows zero)."""
        p = self.params
        ri = np.arange(self.n)[rows]
        a, b = p.alpha, p.beta
        sij = p.theta + a[ri][:, None] + b[None, :]
        sji = p.theta + a[None, :] + b[ri][:, None]
        eta = np.zeros((len(ri), self.n, 4))
        eta[..., OUT] = sij
        eta[..., IN] = sji
        eta[..., MUTUAL] = sij + sji + self._rho
        if p.pinned is not None:
            eta[p.pinned[ri]] = -np.inf
        if p.rho == -math.inf:
            eta[..., MUTUAL] = -np.inf
        eta[np.arange(len(ri)), ri] = 0.0
        eta -= eta.max(axis=2, keepdims=True)
        w = np.exp(eta)
        w /= w.sum(axis=2, keepdims=True)
        w[np.arange(len(ri)), ri] = 0.0
        return w

    def matrix(self) -> np.ndarray:
        return self.block()

    def pair(self, i: int, j: int) -> np.ndarray:
        """Probabilities for one ordered pair, computed without building a row block."""
        p = self.params
        sij = p.theta + p.alpha[i] + p.beta[j]
        sji = p.theta + p.alpha[j] + p.beta[i]
        eta = (0.0, sij, sji, sij + sji + self._rho)
        ok = [True] * 4 if p.pinned is None else [not v for v in p.pinned[i, j]]
        if p.rho == -math.inf:
            ok[MUTUAL] = False
        top = max(e for e, k in zip(eta, ok) if k)
        w = np.array([math.exp(e - top) if k else 0.0 for e, k in zip(eta, ok)])
        return w / w.sum()

    def expected_stats(self, chunk: int = 512):
        """Expected out-degrees, in-degrees and mutual-dyad count."""
        e_out = np.zeros(self.n)
        e_in = np.zeros(self.n)
        e_mut = 0.0
        for s in range(0, self.n, chunk):
            w = self.block(slice(s, s + chunk))
            e_out[s:s + chunk] = (w[..., OUT] + w[..., MUTUAL]).sum(axis=1)
            e_in[s:s + chunk] = (w[..., IN] + w[..., MUTUAL]).sum(axis=1)
            e_mut += w[..., MUTUAL].sum() / 2
        return e_out, e_in, e_mut


def dyad_probs(p: P1Params) -> DyadProbabilities:
    return DyadProbabilities(p)


# --------------------------------------------------------------------------- goodness of fit


def dyad_contribution(pvec: np.ndarray, state: int) -> float:
    """Pearson term sum_s (obs_s - p_s)^2 / p_s for one dyad, skipping tiny p_s."""
    incl = pvec >= PROB_FLOOR
    total = float(pvec[incl].sum())
    if incl[state]:
        return total - 2.0 + 1.0 / float(pvec[state])
    return total


def _contributions(p: np.ndarray, state: np.ndarray) -> np.ndarray:
    incl = p >= PROB_FLOOR
    total = np.where(incl, p, 0.0).sum(axis=-1)
    ps = np.take_along_axis(p, state[..., None], axis=-1)[..., 0]
    hit = np.take_along_axis(incl, state[..., None], axis=-1)[..., 0]
    with np.errstate(divide="ignore"):
        return total + np.where(hit, 1.0 / np.where(hit, ps, 1.0) - 2.0, 0.0)


def dyad_states(d: SimpleDigraph) -> np.ndarray:
    """Matrix of dyad states seen from row i: 0 null, 1 i->j, 2 j->i, 3 mutual."""
    y = _adjacency(d).astype(int)
    return y + 2 * y.T


def gof_statistic(
    observed: Union[SimpleGraph, SimpleDigraph],
    probs: Union[np.ndarray, DyadProbabilities],
) -> float:
    """Pearson chi-square over per-dyad state categories."""
    n = observed.n
    iu = np.triu_indices(n, 1)
    if isinstance(observed, SimpleDigraph):
        if not isinstance(probs, DyadProbabilities):
            raise TypeError("directed statistic needs DyadProbabilities")
        states = dyad_states(observed)
        total = 0.0
        chunk = 512
        for s in range(0, n, chunk):
            w = probs.block(slice(s, s + chunk))
            st = states[s:s + chunk]
            c = _contributions(w, st)
            rows = np.arange(s, min(s + chunk, n))[:, None]
            total += float(c[np.arange(n)[None, :] > rows].sum())
        return total
    p = np.asarray(probs)[iu]
    y = np.zeros((n, n), dtype=int)
    for i, j in observed.edges:
        y[i, j] = y[j, i] = 1
    pp = np.stack([1.0 - p, p], axis=-1)
    return float(_contributions(pp, y[iu]).sum())


# --------------------------------------------------------------------------- reports


def _num(x: float):
    """Float for JSON; non-finite values become strings like ``"-inf"``."""
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def beta_report(b: BetaParams) -> dict:
    pinned = {"absent": 0, "present": 0}
    if b.forbid is not None:
        iu = np.triu_indices(len(b.beta), 1)
        pinned = {"absent": int(b.forbid[iu].sum()), "present": int(b.force[iu].sum())}
    return {
        "model": "beta",
        "converged": b.converged,
        "exists": b.exists,
        "iterations": b.iterations,
        "max_residual": b.max_residual,
        "diagnostic": b.diagnostic,
        "pinned_edges": pinned,
        "parameters": {
            "beta": {lab: _num(v) for lab, v in sorted(zip(b.labels, b.beta))},
        },
    }


def _pinned_count(p: P1Params) -> int:
    """Dyad states (i < j) pinned to zero beyond what the variant itself fixes."""
    if p.pinned is None:
        return 0
    iu = np.triu_indices(p.n, 1)
    bad = p.pinned[iu]
    if p.variant == "rho-dyadic":
        mut = np.zeros((p.n, p.n), dtype=bool)
        for i, j in p.mutual_dyads:
            mut[i, j] = mut[j, i] = True
        bad = bad & ~np.where(mut[iu][:, None], [True, True, True, False],
                              [False, False, False, True])
    return int(bad.sum())


def p1_report(p: P1Params) -> dict:
    params: dict = {
        "theta": _num(p.theta),
        "alpha": {lab: _num(v) for lab, v in sorted(zip(p.labels, p.alpha))},
        "beta": {lab: _num(v) for lab, v in sorted(zip(p.labels, p.beta))},
    }
    if p.variant == "rho-constant":
        params["rho"] = _num(p.rho)
    elif p.variant == "rho-dyadic":
        params["rho"] = {
            "positive_infinity_on": sorted(
                sorted((p.labels[i], p.labels[j])) for i, j in p.mutual_dyads
            ),
            "negative_infinity_elsewhere": True,
        }
    return {
        "model": "p1",
        "variant": p.variant,
        "converged": p.converged,
        "exists": p.exists,
        "iterations": p.iterations,
        "max_residual": p.max_residual,
        "diagnostic": p.diagnostic,
        "pinned_dyad_states": _pinned_count(p),
        "gauge": "sum(alpha) = sum(beta) = 0",
        "parameters": params,
    }
