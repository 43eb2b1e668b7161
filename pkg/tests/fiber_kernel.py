"""Exact transition kernels of the fiber chains, for test oracles.

Graphs on n <= 8 nodes are encoded as 64-bit masks (bit i*n + j for edge
i -> j; undirected edges use i < j). The kernel is rebuilt from the proposal
mechanism as documented: uniform index draws, the coin for 2-switches, the
2/3-rotation coin, and the single/compound coin for mutual-constrained
variants. Nothing here calls the chain implementation.
"""

from __future__ import annotations

import numpy as np

U64 = np.uint64


def encode(edges, n: int) -> int:
    m = 0
    for i, j in edges:
        m |= 1 << (i * n + j)
    return m


def decode(mask: int, n: int) -> np.ndarray:
    """Edge array (m x 2), rows ordered by bit index."""
    bits = [b for b in range(n * n) if mask >> b & 1]
    return np.array([(b // n, b % n) for b in bits], dtype=np.int64).reshape(-1, 2)


def _bit(i, j, n):
    return np.left_shift(U64(1), (i * n + j).astype(np.uint64))


def _has(mask: int, i, j, n) -> np.ndarray:
    return (U64(mask) & _bit(i, j, n)) != 0


def switch_moves(mask: int, n: int):
    """Undirected 2-switch outcomes: (result masks, probabilities), valid draws only."""
    e = decode(mask, n)
    m = len(e)
    if m < 2:
        return np.zeros(0, dtype=U64), np.zeros(0)
    a, b = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    a, b = a.ravel(), b.ravel()
    i, j, k, l = e[a, 0], e[a, 1], e[b, 0], e[b, 1]
    distinct = (a != b) & (i != k) & (i != l) & (j != k) & (j != l)
    out_m, out_p = [], []
    for x1, y1, x2, y2 in ((i, l, k, j), (i, k, j, l)):
        u1, v1 = np.minimum(x1, y1), np.maximum(x1, y1)
        u2, v2 = np.minimum(x2, y2), np.maximum(x2, y2)
        ok = distinct & ~_has(mask, u1, v1, n) & ~_has(mask, u2, v2, n)
        z = (U64(mask) ^ _bit(i, j, n) ^ _bit(k, l, n) ^ _bit(u1, v1, n) ^ _bit(u2, v2, n))[ok]
        out_m.append(z)
        out_p.append(np.full(len(z), 1.0 / (2 * m * m)))
    return np.concatenate(out_m), np.concatenate(out_p)


def rotation_moves(mask: int, n: int):
    """Directed 2/3-rotation outcomes from ``mask`` with their draw probabilities."""
    e = decode(mask, n)
    m = len(e)
    out_m, out_p = [], []
    for r in (2, 3):
        if m < r:
            continue
        grids = np.meshgrid(*[np.arange(m)] * r, indexing="ij")
        picks = [g.ravel() for g in grids]
        ok = np.ones(len(picks[0]), dtype=bool)
        for s in range(r):
            for t in range(s + 1, r):
                ok &= picks[s] != picks[t]
        src = [e[p, 0] for p in picks]
        dst = [e[p, 1] for p in picks]
        new = [(src[t], dst[(t + 1) % r]) for t in range(r)]
        z = np.full(len(ok), U64(mask))
        for s in range(r):
            z ^= _bit(src[s], dst[s], n)
        for s, (x, y) in enumerate(new):
            ok &= (x != y) & ~_has(mask, x, y, n)
            for t in range(s):
                ok &= (x != new[t][0]) | (y != new[t][1])
        for x, y in new:
            z ^= _bit(x, y, n)
        out_m.append(z[ok])
        out_p.append(np.full(int(ok.sum()), 0.5 / m**r))
    if not out_m:
        return np.zeros(0, dtype=U64), np.zeros(0)
    return np.concatenate(out_m), np.concatenate(out_p)


def _accumulate(masks, probs):
    u, inv = np.unique(masks, return_inverse=True)
    return u, np.bincount(inv, weights=probs, minlength=len(u))


def transition_matrix(fiber_masks, n: int, model: str) -> np.ndarray:
    """Exact lazy-chain kernel restricted to the enumerated fiber."""
    fiber = np.array(sorted(fiber_masks), dtype=U64)
    size = len(fiber)
    P = np.zeros((size, size))
    cache: dict[int, tuple] = {}

    def singles(mask):
        if mask not in cache:
            cache[mask] = _accumulate(*rotation_moves(mask, n))
        return cache[mask]

    def add(row, masks, probs):
        inside = np.isin(masks, fiber)
        idx = np.searchsorted(fiber, masks[inside])
        np.add.at(P[row], idx, probs[inside])

    for x, mask in enumerate(fiber.tolist()):
        if model == "beta":
            add(x, *switch_moves(mask, n))
        elif model == "rho-zero":
            add(x, *singles(mask))
        else:
            ys, py = singles(mask)
            add(x, ys, 0.5 * py)
            for y, q in zip(ys.tolist(), py):
                zs, pz = singles(y)
                add(x, zs, 0.5 * q * pz)
        P[x, x] = 0.0  # a compound move back to the start is a stay
        P[x, x] = 1.0 - P[x].sum()
    return P


def is_irreducible(P: np.ndarray) -> bool:
    size = len(P)
    seen = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for y in np.nonzero(P[x] > 0)[0].tolist():
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == size


def chain_chi2_weights(P: np.ndarray) -> np.ndarray:
    """Weights w_k with X^2 -> sum_k w_k Z_k^2 for visit counts of a symmetric chain.

    For a reversible chain with uniform stationary law and kernel eigenvalues
    1 = l_0 > l_1 >= ..., the Pearson statistic of the visit counts converges
    to a weighted sum of chi-square(1) variables with w_k = (1 + l_k) / (1 - l_k).
    """
    lam = np.linalg.eigvalsh((P + P.T) / 2)
    lam = np.sort(lam)[:-1]
    return (1 + lam) / (1 - lam)


def weighted_chi2_sf(x: float, w: np.ndarray, draws: int = 200_000, seed: int = 0) -> float:
    """Monte Carlo P(sum_k w_k Z_k^2 >= x) with a fixed seed."""
    w = np.asarray(w, dtype=float)
    rng = np.random.default_rng(seed)
    hits = 0
    chunk = max(1, 2_000_000 // max(1, len(w)))
    for start in range(0, draws, chunk):
        k = min(chunk, draws - start)
        hits += int(np.count_nonzero(rng.chisquare(1, size=(k, len(w))) @ w >= x))
    return hits / draws
