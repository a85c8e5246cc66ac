"""Compiled clique counting over bitset adjacency.

Counting follows the succinct clique tree idea: vertices are rooted in
degeneracy order, and each recursion node picks a pivot that covers the
largest share of the candidate set.  A leaf reached with ``h`` held vertices
and ``p`` pivot vertices stands for ``C(p, k - h)`` distinct k-cliques, so
dense graphs are counted without listing their cliques.
"""

import numpy as np
from numba import njit

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)


@njit(cache=True, inline="always")
def _popcount(x):
    x = x - ((x >> _ONE) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return (x * _H01) >> np.uint64(56)


@njit(cache=True)
def binomial_table(n, k):
    table = np.zeros((n + 1, k + 1), dtype=np.int64)
    for i in range(n + 1):
        table[i, 0] = 1
        for j in range(1, min(i, k) + 1):
            table[i, j] = table[i - 1, j - 1] + (table[i - 1, j] if j <= i - 1 else 0)
    return table


@njit(cache=True)
def _degeneracy_order(adj, n, n_words):
    deg = np.zeros(n, dtype=np.int64)
    for v in range(n):
        c = 0
        for w in range(n_words):
            c += _popcount(adj[v, w])
        deg[v] = c
    removed = np.zeros(n, dtype=np.bool_)
    order = np.empty(n, dtype=np.int64)
    max_core = 0
    for step in range(n):
        best = -1
        best_deg = n + 1
        for v in range(n):
            if not removed[v] and deg[v] < best_deg:
                best = v
                best_deg = deg[v]
        order[step] = best
        removed[best] = True
        if best_deg > max_core:
            max_core = best_deg
        for u in range(n):
            if not removed[u] and (adj[best, u >> 6] >> np.uint64(u & 63)) & _ONE:
                deg[u] -= 1
    return order, max_core


@njit(cache=True)
def count_cliques_bitset(adj, n, max_size, binom):
    """Return ``counts`` with ``counts[k - 1]`` = number of k-cliques, k <= max_size."""
    n_words = adj.shape[1]
    counts = np.zeros(max_size, dtype=np.int64)
    if n == 0:
        return counts
    order, max_core = _degeneracy_order(adj, n, n_words)

    cap = (max_core + 2) * (max_core + 2) + 1
    stack_c = np.empty((cap, n_words), dtype=np.uint64)
    stack_h = np.empty(cap, dtype=np.int64)
    stack_p = np.empty(cap, dtype=np.int64)

    remaining = np.zeros(n_words, dtype=np.uint64)
    for v in range(n):
        remaining[v >> 6] |= _ONE << np.uint64(v & 63)
    cand = np.empty(n_words, dtype=np.uint64)
    work = np.empty(n_words, dtype=np.uint64)

    for idx in range(n):
        root = order[idx]
        remaining[root >> 6] &= ~(_ONE << np.uint64(root & 63))
        top = 0
        for w in range(n_words):
            stack_c[0, w] = adj[root, w] & remaining[w]
        stack_h[0] = 1
        stack_p[0] = 0
        top = 1
        while top > 0:
            top -= 1
            held = stack_h[top]
            piv = stack_p[top]
            if held > max_size:
                continue
            size = 0
            for w in range(n_words):
                cand[w] = stack_c[top, w]
                size += _popcount(cand[w])
            if size == 0:
                for k in range(held, min(held + piv, max_size) + 1):
                    counts[k - 1] += binom[piv, k - held]
                continue

            # pivot: candidate with most neighbours inside the candidate set
            pivot = -1
            best = -1
            for w in range(n_words):
                x = cand[w]
                while x:
                    low = x & (~x + _ONE)
                    u = w * 64 + np.int64(_popcount(low - _ONE))
                    x ^= low
                    c = 0
                    for ww in range(n_words):
                        c += _popcount(cand[ww] & adj[u, ww])
                    if np.int64(c) > best:
                        best = np.int64(c)
                        pivot = u

            for w in range(n_words):
                work[w] = cand[w] & ~adj[pivot, w]
            for w in range(n_words):
                x = work[w]
                while x:
                    low = x & (~x + _ONE)
                    u = w * 64 + np.int64(_popcount(low - _ONE))
                    x ^= low
                    for ww in range(n_words):
                        stack_c[top, ww] = cand[ww] & adj[u, ww]
                    if u == pivot:
                        stack_h[top] = held
                        stack_p[top] = piv + 1
                    else:
                        stack_h[top] = held + 1
                        stack_p[top] = piv
                    top += 1
                    cand[w] &= ~low
    return counts


@njit(cache=True)
def adjacency_bitsets(birth, threshold):
    n = birth.shape[0]
    n_words = max(1, (n + 63) // 64)
    adj = np.zeros((n, n_words), dtype=np.uint64)
    n_edges = 0
    for i in range(n):
        for j in range(i + 1, n):
            if birth[i, j] <= threshold:
                adj[i, j >> 6] |= _ONE << np.uint64(j & 63)
                adj[j, i >> 6] |= _ONE << np.uint64(i & 63)
                n_edges += 1
    return adj, n_edges


@njit(cache=True)
def count_curve(birth, grid, max_size, binom):
    """Per-threshold clique counts, shape ``(len(grid), max_size)``."""
    n = birth.shape[0]
    out = np.zeros((grid.shape[0], max_size), dtype=np.int64)
    last_edges = -1
    for s in range(grid.shape[0]):
        adj, n_edges = adjacency_bitsets(birth, grid[s])
        if n_edges == last_edges:
            out[s, :] = out[s - 1, :]
            continue
        out[s, :] = count_cliques_bitset(adj, n, max_size, binom)
        last_edges = n_edges
    return out
