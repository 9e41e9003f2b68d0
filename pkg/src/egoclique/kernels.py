"""Per-node scan kernels.

Two interchangeable implementations of each kernel:

* ``*_loop``: explicit loops, compiled with ``numba.njit(parallel=True)`` when
  acceleration is enabled (plain Python otherwise, only used in tests).
* ``*_numpy``: vectorised numpy/scipy formulation.

The dispatchers pick the loop version under numba and the numpy version
otherwise. Every node's result depends only on that node's neighbor list,
scanned in ascending order, so output is identical for any thread count.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from ._jit import USE_NUMBA, jit, num_threads, prange


@jit(parallel=True)
def egonet_degrees_loop(indptr, indices, weights, nchunks=1):
    n = indptr.shape[0] - 1
    out = np.zeros(n, dtype=np.int64)
    nchunks = max(1, min(nchunks, n))
    for c in prange(nchunks):
        # mark[k] == i  <=>  k is a neighbor of the node i being scanned
        mark = np.full(n, -1, dtype=np.int64)
        for i in range(c, n, nchunks):
            lo, hi = indptr[i], indptr[i + 1]
            for a in range(lo, hi):
                mark[indices[a]] = i
            total = 0
            for a in range(lo, hi):
                j = indices[a]
                for q in range(indptr[j], indptr[j + 1]):
                    k = indices[q]
                    if k > j and mark[k] == i:
                        total += weights[q]
            out[i] = total
    return out


def egonet_degrees_numpy(indptr, indices, weights):
    n = indptr.shape[0] - 1
    a = sp.csr_matrix((weights, indices, indptr), shape=(n, n))
    b = sp.csr_matrix((np.ones_like(weights), indices, indptr), shape=(n, n))
    # (B A B)_ii counts each neighbor pair twice
    two_e = np.asarray((b @ a).multiply(b).sum(axis=1)).ravel()
    return (two_e // 2).astype(np.int64)


@jit(parallel=True)
def pair_rate_sums_loop(indptr, indices, labels, block, factor):
    n = indptr.shape[0] - 1
    out = np.zeros(n)
    for i in prange(n):
        lo, hi = indptr[i], indptr[i + 1]
        s = 0.0
        comp = 0.0
        for a in range(lo, hi):
            j = indices[a]
            cj = labels[j]
            for b in range(a + 1, hi):
                k = indices[b]
                ck = labels[k]
                x = block[cj, ck] * factor[j, ck] * factor[k, cj]
                # Neumaier compensated sum
                t = s + x
                if abs(s) >= abs(x):
                    comp += (s - t) + x
                else:
                    comp += (x - t) + s
                s = t
        out[i] = s + comp
    return out


def pair_rate_sums_numpy(indptr, indices, labels, block, factor):
    n = indptr.shape[0] - 1
    out = np.zeros(n)
    for i in range(n):
        nb = indices[indptr[i]:indptr[i + 1]]
        if nb.size < 2:
            continue
        c = labels[nb]
        rates = block[np.ix_(c, c)] * factor[np.ix_(nb, c)] * factor[np.ix_(nb, c)].T
        iu = np.triu_indices(nb.size, 1)
        out[i] = math.fsum(rates[iu])
    return out


def _resolve(backend):
    if backend is None:
        return "numba" if USE_NUMBA else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


def egonet_degrees(g, backend=None) -> np.ndarray:
    """``e_i`` for every node of ``g``."""
    if _resolve(backend) == "numba":
        return egonet_degrees_loop(g.indptr, g.indices, g.weights, 4 * num_threads())
    return egonet_degrees_numpy(g.indptr, g.indices, g.weights)


def pair_rate_sums(g, labels, block, factor, backend=None) -> np.ndarray:
    """``sum_{j<k in N_i} rate(j, k)`` for every node, where
    ``rate(j, k) = block[c_j, c_k] * factor[j, c_k] * factor[k, c_j]``.
    """
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    block = np.ascontiguousarray(block, dtype=np.float64)
    factor = np.ascontiguousarray(factor, dtype=np.float64)
    if _resolve(backend) == "numba":
        return pair_rate_sums_loop(g.indptr, g.indices, labels, block, factor)
    return pair_rate_sums_numpy(g.indptr, g.indices, labels, block, factor)
