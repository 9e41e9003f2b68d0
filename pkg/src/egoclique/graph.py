"""Sparse symmetric multigraph with egonet queries."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import kernels


def pair_count(d: int) -> int:
    """Number of unordered pairs among ``d`` items, ``d (d - 1) / 2``."""
    d = int(d)
    if d < 0:
        raise ValueError("d must be nonnegative")
    return d * (d - 1) // 2


class Graph:
    """Undirected graph with nonnegative integer edge weights and no self-loops.

    Storage is CSR: for node ``i`` the sorted neighbor indices live in
    ``indices[indptr[i]:indptr[i+1]]`` with matching ``weights``. Each
    unordered pair therefore appears twice, once per endpoint. Arrays are
    frozen after construction.
    """

    __slots__ = ("n", "indptr", "indices", "weights", "_degrees")

    def __init__(self, n: int, indptr, indices, weights):
        self.n = int(n)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=np.int64)
        for a in (self.indptr, self.indices, self.weights):
            a.flags.writeable = False
        self._degrees = None

    # construction -----------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, u, v, w=None) -> "Graph":
        """Build from endpoint arrays; duplicate pairs are merged by summing weights."""
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        if u.shape != v.shape:
            raise ValueError("u and v must have the same length")
        w = np.ones_like(u) if w is None else np.asarray(w, dtype=np.int64).ravel()
        if w.shape != u.shape:
            raise ValueError("weights must match the edge arrays")
        if u.size:
            if min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n:
                raise IndexError("edge endpoint out of range")
            if np.any(u == v):
                raise ValueError("self-loops are not allowed")
            if np.any(w < 0):
                raise ValueError("edge weights must be nonnegative")
        keep = w > 0
        u, v, w = u[keep], v[keep], w[keep]
        m = sp.coo_matrix(
            (np.concatenate([w, w]), (np.concatenate([u, v]), np.concatenate([v, u]))),
            shape=(n, n),
        ).tocsr()
        m.sum_duplicates()
        m.sort_indices()
        return cls(n, m.indptr, m.indices, m.data)

    @classmethod
    def from_dense(cls, a) -> "Graph":
        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(a) != 0):
            raise ValueError("adjacency must have a zero diagonal")
        iu, ju = np.nonzero(np.triu(a, 1))
        return cls.from_edges(a.shape[0], iu, ju, a[iu, ju].astype(np.int64))

    @classmethod
    def from_scipy(cls, m) -> "Graph":
        m = sp.triu(sp.csr_matrix(m), k=1).tocoo()
        return cls.from_edges(m.shape[0], m.row, m.col, m.data.astype(np.int64))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, np.zeros(n + 1, dtype=np.int64), [], [])

    # queries ----------------------------------------------------------

    def _check(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.n:
            raise IndexError(f"node {i} out of range for n={self.n}")
        return i

    def degree(self, i: int) -> int:
        """Weighted degree: sum of incident edge weights."""
        i = self._check(i)
        return int(self.weights[self.indptr[i]:self.indptr[i + 1]].sum())

    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            csum = np.concatenate([[0], np.cumsum(self.weights, dtype=np.int64)])
            d = csum[self.indptr[1:]] - csum[self.indptr[:-1]]
            d.flags.writeable = False
            self._degrees = d
        return self._degrees

    def neighbor_counts(self) -> np.ndarray:
        """``|N_i|`` for every node (distinct neighbors, ignoring multiplicity)."""
        return np.diff(self.indptr)

    def neighborhood(self, i: int) -> np.ndarray:
        i = self._check(i)
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def weight(self, i: int, j: int) -> int:
        i, j = self._check(i), self._check(j)
        row = self.neighborhood(i)
        pos = np.searchsorted(row, j)
        if pos < row.size and row[pos] == j:
            return int(self.weights[self.indptr[i] + pos])
        return 0

    def egonet_degree(self, i: int) -> int:
        """Total weight of edges between pairs of neighbors of ``i``."""
        i = self._check(i)
        nb = self.neighborhood(i)
        total = 0
        for a, j in enumerate(nb):
            row = self.indices[self.indptr[j]:self.indptr[j + 1]]
            w = self.weights[self.indptr[j]:self.indptr[j + 1]]
            common, _, pos = np.intersect1d(nb[a + 1:], row, assume_unique=True, return_indices=True)
            total += int(w[pos].sum())
        return total

    def egonet_degrees(self, backend: str | None = None) -> np.ndarray:
        return kernels.egonet_degrees(self, backend=backend)

    @property
    def total_weight(self) -> int:
        """``M``: sum of weights over unordered pairs."""
        return int(self.weights.sum()) // 2

    @property
    def num_pairs(self) -> int:
        """Number of unordered pairs with positive weight."""
        return int(self.indices.size) // 2

    def is_binary(self) -> bool:
        return bool(np.all(self.weights == 1))

    # conversion -------------------------------------------------------

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (np.array(self.weights), np.array(self.indices), np.array(self.indptr)),
            shape=(self.n, self.n),
        )

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def edge_arrays(self):
        """``(u, v, w)`` with ``u < v``, one entry per unordered pair, sorted by ``(u, v)``."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        keep = rows < self.indices
        return rows[keep], self.indices[keep], self.weights[keep]

    def induced_subgraph(self, nodes):
        """Subgraph on ``nodes``; returns ``(graph, original_index_array)``.

        Node ``a`` of the subgraph corresponds to ``original[a]``; the
        original indices are sorted ascending.
        """
        nodes = np.unique(np.asarray(list(nodes) if not isinstance(nodes, np.ndarray) else nodes,
                                     dtype=np.int64))
        if nodes.size and (nodes[0] < 0 or nodes[-1] >= self.n):
            raise IndexError("subgraph node out of range")
        sub = self.to_scipy()[nodes][:, nodes]
        return Graph.from_scipy(sub), nodes

    def permute(self, perm) -> "Graph":
        """Relabel node ``i`` as ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        if perm.shape != (self.n,) or not np.array_equal(np.sort(perm), np.arange(self.n)):
            raise ValueError("perm must be a permutation of range(n)")
        u, v, w = self.edge_arrays()
        return Graph.from_edges(self.n, perm[u], perm[v], w)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, pairs={self.num_pairs}, weight={self.total_weight})"
