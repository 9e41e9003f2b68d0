"""Null-model estimation from an observed graph."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import Graph
from .models import KINDS, Rates


class FitError(ValueError):
    """The requested model cannot be fitted to this graph."""


@dataclass(frozen=True)
class ClusteringConfig:
    k: int
    regularizer: float | None = None  # None: mean degree
    row_normalize: bool = False
    kmeans_restarts: int = 10
    kmeans_max_iter: int = 100
    eig_tol: float = 1e-8

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.regularizer is not None and self.regularizer < 0:
            raise ValueError("regularizer must be nonnegative")


@dataclass(frozen=True, eq=False)
class FittedModel:
    """Estimated rate structure; ``rates.rate(i, j)`` gives the plug-in rate."""

    kind: str
    rates: Rates
    communities: np.ndarray | None = None
    params: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.rates.n

    def rate(self, i: int, j: int) -> float:
        return self.rates.rate(i, j)

    @property
    def is_binomial(self) -> bool:
        return self.kind == "er"


# --- simple models ------------------------------------------------------


def fit_er(g: Graph) -> FittedModel:
    if g.n < 2:
        raise FitError("need at least two nodes")
    p_hat = g.total_weight / (g.n * (g.n - 1) / 2)
    if p_hat > 1.0:
        raise FitError("edge weights too large for a Bernoulli model")
    rates = Rates(np.zeros(g.n, np.int64), [[p_hat]], np.ones((g.n, 1)))
    return FittedModel("er", rates, params={"p": p_hat})


def fit_chunglu(g: Graph) -> FittedModel:
    two_m = 2 * g.total_weight
    if two_m == 0:
        raise FitError("Chung-Lu fit needs at least one edge")
    d = g.degrees().astype(float)
    rates = Rates(np.zeros(g.n, np.int64), [[1.0]], (d / np.sqrt(two_m))[:, None])
    return FittedModel("chunglu", rates, params={"degrees": d, "two_m": two_m})


# --- spectral clustering ------------------------------------------------


def _sign_fix(v: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def _top_eigvecs(op_dense, op_sparse, n, k, tol, rng):
    """Eigenvectors of the ``k`` largest-magnitude eigenvalues, ordered by |eigenvalue|."""
    if n <= 300 or k >= n - 1:
        w, v = scipy.linalg.eigh(op_dense())
    else:
        v0 = rng.uniform(0.5, 1.5, size=n)
        try:
            w, v = spla.eigsh(op_sparse, k=k, which="LM", tol=tol, v0=v0, maxiter=20 * n)
        except spla.ArpackNoConvergence as exc:
            raise FitError("eigensolver failed to converge") from exc
    order = np.lexsort((np.arange(w.size), -np.abs(w)))[:k]
    return w[order], _sign_fix(v[:, order])


def kmeans(x: np.ndarray, k: int, restarts: int = 10, max_iter: int = 100, seed=0) -> np.ndarray:
    """Lloyd's k-means with k-means++ seeding; best of ``restarts`` runs.

    Labels are renumbered by order of first appearance so the output does not
    depend on centroid order.
    """
    rng = np.random.default_rng(seed)
    n = x.shape[0]
    if k > n:
        raise FitError("more clusters than points")
    best, best_cost = None, np.inf
    for _ in range(restarts):
        centers = _kmeanspp(x, k, rng)
        for _ in range(max_iter):
            d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
            lab = d2.argmin(axis=1)
            new = centers.copy()
            for c in range(k):
                pts = x[lab == c]
                if pts.shape[0]:
                    new[c] = pts.mean(axis=0)
                else:
                    new[c] = x[d2.min(axis=1).argmax()]
            if np.array_equal(new, centers):
                break
            centers = new
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        lab = d2.argmin(axis=1)
        cost = float(d2[np.arange(n), lab].sum())
        if cost < best_cost:
            best, best_cost = lab, cost
    _, first = np.unique(best, return_index=True)
    remap = np.empty(k, dtype=np.int64)
    remap[best[np.sort(first)]] = np.arange(first.size)
    return remap[best]


def _kmeanspp(x, k, rng):
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        idx = rng.choice(n, p=d2 / total) if total > 0 else rng.integers(n)
        centers[c] = x[idx]
        d2 = np.minimum(d2, ((x - centers[c]) ** 2).sum(axis=1))
    return centers


def spectral_embedding(g: Graph, cfg: ClusteringConfig, seed=0) -> np.ndarray:
    """Top-``k`` eigenvectors of ``D^-1/2 (A + tau/n J) D^-1/2``."""
    n, k = g.n, cfg.k
    a = g.to_scipy().astype(float)
    d = np.asarray(a.sum(axis=1)).ravel()
    tau = float(d.mean()) if cfg.regularizer is None else float(cfg.regularizer)
    dt = d + tau
    s = np.zeros(n)
    s[dt > 0] = 1.0 / np.sqrt(dt[dt > 0])
    shift = tau / n

    def dense():
        return s[:, None] * (a.toarray() + shift) * s[None, :]

    def matvec(v):
        v = np.asarray(v).ravel()
        sv = s * v
        return s * (a @ sv + shift * sv.sum())

    op = spla.LinearOperator((n, n), matvec=matvec, dtype=float)
    _, vecs = _top_eigvecs(dense, op, n, k, cfg.eig_tol, np.random.default_rng(seed))
    if cfg.row_normalize:
        norms = np.linalg.norm(vecs, axis=1)
        nz = norms > 0
        vecs[nz] /= norms[nz, None]
    return vecs


def spectral_cluster(g: Graph, cfg: ClusteringConfig, seed=0) -> np.ndarray:
    """Community labels in ``[0, k)`` from regularized spectral clustering."""
    if cfg.k > g.n:
        raise FitError("more communities than nodes")
    if cfg.k == 1:
        return np.zeros(g.n, dtype=np.int64)
    x = spectral_embedding(g, cfg, seed)
    return kmeans(x, cfg.k, cfg.kmeans_restarts, cfg.kmeans_max_iter, seed)


# --- block models -------------------------------------------------------


def block_sums(g: Graph, labels: np.ndarray, k: int) -> np.ndarray:
    """``O[r, s]``: total weight over ordered pairs with ``c_i = r``, ``c_j = s``."""
    z = sp.csr_matrix((np.ones(g.n), (np.arange(g.n), labels)), shape=(g.n, k))
    return np.asarray((z.T @ g.to_scipy().astype(float) @ z).todense())


def _labels_for(g, k, row_normalize, labels, seed, clustering):
    if labels is None:
        cfg = clustering or ClusteringConfig(k=k, row_normalize=row_normalize)
        labels = spectral_cluster(g, cfg, seed)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (g.n,):
        raise FitError("labels must have one entry per node")
    sizes = np.bincount(labels, minlength=k)
    if sizes.size != k or np.any(sizes == 0):
        raise FitError("an estimated community is empty")
    return labels, sizes


def fit_sbm(g: Graph, k: int, *, labels=None, seed=0, clustering=None) -> FittedModel:
    labels, sizes = _labels_for(g, k, False, labels, seed, clustering)
    o = block_sums(g, labels, k)
    denom = np.outer(sizes, sizes).astype(float)
    denom[np.diag_indices(k)] = sizes * (sizes - 1)
    omega = np.divide(o, denom, out=np.zeros_like(o), where=denom > 0)
    rates = Rates(labels, omega, np.ones((g.n, k)))
    return FittedModel("sbm", rates, labels, {"omega": omega})


def fit_dcsbm(g: Graph, k: int, *, labels=None, seed=0, clustering=None) -> FittedModel:
    labels, _ = _labels_for(g, k, True, labels, seed, clustering)
    o = block_sums(g, labels, k)
    delta = o.sum(axis=1)
    if np.any(delta == 0):
        raise FitError("an estimated community has zero total degree")
    theta = g.degrees() / delta[labels]
    rates = Rates(labels, o, np.repeat(theta[:, None], k, axis=1))
    return FittedModel("dcsbm", rates, labels, {"omega": o, "theta": theta})


def fit_pabm(g: Graph, k: int, *, labels=None, seed=0, clustering=None) -> FittedModel:
    labels, _ = _labels_for(g, k, True, labels, seed, clustering)
    o = block_sums(g, labels, k)
    z = sp.csr_matrix((np.ones(g.n), (np.arange(g.n), labels)), shape=(g.n, k))
    into = np.asarray((g.to_scipy().astype(float) @ z).todense())  # weight from i into r
    root = np.sqrt(o[labels])  # sqrt of block (c_i, r) sum, per node
    if np.any((root == 0) & (into > 0)):
        raise FitError("zero block sum with nonzero popularity numerator")
    theta = np.divide(into, root, out=np.zeros_like(into), where=root > 0)
    rates = Rates(labels, np.ones((k, k)), theta)
    return FittedModel("pabm", rates, labels, {"theta": theta})


def fit_model(g: Graph, kind: str, k: int | None = None, *, seed=0, labels=None) -> FittedModel:
    """Dispatch on ``kind``; ``k`` is required for the block models."""
    kind = kind.lower()
    if kind not in KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {KINDS}")
    if kind == "er":
        return fit_er(g)
    if kind == "chunglu":
        return fit_chunglu(g)
    if k is None:
        raise ValueError(f"{kind} needs the number of communities k")
    fitter = {"sbm": fit_sbm, "dcsbm": fit_dcsbm, "pabm": fit_pabm}[kind]
    return fitter(g, k, seed=seed, labels=labels)


def expected_adjacency(fm: FittedModel) -> np.ndarray:
    """Dense ``n x n`` matrix of fitted rates with zero diagonal."""
    return fm.rates.dense()
