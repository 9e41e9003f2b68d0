"""Null random-graph models: parameters, sampling, calibration, clique planting.

All five models share one factorised rate form

    rate(i, j) = block[c_i, c_j] * factor[i, c_j] * factor[j, c_i]

with ``K`` communities, labels ``c``, a symmetric ``K x K`` block matrix and an
``n x K`` factor matrix:

=========  ======  ==============  =======================
kind       K       block           factor[i, r]
=========  ======  ==============  =======================
er         1       [[p]]           1
chunglu    1       [[1]]           theta_i
sbm        K       omega           1
dcsbm      K       omega           theta_i (every r)
pabm       K       ones            theta_{i r}
=========  ======  ==============  =======================
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field, replace

import numpy as np

from .graph import Graph

KINDS = ("er", "chunglu", "sbm", "dcsbm", "pabm")
BERNOULLI = "bernoulli"
POISSON = "poisson"


@dataclass(frozen=True, eq=False)
class Rates:
    """Factorised symmetric rate matrix (see module docstring)."""

    labels: np.ndarray
    block: np.ndarray
    factor: np.ndarray

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        block = np.ascontiguousarray(self.block, dtype=np.float64)
        factor = np.ascontiguousarray(self.factor, dtype=np.float64)
        k = block.shape[0]
        if block.shape != (k, k) or not np.allclose(block, block.T, rtol=0, atol=0):
            raise ValueError("block matrix must be square and symmetric")
        if factor.ndim != 2 or factor.shape != (labels.shape[0], k):
            raise ValueError("factor must be n x K")
        if labels.size and (labels.min() < 0 or labels.max() >= k):
            raise ValueError("community labels must lie in [0, K)")
        if np.any(block < 0) or np.any(factor < 0):
            raise ValueError("rates must be nonnegative")
        for name, arr in (("labels", labels), ("block", block), ("factor", factor)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @property
    def k(self) -> int:
        return int(self.block.shape[0])

    def rate(self, i: int, j: int) -> float:
        if i == j:
            raise ValueError("rate is undefined on the diagonal")
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError("node index out of range")
        ci, cj = self.labels[i], self.labels[j]
        return float(self.block[ci, cj] * self.factor[i, cj] * self.factor[j, ci])

    def dense(self) -> np.ndarray:
        """Full ``n x n`` rate matrix with zero diagonal."""
        c = self.labels
        g = self.factor[:, c]
        out = self.block[np.ix_(c, c)] * g * g.T
        np.fill_diagonal(out, 0.0)
        return out

    def upper(self, iu, ju) -> np.ndarray:
        c = self.labels
        return self.block[c[iu], c[ju]] * self.factor[iu, c[ju]] * self.factor[ju, c[iu]]

    def pair_total(self) -> float:
        """``sum_{i<j} rate(i, j)`` in O(nK + K^2)."""
        k = self.k
        # colsum[r, s] = sum_{i in r} factor[i, s]
        colsum = np.zeros((k, k))
        np.add.at(colsum, self.labels, self.factor)
        full = float(np.sum(self.block * colsum * colsum.T))
        c = self.labels
        diag = float(np.sum(self.block[c, c] * self.factor[np.arange(self.n), c] ** 2))
        return 0.5 * (full - diag)

    def max_rate(self) -> float:
        if self.n < 2:
            return 0.0
        return float(self.dense().max())


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Generative parameters of one null model.

    ``params`` holds the kind-specific arrays: ``p`` (er), ``theta`` (chunglu,
    dcsbm: length n; pabm: n x K), ``omega`` (sbm, dcsbm) and ``labels``
    (sbm, dcsbm, pabm).
    """

    kind: str
    n: int
    params: dict = field(default_factory=dict)
    edge_law: str = POISSON

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        if self.edge_law not in (BERNOULLI, POISSON):
            raise ValueError(f"unknown edge law {self.edge_law!r}")
        object.__setattr__(self, "n", int(self.n))
        # validate eagerly
        self.rates

    @functools.cached_property
    def rates(self) -> Rates:
        p, n = self.params, self.n
        if self.kind == "er":
            prob = float(p["p"])
            if prob < 0:
                raise ValueError("p must be nonnegative")
            return Rates(np.zeros(n, np.int64), [[prob]], np.ones((n, 1)))
        if self.kind == "chunglu":
            theta = np.asarray(p["theta"], dtype=float)
            if theta.shape != (n,):
                raise ValueError("chunglu theta must have length n")
            return Rates(np.zeros(n, np.int64), [[1.0]], theta[:, None])
        labels = np.asarray(p["labels"], dtype=np.int64)
        if labels.shape != (n,):
            raise ValueError("labels must have length n")
        if self.kind == "sbm":
            omega = np.asarray(p["omega"], dtype=float)
            return Rates(labels, omega, np.ones((n, omega.shape[0])))
        if self.kind == "dcsbm":
            omega = np.asarray(p["omega"], dtype=float)
            theta = np.asarray(p["theta"], dtype=float)
            if theta.shape != (n,):
                raise ValueError("dcsbm theta must have length n")
            return Rates(labels, omega, np.repeat(theta[:, None], omega.shape[0], axis=1))
        theta = np.asarray(p["theta"], dtype=float)
        if theta.ndim != 2 or theta.shape[0] != n:
            raise ValueError("pabm theta must be n x K")
        return Rates(labels, np.ones((theta.shape[1], theta.shape[1])), theta)

    @property
    def communities(self):
        return None if self.kind in ("er", "chunglu") else np.asarray(self.params["labels"])

    @property
    def k(self) -> int:
        return self.rates.k


@dataclass(frozen=True)
class CliquePlan:
    """Node set to be made pairwise adjacent."""

    members: tuple

    def __post_init__(self):
        members = tuple(sorted(int(x) for x in self.members))
        if len(set(members)) != len(members):
            raise ValueError("clique members must be distinct")
        if len(members) < 2:
            raise ValueError("a clique needs at least two members")
        if members[0] < 0:
            raise ValueError("clique members must be nonnegative")
        object.__setattr__(self, "members", members)

    @property
    def m(self) -> int:
        return len(self.members)


def rate(spec: ModelSpec, i: int, j: int) -> float:
    return spec.rates.rate(i, j)


def expected_density(spec: ModelSpec) -> float:
    """Mean rate over all unordered pairs."""
    if spec.n < 2:
        raise ValueError("density needs at least two nodes")
    return spec.rates.pair_total() / (spec.n * (spec.n - 1) / 2)


def calibrate_density(spec: ModelSpec, target: float) -> ModelSpec:
    """Rescale every rate by one constant so the expected density hits ``target``.

    The constant is pushed into the parameters so the factorised form is kept:
    ``p`` and ``omega`` take the full scale (they enter each rate once), the
    per-node ``theta`` of Chung-Lu and PABM take its square root.
    """
    if target <= 0:
        raise ValueError("target density must be positive")
    current = expected_density(spec)
    if current <= 0:
        raise ValueError("cannot calibrate a model with zero expected density")
    scale = target / current
    p = dict(spec.params)
    if spec.kind == "er":
        p["p"] = float(p["p"]) * scale
    elif spec.kind in ("sbm", "dcsbm"):
        p["omega"] = np.asarray(p["omega"], dtype=float) * scale
    else:
        p["theta"] = np.asarray(p["theta"], dtype=float) * np.sqrt(scale)
    out = replace(spec, params=p)
    if out.edge_law == BERNOULLI and out.rates.max_rate() > 1.0:
        raise ValueError("calibrated Bernoulli rate exceeds 1")
    return out


@functools.lru_cache(maxsize=4)
def _upper_pairs(n: int):
    iu, ju = np.triu_indices(n, 1)
    iu.flags.writeable = False
    ju.flags.writeable = False
    return iu, ju


def generate(spec: ModelSpec, seed) -> Graph:
    """Sample one graph; each unordered pair is drawn independently."""
    rng = np.random.default_rng(seed)
    n = spec.n
    iu, ju = _upper_pairs(n)
    lam = spec.rates.upper(iu, ju)
    if spec.edge_law == BERNOULLI:
        if lam.size and lam.max() > 1.0:
            raise ValueError("Bernoulli rate exceeds 1; calibrate the model first")
        w = (rng.random(lam.size) < lam).astype(np.int64)
    else:
        w = rng.poisson(lam).astype(np.int64)
    keep = np.flatnonzero(w)
    return Graph.from_edges(n, iu[keep], ju[keep], w[keep])


def sample_chunglu_thetas(n: int, seed) -> np.ndarray:
    """``n`` independent Beta(1, 5) degree parameters."""
    if n < 1:
        raise ValueError("n must be positive")
    return np.random.default_rng(seed).beta(1.0, 5.0, size=n)


def choose_clique(n: int, m: int, seed) -> CliquePlan:
    """``m`` members drawn uniformly without replacement from ``range(n)``."""
    if not 2 <= m <= n:
        raise ValueError("clique size must lie in [2, n]")
    rng = np.random.default_rng(seed)
    return CliquePlan(tuple(rng.choice(n, size=m, replace=False)))


def embed_clique(g: Graph, plan: CliquePlan) -> Graph:
    """Force every pair inside ``plan.members`` to weight ``max(w, 1)``."""
    members = np.asarray(plan.members, dtype=np.int64)
    if members[-1] >= g.n:
        raise IndexError("clique member out of range")
    u, v, w = g.edge_arrays()
    a, b = np.triu_indices(members.size, 1)
    cu, cv = members[a], members[b]
    present = np.isin(cu * g.n + cv, u * g.n + v)
    return Graph.from_edges(
        g.n,
        np.concatenate([u, cu[~present]]),
        np.concatenate([v, cv[~present]]),
        np.concatenate([w, np.ones(int((~present).sum()), dtype=np.int64)]),
    )


SBM_OMEGA = np.array([[4.0, 1.0], [1.0, 4.0]])
DCSBM_OMEGA = np.array([[4.0, 2.0, 1.0], [2.0, 4.0, 1.0], [1.0, 1.0, 4.0]])
PABM_HOMOPHILY = 4.0
PABM_CATEGORY_WEIGHTS = ((0.8, 0.2), (0.2, 0.8))  # (within, across) per category


def _block_labels(n: int, fractions) -> np.ndarray:
    sizes = [int(n * f) for f in fractions[:-1]]
    sizes.append(n - sum(sizes))
    return np.repeat(np.arange(len(sizes)), sizes)


def pabm_theta(labels: np.ndarray, homophily: float = PABM_HOMOPHILY) -> np.ndarray:
    """Popularity matrix with two categories per community.

    Within each community the lower-indexed half of the nodes is category 1.
    """
    labels = np.asarray(labels, dtype=np.int64)
    k = int(labels.max()) + 1
    theta = np.empty((labels.size, k))
    within = np.sqrt(homophily / (1.0 + homophily))
    across = np.sqrt(1.0 / (1.0 + homophily))
    for r in range(k):
        idx = np.flatnonzero(labels == r)
        half = idx.size // 2
        for cat, members in enumerate((idx[:half], idx[half:])):
            a, b = PABM_CATEGORY_WEIGHTS[cat]
            theta[members, :] = b * across
            theta[members, r] = a * within
    return theta


def make_simulation_spec(kind: str, n: int, seed=0, density: float = 0.05) -> ModelSpec:
    """The simulation-study configuration for ``kind``, calibrated to ``density``.

    ``seed`` only matters for Chung-Lu and DCSBM, whose degree parameters are
    random.
    """
    kind = kind.lower()
    if kind == "er":
        return ModelSpec("er", n, {"p": density}, BERNOULLI)
    if kind == "chunglu":
        spec = ModelSpec("chunglu", n, {"theta": sample_chunglu_thetas(n, seed)})
    elif kind == "sbm":
        _need(n, 2)
        spec = ModelSpec("sbm", n, {"labels": _block_labels(n, (0.5, 0.5)), "omega": SBM_OMEGA})
    elif kind == "dcsbm":
        _need(n, 3)
        spec = ModelSpec("dcsbm", n, {
            "labels": _block_labels(n, (0.25, 0.25, 0.5)),
            "omega": DCSBM_OMEGA,
            "theta": sample_chunglu_thetas(n, seed),
        })
    elif kind == "pabm":
        _need(n, 2)
        labels = _block_labels(n, (0.5, 0.5))
        spec = ModelSpec("pabm", n, {"labels": labels, "theta": pabm_theta(labels)})
    else:
        raise ValueError(f"unsupported model kind {kind!r}; expected one of {KINDS}")
    return calibrate_density(spec, density)


def _need(n, k):
    if n < 4 * k:
        raise ValueError(f"need at least {4 * k} nodes for {k} communities")
