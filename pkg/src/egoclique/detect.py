"""Egonet scan test for an anomalous clique."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels, tails
from .fit import FittedModel
from .graph import Graph

MAX_RECOVER = 200


@dataclass(frozen=True)
class EgonetRecord:
    node: int
    degree: int
    pair_count: int
    egonet_degree: int
    p_value: float


@dataclass(frozen=True, eq=False)
class EgonetScan:
    """Column-wise per-node statistics.

    ``null_mean`` is the Binomial/Poisson mean of the egonet degree under the
    fitted model (``pair_count * p`` or the summed pair rates).
    """

    degree: np.ndarray
    pair_count: np.ndarray
    egonet_degree: np.ndarray
    null_mean: np.ndarray
    p_value: np.ndarray

    def __len__(self):
        return self.p_value.shape[0]

    def records(self) -> list[EgonetRecord]:
        return [
            EgonetRecord(i, int(d), int(c), int(e), float(p))
            for i, (d, c, e, p) in enumerate(
                zip(self.degree, self.pair_count, self.egonet_degree, self.p_value)
            )
        ]


def egonet_scan(g: Graph, fm: FittedModel, backend: str | None = None) -> EgonetScan:
    if fm.n != g.n:
        raise ValueError(f"model fitted on {fm.n} nodes but graph has {g.n}")
    nbrs = g.neighbor_counts().astype(np.int64)
    pairs = nbrs * (nbrs - 1) // 2
    e = kernels.egonet_degrees(g, backend=backend)
    if fm.is_binomial:
        p_hat = float(fm.rates.block[0, 0])
        mean = pairs * p_hat
        pv = tails.binom_sf_array(e, pairs, p_hat)
    else:
        r = fm.rates
        mean = kernels.pair_rate_sums(g, r.labels, r.block, r.factor, backend=backend)
        pv = tails.poisson_sf_array(e, mean)
    pv[nbrs < 2] = 1.0
    return EgonetScan(g.degrees(), pairs, e, mean, pv)


def egonet_pvalues(g: Graph, fm: FittedModel, backend: str | None = None) -> list[EgonetRecord]:
    """One record per node: degree, neighbor-pair count, egonet degree, p-value."""
    return egonet_scan(g, fm, backend).records()


@dataclass(frozen=True, eq=False)
class DetectionReport:
    alpha: float
    threshold: float
    t_n: float
    reject: bool
    flagged: tuple
    scan: EgonetScan
    model: str = ""
    labels: tuple | None = None

    @property
    def records(self) -> list[EgonetRecord]:
        return self.scan.records()

    @property
    def p_values(self) -> np.ndarray:
        return self.scan.p_value

    def flagged_labels(self) -> list[str]:
        if self.labels is None:
            return [str(i) for i in self.flagged]
        return [self.labels[i] for i in self.flagged]

    def __eq__(self, other):
        if not isinstance(other, DetectionReport):
            return NotImplemented
        cols = ("degree", "pair_count", "egonet_degree", "null_mean", "p_value")
        return (
            (self.alpha, self.threshold, self.t_n, self.reject, self.flagged, self.model, self.labels)
            == (other.alpha, other.threshold, other.t_n, other.reject, other.flagged, other.model,
                other.labels)
            and all(np.array_equal(getattr(self.scan, c), getattr(other.scan, c)) for c in cols)
        )

    __hash__ = None


def flag(scan: EgonetScan, alpha: float) -> np.ndarray:
    """Nodes whose p-value is strictly below ``alpha / n``."""
    return np.flatnonzero(scan.p_value < alpha / len(scan))


def report_from_scan(scan: EgonetScan, alpha: float, model: str = "", labels=None) -> DetectionReport:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    n = len(scan)
    threshold = alpha / n
    t_n = float(scan.p_value.min()) if n else 1.0
    flagged = tuple(int(i) for i in flag(scan, alpha)) if n else ()
    return DetectionReport(alpha, threshold, t_n, t_n < threshold, flagged, scan, model,
                           None if labels is None else tuple(labels))


def detect(g: Graph, fm: FittedModel, alpha: float = 0.01, *, labels=None,
           backend: str | None = None) -> DetectionReport:
    """Reject when the smallest egonet p-value falls below ``alpha / n``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    return report_from_scan(egonet_scan(g, fm, backend), alpha, fm.kind, labels)


# --- clique recovery ----------------------------------------------------


def _adjacency_bits(g: Graph):
    adj = [0] * g.n
    for i in range(g.n):
        for j in g.neighborhood(i):
            adj[i] |= 1 << int(j)
    return adj


def _color_bound(cand: int, adj) -> int:
    """Greedy colouring of ``cand``; the colour count bounds its clique number."""
    colors = 0
    rest = cand
    while rest:
        colors += 1
        avail = rest
        while avail:
            v = (avail & -avail).bit_length() - 1
            rest &= ~(1 << v)
            avail &= ~(1 << v) & ~adj[v]
    return colors


def _clique_number(adj, n) -> int:
    best = 0

    def expand(size, cand):
        nonlocal best
        if not cand:
            best = max(best, size)
            return
        if size + _color_bound(cand, adj) <= best:
            return
        while cand:
            if size + bin(cand).count("1") <= best:
                return
            v = (cand & -cand).bit_length() - 1
            expand(size + 1, cand & adj[v])
            cand &= ~(1 << v)

    expand(0, (1 << n) - 1)
    return best


def _first_clique_of_size(adj, n, target):
    # depth-first in ascending vertex order, so the first hit is lexicographically smallest
    def search(chosen, cand):
        if len(chosen) == target:
            return chosen
        while cand:
            if len(chosen) + _color_bound(cand, adj) < target:
                return None
            v = (cand & -cand).bit_length() - 1
            cand &= ~(1 << v)
            found = search(chosen + [v], cand & adj[v])
            if found is not None:
                return found
        return None

    return search([], (1 << n) - 1)


def maximum_clique(g: Graph) -> list[int]:
    """Lexicographically smallest maximum clique, by exact branch and bound."""
    if g.n == 0:
        return []
    adj = _adjacency_bits(g)
    size = _clique_number(adj, g.n)
    return _first_clique_of_size(adj, g.n, size)


def recover_clique(g: Graph, flagged) -> list[int]:
    """Maximum clique of the subgraph induced by ``flagged``, in original indices."""
    flagged = sorted({int(i) for i in flagged})
    if len(flagged) > MAX_RECOVER:
        raise ValueError(
            f"{len(flagged)} flagged nodes exceeds the exact-search limit of {MAX_RECOVER}; "
            "use a smaller alpha"
        )
    sub, original = g.induced_subgraph(flagged)
    return [int(original[i]) for i in maximum_clique(sub)]
