"""Residual-PCA quadrant chi-square detector used as a benchmark."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla
from scipy.special import chdtri

from .fit import FitError, FittedModel, expected_adjacency
from .graph import Graph

N_ANGLES = 32
ANGLES = np.array([k * math.pi / 16 for k in range(1, N_ANGLES + 1)])


@dataclass(frozen=True, eq=False)
class Chi2Report:
    statistic: float
    angle: float
    critical_value: float
    alpha: float
    reject: bool
    quadrant_tables: np.ndarray  # (32, 2, 2) counts, one table per grid angle

    def __eq__(self, other):
        if not isinstance(other, Chi2Report):
            return NotImplemented
        return (
            (self.statistic, self.angle, self.critical_value, self.alpha, self.reject)
            == (other.statistic, other.angle, other.critical_value, other.alpha, other.reject)
            and np.array_equal(self.quadrant_tables, other.quadrant_tables)
        )

    __hash__ = None


def chi2_critical(alpha: float) -> float:
    """Upper ``alpha`` quantile of chi-square with one degree of freedom."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    return float(chdtri(1.0, alpha))


def _leading_pair(r: np.ndarray, seed=0):
    n = r.shape[0]
    if n <= 300:
        w, v = scipy.linalg.eigh(r)
    else:
        v0 = np.random.default_rng(seed).uniform(0.5, 1.5, size=n)
        try:
            w, v = spla.eigsh(r, k=2, which="LM", tol=1e-10, v0=v0, maxiter=20 * n)
        except spla.ArpackNoConvergence as exc:
            raise FitError("eigensolver failed to converge") from exc
    order = np.lexsort((np.arange(w.size), -np.abs(w)))[:2]
    v = v[:, order]
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.where(v[idx, [0, 1]] < 0, -1.0, 1.0)
    v = v * signs
    return v[:, 0].copy(), v[:, 1].copy()


def _residual(g: Graph, fm: FittedModel) -> np.ndarray:
    if g.n < 2:
        raise ValueError("need at least two nodes")
    if fm.n != g.n:
        raise ValueError(f"model fitted on {fm.n} nodes but graph has {g.n}")
    return g.to_dense().astype(float) - expected_adjacency(fm)


def residual_pcs(g: Graph, fm: FittedModel, seed=0):
    """Leading two eigenvectors (by |eigenvalue|) of ``A - E_hat[A]``.

    Each vector has unit norm and its largest-magnitude entry positive.
    """
    return _leading_pair(_residual(g, fm), seed)


def residual_points(g: Graph, fm: FittedModel, seed=0):
    """Coordinates of the nodes that enter the quadrant tables.

    A node whose residual row is identically zero (for instance an isolated
    node under a degree-corrected fit, where the fitted rates vanish too)
    sits exactly at the origin in every rotation. Those nodes carry no
    information, and counting them on the positive side would pile them
    all into one cell, so they are left out.
    """
    r = _residual(g, fm)
    x1, x2 = _leading_pair(r, seed)
    keep = np.any(r != 0, axis=1)
    return x1[keep], x2[keep]


def quadrant_table(x1, x2, angle: float) -> np.ndarray:
    """2x2 counts of the points rotated by ``-angle``; zero counts as positive."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.shape != x2.shape:
        raise ValueError("x1 and x2 must have equal length")
    c, s = math.cos(angle), math.sin(angle)
    u = c * x1 + s * x2
    v = -s * x1 + c * x2
    pu = u >= 0
    pv = v >= 0
    return np.array([
        [np.count_nonzero(pu & pv), np.count_nonzero(pu & ~pv)],
        [np.count_nonzero(~pu & pv), np.count_nonzero(~pu & ~pv)],
    ], dtype=np.int64)


def table_chi2(t) -> float:
    """Pearson independence statistic of a 2x2 table, no continuity correction."""
    t = np.asarray(t, dtype=float)
    rows = t.sum(axis=1)
    cols = t.sum(axis=0)
    if np.any(rows == 0) or np.any(cols == 0):
        return 0.0
    total = t.sum()
    det = t[0, 0] * t[1, 1] - t[0, 1] * t[1, 0]
    return float(total * det * det / (rows[0] * rows[1] * cols[0] * cols[1]))


def quadrant_chi2(x1, x2, angle: float) -> float:
    return table_chi2(quadrant_table(x1, x2, angle))


def max_quadrant_chi2(x1, x2) -> float:
    return max(quadrant_chi2(x1, x2, a) for a in ANGLES)


def chi2_from_pcs(x1, x2, alpha: float) -> Chi2Report:
    crit = chi2_critical(alpha)
    tables = np.stack([quadrant_table(x1, x2, a) for a in ANGLES])
    stats = np.array([table_chi2(t) for t in tables])
    best = int(np.argmax(stats))
    return Chi2Report(float(stats[best]), float(ANGLES[best]), crit, alpha,
                      bool(stats[best] > crit), tables)


def chi2_detect(g: Graph, fm: FittedModel, alpha: float = 0.01, seed=0) -> Chi2Report:
    """Maximised quadrant chi-square over 32 rotations, compared to the chi2_1 quantile."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    x1, x2 = residual_points(g, fm, seed)
    return chi2_from_pcs(x1, x2, alpha)
