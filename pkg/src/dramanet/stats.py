"""Correlation screening, Wilcoxon rank-sum tests and PCA."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class CorrelationMatrix:
    feature_names: tuple[str, ...]
    values: np.ndarray  # nan where a column has zero variance

    def get(self, a: str, b: str) -> float:
        i = self.feature_names.index(a)
        j = self.feature_names.index(b)
        return float(self.values[i, j])


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0 or syy == 0:
        return math.nan
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def pearson_matrix(columns: Mapping[str, Sequence[float]]) -> CorrelationMatrix:
    names = tuple(columns)
    cols = [np.asarray(columns[n], dtype=float) for n in names]
    if not cols or len(cols[0]) < 2:
        raise ValueError("need at least 2 rows")
    for n, c in zip(names, cols):
        if not np.all(np.isfinite(c)):
            raise ValueError(f"column {n!r} has non-finite values")
    k = len(names)
    out = np.eye(k)
    for i in range(k):
        if np.all(cols[i] == cols[i][0]):
            out[i, i] = math.nan
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = pearson(cols[i], cols[j])
    return CorrelationMatrix(names, out)


def correlation_screen(
    matrix: CorrelationMatrix,
    threshold: float = 0.9,
    keep_priority: Sequence[str] | None = None,
    size_feature: str | None = "n_characters",
) -> set[str]:
    """Features to drop because they duplicate a kept feature or track cast size.

    Walks ``keep_priority`` in order: a feature whose |r| with ``size_feature``
    or with any already kept feature exceeds ``threshold`` is excluded.
    Undefined (nan) coefficients never trigger exclusion.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    names = list(keep_priority) if keep_priority is not None else list(matrix.feature_names)
    kept: list[str] = []
    excluded: set[str] = set()
    for f in names:
        if f == size_feature:
            continue
        partners = list(kept)
        if size_feature in matrix.feature_names:
            partners.append(size_feature)
        if any(abs(matrix.get(f, k)) > threshold for k in partners if not math.isnan(matrix.get(f, k))):
            excluded.add(f)
        else:
            kept.append(f)
    return excluded


@dataclass(frozen=True)
class WilcoxonResult:
    statistic_U: float
    p_value: float
    group_sizes: tuple[int, int]
    exact: bool


def midranks(values: Sequence[float]) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(len(x))
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _u_distribution(n1: int, n2: int) -> list[int]:
    """Counts of each U value over all C(n1+n2, n1) rank assignments."""
    # f[i][j] = polynomial of U counts for i, j items
    f = [[None] * (n2 + 1) for _ in range(n1 + 1)]
    for i in range(n1 + 1):
        for j in range(n2 + 1):
            if i == 0 or j == 0:
                f[i][j] = [1]
                continue
            # largest element belongs to group 1 (adds j to U) or group 2
            a = [0] * j + f[i - 1][j]
            b = f[i][j - 1]
            size = max(len(a), len(b))
            f[i][j] = [(a[k] if k < len(a) else 0) + (b[k] if k < len(b) else 0) for k in range(size)]
    return f[n1][n2]


def _norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2))


def wilcoxon_ranksum(group_a: Sequence[float], group_b: Sequence[float], exact: bool | None = None) -> WilcoxonResult:
    """Two-sided Wilcoxon rank-sum (Mann-Whitney U) test.

    ``exact=None`` enumerates the null distribution when n1+n2 <= 20 and there
    are no ties; otherwise a normal approximation with tie and continuity
    correction is used. U is reported for ``group_a``.
    """
    a = np.asarray(group_a, dtype=float)
    b = np.asarray(group_b, dtype=float)
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise ValueError("both groups must be non-empty")
    ranks = midranks(np.concatenate([a, b]))
    u = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2)
    has_ties = len(np.unique(np.concatenate([a, b]))) < n1 + n2
    if exact is None:
        exact = n1 + n2 <= 20 and not has_ties
    if exact and has_ties:
        raise ValueError("exact test is only defined without ties")

    if exact:
        dist = _u_distribution(n1, n2)
        total = sum(dist)
        k = int(round(u))
        lower = sum(dist[: k + 1]) / total
        upper = sum(dist[k:]) / total
        p = min(1.0, 2 * min(lower, upper))
    else:
        n = n1 + n2
        _, counts = np.unique(np.concatenate([a, b]), return_counts=True)
        tie_term = float(np.sum(counts**3 - counts))
        var = n1 * n2 / 12 * ((n + 1) - tie_term / (n * (n - 1)))
        diff = u - n1 * n2 / 2
        if var <= 0:
            p = 1.0
        else:
            z = (diff - math.copysign(0.5, diff) * (diff != 0)) / math.sqrt(var)
            p = min(1.0, 2 * _norm_sf(abs(z)))
    return WilcoxonResult(u, p, (n1, n2), bool(exact))


# -- PCA ----------------------------------------------------------------------

@dataclass(frozen=True)
class PcaResult:
    loadings: np.ndarray  # features x components
    explained_variance: np.ndarray
    scores: np.ndarray  # plays x components
    mean: np.ndarray

    @property
    def explained_ratio(self) -> np.ndarray:
        total = self.explained_variance.sum()
        return self.explained_variance / total if total > 0 else np.zeros_like(self.explained_variance)


def jacobi_eigh(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm falls below
    ``tol`` times the matrix norm. Returns (eigenvalues, eigenvectors as columns),
    unsorted.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ValueError("matrix must be square and symmetric")
    v = np.eye(n)
    scale = np.linalg.norm(a) or 1.0
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.triu(a, 1) ** 2)) * 2)
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300 or abs(apq) < 1e-18 * scale:
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                # A' = J^T A J on rows/cols p, q
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.diag(a).copy(), v


def pca(matrix) -> PcaResult:
    """PCA of the sample covariance (n-1) matrix via Jacobi rotations.

    Components are sorted by decreasing variance and each loading column is
    signed so that its largest-magnitude entry is positive.
    """
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 2:
        raise ValueError("need a 2-D matrix with at least 2 rows and 2 columns")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (x.shape[0] - 1)
    cov = (cov + cov.T) / 2
    evals, evecs = jacobi_eigh(cov)
    order = np.argsort(-evals, kind="stable")
    evals = evals[order]
    evecs = evecs[:, order]
    for k in range(evecs.shape[1]):
        col = evecs[:, k]
        if col[np.argmax(np.abs(col))] < 0:
            evecs[:, k] = -col
    return PcaResult(evecs, evals, centered @ evecs, mean)
