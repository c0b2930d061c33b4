"""Cosine distance and DTW dissimilarity between frame matrices.

All arithmetic runs in float64 regardless of storage dtype, and the
inner products are computed with ``np.einsum`` so that summation order
is fixed by the implementation, not by the BLAS build.  This keeps
results reproducible across machines and across worker processes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, UsageError


@dataclass(frozen=True)
class DtwConfig:
    """Knobs for the DTW dissimilarity.

    zero_vector_distance is the cosine distance charged when exactly one
    of the two frames has zero norm; silence padding in synthetic data
    makes such frames legitimate, so they are not an error.
    """

    zero_vector_distance: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.zero_vector_distance <= 2.0:
            raise UsageError(
                f"zero_vector_distance must be in [0, 2], got {self.zero_vector_distance}"
            )


DEFAULT_DTW = DtwConfig()


def cosine_distance(a, b, cfg: DtwConfig = DEFAULT_DTW) -> float:
    """1 - cos(a, b), in [0, 2].

    Bitwise-identical inputs return exactly 0.0 (even all-zero ones);
    otherwise a zero-norm input yields ``cfg.zero_vector_distance``.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise UsageError(f"vectors must share one dimension, got {a.shape} and {b.shape}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise DataError("non-finite value in cosine_distance input")
    if np.array_equal(a, b):
        return 0.0
    sa = float(np.einsum("i,i->", a, a))
    sb = float(np.einsum("i,i->", b, b))
    if sa == 0.0 or sb == 0.0:
        return cfg.zero_vector_distance
    d = 1.0 - float(np.einsum("i,i->", a, b)) / np.sqrt(sa * sb)
    return min(max(d, 0.0), 2.0)


def cosine_cost_matrix(A, X, cfg: DtwConfig = DEFAULT_DTW) -> np.ndarray:
    """Pairwise cosine distances between the rows of A and of X."""
    A = np.asarray(A)
    X = np.asarray(X)
    if A.ndim != 2 or X.ndim != 2 or A.shape[1] != X.shape[1]:
        raise UsageError(
            f"frame matrices must be 2-D with equal dim, got {A.shape} and {X.shape}"
        )
    if A.shape[0] == 0 or X.shape[0] == 0:
        raise UsageError("frame matrices must be non-empty")
    a = A.astype(np.float64, copy=False)
    x = X.astype(np.float64, copy=False)
    if not (np.isfinite(a).all() and np.isfinite(x).all()):
        raise DataError("non-finite value in frame matrix")
    sa = np.einsum("ij,ij->i", a, a)
    sx = np.einsum("ij,ij->i", x, x)
    dots = np.einsum("ik,jk->ij", a, x)
    denom = np.sqrt(sa[:, None] * sx[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        cost = 1.0 - dots / denom
    zero = (sa == 0.0)[:, None] | (sx == 0.0)[None, :]
    cost[zero] = cfg.zero_vector_distance
    # exact-equal frames have distance 0 by definition, also when all-zero
    eq = (A[:, None, :] == X[None, :, :]).all(axis=2)
    cost[eq] = 0.0
    np.clip(cost, 0.0, 2.0, out=cost)
    return cost


def dtw_dissimilarity(A, X, cfg: DtwConfig = DEFAULT_DTW) -> float:
    """Mean cell cost along the best monotone alignment path.

    The path minimizes accumulated cost, with ties broken toward fewer
    cells; the result is that minimal sum divided by the path length.
    Steps are diagonal, vertical and horizontal, anchored at both ends.
    """
    cost = cosine_cost_matrix(A, X, cfg)
    m, n = cost.shape
    sums = np.empty((m, n))
    lens = np.empty((m, n), dtype=np.int64)
    sums[0, 0] = cost[0, 0]
    lens[0, 0] = 1
    for j in range(1, n):
        sums[0, j] = sums[0, j - 1] + cost[0, j]
        lens[0, j] = j + 1
    for i in range(1, m):
        sums[i, 0] = sums[i - 1, 0] + cost[i, 0]
        lens[i, 0] = i + 1
        row = cost[i]
        for j in range(1, n):
            s, l = sums[i - 1, j - 1], lens[i - 1, j - 1]
            s2, l2 = sums[i - 1, j], lens[i - 1, j]
            if s2 < s or (s2 == s and l2 < l):
                s, l = s2, l2
            s3, l3 = sums[i, j - 1], lens[i, j - 1]
            if s3 < s or (s3 == s and l3 < l):
                s, l = s3, l3
            sums[i, j] = s + row[j]
            lens[i, j] = l + 1
    return float(sums[m - 1, n - 1]) / int(lens[m - 1, n - 1])
