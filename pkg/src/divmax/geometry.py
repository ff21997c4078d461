"""Metric distance evaluation, set distance sums and diameter routines."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import cdist

VALID_METRICS = ("euclidean", "cosine", "jaccard", "matrix")

# Full pairwise matrices are precomputed up to this many elements; above it
# distances are evaluated on demand from features.
CACHE_LIMIT = 4096

COSINE_NORM_TOL = 1e-6


def _jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 0.0
    inter = len(a & b)
    union = len(a) + len(b) - inter
    return 1.0 - inter / union


class DistanceOracle:
    """Uniform distance lookups for one instance's elements.

    Modes
    -----
    euclidean / cosine : over an (n, dim) float array of vector features.
        Cosine requires unit-norm rows (checked at construction) and is
        1 - <x, y>.
    jaccard : over a list of n item sets.
    matrix : over an explicit (n, n) distance matrix. Any object supporting
        scalar [i, j] indexing, [i, id_array] rows and [np.ix_(ids, ids)]
        blocks works, so large structured matrices can be plugged in without
        materializing n^2 floats.

    When n <= cache_limit a dense matrix is built eagerly so later lookups
    are array slices; the oracle is immutable and safe to share across
    threads after construction.
    """

    def __init__(self, metric: str, features=None, matrix=None,
                 cache_limit: int = CACHE_LIMIT):
        if metric not in VALID_METRICS:
            raise ValueError(f"unknown metric: {metric!r}")
        self.metric = metric
        self._X = None
        self._sets = None
        self._matrix = None
        self._cache = None

        if metric in ("euclidean", "cosine"):
            X = np.asarray(features, dtype=float)
            if X.ndim != 2:
                raise ValueError("vector metrics need a 2-d feature array")
            self._X = X
            self.n = X.shape[0]
            if metric == "cosine":
                norms = np.linalg.norm(X, axis=1)
                bad = np.flatnonzero(np.abs(norms - 1.0) > COSINE_NORM_TOL)
                if bad.size:
                    raise ValueError(
                        f"cosine mode needs unit-norm features; element {bad[0]} "
                        f"has norm {norms[bad[0]]:.9g}"
                    )
        elif metric == "jaccard":
            self._sets = [frozenset(s) for s in features]
            self.n = len(self._sets)
        else:
            if matrix is None:
                raise ValueError("matrix metric needs a distance matrix")
            self._matrix = matrix
            self.n = matrix.shape[0]

        if self.n <= cache_limit:
            self._cache = self._build_cache()

    def _build_cache(self) -> np.ndarray:
        if self.metric == "euclidean":
            D = cdist(self._X, self._X)
        elif self.metric == "cosine":
            D = np.clip(1.0 - self._X @ self._X.T, 0.0, None)
        elif self.metric == "jaccard":
            items = sorted({item for s in self._sets for item in s}, key=repr)
            index = {item: k for k, item in enumerate(items)}
            B = np.zeros((self.n, max(len(items), 1)))
            for i, s in enumerate(self._sets):
                for item in s:
                    B[i, index[item]] = 1.0
            sizes = B.sum(axis=1)
            inter = B @ B.T
            union = sizes[:, None] + sizes[None, :] - inter
            with np.errstate(invalid="ignore", divide="ignore"):
                D = 1.0 - np.where(union > 0, inter / union, 1.0)
            D = np.clip(D, 0.0, None)
        else:
            if isinstance(self._matrix, np.ndarray):
                D = np.asarray(self._matrix, dtype=float)
            else:
                ids = np.arange(self.n)
                D = np.asarray(self._matrix[np.ix_(ids, ids)], dtype=float)
        np.fill_diagonal(D, 0.0)
        return D

    def _check(self, u: int) -> None:
        if not 0 <= u < self.n:
            raise IndexError(f"element id {u} out of range [0, {self.n})")

    def distance(self, u: int, v: int) -> float:
        self._check(u)
        self._check(v)
        if u == v:
            return 0.0
        if self._cache is not None:
            return float(self._cache[u, v])
        if self.metric == "euclidean":
            return float(np.linalg.norm(self._X[u] - self._X[v]))
        if self.metric == "cosine":
            return float(max(1.0 - float(self._X[u] @ self._X[v]), 0.0))
        if self.metric == "jaccard":
            return _jaccard(self._sets[u], self._sets[v])
        return float(self._matrix[u, v])

    def row(self, u: int, ids) -> np.ndarray:
        """Distances from u to each element of ids, as a float array."""
        self._check(u)
        ids = np.asarray(ids, dtype=int)
        if self._cache is not None:
            out = self._cache[u, ids].astype(float, copy=True)
        elif self.metric == "euclidean":
            out = np.linalg.norm(self._X[ids] - self._X[u], axis=1)
        elif self.metric == "cosine":
            out = np.clip(1.0 - self._X[ids] @ self._X[u], 0.0, None)
        elif self.metric == "jaccard":
            su = self._sets[u]
            out = np.array([_jaccard(su, self._sets[int(v)]) for v in ids])
        else:
            out = np.asarray(self._matrix[u, ids], dtype=float)
        out[ids == u] = 0.0
        return out

    def pairwise(self, ids) -> np.ndarray:
        """Square block of pairwise distances among ids."""
        ids = np.asarray(ids, dtype=int)
        if self._cache is not None:
            return self._cache[np.ix_(ids, ids)]
        if self.metric == "euclidean":
            D = cdist(self._X[ids], self._X[ids])
        elif self.metric == "cosine":
            Xi = self._X[ids]
            D = np.clip(1.0 - Xi @ Xi.T, 0.0, None)
        elif self.metric == "jaccard":
            k = len(ids)
            D = np.zeros((k, k))
            for a in range(k):
                for b in range(a + 1, k):
                    D[a, b] = D[b, a] = _jaccard(
                        self._sets[int(ids[a])], self._sets[int(ids[b])]
                    )
        else:
            D = np.asarray(self._matrix[np.ix_(ids, ids)], dtype=float)
        np.fill_diagonal(D, 0.0)
        return D


def distance(oracle: DistanceOracle, u: int, v: int) -> float:
    """Distance between two elements under the oracle's metric."""
    return oracle.distance(u, v)


def set_distance_sum(oracle: DistanceOracle, v: int, S: Iterable[int]) -> float:
    """Sum of distances from v to every element of S.

    S may contain v itself; the d(v, v) = 0 term contributes nothing.
    """
    ids = np.asarray(sorted(int(u) for u in S), dtype=int)
    if ids.size == 0:
        return 0.0
    return float(oracle.row(v, ids).sum())


def exact_diameter(oracle: DistanceOracle, S: Sequence[int]) -> tuple[int, int, float]:
    """Farthest pair within S by exhaustive pairwise scan.

    Returns (u, v, d) with u < v; ties resolve to the lexicographically
    smallest (u, v). Raises ValueError when S has fewer than two elements.
    """
    ids = np.asarray(sorted(set(int(u) for u in S)), dtype=int)
    if ids.size < 2:
        raise ValueError("diameter needs at least two elements")
    D = oracle.pairwise(ids)
    iu = np.triu_indices(ids.size, k=1)
    vals = D[iu]
    k = int(np.argmax(vals))  # first maximum = lexicographically smallest pair
    return int(ids[iu[0][k]]), int(ids[iu[1][k]]), float(vals[k])


def approx_diameter(oracle: DistanceOracle, S: Sequence[int],
                    anchor: int | None = None) -> tuple[int, int, float]:
    """One-sided diameter estimate: the farthest element from an anchor.

    The anchor defaults to the smallest id in S. The returned distance is at
    least half the exact diameter by the triangle inequality. Ties on the
    farthest element resolve to the smallest id.
    """
    ids = np.asarray(sorted(set(int(u) for u in S)), dtype=int)
    if ids.size < 2:
        raise ValueError("diameter needs at least two elements")
    a = int(ids[0]) if anchor is None else int(anchor)
    if a not in set(ids.tolist()):
        raise ValueError(f"anchor {a} is not in S")
    others = ids[ids != a]
    d = oracle.row(a, others)
    k = int(np.argmax(d))
    return a, int(others[k]), float(d[k])
