"""k-means with the centroid silhouette coefficient and a silhouette-driven sweep over k.

The centroid silhouette of a point uses its distance ``a`` to its own centroid
and ``b`` to the nearest other centroid: ``(b - a) / max(a, b)``. It is not the
classic pairwise silhouette.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._random import derive_int

SEPARATION_NOTES = {"superior": "> 0.7", "reasonable": "0.5 - 0.7"}


@dataclass
class Clustering:
    k: int
    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    silhouette: float
    seed: int
    n_iter: int = 0
    inertia_trace: list = field(default_factory=list, repr=False)


def _sq_dists(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    d = ((x[:, None, :] - c[None, :, :]) ** 2).sum(axis=2)
    return d


def _assign(d2: np.ndarray, current: np.ndarray | None) -> np.ndarray:
    nearest = d2.argmin(axis=1)  # lowest index among ties
    if current is not None:
        keep = d2[np.arange(d2.shape[0]), current] == d2[np.arange(d2.shape[0]), nearest]
        nearest = np.where(keep, current, nearest)
    return nearest


def _init_rows(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Indices of k uniformly drawn rows with pairwise distinct values."""
    chosen: list[int] = []
    seen: set[bytes] = set()
    for i in rng.permutation(x.shape[0]).tolist():
        key = x[i].tobytes()
        if key not in seen:
            seen.add(key)
            chosen.append(i)
            if len(chosen) == k:
                return np.array(chosen)
    raise ValueError(f"k={k} exceeds the number of distinct rows ({len(chosen)})")


def _kmeans_sorted(x: np.ndarray, k: int, seed: int, max_iter: int) -> Clustering:
    rng = np.random.default_rng(seed)
    centroids = x[_init_rows(x, k, rng)].copy()
    labels = _assign(_sq_dists(x, centroids), None)
    trace = []
    it = 0
    for it in range(1, max_iter + 1):
        counts = np.bincount(labels, minlength=k)
        while (counts == 0).any():
            # reseed an empty cluster at the row farthest from its own centroid
            j = int(np.flatnonzero(counts == 0)[0])
            own = ((x - centroids[labels]) ** 2).sum(axis=1)
            far = int(own.argmax())
            counts[labels[far]] -= 1
            labels[far] = j
            counts[j] += 1
            centroids[j] = x[far]
        for j in range(k):
            centroids[j] = x[labels == j].mean(axis=0)
        d2 = _sq_dists(x, centroids)
        trace.append(float(d2[np.arange(x.shape[0]), labels].sum()))
        new = _assign(d2, labels)
        if np.array_equal(new, labels):
            break
        labels = new
    inertia = float(((x - centroids[labels]) ** 2).sum())
    sc = centroid_silhouette(x, labels, centroids) if k >= 2 else float("nan")
    return Clustering(k, labels, centroids, inertia, sc, seed, it, trace)


def kmeans(x, k: int, seed: int = 0, max_iter: int = 300) -> Clustering:
    """Lloyd k-means seeded with k distinct random rows.

    Rows are processed in lexicographic order internally, so the result does not
    depend on the order in which rows are given.
    """
    x = check_array(x, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    order = np.lexsort(x.T[::-1])
    res = _kmeans_sorted(x[order], k, seed, max_iter)
    labels = np.empty(n, dtype=np.int64)
    labels[order] = res.assignments
    res.assignments = labels
    return res


def centroid_silhouette(x, labels, centroids) -> float:
    x = np.asarray(x, dtype=float)
    centroids = np.asarray(centroids, dtype=float)
    k = centroids.shape[0]
    if k < 2:
        raise ValueError("silhouette needs at least 2 clusters")
    d = np.sqrt(_sq_dists(x, centroids))
    rows = np.arange(x.shape[0])
    a = d[rows, labels]
    d[rows, labels] = np.inf
    b = d.min(axis=1)
    m = np.maximum(a, b)
    phi = np.zeros_like(a)
    nz = m > 0
    phi[nz] = (b[nz] - a[nz]) / m[nz]
    return float(phi.mean())


def silhouette_coefficient(x, clustering: Clustering) -> float:
    return centroid_silhouette(x, clustering.assignments, clustering.centroids)


@dataclass
class KSweepResult:
    ks: list[int]
    mean_silhouette: dict[int, float]
    best_silhouette: dict[int, float]
    best: dict[int, Clustering] = field(repr=False)
    chosen_k: int = 0
    restarts: int = 0

    @property
    def chosen(self) -> Clustering:
        return self.best[self.chosen_k]

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("k,mean_silhouette,best_silhouette\n")
            for k in self.ks:
                fh.write(f"{k},{self.mean_silhouette[k]:.9f},{self.best_silhouette[k]:.9f}\n")


def _restarts(x, k, seed, restarts, max_iter):
    out = []
    for r in range(restarts):
        out.append(kmeans(x, k, derive_int(seed, "kmeans", k, r), max_iter))
    return out


def sweep_k(x, k_min: int = 2, k_max: int = 9, restarts: int = 50, seed: int = 0,
            max_iter: int = 300, n_jobs: int | None = None) -> KSweepResult:
    """Run ``restarts`` k-means fits per k and pick the k with the largest mean silhouette.

    Ties go to the smaller k. A k larger than the number of distinct rows is
    skipped (recorded as NaN).
    """
    x = check_array(x, dtype=np.float64)
    if not 2 <= k_min <= k_max:
        raise ValueError("need 2 <= k_min <= k_max")
    if k_max > x.shape[0]:
        raise ValueError(f"k_max={k_max} exceeds the number of rows ({x.shape[0]})")
    distinct = np.unique(x, axis=0).shape[0]
    ks = list(range(k_min, k_max + 1))
    runnable = [k for k in ks if k <= distinct]
    workers = n_jobs or os.cpu_count() or 1
    if workers == 1:
        runs = [_restarts(x, k, seed, restarts, max_iter) for k in runnable]
    else:
        runs = Parallel(n_jobs=workers)(delayed(_restarts)(x, k, seed, restarts, max_iter) for k in runnable)
    mean_sc = {k: float("nan") for k in ks}
    best_sc = dict(mean_sc)
    best: dict[int, Clustering] = {}
    for k, fits in zip(runnable, runs):
        scs = np.array([f.silhouette for f in fits])
        mean_sc[k] = float(scs.mean())
        i = int(scs.argmax())
        best_sc[k] = float(scs[i])
        best[k] = fits[i]
    if not runnable:
        raise ValueError("data has fewer distinct rows than k_min")
    chosen = max(runnable, key=lambda k: (mean_sc[k], -k))
    return KSweepResult(ks, mean_sc, best_sc, best, chosen, restarts)


def write_assignments_csv(ego_ids, labels, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("ego_id,cluster\n")
        for e, c in zip(ego_ids, labels):
            fh.write(f"{e},{int(c)}\n")


def write_scatter_csv(ego_ids, x, labels, path, pairs=((0, 1), (0, 2), (1, 2))) -> None:
    """Long-format scatter data ``ego_id,pc_i,pc_j,cluster`` per component pair."""
    x = np.asarray(x)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("pair,ego_id,pc_i,pc_j,cluster\n")
        for i, j in pairs:
            if max(i, j) >= x.shape[1]:
                continue
            for e, row, c in zip(ego_ids, x, labels):
                fh.write(f"pc{i + 1}-pc{j + 1},{e},{row[i]:.9f},{row[j]:.9f},{int(c)}\n")


class CentroidKMeans(ClusterMixin, BaseEstimator):
    """Estimator wrapper around :func:`kmeans`; exposes ``silhouette_`` after fit."""

    def __init__(self, n_clusters: int = 3, random_state: int = 0, max_iter: int = 300):
        self.n_clusters = n_clusters
        self.random_state = random_state
        self.max_iter = max_iter

    def fit(self, X, y=None):
        res = kmeans(X, self.n_clusters, self.random_state, self.max_iter)
        self.result_ = res
        self.labels_ = res.assignments
        self.cluster_centers_ = res.centroids
        self.inertia_ = res.inertia
        self.silhouette_ = res.silhouette
        self.n_iter_ = res.n_iter
        self.n_features_in_ = res.centroids.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X, dtype=np.float64)
        return _sq_dists(X, self.cluster_centers_).argmin(axis=1)


class SilhouetteKMeans(ClusterMixin, BaseEstimator):
    """Pick k in [k_min, k_max] by mean centroid silhouette, keep the best restart."""

    def __init__(self, k_min: int = 2, k_max: int = 9, restarts: int = 50, random_state: int = 0,
                 max_iter: int = 300, n_jobs: int | None = None):
        self.k_min = k_min
        self.k_max = k_max
        self.restarts = restarts
        self.random_state = random_state
        self.max_iter = max_iter
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        sweep = sweep_k(X, self.k_min, self.k_max, self.restarts, self.random_state, self.max_iter, self.n_jobs)
        best = sweep.chosen
        self.sweep_ = sweep
        self.n_clusters_ = sweep.chosen_k
        self.labels_ = best.assignments
        self.cluster_centers_ = best.centroids
        self.silhouette_ = best.silhouette
        self.mean_silhouette_ = sweep.mean_silhouette[sweep.chosen_k]
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X, dtype=np.float64)
        return _sq_dists(X, self.cluster_centers_).argmin(axis=1)
