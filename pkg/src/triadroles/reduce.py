"""PCA of census matrices via eigendecomposition of the feature covariance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .census import CensusMatrix


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # rows, descending eigenvalue
    eigenvalues: np.ndarray  # population covariance
    explained_variance_ratio: np.ndarray


@dataclass(frozen=True)
class Embedding:
    matrix: np.ndarray
    retained: int
    cum_variance: float


def _as_array(data) -> np.ndarray:
    if isinstance(data, CensusMatrix):
        data = data.proportions
    return check_array(data, dtype=np.float64)


def pca_fit(data) -> PcaModel:
    """Centre (no scaling) and eigendecompose the d x d covariance.

    Component signs are fixed so the largest-magnitude coordinate is positive.
    Zero-variance input yields all-zero ratios and the identity basis.
    """
    x = _as_array(data)
    if x.shape[0] < 2:
        raise ValueError("PCA needs at least 2 rows")
    mean = x.mean(axis=0)
    xc = x - mean
    cov = xc.T @ xc / x.shape[0]
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals, kind="stable")[::-1]
    vals = np.clip(vals[order], 0.0, None)
    comps = vecs[:, order].T.copy()
    pivot = np.argmax(np.abs(comps), axis=1)
    signs = np.sign(comps[np.arange(comps.shape[0]), pivot])
    comps *= signs[:, None]
    trace = vals.sum()
    if trace <= 0:
        comps = np.eye(x.shape[1])
        ratios = np.zeros(x.shape[1])
    else:
        ratios = vals / trace
    return PcaModel(mean, comps, vals, ratios)


def choose_dimensions(ratios, threshold: float = 0.85) -> int:
    """Smallest m whose cumulative explained-variance ratio exceeds ``threshold``."""
    if isinstance(ratios, PcaModel):
        ratios = ratios.explained_variance_ratio
    if not 0 < threshold < 1:
        raise ValueError("threshold must be in (0, 1)")
    cum = np.cumsum(np.asarray(ratios, dtype=float))
    above = np.flatnonzero(cum > threshold)
    if above.size == 0:
        # degenerate (zero-variance) model: keep everything
        return int(cum.size)
    return int(above[0]) + 1


def pca_transform(model: PcaModel, data, m: int) -> Embedding:
    x = _as_array(data)
    if x.shape[1] != model.mean.size:
        raise ValueError(f"expected {model.mean.size} columns, got {x.shape[1]}")
    if not 1 <= m <= model.components.shape[0]:
        raise ValueError(f"m must be in [1, {model.components.shape[0]}]")
    z = (x - model.mean) @ model.components[:m].T
    return Embedding(z, m, float(model.explained_variance_ratio[:m].sum()))


def pca_inverse(model: PcaModel, z: np.ndarray) -> np.ndarray:
    z = np.atleast_2d(z)
    return z @ model.components[: z.shape[1]] + model.mean


def scree_rows(model: PcaModel) -> list[tuple[int, float, float]]:
    cum = np.cumsum(model.explained_variance_ratio)
    return [(i + 1, float(r), float(c)) for i, (r, c) in enumerate(zip(model.explained_variance_ratio, cum))]


def write_scree_csv(model: PcaModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("component,ratio,cumulative\n")
        for i, r, c in scree_rows(model):
            fh.write(f"{i},{r:.9f},{c:.9f}\n")


def write_embedding_csv(ego_ids, emb: Embedding, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("ego_id," + ",".join(f"pc{i + 1}" for i in range(emb.retained)) + "\n")
        for ego, row in zip(ego_ids, emb.matrix):
            fh.write(ego + "," + ",".join(f"{v:.9f}" for v in row) + "\n")


def read_embedding_csv(path) -> tuple[list[str], np.ndarray]:
    ids, rows = [], []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[0] != "ego_id":
            raise ValueError(f"{path}: not an embedding CSV")
        for line in fh:
            f = line.rstrip("\n").split(",")
            ids.append(f[0])
            rows.append([float(v) for v in f[1:]])
    return ids, np.array(rows, dtype=float).reshape(len(ids), len(header) - 1)


class CensusPCA(TransformerMixin, BaseEstimator):
    """Variance-threshold PCA.

    ``n_components=None`` keeps the smallest number of components whose
    cumulative ratio exceeds ``threshold``.
    """

    def __init__(self, threshold: float = 0.85, n_components: int | None = None):
        self.threshold = threshold
        self.n_components = n_components

    def fit(self, X, y=None):
        model = pca_fit(X)
        self.model_ = model
        self.mean_ = model.mean
        self.explained_variance_ratio_ = model.explained_variance_ratio
        self.n_components_ = (self.n_components if self.n_components is not None
                              else choose_dimensions(model.explained_variance_ratio, self.threshold))
        self.components_ = model.components[: self.n_components_]
        self.n_features_in_ = model.mean.size
        return self

    def transform(self, X):
        check_is_fitted(self, "model_")
        return pca_transform(self.model_, X, self.n_components_).matrix

    def inverse_transform(self, X):
        check_is_fitted(self, "model_")
        return pca_inverse(self.model_, check_array(X))
