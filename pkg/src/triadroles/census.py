"""Conditional triad classification and per-ego triad censuses.

A conditional triad is the triple (ego, a1, a2) described by three dyad states:
ego-a1, ego-a2 and a1-a2. Swapping the two alters gives the same triad, which
leaves 36 classes. Classes are numbered by the lexicographic rank of their
canonical (smaller) tuple, see :data:`CANONICAL_FORMS`.
"""

from __future__ import annotations

import enum
import itertools
import os
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, TransformerMixin

from .graph import DirectedGraph, ego_alters

N_CLASSES = 36


class EgoDyad(enum.IntEnum):
    NULL = 0
    EGO_TO_ALTER = 1
    ALTER_TO_EGO = 2
    MUTUAL = 3


class AlterDyad(enum.IntEnum):
    NULL = 0
    FORWARD = 1  # first alter -> second alter
    BACKWARD = 2
    MUTUAL = 3


_FLIP = (0, 2, 1, 3)


def _canonical(a: int, b: int, c: int) -> tuple[int, int, int]:
    return min((a, b, c), (b, a, _FLIP[c]))


CANONICAL_FORMS: tuple[tuple[int, int, int], ...] = tuple(
    sorted({_canonical(*cfg) for cfg in itertools.product(range(4), repeat=3)})
)
_RANK = {form: i for i, form in enumerate(CANONICAL_FORMS)}

# CLASS_TABLE[ego_a1, ego_a2, a1_a2] -> class id
CLASS_TABLE = np.empty((4, 4, 4), dtype=np.int64)
for _cfg in itertools.product(range(4), repeat=3):
    CLASS_TABLE[_cfg] = _RANK[_canonical(*_cfg)]
CLASS_TABLE.setflags(write=False)


def classify_triad(ego_a1, ego_a2, a1_a2) -> int:
    """Class id in [0, 35] of the conditional triad with the given dyad states."""
    return int(CLASS_TABLE[int(ego_a1), int(ego_a2), int(a1_a2)])


def describe_class(class_id: int) -> str:
    a, b, c = CANONICAL_FORMS[class_id]
    return f"{EgoDyad(a).name},{EgoDyad(b).name},{AlterDyad(c).name}"


def write_triad_classes(path) -> None:
    """Write the class id -> canonical form table (one line per class)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# class_id ego_a1 ego_a2 a1_a2\n")
        for i, (a, b, c) in enumerate(CANONICAL_FORMS):
            fh.write(f"t{i:02d}\t{EgoDyad(a).name}\t{EgoDyad(b).name}\t{AlterDyad(c).name}\n")


def _ego_counts(g: DirectedGraph, ego: int, radius: int) -> np.ndarray:
    """Integer counts of the 36 classes over all alter pairs of ``ego``."""
    alters = ego_alters(g, ego, radius)
    counts = np.zeros(N_CLASSES, dtype=np.int64)
    d = alters.size
    if d < 2:
        return counts
    outs = g.out_neighbors(ego)
    ins = g.in_neighbors(ego)
    state = np.isin(alters, outs, assume_unique=True).astype(np.int64)
    state += 2 * np.isin(alters, ins, assume_unique=True)

    # every pair starts as alter-alter NULL, tied pairs are corrected below
    c = np.bincount(state, minlength=4)
    for a in range(4):
        if c[a] > 1:
            counts[CLASS_TABLE[a, a, 0]] += c[a] * (c[a] - 1) // 2
        for b in range(a + 1, 4):
            if c[a] and c[b]:
                counts[CLASS_TABLE[a, b, 0]] += c[a] * c[b]

    sub = g.adjacency()[alters][:, alters].tocoo()
    if sub.nnz:
        i, j = sub.row.astype(np.int64), sub.col.astype(np.int64)
        lo, hi = np.minimum(i, j), np.maximum(i, j)
        # forward bit when the lower-index alter is the source
        bit = np.where(i < j, 1, 2)
        key = lo * d + hi
        uniq, inv = np.unique(key, return_inverse=True)
        tie = np.zeros(uniq.size, dtype=np.int64)
        np.bitwise_or.at(tie, inv, bit)
        p, q = uniq // d, uniq % d
        sp_, sq = state[p], state[q]
        np.subtract.at(counts, CLASS_TABLE[sp_, sq, 0], 1)
        np.add.at(counts, CLASS_TABLE[sp_, sq, tie], 1)
    return counts


@dataclass(frozen=True)
class TriadCensus:
    ego: int
    proportions: np.ndarray
    triad_pair_count: int


def ego_census(g: DirectedGraph, ego: int, radius: int = 1) -> TriadCensus:
    ego = g._check(ego)
    counts = _ego_counts(g, ego, radius)
    total = int(counts.sum())
    props = counts / total if total else np.zeros(N_CLASSES)
    return TriadCensus(ego, props, total)


@dataclass
class CensusMatrix:
    """Census rows for egos with enough alters, ordered by internal ego id."""

    egos: np.ndarray
    counts: np.ndarray
    excluded: np.ndarray
    ids: tuple[str, ...] = field(repr=False)
    radius: int = 1

    @property
    def pairs(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def proportions(self) -> np.ndarray:
        pairs = self.pairs
        out = np.zeros(self.counts.shape, dtype=float)
        nz = pairs > 0
        out[nz] = self.counts[nz] / pairs[nz, None]
        return out

    @property
    def ego_ids(self) -> list[str]:
        return [self.ids[i] for i in self.egos.tolist()]

    def __len__(self) -> int:
        return int(self.egos.size)

    def rows(self):
        props = self.proportions
        for k, e in enumerate(self.egos.tolist()):
            yield TriadCensus(e, props[k], int(self.counts[k].sum()))


def _census_block(g: DirectedGraph, egos, radius: int) -> np.ndarray:
    return np.vstack([_ego_counts(g, e, radius) for e in egos]) if len(egos) else np.zeros((0, N_CLASSES), np.int64)


def census_matrix(g: DirectedGraph, radius: int = 1, min_alters: int = 2,
                  n_jobs: int | None = None, block_size: int = 2048) -> CensusMatrix:
    """Compute the census of every ego with at least ``min_alters`` alters.

    Work is split into blocks of egos and spread over ``n_jobs`` processes;
    rows are always returned in ego-id order.
    """
    if radius not in (1, 2):
        raise ValueError("radius must be 1 or 2")
    min_alters = max(int(min_alters), 2)
    n = g.node_count
    if radius == 1:
        sizes = np.diff(g.undirected_adjacency().indptr)
    else:
        sizes = np.array([ego_alters(g, v, 2).size for v in range(n)], dtype=np.int64)
    mask = sizes >= min_alters
    egos = np.flatnonzero(mask)
    excluded = np.flatnonzero(~mask)
    blocks = [egos[i:i + block_size].tolist() for i in range(0, egos.size, block_size)]
    workers = n_jobs or os.cpu_count() or 1
    if workers == 1 or len(blocks) <= 1:
        parts = [_census_block(g, b, radius) for b in blocks]
    else:
        parts = Parallel(n_jobs=workers)(delayed(_census_block)(g, b, radius) for b in blocks)
    counts = np.vstack(parts) if parts else np.zeros((0, N_CLASSES), dtype=np.int64)
    return CensusMatrix(egos, counts, excluded, g.ids, radius)


def write_census_csv(cm: CensusMatrix, path) -> None:
    header = "ego_id,pairs," + ",".join(f"t{i:02d}" for i in range(N_CLASSES))
    props = cm.proportions
    pairs = cm.pairs
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for k, ego in enumerate(cm.ego_ids):
            vals = ",".join(f"{x:.9f}" for x in props[k])
            fh.write(f"{ego},{int(pairs[k])},{vals}\n")


def read_census_csv(path) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Return (ego_ids, pairs, proportions) from a census CSV."""
    ids, pairs, rows = [], [], []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[:2] != ["ego_id", "pairs"] or len(header) != 2 + N_CLASSES:
            raise ValueError(f"{path}: not a census CSV")
        for line in fh:
            f = line.rstrip("\n").split(",")
            ids.append(f[0])
            pairs.append(int(f[1]))
            rows.append([float(x) for x in f[2:]])
    return ids, np.array(pairs, dtype=np.int64), np.array(rows, dtype=float).reshape(-1, N_CLASSES)


class TriadCensusTransformer(TransformerMixin, BaseEstimator):
    """Turn a :class:`DirectedGraph` into its census proportion matrix.

    After ``transform`` the included egos are in ``egos_`` and the egos with too
    few alters in ``excluded_``.
    """

    def __init__(self, radius: int = 1, min_alters: int = 2, n_jobs: int | None = None):
        self.radius = radius
        self.min_alters = min_alters
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        if not isinstance(X, DirectedGraph):
            raise TypeError("TriadCensusTransformer expects a DirectedGraph")
        if self.radius not in (1, 2):
            raise ValueError("radius must be 1 or 2")
        self.n_features_out_ = N_CLASSES
        return self

    def transform(self, X):
        if not isinstance(X, DirectedGraph):
            raise TypeError("TriadCensusTransformer expects a DirectedGraph")
        cm = census_matrix(X, self.radius, self.min_alters, self.n_jobs)
        self.census_ = cm
        self.egos_ = cm.egos
        self.excluded_ = cm.excluded
        return cm.proportions

    def get_feature_names_out(self, input_features=None):
        return np.array([f"t{i:02d}" for i in range(N_CLASSES)], dtype=object)
