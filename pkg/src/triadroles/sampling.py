"""Graph samplers (VS, ES, FFS, ESI), KS-distance evaluation and census stability."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed

from ._random import derive_rng
from .census import N_CLASSES, census_matrix
from .graph import DirectedGraph, local_clustering

METHODS = ("VS", "ES", "FFS", "ESI")
DEFAULT_PHI_GRID = tuple(round(0.05 * i, 2) for i in range(1, 11))


class EdgesExhaustedError(RuntimeError):
    """Every edge was drawn before the node target was reached.

    The partial sample is available as ``.result``.
    """

    def __init__(self, msg, result):
        super().__init__(msg)
        self.result = result


@dataclass(frozen=True)
class SampleSpec:
    method: str = "FFS"
    phi: float = 0.35
    ffs_p: float = 0.7
    induce_edges: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown sampling method {self.method!r}; choose from {METHODS}")
        if not 0 < self.phi <= 1:
            raise ValueError(f"phi must be in (0, 1], got {self.phi}")
        if not 0 <= self.ffs_p < 1:
            raise ValueError(f"ffs_p must be in [0, 1), got {self.ffs_p}")


@dataclass
class SampleResult:
    graph: DirectedGraph
    spec: SampleSpec
    target_size: int
    nodes: np.ndarray = field(repr=False)  # internal ids in the source graph


def target_size(n: int, phi: float) -> int:
    # tolerance keeps e.g. 0.35 * 100 from rounding up to 36
    return min(n, max(1, math.ceil(phi * n - 1e-9)))


def _rng(spec: SampleSpec, rng):
    return rng if rng is not None else derive_rng(spec.seed, "sample", spec.method, spec.phi)


def vertex_sample(g: DirectedGraph, spec: SampleSpec, rng=None) -> SampleResult:
    rng = _rng(spec, rng)
    t = target_size(g.node_count, spec.phi)
    nodes = np.sort(rng.choice(g.node_count, size=t, replace=False))
    return SampleResult(g.subgraph(nodes), spec, t, nodes)


def _first_new(seq: np.ndarray, n: int) -> np.ndarray:
    """Boolean mask of first occurrences in ``seq``."""
    seen_first = np.full(n, seq.size, dtype=np.int64)
    np.minimum.at(seen_first, seq, np.arange(seq.size))
    return seen_first[seq] == np.arange(seq.size)


def _edge_walk(g: DirectedGraph, rng):
    """Endpoints of all edges in a random order, interleaved as u0, v0, u1, v1, ..."""
    order = rng.permutation(g.edge_count)
    seq = np.empty(2 * order.size, dtype=np.int64)
    seq[0::2] = g.src[order]
    seq[1::2] = g.dst[order]
    return order, seq


def edge_sample(g: DirectedGraph, spec: SampleSpec, rng=None) -> SampleResult:
    """Draw edges without replacement until the node target is met.

    The last edge may bring in two new nodes, so the sample can hold
    ``target + 1`` nodes.
    """
    if g.edge_count == 0:
        raise ValueError("edge sampling needs at least one edge")
    rng = _rng(spec, rng)
    t = target_size(g.node_count, spec.phi)
    order, seq = _edge_walk(g, rng)
    new = _first_new(seq, g.node_count)
    after_edge = np.cumsum(new)[1::2]
    hit = np.flatnonzero(after_edge >= t)
    k = int(hit[0]) + 1 if hit.size else order.size
    taken = order[:k]
    nodes = seq[: 2 * k][new[: 2 * k]]
    res = SampleResult(g.subgraph(nodes, (g.src[taken], g.dst[taken])), spec, t, nodes)
    if not hit.size:
        raise EdgesExhaustedError(f"edges exhausted at {nodes.size} of {t} nodes", res)
    return res


def esi_sample(g: DirectedGraph, spec: SampleSpec, rng=None) -> SampleResult:
    """Collect endpoints of random edges (edges themselves discarded), then induce."""
    if g.edge_count == 0:
        raise ValueError("edge sampling needs at least one edge")
    rng = _rng(spec, rng)
    t = target_size(g.node_count, spec.phi)
    _, seq = _edge_walk(g, rng)
    new = _first_new(seq, g.node_count)
    nodes = seq[new][:t]  # endpoints enter one at a time, so the target is exact
    res = SampleResult(g.subgraph(nodes), spec, t, nodes)
    if nodes.size < t:
        raise EdgesExhaustedError(f"edges exhausted at {nodes.size} of {t} nodes", res)
    return res


def burn_counts(p: float, rng: np.random.Generator, size=None):
    """Geometric burn counts on {0, 1, ...} with mean p / (1 - p)."""
    return rng.geometric(1.0 - p, size=size) - 1


def forest_fire_sample(g: DirectedGraph, spec: SampleSpec, rng=None) -> SampleResult:
    """Forward-only forest fire.

    Each burning node burns ``X ~ Geometric`` (support 0, 1, ...; mean p/(1-p))
    of its unvisited out-neighbours, chosen uniformly. The fire spreads
    breadth-first; a dead fire restarts at a uniformly chosen unvisited node.
    Traversed edges form the sample unless ``induce_edges`` is set.
    """
    rng = _rng(spec, rng)
    n = g.node_count
    t = target_size(n, spec.phi)
    p = spec.ffs_p
    adj = g.adjacency()
    indptr, indices = adj.indptr, adj.indices
    visited = np.zeros(n, dtype=bool)
    nodes: list[int] = []
    esrc: list[int] = []
    edst: list[int] = []
    queue: list[int] = []
    head = 0
    while len(nodes) < t:
        if head == len(queue):
            remaining = np.flatnonzero(~visited)
            v = int(remaining[rng.integers(remaining.size)])
            visited[v] = True
            nodes.append(v)
            queue.append(v)
            continue
        v = queue[head]
        head += 1
        burn = int(burn_counts(p, rng))
        if burn <= 0:
            continue
        nbrs = indices[indptr[v]:indptr[v + 1]]
        nbrs = nbrs[~visited[nbrs]]
        if nbrs.size == 0:
            continue
        if burn < nbrs.size:
            nbrs = rng.choice(nbrs, size=burn, replace=False)
        for w in nbrs.tolist():
            if len(nodes) >= t:
                break
            visited[w] = True
            nodes.append(w)
            esrc.append(v)
            edst.append(w)
            queue.append(w)
    nodes_arr = np.array(nodes, dtype=np.int64)
    if spec.induce_edges:
        sub = g.subgraph(nodes_arr)
    else:
        sub = g.subgraph(nodes_arr, (np.array(esrc, dtype=np.int64), np.array(edst, dtype=np.int64)))
    return SampleResult(sub, spec, t, nodes_arr)


_SAMPLERS = {"VS": vertex_sample, "ES": edge_sample, "FFS": forest_fire_sample, "ESI": esi_sample}


def sample(g: DirectedGraph, spec: SampleSpec, rng=None) -> SampleResult:
    return _SAMPLERS[spec.method](g, spec, rng)


def ks_distance(sample_values, population_values) -> float:
    """Two-sample KS statistic: sup |ECDF_a - ECDF_b| over the pooled support."""
    a = np.sort(np.asarray(sample_values, dtype=float).ravel())
    b = np.sort(np.asarray(population_values, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("ks_distance needs two nonempty samples")
    x = np.union1d(a, b)
    fa = np.searchsorted(a, x, side="right") / a.size
    fb = np.searchsorted(b, x, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def total_degrees(g: DirectedGraph) -> np.ndarray:
    return g.in_degrees() + g.out_degrees()


@dataclass
class KsReport:
    rows: list[dict]
    repetitions: int

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("method,phi,mean_ks_degree,mean_ks_clustering,repetitions\n")
            for r in self.rows:
                fh.write(f"{r['method']},{r['phi']:.4f},{r['mean_ks_degree']:.9f},"
                         f"{r['mean_ks_clustering']:.9f},{r['repetitions']}\n")


def _evaluate_cell(g, method, phi, reps, seed, ffs_p, induce, ref_deg, ref_clu):
    ks_d, ks_c = [], []
    for r in range(reps):
        spec = SampleSpec(method, phi, ffs_p, induce, seed)
        s = sample(g, spec, derive_rng(seed, "sample-eval", method, phi, r)).graph
        ks_d.append(ks_distance(total_degrees(s), ref_deg))
        ks_c.append(ks_distance(local_clustering(s), ref_clu))
    return {"method": method, "phi": float(phi), "mean_ks_degree": float(np.mean(ks_d)),
            "mean_ks_clustering": float(np.mean(ks_c)), "repetitions": reps}


def evaluate_samplers(g: DirectedGraph, methods=METHODS, phi_grid=DEFAULT_PHI_GRID,
                      repetitions: int = 100, seed: int = 0, ffs_p: float = 0.7,
                      induce_edges: bool = False, n_jobs: int | None = None) -> KsReport:
    """Mean KS distance of total-degree and local-clustering distributions, sample vs full graph."""
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown sampling method {m!r}")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    ref_deg = total_degrees(g)
    ref_clu = local_clustering(g)
    cells = [(m, float(phi)) for m in methods for phi in phi_grid]
    workers = n_jobs or os.cpu_count() or 1
    args = dict(reps=repetitions, seed=seed, ffs_p=ffs_p, induce=induce_edges, ref_deg=ref_deg, ref_clu=ref_clu)
    if workers == 1:
        rows = [_evaluate_cell(g, m, phi, **args) for m, phi in cells]
    else:
        rows = Parallel(n_jobs=workers)(delayed(_evaluate_cell)(g, m, phi, **args) for m, phi in cells)
    return KsReport(rows, repetitions)


@dataclass
class StabilityReport:
    mean: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    per_sample: np.ndarray  # n x 36 mean censuses

    @property
    def width(self) -> np.ndarray:
        return self.ci_high - self.ci_low

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("class_id,mean,ci_low,ci_high\n")
            for i in range(N_CLASSES):
                fh.write(f"{i},{self.mean[i]:.9f},{self.ci_low[i]:.9f},{self.ci_high[i]:.9f}\n")


def census_stability(g: DirectedGraph, phi: float = 0.35, n: int = 20, spec: SampleSpec | None = None,
                     radius: int = 1, seed: int = 0, seeds=None, n_jobs: int | None = None) -> StabilityReport:
    """Across ``n`` FFS samples: mean census per sample, then mean and 95% normal CI per class.

    ``seeds`` overrides the derived per-sample seeds (one entry per sample).
    """
    if n < 2:
        raise ValueError("need at least 2 samples")
    spec = replace(spec or SampleSpec(), method="FFS", phi=phi)
    if seeds is not None and len(seeds) != n:
        raise ValueError("seeds must have one entry per sample")
    per = np.zeros((n, N_CLASSES))
    for i in range(n):
        rng = derive_rng(seeds[i] if seeds is not None else seed, "stability", i if seeds is None else 0)
        s = forest_fire_sample(g, spec, rng).graph
        cm = census_matrix(s, radius, n_jobs=n_jobs)
        if len(cm):
            per[i] = cm.proportions.mean(axis=0)
    mean = per.mean(axis=0)
    half = 1.96 * per.std(axis=0, ddof=1) / math.sqrt(n)
    return StabilityReport(mean, mean - half, mean + half, per)
