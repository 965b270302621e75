"""End-to-end role discovery: file-based stages and an in-memory estimator.

Every stage reads its inputs from, and writes its outputs to, a run directory,
so running the stages one by one yields the same files as :func:`run_pipeline`.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from . import __version__
from .census import (CensusMatrix, census_matrix, read_census_csv, write_census_csv,
                     write_triad_classes)
from .cluster import Clustering, KSweepResult, sweep_k, write_assignments_csv, write_scatter_csv
from .graph import (DirectedGraph, degree_sequences, load_edge_list, read_node_list, summary_stats,
                    write_edge_list, write_node_list)
from .powerlaw import fit_with_pvalue
from .reduce import (choose_dimensions, pca_fit, pca_transform, read_embedding_csv, write_embedding_csv,
                     write_scree_csv)
from .roles import export_central_structure, extract_roles, role_report, write_membership_csv
from .sampling import METHODS, SampleSpec, census_stability, evaluate_samplers, sample

# file names inside a run directory
F = dict(
    stats="stats.json", degrees="degree_distribution.csv", powerlaw="powerlaw.json",
    sample_edges="sample_edges.tsv", sample_nodes="sample_nodes.txt", sample_meta="sample.json",
    census="census.csv", classes="triad_classes.txt", pca="pca.json", scree="scree.csv",
    embedding="embedding.csv", sweep="sweep.csv", clusters="clusters.csv", clustering="clustering.json",
    scatter="cluster_scatter.csv", roles="roles.json", membership="role_membership.csv",
    structures="structures", ks="sampler_ks.csv", stability="census_stability.csv",
    figures="FIGURES.txt", manifest="manifest.json", timings="timings.log",
)

FIGURE_RECIPES = """\
degree_distribution.csv   in/out degree histograms (log-log)            degree distributions
sampler_ks.csv            mean KS distance vs phi, one line per method    sampler comparison
census_stability.csv      per-class mean with ci_low/ci_high error bars   census stability across FFS samples
scree.csv                 cumulative explained variance vs component      scree plot (threshold line at 0.85)
sweep.csv                 mean/best centroid silhouette vs k              silhouette coefficients
cluster_scatter.csv       pc_i vs pc_j coloured by cluster, per pair      clusters along leading components
structures/role_*.dot     central ego-network per role (ego has role=ego) central role structures
"""


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunConfig:
    input: str = ""
    out: str = "run"
    delimiter: str | None = None
    columns: tuple = (0, 1)
    has_header: bool = False
    radius: int = 1
    method: str = "FFS"
    phi: float = 0.35
    ffs_p: float = 0.7
    induce: bool = False
    reps: int = 100
    threshold: float = 0.85
    k_min: int = 2
    k_max: int = 9
    restarts: int = 50
    bootstraps: int = 100
    central_space: str = "embedded"
    formats: tuple = ("dot", "graphml")
    seed: int = 0
    workers: int | None = None

    def __post_init__(self):
        self.columns = tuple(self.columns)
        self.formats = tuple(self.formats)
        if self.radius not in (1, 2):
            raise ValueError("radius must be 1 or 2")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        SampleSpec(self.method, self.phi, self.ffs_p, self.induce, self.seed)
        if not 0 < self.threshold < 1:
            raise ValueError("threshold must be in (0, 1)")
        if not 2 <= self.k_min <= self.k_max:
            raise ValueError("need 2 <= k_min <= k_max")
        if self.restarts < 1 or self.reps < 1 or self.bootstraps < 0:
            raise ValueError("restarts and reps must be >= 1, bootstraps >= 0")

    @classmethod
    def from_json(cls, path, **overrides) -> "RunConfig":
        """Load a JSON config; nested objects (e.g. ``{"sampling": {...}}``) are flattened.

        Keyword overrides that are not None win over the file.
        """
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        flat = {}
        for k, v in raw.items():
            if isinstance(v, dict):
                flat.update(v)
            else:
                flat[k] = v
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(flat) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        flat.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**flat)

    def provenance(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("workers")
        d.pop("out")
        d["columns"] = list(self.columns)
        d["formats"] = list(self.formats)
        return d


def _dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _need(path) -> Path:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"missing upstream artifact: {path}")
    return path


def load_input(cfg: RunConfig) -> DirectedGraph:
    return load_edge_list(cfg.input, delimiter=cfg.delimiter, has_header=cfg.has_header, columns=cfg.columns)


def load_sample(out) -> DirectedGraph:
    out = Path(out)
    nodes = read_node_list(_need(out / F["sample_nodes"]))
    return load_edge_list(_need(out / F["sample_edges"]), nodes=nodes)


# stages


def stage_stats(g: DirectedGraph, out) -> dict:
    s = summary_stats(g)
    stats = dataclasses.asdict(s)
    stats["mean_degree"] = round(stats["mean_degree"], 9)
    stats["mean_clustering"] = round(stats["mean_clustering"], 9)
    _dump_json(stats, Path(out) / F["stats"])
    ins, outs = degree_sequences(g)
    top = int(max(ins.max(initial=0), outs.max(initial=0)))
    hin = np.bincount(ins, minlength=top + 1)
    hout = np.bincount(outs, minlength=top + 1)
    with open(Path(out) / F["degrees"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("degree,in_count,out_count\n")
        for d in range(top + 1):
            if hin[d] or hout[d]:
                fh.write(f"{d},{hin[d]},{hout[d]}\n")
    return stats


def stage_powerlaw(g: DirectedGraph, out, bootstraps: int, seed: int, which=("in", "out"),
                   n_jobs=None) -> dict:
    ins, outs = degree_sequences(g)
    report = {}
    for w in which:
        vals = ins if w == "in" else outs
        try:
            fit = fit_with_pvalue(vals, bootstraps=bootstraps, seed=seed, n_jobs=n_jobs)
            report[w] = {k: (round(v, 9) if isinstance(v, float) else v) for k, v in dataclasses.asdict(fit).items()}
        except ValueError as exc:
            report[w] = {"error": str(exc)}
    _dump_json(report, Path(out) / F["powerlaw"])
    return report


def stage_sample(g: DirectedGraph, out, cfg: RunConfig) -> DirectedGraph:
    """Draw the analysis sample. ``phi == 1`` keeps the whole graph."""
    if cfg.phi >= 1:
        s, meta = g, {"method": "none", "phi": 1.0, "target_size": g.node_count}
    else:
        spec = SampleSpec(cfg.method, cfg.phi, cfg.ffs_p, cfg.induce, cfg.seed)
        res = sample(g, spec)
        s = res.graph
        meta = {"method": spec.method, "phi": spec.phi, "ffs_p": spec.ffs_p, "induce_edges": spec.induce_edges,
                "seed": spec.seed, "target_size": res.target_size}
    meta.update(nodes=s.node_count, edges=s.edge_count)
    write_edge_list(s, Path(out) / F["sample_edges"])
    write_node_list(s, Path(out) / F["sample_nodes"])
    _dump_json(meta, Path(out) / F["sample_meta"])
    return s


def stage_sample_eval(g: DirectedGraph, out, cfg: RunConfig, methods=METHODS, phi_grid=None,
                      stability_n: int = 20) -> None:
    from .sampling import DEFAULT_PHI_GRID

    rep = evaluate_samplers(g, methods, phi_grid or DEFAULT_PHI_GRID, cfg.reps, cfg.seed, cfg.ffs_p,
                            cfg.induce, cfg.workers)
    rep.to_csv(Path(out) / F["ks"])
    if stability_n >= 2:
        spec = SampleSpec("FFS", cfg.phi if cfg.phi < 1 else 0.35, cfg.ffs_p, cfg.induce, cfg.seed)
        st = census_stability(g, spec.phi, stability_n, spec, cfg.radius, cfg.seed, n_jobs=cfg.workers)
        st.to_csv(Path(out) / F["stability"])


def stage_census(s: DirectedGraph, out, radius: int, n_jobs=None) -> CensusMatrix:
    cm = census_matrix(s, radius, n_jobs=n_jobs)
    write_census_csv(cm, Path(out) / F["census"])
    write_triad_classes(Path(out) / F["classes"])
    return cm


def stage_reduce(out, threshold: float):
    ids, _, props = read_census_csv(_need(Path(out) / F["census"]))
    model = pca_fit(props)
    m = choose_dimensions(model.explained_variance_ratio, threshold)
    emb = pca_transform(model, props, m)
    _dump_json({
        "threshold": threshold, "retained": m, "cum_variance": round(emb.cum_variance, 9),
        "mean": [round(v, 12) for v in model.mean.tolist()],
        "explained_variance_ratio": [round(v, 12) for v in model.explained_variance_ratio.tolist()],
        "components": [[round(v, 12) for v in row] for row in model.components[:m].tolist()],
    }, Path(out) / F["pca"])
    write_scree_csv(model, Path(out) / F["scree"])
    write_embedding_csv(ids, emb, Path(out) / F["embedding"])
    return emb


def stage_cluster(out, k_min, k_max, restarts, seed, n_jobs=None) -> KSweepResult:
    ids, x = read_embedding_csv(_need(Path(out) / F["embedding"]))
    k_max = min(k_max, len(ids))
    sweep = sweep_k(x, k_min, k_max, restarts, seed, n_jobs=n_jobs)
    sweep.to_csv(Path(out) / F["sweep"])
    best = sweep.chosen
    write_assignments_csv(ids, best.assignments, Path(out) / F["clusters"])
    write_scatter_csv(ids, x, best.assignments, Path(out) / F["scatter"])
    _dump_json({
        "silhouette": "centroid_silhouette",
        "chosen_k": sweep.chosen_k,
        "restarts": restarts,
        "seed": best.seed,
        "centroids": [[round(v, 12) for v in row] for row in best.centroids.tolist()],
        "inertia": round(best.inertia, 9),
        "best_silhouette": round(best.silhouette, 9),
        "mean_silhouette": {str(k): (None if np.isnan(v) else round(v, 9)) for k, v in sweep.mean_silhouette.items()},
        "best_silhouette_by_k": {str(k): (None if np.isnan(v) else round(v, 9)) for k, v in sweep.best_silhouette.items()},
    }, Path(out) / F["clustering"])
    return sweep


def _read_clustering(out) -> tuple[Clustering, KSweepResult]:
    out = Path(out)
    with open(_need(out / F["clustering"]), encoding="utf-8") as fh:
        meta = json.load(fh)
    labels = []
    with open(_need(out / F["clusters"]), encoding="utf-8") as fh:
        fh.readline()
        for line in fh:
            labels.append(int(line.rstrip("\n").split(",")[1]))
    centroids = np.array(meta["centroids"], dtype=float)
    k = meta["chosen_k"]
    cl = Clustering(k, np.array(labels), centroids, meta["inertia"], meta["best_silhouette"], meta["seed"])
    ms = {int(a): (np.nan if b is None else b) for a, b in meta["mean_silhouette"].items()}
    bs = {int(a): (np.nan if b is None else b) for a, b in meta["best_silhouette_by_k"].items()}
    sweep = KSweepResult(sorted(ms), ms, bs, {k: cl}, k, meta["restarts"])
    return cl, sweep


def stage_roles(s: DirectedGraph, out, cfg: RunConfig) -> dict:
    out = Path(out)
    ids, pairs, props = read_census_csv(_need(out / F["census"]))
    egos = np.array([s.node_id(e) for e in ids], dtype=np.int64)
    counts = np.rint(props * pairs[:, None]).astype(np.int64)
    excluded = np.setdiff1d(np.arange(s.node_count), egos)
    cm = CensusMatrix(egos, counts, excluded, s.ids, cfg.radius)
    emb_ids, x = read_embedding_csv(_need(out / F["embedding"]))
    if emb_ids != ids:
        raise ValueError("embedding rows do not match census rows")
    cl, sweep = _read_clustering(out)
    profiles = extract_roles(cl, x, cm, s, cfg.radius, cfg.central_space)
    sdir = out / F["structures"]
    sdir.mkdir(exist_ok=True)
    for p in profiles:
        for fmt in cfg.formats:
            rel = f"{F['structures']}/role_{p.role_id}.{fmt}"
            export_central_structure(p, s, out / rel, fmt)
            p.structure_files[fmt] = rel
    write_membership_csv(profiles, s, out / F["membership"])
    meta = {"config": cfg.provenance(), "version": __version__, "excluded_egos": int(excluded.size)}
    return role_report(profiles, sweep, meta, out / F["roles"])


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out, cfg: RunConfig) -> dict:
    out = Path(out)
    files = sorted(p for p in out.rglob("*") if p.is_file() and p.name not in (F["manifest"], F["timings"]))
    manifest = {
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "seed": cfg.seed,
        "config": cfg.provenance(),
        "timings_file": F["timings"],
        "artifacts": {p.relative_to(out).as_posix(): _sha256(p) for p in files},
    }
    _dump_json(manifest, out / F["manifest"])
    return manifest


def run_pipeline(cfg: RunConfig, with_powerlaw: bool = True) -> Path:
    """load -> stats -> (powerlaw) -> sample -> census -> reduce -> cluster -> roles.

    Artifacts are kept when a stage fails; the raised :class:`StageError` names it.
    """
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    timings: list[tuple[str, float]] = []
    state: dict = {}

    def run(name, fn):
        t0 = time.perf_counter()
        try:
            result = fn()
        except Exception as exc:  # noqa: BLE001 - re-raised with the stage name
            raise StageError(name, exc) from exc
        finally:
            timings.append((name, time.perf_counter() - t0))
            with open(out / F["timings"], "w", encoding="utf-8") as fh:
                fh.writelines(f"{n}\t{t:.3f}s\n" for n, t in timings)
        return result

    state["g"] = run("load", lambda: load_input(cfg))
    run("stats", lambda: stage_stats(state["g"], out))
    if with_powerlaw and cfg.bootstraps > 0:
        run("fit-powerlaw", lambda: stage_powerlaw(state["g"], out, cfg.bootstraps, cfg.seed, n_jobs=cfg.workers))
    state["s"] = run("sample", lambda: stage_sample(state["g"], out, cfg))
    run("census", lambda: stage_census(state["s"], out, cfg.radius, cfg.workers))
    run("reduce", lambda: stage_reduce(out, cfg.threshold))
    run("cluster", lambda: stage_cluster(out, cfg.k_min, cfg.k_max, cfg.restarts, cfg.seed, cfg.workers))
    run("roles", lambda: stage_roles(state["s"], out, cfg))
    with open(out / F["figures"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(FIGURE_RECIPES)
    write_manifest(out, cfg)
    return out


class RoleDiscovery(ClusterMixin, BaseEstimator):
    """In-memory role discovery on a :class:`DirectedGraph`.

    ``fit(graph)`` samples (unless ``phi == 1``), computes censuses, reduces with
    PCA and picks k by mean centroid silhouette. ``labels_`` align with
    ``egos_`` (internal ids of ``sample_``); ``roles_`` holds the role profiles.
    """

    def __init__(self, radius=1, method="FFS", phi=0.35, ffs_p=0.7, induce=False, threshold=0.85,
                 k_min=2, k_max=9, restarts=50, central_space="embedded", random_state=0, n_jobs=None):
        self.radius = radius
        self.method = method
        self.phi = phi
        self.ffs_p = ffs_p
        self.induce = induce
        self.threshold = threshold
        self.k_min = k_min
        self.k_max = k_max
        self.restarts = restarts
        self.central_space = central_space
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        if not isinstance(X, DirectedGraph):
            raise TypeError("RoleDiscovery expects a DirectedGraph")
        if self.phi >= 1:
            s = X
        else:
            s = sample(X, SampleSpec(self.method, self.phi, self.ffs_p, self.induce, self.random_state)).graph
        cm = census_matrix(s, self.radius, n_jobs=self.n_jobs)
        if len(cm) < 2:
            raise ValueError("fewer than 2 egos with at least 2 alters")
        model = pca_fit(cm)
        m = choose_dimensions(model.explained_variance_ratio, self.threshold)
        emb = pca_transform(model, cm, m)
        sweep = sweep_k(emb.matrix, self.k_min, min(self.k_max, len(cm)), self.restarts, self.random_state,
                        n_jobs=self.n_jobs)
        best = sweep.chosen
        self.sample_ = s
        self.census_ = cm
        self.pca_ = model
        self.n_components_ = m
        self.embedding_ = emb.matrix
        self.sweep_ = sweep
        self.n_clusters_ = sweep.chosen_k
        self.labels_ = best.assignments
        self.egos_ = cm.egos
        self.roles_ = extract_roles(best, emb, cm, s, self.radius, self.central_space)
        return self

    @property
    def ego_ids_(self) -> list[str]:
        return self.census_.ego_ids
