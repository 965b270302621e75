"""From clusters to roles: central users, central ego-network structures and reports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .census import CensusMatrix
from .cluster import SEPARATION_NOTES, Clustering, KSweepResult
from .graph import DirectedGraph, EgoNetwork, ego_network


@dataclass
class RoleProfile:
    role_id: int
    cluster: int
    member_count: int
    proportion: float
    central_ego: int
    central_user: str
    central_distance: float
    central_structure: EgoNetwork
    members: np.ndarray = field(repr=False)
    distances: np.ndarray = field(repr=False)
    structure_files: dict = field(default_factory=dict)


def extract_roles(clustering: Clustering, embedding, census: CensusMatrix, g: DirectedGraph,
                  radius: int = 1, space: str = "embedded") -> list[RoleProfile]:
    """One profile per cluster, sorted by descending size (ties: smallest member id).

    The central user is the member nearest its cluster centroid, measured in the
    clustered (embedded) space or, with ``space="census"``, against the mean
    census of the members. Ties go to the smaller ego id.
    """
    x = np.asarray(getattr(embedding, "matrix", embedding), dtype=float)
    labels = np.asarray(clustering.assignments)
    n = len(census)
    if x.shape[0] != n or labels.shape[0] != n:
        raise ValueError(f"misaligned inputs: census {n}, embedding {x.shape[0]}, labels {labels.shape[0]}")
    if census.ids != g.ids:
        raise ValueError("census was not computed on this graph")
    if space == "embedded":
        points, centroids = x, np.asarray(clustering.centroids, dtype=float)
    elif space == "census":
        points = census.proportions
        centroids = np.vstack([points[labels == c].mean(axis=0) if (labels == c).any()
                               else np.full(points.shape[1], np.nan) for c in range(clustering.k)])
    else:
        raise ValueError("space must be 'embedded' or 'census'")

    raw = []
    for c in range(clustering.k):
        idx = np.flatnonzero(labels == c)
        if idx.size == 0:
            continue
        dist = np.sqrt(((points[idx] - centroids[c]) ** 2).sum(axis=1))
        egos = census.egos[idx]
        # minimum distance, then smaller ego id
        j = np.lexsort((egos, dist))[0]
        raw.append((c, idx, egos, dist, int(egos[j]), float(dist[j])))
    raw.sort(key=lambda r: (-r[1].size, int(r[2].min())))

    profiles = []
    for role_id, (c, idx, egos, dist, central, cdist) in enumerate(raw):
        profiles.append(RoleProfile(
            role_id=role_id,
            cluster=c,
            member_count=int(idx.size),
            proportion=idx.size / n,
            central_ego=central,
            central_user=g.ids[central],
            central_distance=cdist,
            central_structure=ego_network(g, central, radius),
            members=egos,
            distances=dist,
        ))
    return profiles


def _structure_graph(en: EgoNetwork, g: DirectedGraph) -> nx.DiGraph:
    ids = g.ids
    h = nx.DiGraph()
    h.add_node(ids[en.ego], role="ego")
    for a in sorted(ids[v] for v in en.alters):
        h.add_node(a, role="alter")
    for u, v in sorted((ids[u], ids[v]) for u, v in en.edges):
        h.add_edge(u, v)
    return h


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_central_structure(profile: RoleProfile, g: DirectedGraph, path, fmt: str = "dot") -> str:
    """Write the central ego-network; the ego carries ``role=ego``, alters ``role=alter``."""
    h = _structure_graph(profile.central_structure, g)
    if fmt == "dot":
        lines = [f"digraph role_{profile.role_id} {{"]
        for v, data in h.nodes(data=True):
            if data["role"] == "ego":
                lines.append(f"  {_dot_quote(v)} [role=ego, color=red, style=filled];")
            else:
                lines.append(f"  {_dot_quote(v)} [role=alter, color=blue];")
        for u, v in h.edges():
            lines.append(f"  {_dot_quote(u)} -> {_dot_quote(v)};")
        lines.append("}")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    elif fmt == "graphml":
        nx.write_graphml(h, path)
    else:
        raise ValueError("format must be 'dot' or 'graphml'")
    profile.structure_files[fmt] = str(path)
    return str(path)


def read_dot_edges(path) -> list[tuple[str, str]]:
    """Edges of a DOT file written by :func:`export_central_structure`."""
    import re

    pat = re.compile(r'^\s*"((?:[^"\\]|\\.)*)"\s*->\s*"((?:[^"\\]|\\.)*)"\s*;')
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            m = pat.match(line)
            if m:
                un = [s.replace('\\"', '"').replace("\\\\", "\\") for s in m.groups()]
                out.append((un[0], un[1]))
    return out


def write_membership_csv(profiles: list[RoleProfile], g: DirectedGraph, path) -> None:
    rows = []
    for p in profiles:
        for e, d in zip(p.members.tolist(), p.distances.tolist()):
            rows.append((e, p.role_id, d))
    rows.sort()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("ego_id,role_id,distance\n")
        for e, r, d in rows:
            fh.write(f"{g.ids[e]},{r},{d:.9f}\n")


def _round(x, nd=9):
    return None if x is None or (isinstance(x, float) and np.isnan(x)) else round(float(x), nd)


def role_report(profiles: list[RoleProfile], sweep: KSweepResult | None, metadata: dict | None = None,
                path=None) -> dict:
    """Machine-readable role report. Written as sorted-key JSON when ``path`` is given."""
    if not profiles:
        raise ValueError("no roles to report")
    report = {
        "silhouette": "centroid_silhouette",
        "separation_thresholds": SEPARATION_NOTES,
        "roles": [
            {
                "role_id": p.role_id,
                "member_count": p.member_count,
                "proportion": _round(p.proportion),
                "central_user": p.central_user,
                "central_distance": _round(p.central_distance),
                "central_alters": len(p.central_structure.alters),
                "central_edges": len(p.central_structure.edges),
                "structure_files": dict(sorted(p.structure_files.items())),
            }
            for p in profiles
        ],
        "provenance": metadata or {},
    }
    if sweep is not None:
        report["chosen_k"] = sweep.chosen_k
        report["restarts"] = sweep.restarts
        report["mean_silhouette"] = {str(k): _round(v) for k, v in sweep.mean_silhouette.items()}
        report["best_silhouette"] = {str(k): _round(v) for k, v in sweep.best_silhouette.items()}
    else:
        report["chosen_k"] = len(profiles)
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report


def cluster_purity(labels, truth) -> float:
    """Fraction of items whose true label is the majority true label of their cluster."""
    labels = np.asarray(labels)
    truth = np.asarray(truth)
    if labels.shape != truth.shape or labels.size == 0:
        raise ValueError("labels and truth must be nonempty and aligned")
    hits = 0
    for c in np.unique(labels):
        _, counts = np.unique(truth[labels == c], return_counts=True)
        hits += counts.max()
    return hits / labels.size
