"""Synthetic graphs with known answers: planted-role networks and power-law configuration graphs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._random import derive_rng
from .graph import DirectedGraph
from .powerlaw import DiscretePowerLawSampler

BROKER, CLIQUE, SPOKE = "broker", "clique_member", "spoke"


@dataclass(frozen=True)
class PlantedRoleSpec:
    """Planted three-role network.

    Each broker unit has one broker tied mutually to every member of ``groups``
    disjoint mutual cliques of ``clique_size`` nodes, plus ``spokes_per_broker``
    spokes that the broker (acting as a high fan-out hub) ties to one-way; the
    spokes are paired by mutual ties. ``extra_cliques`` adds free-standing
    cliques. Every node gets a ground-truth role.
    """

    n_brokers: int = 100
    groups: int = 3
    clique_size: int = 6
    spokes_per_broker: int = 4
    extra_cliques: int = 0
    rewire: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_brokers < 1:
            raise ValueError("n_brokers must be >= 1")
        if self.groups < 1:
            raise ValueError("groups must be >= 1")
        if self.clique_size < 3:
            raise ValueError("clique_size must be >= 3")
        if self.spokes_per_broker < 0 or self.spokes_per_broker % 2:
            raise ValueError("spokes_per_broker must be an even count")
        if self.extra_cliques < 0:
            raise ValueError("extra_cliques must be >= 0")
        if not 0 <= self.rewire < 1:
            raise ValueError("rewire must be in [0, 1)")


def _clique(members, edges):
    for u in members:
        for v in members:
            if u != v:
                edges.append((u, v))


def generate_planted(spec: PlantedRoleSpec) -> tuple[DirectedGraph, dict[str, str]]:
    truth: dict[str, str] = {}
    edges: list[tuple[str, str]] = []
    for b in range(spec.n_brokers):
        broker = f"b{b}"
        truth[broker] = BROKER
        for c in range(spec.groups):
            members = [f"b{b}c{c}m{j}" for j in range(spec.clique_size)]
            for m in members:
                truth[m] = CLIQUE
                edges += [(broker, m), (m, broker)]
            _clique(members, edges)
        spokes = [f"b{b}s{j}" for j in range(spec.spokes_per_broker)]
        for s in spokes:
            truth[s] = SPOKE
            edges.append((broker, s))
        for j in range(0, len(spokes), 2):
            edges += [(spokes[j], spokes[j + 1]), (spokes[j + 1], spokes[j])]
    for q in range(spec.extra_cliques):
        members = [f"q{q}m{j}" for j in range(spec.clique_size)]
        for m in members:
            truth[m] = CLIQUE
        _clique(members, edges)
    if spec.rewire > 0:
        edges = rewire_edges(edges, spec.rewire, derive_rng(spec.seed, "planted-rewire"))
    return DirectedGraph.from_edges(edges, nodes=truth.keys()), truth


def rewire_edges(edges, prob: float, rng: np.random.Generator, max_tries: int = 20):
    """Degree-preserving rewiring with (a, b), (c, d) -> (a, d), (c, b) swaps.

    A swap moves two edges, so edges start a swap with probability ``prob / 2``
    and each edge ends up rewired with probability about ``prob``.

    Swaps that would create a self-loop or duplicate edge are retried with another
    partner up to ``max_tries`` times. In- and out-degrees are unchanged.
    """
    edges = list(edges)
    present = set(edges)
    m = len(edges)
    for i in rng.permutation(m).tolist():
        if rng.random() >= prob / 2:
            continue
        for _ in range(max_tries):
            j = int(rng.integers(m))
            if j == i:
                continue
            (a, b), (c, d) = edges[i], edges[j]
            if a == d or c == b or (a, d) in present or (c, b) in present:
                continue
            present.difference_update([(a, b), (c, d)])
            present.update([(a, d), (c, b)])
            edges[i], edges[j] = (a, d), (c, b)
            break
    return edges


def generate_powerlaw(n: int, alpha: float, seed: int = 0) -> DirectedGraph:
    """Directed configuration graph with power-law (x_min = 1) in- and out-degrees.

    The in-degree draw is adjusted by single stubs so both stub totals match;
    self-loops and multi-edges are dropped after pairing.
    """
    if alpha <= 1:
        raise ValueError("alpha must be > 1")
    if n < 100:
        raise ValueError("n must be >= 100")
    rng = derive_rng(seed, "powerlaw-graph")
    draw = DiscretePowerLawSampler(alpha, 1)
    out_deg = np.minimum(draw(n, rng), n - 1)
    in_deg = np.minimum(draw(n, rng), n - 1)
    diff = int(out_deg.sum() - in_deg.sum())
    if diff > 0:
        np.add.at(in_deg, rng.integers(n, size=diff), 1)
    elif diff < 0:
        stubs = np.repeat(np.arange(n), in_deg)
        drop = rng.choice(stubs.size, size=-diff, replace=False)
        in_deg = np.bincount(np.delete(stubs, drop), minlength=n)
    out_stubs = np.repeat(np.arange(n), out_deg)
    in_stubs = rng.permutation(np.repeat(np.arange(n), in_deg))
    return DirectedGraph([str(i) for i in range(n)], out_stubs, in_stubs)


def write_ground_truth(truth: dict[str, str], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("ego_id,planted_role\n")
        for ego in sorted(truth):
            fh.write(f"{ego},{truth[ego]}\n")


def read_ground_truth(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        if fh.readline().strip() != "ego_id,planted_role":
            raise ValueError(f"{path}: not a ground-truth CSV")
        for line in fh:
            e, r = line.rstrip("\n").split(",")
            out[e] = r
    return out
