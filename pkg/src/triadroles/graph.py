"""Directed interaction graphs: storage, edge-list I/O, ego-networks and summary statistics."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class GraphFormatError(ValueError):
    """Raised for malformed edge-list input."""


class DirectedGraph:
    """Immutable simple directed graph with dense internal node ids.

    Internal ids are ``0..n-1``; ``ids[i]`` is the external (string) id of node ``i``.
    Duplicate edges collapse and self-loops are dropped at construction.
    """

    __slots__ = ("ids", "_index", "src", "dst", "_out", "_in", "_und")

    def __init__(self, ids: Sequence[str], src, dst):
        ids = [str(i) for i in ids]
        if len(set(ids)) != len(ids):
            raise ValueError("external node ids must be unique")
        n = len(ids)
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise ValueError("src and dst must have the same length")
        if src.size and (src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n):
            raise ValueError("edge endpoint out of range")
        keep = src != dst
        src, dst = src[keep], dst[keep]
        if src.size:
            key = np.unique(src * n + dst)
            src, dst = key // n, key % n
        self.ids = tuple(ids)
        self._index = {x: i for i, x in enumerate(self.ids)}
        src.setflags(write=False)
        dst.setflags(write=False)
        self.src, self.dst = src, dst
        data = np.ones(src.size, dtype=np.int8)
        self._out = sp.csr_matrix((data, (src, dst)), shape=(n, n))
        self._out.sort_indices()
        self._in = self._out.T.tocsr()
        self._in.sort_indices()
        und = (self._out + self._in).tocsr()
        und.data[:] = 1
        und.sort_indices()
        self._und = und

    # construction helpers

    @classmethod
    def from_edges(cls, edges: Iterable[tuple], nodes: Iterable | None = None) -> "DirectedGraph":
        """Build a graph from external-id pairs; ids are assigned in first-appearance order."""
        index: dict[str, int] = {}
        ids: list[str] = []

        def intern(x) -> int:
            x = str(x)
            i = index.get(x)
            if i is None:
                i = index[x] = len(ids)
                ids.append(x)
            return i

        if nodes is not None:
            for v in nodes:
                intern(v)
        src, dst = [], []
        for u, v in edges:
            src.append(intern(u))
            dst.append(intern(v))
        return cls(ids, src, dst)

    # basic accessors

    @property
    def node_count(self) -> int:
        return len(self.ids)

    @property
    def edge_count(self) -> int:
        return int(self.src.size)

    def __len__(self) -> int:
        return self.node_count

    def __repr__(self) -> str:
        return f"DirectedGraph(nodes={self.node_count}, edges={self.edge_count})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return self.ids == other.ids and np.array_equal(self.src, other.src) and np.array_equal(self.dst, other.dst)

    __hash__ = None

    def node_id(self, external) -> int:
        try:
            return self._index[str(external)]
        except KeyError:
            raise KeyError(f"unknown node {external!r}") from None

    def _check(self, v: int) -> int:
        if not isinstance(v, (int, np.integer)) or not 0 <= v < self.node_count:
            raise KeyError(f"unknown node id {v!r}")
        return int(v)

    def out_neighbors(self, v: int) -> np.ndarray:
        v = self._check(v)
        a = self._out
        return a.indices[a.indptr[v]:a.indptr[v + 1]]

    def in_neighbors(self, v: int) -> np.ndarray:
        v = self._check(v)
        a = self._in
        return a.indices[a.indptr[v]:a.indptr[v + 1]]

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted union of in- and out-neighbors."""
        v = self._check(v)
        a = self._und
        return a.indices[a.indptr[v]:a.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.out_neighbors(u)
        j = np.searchsorted(row, v)
        return bool(j < row.size and row[j] == v)

    def adjacency(self) -> sp.csr_matrix:
        """Directed 0/1 adjacency (row = source). Do not mutate."""
        return self._out

    def undirected_adjacency(self) -> sp.csr_matrix:
        return self._und

    def edges(self) -> list[tuple[str, str]]:
        ids = self.ids
        return [(ids[u], ids[v]) for u, v in zip(self.src.tolist(), self.dst.tolist())]

    def in_degrees(self) -> np.ndarray:
        return np.diff(self._in.indptr)

    def out_degrees(self) -> np.ndarray:
        return np.diff(self._out.indptr)

    def subgraph(self, nodes, edges: tuple[np.ndarray, np.ndarray] | None = None) -> "DirectedGraph":
        """Subgraph on ``nodes`` (internal ids, order kept).

        With ``edges=None`` the induced edge set is used; otherwise ``edges`` gives
        (src, dst) arrays of internal ids of this graph, all inside ``nodes``.
        """
        nodes = np.asarray(nodes, dtype=np.int64)
        remap = np.full(self.node_count, -1, dtype=np.int64)
        remap[nodes] = np.arange(nodes.size)
        if edges is None:
            mask = (remap[self.src] >= 0) & (remap[self.dst] >= 0)
            s, d = self.src[mask], self.dst[mask]
        else:
            s, d = (np.asarray(e, dtype=np.int64) for e in edges)
            if s.size and ((remap[s] < 0).any() or (remap[d] < 0).any()):
                raise ValueError("edge endpoint not among subgraph nodes")
        return DirectedGraph([self.ids[i] for i in nodes.tolist()], remap[s], remap[d])


def load_edge_list(path, delimiter: str | None = None, has_header: bool = False,
                   dedupe: bool = True, columns: tuple[int, int] = (0, 1),
                   nodes: Iterable[str] | None = None) -> DirectedGraph:
    """Read a ``src dst [extra...]`` edge list.

    ``delimiter=None`` splits on any whitespace. Lines starting with ``#`` and blank
    lines are skipped. Extra columns (timestamps, weights) are ignored; ``columns``
    picks the source and target fields. ``nodes`` pre-assigns internal ids (and
    keeps isolated nodes).
    """
    if not dedupe:
        raise ValueError("multi-edges are not supported; dedupe must be True")
    if not os.path.isfile(path):
        raise FileNotFoundError(f"edge list not found: {path}")
    pairs = []
    with open(path, encoding="utf-8") as fh:
        header_pending = has_header
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            if header_pending:
                header_pending = False
                continue
            fields = s.split(delimiter)
            need = max(columns) + 1
            if len(fields) < need:
                raise GraphFormatError(f"{path}:{lineno}: expected at least {need} fields, got {s!r}")
            u, v = fields[columns[0]].strip(), fields[columns[1]].strip()
            if not u or not v:
                raise GraphFormatError(f"{path}:{lineno}: empty node id in {s!r}")
            pairs.append((u, v))
    if not pairs and not nodes:
        raise GraphFormatError(f"{path}: no edges found")
    return DirectedGraph.from_edges(pairs, nodes=nodes)


def write_edge_list(g: DirectedGraph, path, delimiter: str = "\t") -> None:
    """Write edges sorted by (src, dst) external id, one per line."""
    rows = sorted(g.edges())
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for u, v in rows:
            fh.write(f"{u}{delimiter}{v}\n")


def write_node_list(g: DirectedGraph, path) -> None:
    """Node ids in internal-id order (keeps isolated nodes and id order on reload)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for x in g.ids:
            fh.write(x + "\n")


def read_node_list(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]


@dataclass(frozen=True)
class EgoNetwork:
    ego: int
    alters: tuple[int, ...]
    radius: int
    edges: tuple[tuple[int, int], ...]

    @property
    def nodes(self) -> tuple[int, ...]:
        return (self.ego,) + self.alters


def ego_alters(g: DirectedGraph, ego: int, radius: int = 1) -> np.ndarray:
    """Sorted alters of ``ego`` within undirected distance ``radius``."""
    if radius not in (1, 2):
        raise ValueError("radius must be 1 or 2")
    first = g.neighbors(ego)
    if radius == 1:
        return first
    und = g.undirected_adjacency()
    parts = [first] + [und.indices[und.indptr[u]:und.indptr[u + 1]] for u in first.tolist()]
    alters = np.unique(np.concatenate(parts))
    return alters[alters != ego]


def ego_network(g: DirectedGraph, ego: int, radius: int = 1) -> EgoNetwork:
    alters = ego_alters(g, ego, radius)
    members = np.concatenate([[ego], alters]).astype(np.int64)
    sub = g.adjacency()[members][:, members].tocoo()
    edges = sorted(zip(members[sub.row].tolist(), members[sub.col].tolist()))
    return EgoNetwork(int(ego), tuple(alters.tolist()), radius, tuple(edges))


@dataclass(frozen=True)
class SummaryStats:
    node_count: int
    edge_count: int
    mean_degree: float
    mean_clustering: float


def local_clustering(g: DirectedGraph) -> np.ndarray:
    """Local clustering coefficient on the undirected projection (0 for degree < 2)."""
    u = g.undirected_adjacency().astype(np.int64)
    deg = np.diff(u.indptr)
    tri2 = np.asarray((u @ u).multiply(u).sum(axis=1)).ravel()  # 2 x triangles at node
    denom = deg * (deg - 1)
    out = np.zeros(g.node_count, dtype=float)
    nz = denom > 0
    out[nz] = tri2[nz] / denom[nz]
    return out


def summary_stats(g: DirectedGraph) -> SummaryStats:
    if g.node_count < 1:
        raise ValueError("graph has no nodes")
    return SummaryStats(
        node_count=g.node_count,
        edge_count=g.edge_count,
        mean_degree=2.0 * g.edge_count / g.node_count,
        mean_clustering=float(local_clustering(g).mean()),
    )


def degree_sequences(g: DirectedGraph) -> tuple[np.ndarray, np.ndarray]:
    """(in_degrees, out_degrees), indexed by internal node id."""
    return g.in_degrees(), g.out_degrees()
