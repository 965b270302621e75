import json

import networkx as nx
import numpy as np
import pytest

from triadroles.census import census_matrix
from triadroles.cluster import kmeans, sweep_k
from triadroles.graph import DirectedGraph
from triadroles.pipeline import RoleDiscovery
from triadroles.roles import (cluster_purity, export_central_structure, extract_roles, read_dot_edges,
                              role_report, write_membership_csv)
from triadroles.synth import BROKER, CLIQUE, SPOKE, PlantedRoleSpec, generate_planted


@pytest.fixture(scope="module")
def planted():
    g, truth = generate_planted(PlantedRoleSpec())
    est = RoleDiscovery(phi=1.0, n_jobs=1).fit(g)
    return g, truth, est


def _mutual(h, u, v):
    h.add_edge(u, v)
    h.add_edge(v, u)


def template(role, groups=3, size=6, spokes=4):
    """Hand-built ego-network of each planted role."""
    h = nx.DiGraph()
    if role == BROKER:
        for c in range(groups):
            ms = [f"c{c}m{j}" for j in range(size)]
            for i, m in enumerate(ms):
                _mutual(h, "ego", m)
                for w in ms[i + 1:]:
                    _mutual(h, m, w)
        for j in range(0, spokes, 2):
            h.add_edge("ego", f"s{j}")
            h.add_edge("ego", f"s{j + 1}")
            _mutual(h, f"s{j}", f"s{j + 1}")
    elif role == CLIQUE:
        ms = ["ego"] + [f"m{j}" for j in range(size - 1)]
        for i, m in enumerate(ms):
            _mutual(h, "hub", m)
            for w in ms[i + 1:]:
                _mutual(h, m, w)
    else:
        h.add_edge("hub", "ego")
        h.add_edge("hub", "pal")
        _mutual(h, "ego", "pal")
    return h


def test_planted_recovery(planted):
    g, truth, est = planted
    assert est.n_clusters_ == 3
    labels = [truth[e] for e in est.ego_ids_]
    assert cluster_purity(est.labels_, labels) == 1.0


def test_central_structures_match_templates(planted):
    g, truth, est = planted
    for p in est.roles_:
        en = p.central_structure
        h = nx.DiGraph()
        h.add_nodes_from(en.nodes)
        h.add_edges_from(en.edges)
        assert nx.is_isomorphic(h, template(truth[p.central_user]))


def test_role_invariants(planted):
    g, truth, est = planted
    roles = est.roles_
    assert sum(p.proportion for p in roles) == pytest.approx(1.0)
    members = np.concatenate([p.members for p in roles])
    assert sorted(members.tolist()) == sorted(est.egos_.tolist())
    for p in roles:
        assert p.central_distance <= p.distances.min() + 1e-12
    assert [p.member_count for p in roles] == sorted((p.member_count for p in roles), reverse=True)


def test_relabeling_invariance():
    g, _ = generate_planted(PlantedRoleSpec(n_brokers=20))
    cm = census_matrix(g, n_jobs=1)
    x = cm.proportions
    c = kmeans(x, 3, seed=1)
    a = extract_roles(c, x, cm, g)
    perm = np.array([2, 0, 1])
    c.assignments = perm[c.assignments]
    c.centroids = c.centroids[np.argsort(perm)]
    b = extract_roles(c, x, cm, g)
    assert [(p.central_user, p.member_count) for p in a] == [(p.central_user, p.member_count) for p in b]


def test_singleton_cluster_central_is_member():
    g = DirectedGraph.from_edges([("a", "b"), ("a", "c"), ("b", "c"), ("c", "b"), ("d", "a"), ("d", "b")])
    cm = census_matrix(g, n_jobs=1)
    x = cm.proportions
    labels = np.array([0] * (len(cm) - 1) + [1])
    cents = np.vstack([x[:-1].mean(axis=0), x[-1]])

    class C:
        k, assignments, centroids = 2, labels, cents

    roles = extract_roles(C, x, cm, g)
    single = [p for p in roles if p.member_count == 1][0]
    assert single.central_distance == 0.0 and single.central_ego == cm.egos[-1]


def test_census_space_option(planted):
    g, truth, est = planted
    best = est.sweep_.chosen
    roles = extract_roles(best, est.embedding_, est.census_, est.sample_, space="census")
    assert {truth[p.central_user] for p in roles} == {BROKER, CLIQUE, SPOKE}
    with pytest.raises(ValueError):
        extract_roles(best, est.embedding_, est.census_, est.sample_, space="other")


def test_export_star(tmp_path):
    g = DirectedGraph.from_edges([("e", "a"), ("e", "b"), ("e", "c")])
    cm = census_matrix(g, n_jobs=1)
    c = kmeans(cm.proportions, 1)
    p = extract_roles(c, cm.proportions, cm, g)[0]
    export_central_structure(p, g, tmp_path / "s.dot")
    export_central_structure(p, g, tmp_path / "s.graphml", fmt="graphml")
    assert sorted(read_dot_edges(tmp_path / "s.dot")) == sorted(g.edges())
    h = nx.read_graphml(tmp_path / "s.graphml")
    assert h.number_of_nodes() == 4 and h.number_of_edges() == 3
    assert h.nodes["e"]["role"] == "ego"
    assert set(h.edges()) == set(g.edges())
    with pytest.raises(ValueError):
        export_central_structure(p, g, tmp_path / "x", fmt="png")


def test_dot_mutual_dyad(tmp_path):
    g = DirectedGraph.from_edges([("a", "b"), ("b", "a"), ("a", "c")])
    cm = census_matrix(g, n_jobs=1)
    c = kmeans(cm.proportions, 1)
    p = extract_roles(c, cm.proportions, cm, g)[0]
    export_central_structure(p, g, tmp_path / "m.dot")
    assert {("a", "b"), ("b", "a")} <= set(read_dot_edges(tmp_path / "m.dot"))


def test_report_two_roles(tmp_path):
    g, _ = generate_planted(PlantedRoleSpec(n_brokers=10, spokes_per_broker=0))
    cm = census_matrix(g, n_jobs=1)
    sw = sweep_k(cm.proportions, 2, 2, restarts=3, n_jobs=1)
    roles = extract_roles(sw.chosen, cm.proportions, cm, g)
    rep = role_report(roles, sw, {"seed": 0}, tmp_path / "r.json")
    assert len(rep["roles"]) == 2
    assert sum(r["proportion"] for r in rep["roles"]) == pytest.approx(1.0)
    first = (tmp_path / "r.json").read_bytes()
    role_report(roles, sw, {"seed": 0}, tmp_path / "r.json")
    assert (tmp_path / "r.json").read_bytes() == first
    assert json.loads(first)["separation_thresholds"]["superior"] == "> 0.7"
    write_membership_csv(roles, g, tmp_path / "m.csv")
    assert len((tmp_path / "m.csv").read_text().splitlines()) == len(cm) + 1


def test_misaligned_inputs_rejected():
    g, _ = generate_planted(PlantedRoleSpec(n_brokers=5))
    cm = census_matrix(g, n_jobs=1)
    c = kmeans(cm.proportions, 2)
    with pytest.raises(ValueError):
        extract_roles(c, cm.proportions[:-1], cm, g)


def test_purity():
    assert cluster_purity([0, 0, 1, 1], ["a", "a", "b", "b"]) == 1.0
    assert cluster_purity([0, 0, 0, 0], ["a", "a", "b", "b"]) == 0.5
    with pytest.raises(ValueError):
        cluster_purity([], [])
