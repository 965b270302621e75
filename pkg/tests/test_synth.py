import numpy as np
import pytest

from triadroles._random import derive_rng
from triadroles.census import AlterDyad, EgoDyad, census_matrix, classify_triad, ego_census
from triadroles.pipeline import RoleDiscovery
from triadroles.powerlaw import fit_power_law
from triadroles.roles import cluster_purity
from triadroles.synth import (BROKER, CLIQUE, SPOKE, PlantedRoleSpec, generate_planted, generate_powerlaw,
                              read_ground_truth, rewire_edges, write_ground_truth)

M = EgoDyad.MUTUAL


def test_broker_between_two_cliques():
    g, _ = generate_planted(PlantedRoleSpec(n_brokers=1, groups=2, clique_size=4, spokes_per_broker=0))
    c = ego_census(g, g.node_id("b0"))
    allowed = {classify_triad(M, M, AlterDyad.NULL), classify_triad(M, M, AlterDyad.MUTUAL)}
    assert set(np.flatnonzero(c.proportions).tolist()) == allowed
    # 2 * C(4,2) within-clique pairs, 4 * 4 across
    assert c.proportions[classify_triad(M, M, AlterDyad.MUTUAL)] == pytest.approx(12 / 28)


def test_pure_clique_member():
    g, _ = generate_planted(PlantedRoleSpec(n_brokers=1, extra_cliques=1))
    c = ego_census(g, g.node_id("q0m0"))
    assert c.proportions[classify_triad(M, M, AlterDyad.MUTUAL)] == 1.0


def test_node_count_and_truth():
    spec = PlantedRoleSpec(n_brokers=7, groups=2, clique_size=5, spokes_per_broker=2, extra_cliques=3)
    g, truth = generate_planted(spec)
    assert g.node_count == 7 * (1 + 2 * 5 + 2) + 3 * 5 == len(truth)
    roles = list(truth.values())
    assert roles.count(BROKER) == 7 and roles.count(SPOKE) == 14 and roles.count(CLIQUE) == 85


def test_spec_validation():
    with pytest.raises(ValueError):
        PlantedRoleSpec(clique_size=2)
    with pytest.raises(ValueError):
        PlantedRoleSpec(spokes_per_broker=3)
    with pytest.raises(ValueError):
        PlantedRoleSpec(rewire=1.0)


def test_rewire_preserves_degrees():
    g, _ = generate_planted(PlantedRoleSpec(n_brokers=20))
    edges = g.edges()
    new = rewire_edges(edges, 0.3, derive_rng(0, "t"))
    assert len(set(new)) == len(new) == len(edges)
    assert all(u != v for u, v in new)
    from collections import Counter

    assert Counter(u for u, _ in new) == Counter(u for u, _ in edges)
    assert Counter(v for _, v in new) == Counter(v for _, v in edges)
    changed = 1 - len(set(new) & set(edges)) / len(edges)
    assert 0.2 < changed < 0.4


def test_planted_same_seed_same_graph():
    a = generate_planted(PlantedRoleSpec(n_brokers=10, rewire=0.1, seed=3))[0]
    b = generate_planted(PlantedRoleSpec(n_brokers=10, rewire=0.1, seed=3))[0]
    c = generate_planted(PlantedRoleSpec(n_brokers=10, rewire=0.1, seed=4))[0]
    assert a == b and a != c


def test_ground_truth_round_trip(tmp_path):
    _, truth = generate_planted(PlantedRoleSpec(n_brokers=3))
    write_ground_truth(truth, tmp_path / "t.csv")
    assert read_ground_truth(tmp_path / "t.csv") == truth


def test_purity_degrades_with_noise():
    means = []
    for eps in (0.0, 0.02, 0.05, 0.1):
        vals = []
        for seed in range(5):
            g, truth = generate_planted(PlantedRoleSpec(rewire=eps, seed=seed))
            est = RoleDiscovery(phi=1.0, restarts=10, k_max=5, random_state=seed, n_jobs=1).fit(g)
            vals.append(cluster_purity(est.labels_, [truth[e] for e in est.ego_ids_]))
        means.append(np.mean(vals))
    assert means[0] == 1.0
    assert all(b <= a + 0.01 for a, b in zip(means, means[1:]))


def test_powerlaw_graph():
    g = generate_powerlaw(50_000, 2.5, seed=0)
    fit = fit_power_law(g.out_degrees())
    assert abs(fit.alpha - 2.5) <= 0.1
    assert generate_powerlaw(500, 2.5, seed=1) == generate_powerlaw(500, 2.5, seed=1)


def test_powerlaw_stub_totals_match():
    g = generate_powerlaw(1000, 2.2, seed=2)
    assert g.in_degrees().sum() == g.out_degrees().sum() == g.edge_count
    with pytest.raises(ValueError):
        generate_powerlaw(1000, 1.0)
