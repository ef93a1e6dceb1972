import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochsub.domains import (
    IntersectionDomain,
    KnapsackDomain,
    MatchingDomain,
    MatroidDomain,
    PartitionMatroid,
    SetPackingDomain,
    UniformMatroid,
    k_exchange_certificate,
)
from stochsub.exchange import (
    ExchangeError,
    activation_distribution,
    build_knapsack_heavy_map,
    build_knapsack_light_map,
    build_matroid_rota_map,
    build_path_exchange_map,
    build_path_multiset,
    build_trivial_k_exchange_map,
    certify_uniformity,
    compose_maps,
    exchange_graph,
    n_paths,
    path_uniformity,
    table_uniformity,
    verify_gain_bound,
)
from stochsub.objectives import CoverageObjective, LinearObjective


def random_pair(rng, D):
    fam = D.enumerate_feasible()
    return fam[rng.integers(len(fam))], fam[rng.integers(len(fam))]


def random_matching(rng, n_vertices=7, prob=0.5):
    edges = [e for e in itertools.combinations(range(n_vertices), 2) if rng.random() < prob] or [(0, 1)]
    return MatchingDomain(edges)


def closed_form_trivial_beta(cert, p):
    """Each x leaves iff some y with x in T_y is active: 1 - (1-p)^(number of such y)."""
    out = {}
    for x in cert.removed:
        c = sum(x in T for T in cert.collection.values())
        out[x] = 1 - (1 - p) ** c
    return out


# --- trivial map ---------------------------------------------------------


def test_trivial_shared_removal():
    # y1=(1,2), y2=(1,3) both meet x1=(0,1) only
    D = MatchingDomain([(0, 1), (1, 2), (1, 3)])
    m = build_trivial_k_exchange_map(k_exchange_certificate(D, {0}, {1}))
    rep = certify_uniformity(m, 0.5)
    assert rep.alpha_hat == 0.5 and rep.beta_hat == 0.5
    # two added elements both hitting one removed element
    D = SetPackingDomain([{0, 1}, {0, 2}, {1, 3}])
    m = build_trivial_k_exchange_map(k_exchange_certificate(D, {0}, {1, 2}))
    rep = certify_uniformity(m, 0.5)
    assert rep.alpha_hat == pytest.approx(0.5)
    assert rep.beta_hat == pytest.approx(0.75) and rep.beta_hat <= 0.5 * 2
    assert rep.violations == 0


def test_trivial_empty_difference():
    D = MatchingDomain([(0, 1), (2, 3)])
    m = build_trivial_k_exchange_map(k_exchange_certificate(D, {0}, {0}))
    assert m.outcomes(frozenset()) == [(1.0, frozenset(), frozenset())]
    rep = certify_uniformity(m, 0.5)
    assert rep.vacuous and rep.alpha_hat == 1.0 and rep.beta_hat == 0.0


def test_trivial_disjoint_singletons():
    D = MatchingDomain([(0, 1), (2, 3), (1, 2), (3, 4)])
    cert = k_exchange_certificate(D, {0, 1}, {2, 3})
    assert sorted(map(len, cert.collection.values())) == [1, 2]
    D = MatchingDomain([(0, 1), (2, 3), (1, 5), (3, 6)])
    m = build_trivial_k_exchange_map(k_exchange_certificate(D, {0, 1}, {2, 3}))
    rep = certify_uniformity(m, 0.5)
    assert (rep.alpha_hat, rep.beta_hat) == (0.5, 0.5)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32), p=st.sampled_from([0.3, 0.5, 0.9]))
def test_trivial_map_matches_closed_form(seed, p):
    rng = np.random.default_rng(seed)
    D = random_matching(rng)
    X, Y = random_pair(rng, D)
    cert = k_exchange_certificate(D, X, Y)
    rep = certify_uniformity(build_trivial_k_exchange_map(cert), p)
    assert rep.violations == 0
    if not rep.vacuous:
        assert rep.alpha_hat == pytest.approx(p, abs=1e-12)
    want = closed_form_trivial_beta(cert, p)
    for x, b in rep.beta_by.items():
        assert b == pytest.approx(want[x], abs=1e-12)
    assert rep.beta_hat <= 2 * p + 1e-12


# --- path multisets and path map --------------------------------------------


def test_n_paths():
    assert n_paths(2, 2) == 2 and n_paths(3, 4) == 12


def counts(pm):
    c = {}
    for verts, start in pm.paths:
        for j, v in enumerate(verts):
            c[v, start + j] = c.get((v, start + j), 0) + 1
    return c


def test_single_edge_graph_counts():
    D = MatchingDomain([(0, 1), (1, 2)])
    pm = build_path_multiset(k_exchange_certificate(D, {0}, {1}), 1)
    assert counts(pm) == {(v, i): 2 for v in (0, 1) for i in (1, 2)}
    assert pm.verify()


def test_three_vertex_path_counts():
    D = MatchingDomain([(0, 1), (1, 2), (2, 3)])
    cert = k_exchange_certificate(D, {0, 2}, {1})
    assert exchange_graph(cert) == {0: (1,), 1: (0, 2), 2: (1,)}
    pm = build_path_multiset(cert, 1)
    assert set(counts(pm).values()) == {2} and len(counts(pm)) == 6


def test_empty_exchange_graph():
    D = MatchingDomain([(0, 1), (2, 3)])
    pm = build_path_multiset(k_exchange_certificate(D, {0}, {0}), 2)
    assert pm.paths == [] and pm.verify()


def test_path_map_h1_equals_p():
    D = MatchingDomain([(0, 1), (1, 2), (2, 3), (3, 0), (3, 4)])
    cert = k_exchange_certificate(D, {0, 2}, {1, 3})
    for p in (0.3, 0.5, 1.0):
        m = build_path_exchange_map(cert, build_path_multiset(cert, 1), p)
        rep = certify_uniformity(m, p)
        assert rep.alpha_hat == pytest.approx(p, abs=1e-9)
        assert rep.violations == 0


def test_path_map_h2_matching():
    D = MatchingDomain([(0, 1), (1, 2), (2, 3), (3, 0), (3, 4)])
    cert = k_exchange_certificate(D, {0, 2}, {1, 3})
    m = build_path_exchange_map(cert, build_path_multiset(cert, 2), 0.5)
    rep = certify_uniformity(m, 0.5)
    assert rep.alpha_hat >= 0.125 - 1e-9
    assert rep.beta_hat <= 0.1875 + 1e-9
    assert m.target_uniformity() == (0.125, 0.1875)


def test_path_map_exact_agrees_with_sampling():
    D = MatchingDomain([(0, 1), (1, 2), (2, 3), (3, 0), (3, 4)])
    cert = k_exchange_certificate(D, {0, 2}, {1, 3})
    m = build_path_exchange_map(cert, build_path_multiset(cert, 2), 0.7)
    exact = certify_uniformity(m, 0.7)
    mc = certify_uniformity(m, 0.7, "monte-carlo", samples=40_000, rng=3)
    for y in exact.alpha_by:
        q = exact.alpha_by[y]
        assert abs(mc.alpha_by[y] - q) <= 4 * np.sqrt(q * (1 - q) / 40_000) + 1e-3
    for x in exact.beta_by:
        q = exact.beta_by[x]
        assert abs(mc.beta_by[x] - q) <= 4 * np.sqrt(q * (1 - q) / 40_000) + 1e-3


def test_short_cycle_uses_integer_program():
    D = MatchingDomain([(0, 1), (1, 2), (2, 3), (3, 0)])
    cert = k_exchange_certificate(D, {0, 2}, {1, 3})
    pm = build_path_multiset(cert, 3)
    assert pm.method == "integer-program" and pm.verify()
    rep = certify_uniformity(build_path_exchange_map(cert, pm, 0.5), 0.5)
    a, b = path_uniformity(0.5, 3, 2)
    assert rep.alpha_hat >= a - 1e-9 and rep.beta_hat <= b + 1e-9


def test_table_uniformity_formula():
    a, b = table_uniformity(0.5, 0.5, 2)
    assert a == pytest.approx(0.25 * 0.25 / 3) and b == pytest.approx(a * 1.5)


# --- matroid maps ------------------------------------------------------------


@pytest.mark.parametrize("p", [0.3, 0.5, 0.9])
def test_rota_uniform_bases(p):
    m = build_matroid_rota_map(UniformMatroid(6, 3), {0, 1, 2}, {3, 4, 5}, p, bases=True)
    rep = certify_uniformity(m, p)
    assert rep.alpha_hat == pytest.approx(p) and rep.beta_hat == pytest.approx(p)
    assert rep.violations == 0


def test_rota_identical_sets():
    m = build_matroid_rota_map(UniformMatroid(4, 2), {0, 1}, {0, 1}, 0.5)
    rep = certify_uniformity(m, 0.5)
    assert rep.beta_hat == 0.0 and rep.vacuous


def test_rota_partition_partners():
    M = PartitionMatroid([[0, 1], [2, 3], [4, 5]], [1, 1, 1])
    partner = {1: 0, 3: 2, 5: 4}
    m = build_matroid_rota_map(M, {0, 2, 4}, {1, 3, 5}, 0.5, bases=True)
    for R, choices in m.family.items():
        assert choices == [(1.0, frozenset(partner[y] for y in R))]
    rep = certify_uniformity(m, 0.5)
    assert rep.alpha_hat == 0.5 and rep.beta_hat == 0.5


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32), p=st.sampled_from([0.3, 0.5, 0.9]), bases=st.booleans())
def test_rota_random_partition(seed, p, bases):
    rng = np.random.default_rng(seed)
    lab = rng.integers(3, size=8)
    M = PartitionMatroid([np.flatnonzero(lab == b) for b in range(3)], [1, 2, 2], n=8)
    D = MatroidDomain(M)
    fam = D.enumerate_feasible()
    if bases:
        fam = [X for X in fam if M.is_base(X)]
    X, Y = fam[rng.integers(len(fam))], fam[rng.integers(len(fam))]
    rep = certify_uniformity(build_matroid_rota_map(M, X, Y, p, bases=bases), p)
    assert rep.violations == 0
    if not rep.vacuous:
        assert rep.alpha_hat == pytest.approx(p)
    assert rep.beta_hat <= p + 1e-9


def test_rota_rejects_dependent_input():
    with pytest.raises(ExchangeError):
        build_matroid_rota_map(UniformMatroid(4, 1), {0, 1}, {2}, 0.5)


def test_compose_single_map_is_identity():
    m = build_matroid_rota_map(UniformMatroid(4, 2), {0, 1}, {2, 3}, 0.5)
    assert compose_maps([m]) is m


def test_compose_two_partition_maps():
    M1 = PartitionMatroid([[0, 1, 2], [3, 4, 5]], [1, 2])
    M2 = PartitionMatroid([[0, 1], [3, 4], [5]], [1, 1, 1], n=6)
    X, Y = {0, 3}, {1, 4, 5}
    maps = [build_matroid_rota_map(M, X, Y, 0.5) for M in (M1, M2)]
    betas = [certify_uniformity(m, 0.5).beta_hat for m in maps]
    rep = certify_uniformity(compose_maps(maps), 0.5)
    assert rep.violations == 0
    assert rep.alpha_hat == 0.5 and rep.beta_hat <= sum(betas) + 1e-12 <= 1.0 + 1e-12


def test_compose_three_uniform_matroids():
    mats = [UniformMatroid(8, 3), UniformMatroid(8, 4), UniformMatroid(8, 3)]
    X, Y = {0, 1, 2}, {3, 4, 5}
    maps = [build_matroid_rota_map(M, X, Y, 0.4) for M in mats]
    rep = certify_uniformity(compose_maps(maps, IntersectionDomain(mats)), 0.4)
    assert rep.violations == 0 and rep.beta_hat <= 3 * 0.4 + 1e-12


def test_compose_rejects_mismatched_pairs():
    a = build_matroid_rota_map(UniformMatroid(4, 2), {0, 1}, {2, 3}, 0.5)
    b = build_matroid_rota_map(UniformMatroid(4, 2), {0, 1}, {1, 2}, 0.5)
    with pytest.raises(ExchangeError):
        compose_maps([a, b])


# --- knapsack maps ------------------------------------------------------------


def test_heavy_map_examples():
    K = KnapsackDomain([0.5, 0.5, 0.4, 0.45])
    rep = certify_uniformity(build_knapsack_heavy_map(K, {0, 1}, {2, 3}, 2), 0.5)
    assert rep.beta_hat == pytest.approx(0.75, abs=1e-9) and rep.alpha_hat == 0.5
    rep = certify_uniformity(build_knapsack_heavy_map(K, {0, 1}, {0, 1}, 2), 0.5)
    assert rep.beta_hat == 0.0
    rep = certify_uniformity(build_knapsack_heavy_map(K, {0, 1}, {2, 3}, 2), 1.0)
    assert rep.alpha_hat == 1.0 and rep.beta_hat == 1.0


@pytest.mark.parametrize("p", [0.3, 0.5, 0.9])
def test_heavy_map_closed_form(p):
    K = KnapsackDomain([0.4, 0.4, 0.5, 0.45, 0.35])
    for X, Y in [({0, 1}, {2, 3}), ({0}, {2, 4}), ({0, 1}, {1, 4}), ({2}, {3})]:
        rep = certify_uniformity(build_knapsack_heavy_map(K, X, Y, 2), p)
        assert rep.beta_hat == pytest.approx(1 - (1 - p) ** len(set(Y) - set(X)), abs=1e-9)


def test_heavy_map_cardinality_bound():
    K = KnapsackDomain([0.1] * 4)
    with pytest.raises(ExchangeError):
        build_knapsack_heavy_map(K, {0, 1, 2}, {3}, 2)


def test_light_map_no_activation_no_removal():
    K = KnapsackDomain([0.2] * 7)
    m = build_knapsack_light_map(K, {0, 1, 2, 3}, {4, 5, 6})
    assert m.sample(frozenset(), 0) == (frozenset(), frozenset())


def test_light_map_monte_carlo():
    K = KnapsackDomain([0.2] * 7)
    m = build_knapsack_light_map(K, {0, 1, 2, 3}, {4, 5, 6})
    rep = certify_uniformity(m, 0.5, "monte-carlo", samples=100_000, rng=1)
    assert rep.violations == 0
    assert rep.beta_hat <= 0.3 + rep.radius
    assert abs(rep.alpha_hat - 0.5) <= rep.radius


def test_light_map_rejects_heavy_items():
    with pytest.raises(ExchangeError):
        build_knapsack_light_map(KnapsackDomain([0.5, 0.2]), {0}, {1})


# --- certification and gain bounds ----------------------------------------------


def test_activation_distribution_sums_to_one():
    dist = activation_distribution([1, 4, 6], 0.3)
    assert len(dist) == 8 and sum(w for _, w in dist) == pytest.approx(1.0)


def test_small_p_drives_alpha_to_zero():
    D = MatchingDomain([(0, 1), (1, 2)])
    m = build_trivial_k_exchange_map(k_exchange_certificate(D, {0}, {1}))
    assert certify_uniformity(m, 1e-6).alpha_hat < 1e-5


def test_gain_bound_examples():
    D = MatchingDomain([(0, 1), (2, 3), (1, 5), (3, 6)])
    m = build_trivial_k_exchange_map(k_exchange_certificate(D, {0, 1}, {2, 3}))
    assert verify_gain_bound(m, LinearObjective([3, 1, 4, 2]), "linear", 0.5) >= -1e-9
    assert verify_gain_bound(m, LinearObjective([0, 0, 0, 0]), "linear", 0.5) == 0.0
    M = PartitionMatroid([[0, 1], [2, 3]], [1, 1])
    rm = build_matroid_rota_map(M, {0, 2}, {1, 3}, 0.5)
    cov = CoverageObjective([[0, 1], [1, 2], [2], [0, 3]])
    assert verify_gain_bound(rm, cov, "submodular", 0.5) >= -1e-9


def test_gain_bound_needs_linear_objective_for_linear_kind():
    D = MatchingDomain([(0, 1), (1, 2)])
    m = build_trivial_k_exchange_map(k_exchange_certificate(D, {0}, {1}))
    with pytest.raises(ValueError):
        verify_gain_bound(m, CoverageObjective([[0], [0]]), "linear", 0.5)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32), p=st.sampled_from([0.3, 0.5, 0.9]))
def test_gain_bounds_on_random_matchings(seed, p):
    rng = np.random.default_rng(seed)
    D = random_matching(rng)
    X, Y = random_pair(rng, D)
    cert = k_exchange_certificate(D, X, Y)
    lin = LinearObjective(rng.uniform(0, 5, D.n))
    cov = CoverageObjective([np.flatnonzero(rng.random(6) < 0.4) for _ in range(D.n)])
    for m in (build_trivial_k_exchange_map(cert), build_path_exchange_map(cert, build_path_multiset(cert, 1), p)):
        assert verify_gain_bound(m, lin, "linear", p) >= -1e-9
        assert verify_gain_bound(m, cov, "submodular", p) >= -1e-9
