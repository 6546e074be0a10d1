import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercops.errors import DomainError
from hypercops.generator import (ModelParams, blow_up, clique_expansion, complete_graph,
                                 connected_graphs, cycle_graph, derive_seed, derived_stats,
                                 make_rng, p_for_dhat, path_graph, petersen_graph,
                                 random_connected_hypergraph, random_tree, sample_gknp,
                                 unrank_colex)
from hypercops.hypercore import Hypergraph, distances_from, is_connected


def test_p_zero_and_one():
    assert sample_gknp(ModelParams(10, 3, 0.0, 1)).m == 0
    G = sample_gknp(ModelParams(4, 2, 1.0, 1))
    assert G.edges == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def test_mean_edge_count_within_three_sigma():
    # 10000 samples of G^3(20, 0.05): mean edge count near 0.05 * C(20, 3) = 57
    total = math.comb(20, 3)
    counts = [sample_gknp(ModelParams(20, 3, 0.05, derive_seed(7, i))).m for i in range(10000)]
    sd_of_mean = math.sqrt(total * 0.05 * 0.95 / 10000)
    assert abs(np.mean(counts) - 57) <= 3 * sd_of_mean


def test_large_model_uses_count_then_distinct_sets():
    G = sample_gknp(ModelParams.from_dhat(2000, 12, 90, 3))
    assert all(len(set(e)) == 12 for e in G.edges)
    expected = 90 * 2000 / (12 * 12)
    assert abs(G.m - expected) < 6 * math.sqrt(expected)


def test_sampling_is_deterministic():
    a = sample_gknp(ModelParams(30, 3, 0.02, 11))
    b = sample_gknp(ModelParams(30, 3, 0.02, 11))
    c = sample_gknp(ModelParams(30, 3, 0.02, 12))
    assert a.edge_array.tobytes() == b.edge_array.tobytes()
    assert a != c


def test_derived_stats_examples():
    st_ = derived_stats(ModelParams(10, 3, 0.1))
    assert st_.d_hat == pytest.approx(10.8, rel=1e-15)
    with mpmath.workdps(40):
        ed = float(9 * (1 - mpmath.mpf("0.9") ** 8))
    assert st_.expected_degree == pytest.approx(ed, rel=1e-15)
    assert st_.expected_degree == pytest.approx(5.1258, abs=1e-4)
    zero = derived_stats(ModelParams(10, 3, 0.0))
    assert zero.d_hat == 0 and zero.expected_degree == 0


def test_p_for_dhat_inverts_dhat():
    p = p_for_dhat(2000, 12, 90)
    assert derived_stats(ModelParams(2000, 12, p)).d_hat == pytest.approx(90, rel=1e-12)
    with pytest.raises(DomainError):
        p_for_dhat(10, 3, 1000)


def test_model_params_validation():
    with pytest.raises(DomainError):
        ModelParams(5, 6, 0.1)
    with pytest.raises(DomainError):
        ModelParams(5, 2, 1.5)
    with pytest.raises(DomainError):
        ModelParams(5, 2, 0.5, -1)


def test_derive_seed_is_stable_and_keyed():
    assert derive_seed(1, "a", 2) == derive_seed(1, "a", 2)
    assert derive_seed(1, "a", 2) != derive_seed(1, "a", 3)
    assert 0 <= derive_seed("x") < 2 ** 64
    assert make_rng(5).random() == make_rng(5).random()


def test_unrank_colex_enumerates_all_ksets():
    sets = unrank_colex(np.arange(math.comb(7, 3)), 7, 3)
    assert len({tuple(s) for s in sets.tolist()}) == 35
    assert all(len(set(s)) == 3 and max(s) < 7 for s in sets.tolist())


def test_blow_up_examples():
    H, blocks = blow_up(cycle_graph(4), 5)
    assert (H.n, H.m, H.k) == (20, 4, 10)
    assert blow_up(Hypergraph(2, 2, [(0, 1)]), 1)[0] == Hypergraph(2, 2, [(0, 1)])
    P, blocks = blow_up(path_graph(3), 2)
    assert (P.n, P.m, P.k) == (6, 2, 4)
    assert set(P.edges[0]) & set(P.edges[1]) == set(blocks[1])
    with pytest.raises(DomainError):
        blow_up(H, 2)


def test_clique_expansion_examples():
    assert clique_expansion(Hypergraph(4, 3, [(1, 2, 3)])).edges == ((1, 2), (1, 3), (2, 3))
    two = clique_expansion(Hypergraph(6, 3, [(1, 2, 3), (3, 4, 5)]))
    assert set(two.edges) == {(1, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 5)}
    C = cycle_graph(5)
    assert clique_expansion(C) == C


@given(st.integers(0, 2 ** 32), st.integers(3, 8), st.integers(2, 4), st.integers(1, 6))
@settings(max_examples=60)
def test_clique_expansion_adjacency_is_distance_one(seed, n, k, m):
    rng = np.random.default_rng(seed)
    k = min(k, n)
    edges = [rng.choice(n, size=k, replace=False) for _ in range(m)]
    G = Hypergraph(n, k, edges)
    E = set(clique_expansion(G).edges)
    for u in range(n):
        d = distances_from(G, [u])
        for v in range(u + 1, n):
            assert ((u, v) in E) == (d[v] == 1)


def test_named_graphs():
    assert cycle_graph(5).m == 5
    assert complete_graph(5).m == 10
    P = petersen_graph()
    assert P.m == 15 and all(len(P.incidence[v]) == 3 for v in range(10))


def test_random_tree_is_a_tree():
    rng = make_rng(3)
    for n in range(1, 13):
        T = random_tree(n, rng)
        assert T.m == max(0, n - 1) and is_connected(T)


def test_random_connected_hypergraph():
    G = random_connected_hypergraph(make_rng(1), 8, 3, 5)
    assert is_connected(G) and G.m == 5
    with pytest.raises(DomainError):
        random_connected_hypergraph(make_rng(1), 8, 2, 3)


def test_connected_graph_counts():
    # connected graphs up to isomorphism on 1..6 vertices
    assert [len(connected_graphs(n)) for n in range(1, 7)] == [1, 1, 2, 6, 21, 112]
