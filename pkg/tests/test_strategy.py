import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercops.bounds import classify_regime
from hypercops.errors import DomainError, FormatError
from hypercops.generator import (ModelParams, blow_up, complete_graph, cycle_graph,
                                 random_connected_hypergraph, make_rng, sample_gknp)
from hypercops.hypercore import Hypergraph, average_vertex_degree, is_connected
from hypercops.strategy import (OffRegimeWarning, SynthesisConfig, check_cop_set,
                                default_density, format_strategy, parse_strategy,
                                strategy_size, synthesize, verify_strategy)


def test_density_regime_d_example():
    # d = 100 sits outside (d) at j = 2 for k = 10; the formula still applies
    with pytest.warns(OffRegimeWarning):
        dens = default_density(10 ** 4, 10, 100.0, 2, "vertex", regime="d")
    assert dens.q == pytest.approx(10 * 100.0 ** -2 * math.log(10 ** 4))
    assert dens.q == pytest.approx(0.00921, abs=1e-5)


def test_density_regime_b_example():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OffRegimeWarning)
        dens = default_density(10 ** 4, 100, 10.0, 1, "edge", regime="b")
    assert dens.q == pytest.approx(10 * math.log(10 ** 4) / (100 * 10))
    assert dens.q == pytest.approx(0.0921, abs=1e-4)


def test_density_clamps_to_one():
    with pytest.warns(OffRegimeWarning):
        dens = default_density(2000, 12, 83.0, 1, "vertex", regime="d", xi=0.14)
    assert dens.q == 1.0 and dens.clamped and dens.raw > 1


def test_off_regime_warns_and_prefers_more_cops():
    with pytest.warns(OffRegimeWarning):
        dens = default_density(2000, 12, 83.0, 2, "vertex")
    assert not dens.in_regime
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OffRegimeWarning)
        other = {r: default_density(2000, 12, 83.0, 2, "vertex", regime=r).raw for r in ("a", "d")}
    assert dens.raw == max(other.values())


def test_density_validation():
    with pytest.raises(DomainError):
        default_density(100, 4, 10.0, 1, "vertex", regime="b")
    with pytest.raises(DomainError):
        default_density(100, 4, 10.0, 1, "vertex", regime="a")
    with pytest.raises(DomainError):
        SynthesisConfig("edge", 1, 0.0)


def test_single_edge_one_cop_suffices():
    G = Hypergraph(3, 3, [(0, 1, 2)])
    assignments, failures = check_cop_set(G, "vertex", 1, [2])
    assert not failures
    assert all(a == {v: 2} for v, a in assignments.items())


def test_blow_up_edge_mode_two_opposite_cops():
    H, blocks = blow_up(cycle_graph(4), 5)
    # edge i joins blocks i and i+1; edges 0 and 2 are opposite
    cops = [blocks[0][0], blocks[2][0]]
    assignments, failures = check_cop_set(H, "edge", 1, cops)
    assert not failures
    for v, a in assignments.items():
        assert len(a) <= 2 and set(a.values()) <= set(cops)


def test_empty_cop_set_reports_full_deficiency():
    G = complete_graph(4)
    _, failures = check_cop_set(G, "vertex", 2, [])
    assert failures and all(f.deficiency == f.targets == 4 for f in failures)


def test_failure_hall_set_is_a_genuine_violation():
    # star with 3 leaves, radius 2: every start needs 4 distinct cops
    G = Hypergraph(4, 2, [(0, 1), (0, 2), (0, 3)])
    _, failures = check_cop_set(G, "vertex", 2, [0, 1])
    assert failures
    for f in failures:
        assert len(f.hall_neighbourhood) < len(f.hall_set)
        assert f.deficiency == len(f.hall_set) - len(f.hall_neighbourhood)


def test_strategy_size():
    assert strategy_size(None) == 0
    G = complete_graph(5)
    res = synthesize(G, SynthesisConfig("vertex", 1, 0.5), 3)
    assert res.ok and strategy_size(res.strategy) == len(res.strategy.cop_starts)


def test_cop_count_concentrates():
    G = complete_graph(200)
    n, q = 200, 0.1
    sizes = []
    for s in range(1000):
        res = synthesize(G, SynthesisConfig("vertex", 1, q, max_retries=1), s)
        cops = res.strategy.cop_starts if res.ok else res.failure.cop_starts
        sizes.append(len(cops))
    assert abs(np.mean(sizes) - n * q) <= 3 * math.sqrt(n * q)
    assert abs(np.mean(sizes) - n * q) <= 3 * math.sqrt(n * q * (1 - q) / 1000)


def test_regime_b_strategy_within_bound():
    # seed 1 gives a connected sample with d inside (b) at j = 1
    G = sample_gknp(ModelParams.from_dhat(4000, 6, 50, 1))
    assert is_connected(G)
    d = float(average_vertex_degree(G))
    rows = [r for r in classify_regime(G.n, G.k, d) if r.regime == "b" and r.j == 1]
    assert rows, d
    dens = default_density(G.n, G.k, d, 1, "edge", "b")
    res = synthesize(G, SynthesisConfig("edge", 1, dens.q, regime="b"), 2)
    assert res.ok
    assert strategy_size(res.strategy) <= rows[0].bound
    assert not verify_strategy(G, res.strategy)


@st.composite
def connected_small(draw):
    seed = draw(st.integers(0, 2 ** 32))
    k = draw(st.integers(2, 3))
    n = draw(st.integers(k + 1, 10))
    m_min = math.ceil((n - 1) / (k - 1))
    m = draw(st.integers(m_min, min(math.comb(n, k), m_min + 6)))
    return random_connected_hypergraph(make_rng(seed), n, k, m)


@given(connected_small(), st.sampled_from(["vertex", "edge"]), st.integers(1, 2),
       st.floats(0.2, 1.0), st.integers(0, 1000))
@settings(max_examples=80)
def test_successful_synthesis_is_structurally_sound(G, mode, j, q, seed):
    res = synthesize(G, SynthesisConfig(mode, j, q, max_retries=3), seed)
    if res.ok:
        assert verify_strategy(G, res.strategy) == []
    else:
        assert res.failure.failures
        for f in res.failure.failures:
            if f.hall_set:
                assert len(f.hall_neighbourhood) < len(f.hall_set)


@given(connected_small(), st.sampled_from(["vertex", "edge"]), st.integers(1, 2),
       st.integers(0, 1000))
@settings(max_examples=80)
def test_adding_cops_preserves_success(G, mode, j, seed):
    rng = make_rng(seed)
    cops = np.flatnonzero(rng.random(G.n) < 0.5).tolist()
    _, failures = check_cop_set(G, mode, j, cops)
    if failures:
        return
    extra = cops + np.flatnonzero(rng.random(G.n) < 0.3).tolist()
    _, more = check_cop_set(G, mode, j, extra)
    assert not more


def test_strategy_file_roundtrip():
    G = random_connected_hypergraph(make_rng(4), 9, 3, 6)
    res = synthesize(G, SynthesisConfig("edge", 1, 0.6), 1)
    assert res.ok
    text = format_strategy(res.strategy)
    back = parse_strategy(text, G)
    assert back.assignments == res.strategy.assignments
    assert back.cop_starts == res.strategy.cop_starts
    assert format_strategy(back) == text
    with pytest.raises(FormatError):
        parse_strategy("mode edge\nj 1\nn 9\n", G)
    with pytest.raises(FormatError, match="line 5"):
        parse_strategy("mode edge\nj 1\nn 9\ncops 1\n0 0 1\n", G)


def test_synthesis_is_deterministic():
    G = sample_gknp(ModelParams.from_dhat(300, 3, 20, 2))
    cfg = SynthesisConfig("edge", 1, 0.5)
    a, b = synthesize(G, cfg, 9), synthesize(G, cfg, 9)
    assert a.attempts == b.attempts
    assert (a.strategy.cop_starts if a.ok else a.failure.cop_starts) == \
        (b.strategy.cop_starts if b.ok else b.failure.cop_starts)
