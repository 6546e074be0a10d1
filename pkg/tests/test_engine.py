import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercops.engine import (GameState, RobberPolicy, format_transcript, greedy_robber_move,
                              play, replay_transcript, scripted_robbers)
from hypercops.errors import DomainError, ProtocolError
from hypercops.generator import make_rng, path_graph, random_connected_hypergraph
from hypercops.hypercore import Hypergraph
from hypercops.strategy import CopStrategy, SynthesisConfig, check_cop_set, synthesize


def _strategy(G, mode, j, q=1.0, seed=0):
    res = synthesize(G, SynthesisConfig(mode, j, q), seed)
    assert res.ok
    return res.strategy


def test_single_edge_one_cop_captures_in_round_one():
    G = Hypergraph(3, 3, [(0, 1, 2)])
    assignments, failures = check_cop_set(G, "vertex", 1, [2])
    s = CopStrategy(G, "vertex", 1, (2,), assignments, 1.0, 1)
    for v in (0, 1):
        out = play(G, s, RobberPolicy("stay", start=v))
        assert out.captured and out.capture_round == 1
    out = play(G, s, RobberPolicy("stay", start=2))
    assert out.captured and out.capture_round == 0


def test_greedy_without_cops_stays_put():
    G = path_graph(4)
    assert greedy_robber_move(G, GameState((), 2, 1, "robber-to-move")) in (1, 2, 3)
    # all options are equally far from no cop: ties go to the smallest legal id
    assert greedy_robber_move(G, GameState((), 2, 1, "robber-to-move")) == 1


def test_greedy_flees_along_a_path():
    G = path_graph(4)
    assert greedy_robber_move(G, GameState((0,), 2, 1, "robber-to-move")) == 3


def test_illegal_script_raises():
    G = path_graph(4)
    s = CopStrategy(G, "vertex", 1, (0,), {}, 0.25, 1)
    with pytest.raises(ProtocolError):
        play(G, s, RobberPolicy("scripted", script=(3, 0)), max_rounds=5)
    with pytest.raises(DomainError):
        RobberPolicy("teleport")


@st.composite
def connected_small(draw):
    seed = draw(st.integers(0, 2 ** 32))
    k = draw(st.integers(2, 3))
    n = draw(st.integers(k + 1, 10))
    m_min = math.ceil((n - 1) / (k - 1))
    m = draw(st.integers(m_min, min(math.comb(n, k), m_min + 6)))
    return random_connected_hypergraph(make_rng(seed), n, k, m)


@given(connected_small(), st.sampled_from(["vertex", "edge"]), st.integers(1, 2),
       st.floats(0.3, 1.0), st.integers(0, 1000))
@settings(max_examples=60)
def test_capture_schedule_and_legal_transcripts(G, mode, j, q, seed):
    res = synthesize(G, SynthesisConfig(mode, j, q, max_retries=4), seed)
    if not res.ok:
        return
    s = res.strategy
    deadline = j if mode == "vertex" else j + 1
    robbers = [RobberPolicy("greedy", seed=seed), RobberPolicy("random", seed=seed)]
    robbers += [RobberPolicy("stay", start=v) for v in range(G.n)]
    robbers += scripted_robbers(G, s, 6, seed)
    for r in robbers:
        out = play(G, s, r)
        assert out.captured, (r, format_transcript(out))
        assert out.capture_round <= deadline
        assert replay_transcript(G, out)


def test_games_are_deterministic():
    G = random_connected_hypergraph(make_rng(2), 10, 3, 7)
    s = _strategy(G, "edge", 1, 0.7, 3)
    for kind in ("greedy", "random"):
        a = play(G, s, RobberPolicy(kind, seed=5))
        b = play(G, s, RobberPolicy(kind, seed=5))
        assert format_transcript(a) == format_transcript(b)


def test_transcript_format():
    G = path_graph(3)
    s = _strategy(G, "vertex", 1)
    out = play(G, s, RobberPolicy("greedy"))
    text = format_transcript(out)
    assert text.splitlines()[0] == "round,phase,piece,from,to"
    assert "place-robber" in text
