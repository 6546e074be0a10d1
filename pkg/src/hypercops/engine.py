"""Playing the game: cops place, the robber places, then cops and robber
alternate with cops moving first.  The robber is caught as soon as it shares
a vertex with a cop, whichever side moved last.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, ProtocolError
from .generator import derive_seed, make_rng
from .hypercore import UNREACHABLE, Hypergraph, distances_from, legal_moves
from .strategy import CopStrategy

PHASES = ("cops-to-place", "robber-to-place", "cops-to-move", "robber-to-move", "captured")
POLICY_KINDS = ("greedy", "random", "scripted", "stay")


@dataclass(frozen=True)
class GameState:
    cop_positions: tuple[int, ...]
    robber_position: int | None
    round: int
    phase: str

    @property
    def captured(self) -> bool:
        return self.phase == "captured"


@dataclass(frozen=True)
class RobberPolicy:
    kind: str
    seed: int = 0
    script: tuple[int, ...] = ()
    start: int | None = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise DomainError(f"robber policy must be one of {POLICY_KINDS}, got {self.kind!r}")
        if self.kind == "scripted" and not self.script:
            raise DomainError("a scripted robber needs a non-empty script")


@dataclass
class Outcome:
    captured: bool
    capture_round: int | None
    robber_start: int
    rounds_played: int
    transcript: list[tuple[int, str, str, int | None, int]] = field(default_factory=list)
    final: GameState | None = None


def _min_cop_distance(G: Hypergraph, cops) -> np.ndarray:
    if not cops:
        return np.full(G.n, UNREACHABLE, dtype=np.int32)
    return distances_from(G, cops).dist


def greedy_robber_move(G: Hypergraph, state: GameState) -> int:
    """Legal move maximising the distance to the nearest cop; ties to the smallest id.

    Before placement every vertex is a candidate.
    """
    dist = _min_cop_distance(G, state.cop_positions)
    if state.robber_position is None:
        options = np.arange(G.n)
    else:
        options = G.neighbours[state.robber_position]
    vals = dist[options]
    return int(options[np.flatnonzero(vals == vals.max())[0]])


class _Robber:
    def __init__(self, G: Hypergraph, policy: RobberPolicy):
        self.G = G
        self.policy = policy
        self.rng = make_rng(derive_seed(policy.seed, "robber"))
        self.step = 0

    def place(self, state: GameState) -> int:
        p = self.policy
        if p.kind == "scripted":
            return p.script[0]
        if p.start is not None:
            return p.start
        if p.kind == "random" or p.kind == "stay":
            return int(self.rng.integers(self.G.n))
        return greedy_robber_move(self.G, state)

    def move(self, state: GameState) -> int:
        p = self.policy
        self.step += 1
        if p.kind == "stay":
            return state.robber_position
        if p.kind == "scripted":
            return p.script[self.step] if self.step < len(p.script) else state.robber_position
        if p.kind == "random":
            nb = self.G.neighbours[state.robber_position]
            return int(nb[self.rng.integers(nb.size)])
        return greedy_robber_move(self.G, state)


def _check_move(G, a, b, who, rnd):
    if not 0 <= b < G.n or b not in G.neighbours[a]:
        raise ProtocolError(f"{who} made an illegal move {a} -> {b} in round {rnd}")


def _placement(G: Hypergraph, s: CopStrategy):
    """Cop names and placement records, cached on the strategy."""
    if "placement" not in s._cache:
        for c in s.cop_starts:
            if not 0 <= c < G.n:
                raise ProtocolError(f"cop start {c} is not a vertex")
        names = {c: f"cop{i}" for i, c in enumerate(s.cop_starts)}
        s._cache["placement"] = (names, tuple((0, "place-cops", names[c], None, c)
                                              for c in s.cop_starts))
    return s._cache["placement"]


def play(G: Hypergraph, s: CopStrategy, robber: RobberPolicy, max_rounds: int | None = None) -> Outcome:
    """One game of the strategy against a robber policy.

    Cops assigned a target walk their itinerary and then wait.  From round
    j + 1 on, a cop that can reach the robber in one move does so,
    preferring in edge mode the cop whose assigned edge holds the robber.
    """
    if max_rounds is None:
        max_rounds = s.j + 2
    cops = list(s.cop_starts)
    names, placed = _placement(G, s)
    transcript = list(placed)
    state = GameState(tuple(cops), None, 0, "robber-to-place")
    rob = _Robber(G, robber)
    v = rob.place(state)
    if not 0 <= v < G.n:
        raise ProtocolError(f"robber placed on {v}, not a vertex")
    transcript.append((0, "place-robber", "robber", None, v))
    state = replace(state, robber_position=v, phase="cops-to-move")
    if v in cops:
        return Outcome(True, 0, v, 0, transcript, replace(state, phase="captured"))
    plan = s.itinerary(v) if v in s.assignments else {}
    edge_of = {c: t for c, (t, _) in plan.items()}
    pos = {c: c for c in cops}
    robber_at = v
    for rnd in range(1, max_rounds + 1):
        moves = {}
        if rnd <= s.j:
            for c, (_, path) in plan.items():
                moves[c] = path[min(rnd, len(path) - 1)]
        else:
            near = set(G.neighbours[robber_at].tolist())
            hunters = [c for c in cops if pos[c] in near]
            if s.mode == "edge":
                hunters.sort(key=lambda c: (c not in edge_of
                                            or robber_at not in G.edges[edge_of[c]], c))
            if hunters:
                moves[hunters[0]] = robber_at
        for c, b in moves.items():
            _check_move(G, pos[c], b, names[c], rnd)
            if b != pos[c]:
                transcript.append((rnd, "cops-move", names[c], pos[c], b))
            pos[c] = b
        state = GameState(tuple(pos[c] for c in cops), robber_at, rnd, "robber-to-move")
        if robber_at in moves.values() or any(p == robber_at for p in pos.values()):
            return Outcome(True, rnd, v, rnd, transcript, replace(state, phase="captured"))
        b = rob.move(state)
        _check_move(G, robber_at, b, "robber", rnd)
        if b != robber_at:
            transcript.append((rnd, "robber-move", "robber", robber_at, b))
        robber_at = b
        state = GameState(tuple(pos[c] for c in cops), robber_at, rnd, "cops-to-move")
        if any(p == robber_at for p in pos.values()):
            return Outcome(True, rnd, v, rnd, transcript, replace(state, phase="captured"))
    return Outcome(False, None, v, max_rounds, transcript, state)


# --- robber scripts ------------------------------------------------------------------

def random_walk_script(G: Hypergraph, start: int, length: int, rng) -> tuple[int, ...]:
    out = [start]
    for _ in range(length):
        nb = G.neighbours[out[-1]]
        out.append(int(nb[rng.integers(nb.size)]))
    return tuple(out)


def evasive_script(G: Hypergraph, s: CopStrategy, start: int, length: int, rng) -> tuple[int, ...]:
    """Walk that reads the cops' itineraries and keeps away from their next positions.

    Each step picks, among legal moves, one maximising the distance to where
    the cops will stand after their next move; ties are broken at random.
    """
    if start in _placement(G, s)[0]:
        # caught on placement; the rest of the walk is never played
        return (start,) * (length + 1)
    plan = s.itinerary(start) if start in s.assignments else {}
    vv = G.metric.vv
    out = [start]
    for step in range(1, length + 1):
        upcoming = [path[min(step + 1, len(path) - 1)] for _, path in plan.values()]
        upcoming += [c for c in s.cop_starts if c not in plan]
        nb = G.neighbours[out[-1]]
        if upcoming:
            score = vv[np.ix_(nb, upcoming)].min(axis=1).astype(np.int64)
        else:
            score = np.zeros(nb.size, dtype=np.int64)
        best = np.flatnonzero(score == score.max())
        out.append(int(nb[best[rng.integers(best.size)]]))
    return tuple(out)


def scripted_robbers(G: Hypergraph, s: CopStrategy, count: int, seed: int,
                     length: int | None = None) -> list[RobberPolicy]:
    """``count`` scripted robbers: half random walks, half itinerary-aware evaders.

    Starts are drawn uniformly at random.
    """
    if length is None:
        length = s.j + 2
    rng = make_rng(derive_seed(seed, "scripts"))
    out = []
    for i in range(count):
        start = int(rng.integers(G.n))
        if i % 2 == 0:
            script = random_walk_script(G, start, length, rng)
        else:
            script = evasive_script(G, s, start, length, rng)
        out.append(RobberPolicy("scripted", seed=derive_seed(seed, i), script=script))
    return out


# --- transcripts -------------------------------------------------------------------

TRANSCRIPT_HEADER = ("round", "phase", "piece", "from", "to")


def format_transcript(outcome: Outcome) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRANSCRIPT_HEADER)
    for rnd, phase, piece, a, b in outcome.transcript:
        w.writerow((rnd, phase, piece, "" if a is None else a, b))
    return buf.getvalue()


def replay_transcript(G: Hypergraph, outcome: Outcome) -> bool:
    """Every recorded move is legal for the piece that made it."""
    where = {}
    for rnd, phase, piece, a, b in outcome.transcript:
        if phase.startswith("place"):
            where[piece] = b
            continue
        if where.get(piece) != a or b not in legal_moves(G, a):
            return False
        where[piece] = b
    return True
