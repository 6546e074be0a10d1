"""Surrounding strategies: a random cop set plus, for every robber start, a
matching of surrounded targets to cops.

vertex mode, radius j: targets are the vertices x within distance j-1 of
the robber start v, each matched to a distinct cop within distance j of x.
edge mode, radius j: targets are the edges within distance j-1 of v (the
edge neighbourhood N_E^j(v)), each matched to a distinct cop within
distance j of the edge.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import matching
from .bounds import regime_interval
from .errors import DomainError, FormatError
from .generator import derive_seed, make_rng
from .hypercore import Hypergraph, is_connected, shortest_path

MODES = ("vertex", "edge")
MODE_REGIMES = {"vertex": ("a", "d"), "edge": ("b", "c")}


class OffRegimeWarning(UserWarning):
    """A density was requested for parameters outside its regime's d-interval."""


@dataclass(frozen=True)
class Density:
    q: float
    raw: float
    clamped: bool
    regime: str
    in_regime: bool


def claim_interval(n: int, k: int, mode: str, j: int, regime: str) -> tuple[float, float]:
    """d-interval in which the claim's density is designed to work (strategy indexing)."""
    if regime == "a":
        if j < 2:
            return math.inf, -math.inf
        return regime_interval(n, k, "a", j - 1)
    return regime_interval(n, k, regime, j)


def _raw_density(n, k, d, j, regime, xi):
    ln = math.log(n)
    if regime == "d":
        return 10 / xi * d ** -j * ln
    if regime == "a":
        return 10 * xi ** -2 * d ** (j - 1) / n * math.ceil(n / d ** (2 * j - 1) * ln)
    if regime == "b":
        return 10 * ln / (xi * k * d ** j)
    if regime == "c":
        return (10 * xi ** -2 * d ** j / (n * k) * math.ceil(n / d ** (2 * j) * ln)
                * math.ceil(k / d ** j * ln))
    raise DomainError(f"unknown regime {regime!r}")


def default_density(n: int, k: int, d: float, j: int, mode: str, regime: str | None = None,
                    xi: float = 1.0) -> Density:
    """Cop-placement probability q of the surrounding claim for (mode, j, regime).

    Without an explicit regime the one whose interval contains d is used;
    if neither does, the one giving the larger q, since the success
    guarantee only covers in-regime parameters and more cops can only
    help.  Off-regime use warns but is allowed.  Values above 1 are
    clamped and flagged.
    """
    if mode not in MODES:
        raise DomainError(f"mode must be vertex or edge, got {mode!r}")
    if j < 1:
        raise DomainError(f"j must be >= 1, got {j}")
    if not 0 < xi <= 1:
        raise DomainError(f"xi must lie in (0, 1], got {xi}")
    if not d > 0:
        raise DomainError(f"d must be positive, got {d}")
    options = [r for r in MODE_REGIMES[mode] if not (r == "a" and j < 2)]
    if regime is not None:
        if regime not in MODE_REGIMES[mode]:
            raise DomainError(f"regime {regime!r} does not belong to {mode} mode")
        if regime == "a" and j < 2:
            raise DomainError("regime (a) needs vertex radius j >= 2")
        options = [regime]

    def inside(r):
        lo, hi = claim_interval(n, k, mode, j, r)
        return lo * (1 - 1e-12) <= d <= hi * (1 + 1e-12)

    containing = [r for r in options if inside(r)]
    if containing:
        chosen = containing[0]
    else:
        chosen = max(options, key=lambda r: _raw_density(n, k, d, j, r, xi))
        warnings.warn(f"d={d:.6g} lies outside the ({chosen}) interval for {mode} mode j={j}",
                      OffRegimeWarning, stacklevel=2)
    raw = _raw_density(n, k, d, j, chosen, xi)
    return Density(min(raw, 1.0), raw, raw > 1.0, chosen, bool(containing))


@dataclass(frozen=True)
class SynthesisConfig:
    mode: str
    j: int
    q: float
    max_retries: int = 20
    degree_baseline: str = "d"
    xi: float = 1.0
    regime: str | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be vertex or edge, got {self.mode!r}")
        if self.j < 1:
            raise DomainError(f"j must be >= 1, got {self.j}")
        if not 0 < self.q <= 1:
            raise DomainError(f"q must lie in (0, 1], got {self.q}")
        if self.max_retries < 1:
            raise DomainError("max_retries must be >= 1")
        if self.degree_baseline not in ("d", "d_hat"):
            raise DomainError("degree_baseline must be d or d_hat")


@dataclass
class CopStrategy:
    """Cop starts and, per robber start v, an injection target -> cop start.

    Itineraries are shortest loose paths computed on first use.
    """

    graph: Hypergraph = field(repr=False, compare=False)
    mode: str
    j: int
    cop_starts: tuple[int, ...]
    assignments: dict[int, dict[int, int]]
    q: float = 1.0
    attempts: int = 1
    _paths: dict = field(default_factory=dict, repr=False, compare=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def target_vertices(self, target: int) -> tuple[int, ...]:
        return (target,) if self.mode == "vertex" else self.graph.edges[target]

    def path(self, cop: int, target: int) -> list[int]:
        key = (cop, target)
        if key not in self._paths:
            G = self.graph
            vv = G.metric.vv if G.n <= 4000 else None
            self._paths[key] = shortest_path(G, cop, self.target_vertices(target), vv)
        return self._paths[key]

    def itinerary(self, v: int) -> dict[int, tuple[int, list[int]]]:
        """cop start -> (target, path) for robber start v."""
        return {cop: (t, self.path(cop, t)) for t, cop in self.assignments[v].items()}


def strategy_size(s: CopStrategy | None) -> int:
    return 0 if s is None else len(s.cop_starts)


@dataclass
class VertexFailure:
    v: int
    targets: int
    matched: int
    hall_set: tuple[int, ...]
    hall_neighbourhood: tuple[int, ...]

    @property
    def deficiency(self) -> int:
        return self.targets - self.matched


@dataclass
class SynthesisFailure:
    mode: str
    j: int
    q: float
    attempts: int
    cop_starts: tuple[int, ...]
    failures: list[VertexFailure]

    @property
    def total_deficiency(self) -> int:
        return sum(f.deficiency for f in self.failures)


@dataclass
class SynthesisResult:
    strategy: CopStrategy | None
    failure: SynthesisFailure | None
    attempts: int
    successes: int

    @property
    def ok(self) -> bool:
        return self.strategy is not None


# distance blocks up to this many entries are computed in one pass
_PRELOAD_ENTRIES = 2 * 10 ** 7


class _CopLists:
    """Cops within distance j of each target, nearest first, built on demand.

    ``rows_for(targets)`` gives the (len(targets), cops) distance block.
    Shared by every robber start of one cop set; the nearest-first order
    lets the greedy pass of the matching finish most instances.
    """

    def __init__(self, rows_for, count: int, ncops: int, j: int):
        self.rows_for = rows_for
        self.ncops = ncops
        self.j = j
        self.known = np.zeros(count, dtype=bool)
        self.nearest = np.zeros(count, dtype=np.int64)
        self.reach = np.zeros(count, dtype=bool)
        self.lists = {}
        self.complete = False

    def _load(self, targets: np.ndarray, with_lists: bool):
        need = targets[~self.known[targets]] if not with_lists else np.array(
            [t for t in targets.tolist() if t not in self.lists], dtype=np.int64)
        if need.size == 0:
            return
        need = np.unique(need)
        if self.ncops == 0:
            D = np.empty((need.size, 0), dtype=np.int16)
        else:
            D = self.rows_for(need)
            near = D.argmin(axis=1)
            self.nearest[need] = near
            self.reach[need] = D[np.arange(need.size), near] <= self.j
        self.known[need] = True
        if with_lists:
            for t, row in zip(need.tolist(), D):
                idx = np.flatnonzero(row <= self.j)
                self.lists[t] = idx[np.argsort(row[idx], kind="stable")].tolist()

    def preload(self, targets: np.ndarray):
        self._load(targets, False)
        self.complete = bool(self.known.all())

    def adjacency(self, targets: np.ndarray) -> list[list[int]]:
        self._load(targets, True)
        return [self.lists[t] for t in targets.tolist()]

    def nearest_matching(self, targets: np.ndarray):
        """Each target to its nearest cop, if those cops are distinct and in reach."""
        if not self.complete:
            self._load(targets, False)
        near = self.nearest[targets]
        if not self.reach[targets].all() or len(set(near.tolist())) != near.size:
            return None
        return near


def _targets(G, mode, j, v, vv):
    """Vertices within j - 1 of v, or edges meeting that ball (edges within j - 1)."""
    if j == 1:
        if mode == "vertex":
            return np.array([v], dtype=np.int64)
        return np.array(sorted(G.incidence[v]), dtype=np.int64)
    ball = np.flatnonzero(vv[v] <= j - 1)
    if mode == "vertex":
        return ball
    hit = set()
    for x in ball.tolist():
        hit.update(G.incidence[x])
    return np.array(sorted(hit), dtype=np.int64)


def check_cop_set(G: Hypergraph, mode: str, j: int, cop_starts, stop_early: bool = False):
    """Hall check of one cop set for every robber start.

    Returns (assignments, failures).  With ``stop_early`` the scan ends at
    the first failing start.
    """
    cops = np.array(sorted(set(int(c) for c in cop_starts)), dtype=np.int64)
    tables = G.metric
    vv = tables.vv
    cop_set = set(cops.tolist())
    small = G.n * cops.size <= _PRELOAD_ENTRIES
    to_cops = vv[:, cops] if small else None
    if mode == "vertex":
        rows_for = (lambda t: to_cops[t]) if small else (lambda t: vv[np.ix_(t, cops)])
        count = G.n
    else:
        edge_array = G.edge_array
        rows_for = ((lambda t: to_cops[edge_array[t]].min(axis=1)) if small
                    else (lambda t: tables.edge_rows(t)[:, cops]))
        count = G.m
    lists = _CopLists(rows_for, count, cops.size, j)
    if small and cops.size:
        step = max(1, _PRELOAD_ENTRIES // (cops.size * G.k))
        for a in range(0, count, step):
            lists.preload(np.arange(a, min(count, a + step)))
    assignments, failures = {}, []
    for v in range(G.n):
        targets = _targets(G, mode, j, v, vv)
        if mode == "edge" and targets.size == 0 and v not in cop_set:
            # an isolated start can never be caught by cops arriving along edges
            failures.append(VertexFailure(v, 1, 0, (), ()))
            if stop_early:
                break
            continue
        if targets.size > cops.size and stop_early:
            failures.append(VertexFailure(v, int(targets.size), int(cops.size), (), ()))
            break
        near = lists.nearest_matching(targets)
        if near is not None:
            assignments[v] = dict(zip(targets.tolist(), cops[near].tolist()))
            continue
        adj = lists.adjacency(targets)
        ml, mr = matching.maximum_matching(adj, int(cops.size))
        size = matching.matching_size(ml)
        if size < targets.size:
            hall = sorted(matching.hall_violating_set(adj, ml, mr))
            nbhd = sorted(matching.neighbourhood(adj, hall))
            failures.append(VertexFailure(v, int(targets.size), size,
                                          tuple(int(targets[t]) for t in hall),
                                          tuple(int(cops[c]) for c in nbhd)))
            if stop_early:
                break
            continue
        assignments[v] = dict(zip(targets.tolist(), cops[ml].tolist()))
    return assignments, failures


def synthesize(G: Hypergraph, cfg: SynthesisConfig, seed: int,
               cop_starts=None, stop_early: bool = True) -> SynthesisResult:
    """Sample cop sets at density q until one admits a saturating matching for every start.

    Each attempt draws every vertex into the cop set independently with
    probability q (seeded by ``derive_seed(seed, attempt)``).  Passing
    ``cop_starts`` checks that fixed set once instead.  Earlier attempts
    stop at the first failing start; the final one scans every start so
    the failure report is complete.
    """
    if not is_connected(G):
        warnings.warn("synthesis on a disconnected hypergraph", stacklevel=2)
    attempts = 1 if cop_starts is not None else cfg.max_retries
    last = None
    for attempt in range(attempts):
        if cop_starts is not None:
            cops = tuple(sorted(set(int(c) for c in cop_starts)))
        else:
            rng = make_rng(derive_seed(seed, attempt))
            cops = tuple(np.flatnonzero(rng.random(G.n) < cfg.q).tolist())
        final = attempt == attempts - 1
        assignments, failures = check_cop_set(G, cfg.mode, cfg.j, cops,
                                              stop_early=stop_early and not final)
        if not failures:
            strat = CopStrategy(G, cfg.mode, cfg.j, cops, assignments, cfg.q, attempt + 1)
            return SynthesisResult(strat, None, attempt + 1, 1)
        last = SynthesisFailure(cfg.mode, cfg.j, cfg.q, attempt + 1, cops, failures)
    return SynthesisResult(None, last, attempts, 0)


# --- structural verification ----------------------------------------------------------

def verify_strategy(G: Hypergraph, s: CopStrategy) -> list[str]:
    """Problems with a strategy, checked without playing: empty list means sound."""
    problems = []
    tables = G.metric
    vv = tables.vv
    cop_set = set(s.cop_starts)
    for v in range(G.n):
        if v not in s.assignments:
            problems.append(f"start {v}: no assignment")
            continue
        amap = s.assignments[v]
        expected = set(_targets(G, s.mode, s.j, v, vv).tolist())
        if set(amap) != expected:
            problems.append(f"start {v}: targets differ from the surrounded set")
        if s.mode == "edge" and not expected and v not in cop_set:
            problems.append(f"start {v}: isolated and unguarded")
        cops = list(amap.values())
        if len(set(cops)) != len(cops):
            problems.append(f"start {v}: assignment is not injective")
        for t, c in amap.items():
            if c not in cop_set:
                problems.append(f"start {v}: cop {c} is not a start vertex")
                continue
            dist = int(vv[c, t]) if s.mode == "vertex" else int(tables.edge_rows([t])[0, c])
            if dist > s.j:
                problems.append(f"start {v}: target {t} at distance {dist} > {s.j} from cop {c}")
            p = s.path(c, t)
            if p[0] != c or len(p) - 1 > s.j:
                problems.append(f"start {v}: bad itinerary length for cop {c}")
            if any(b not in G.neighbours[a] for a, b in zip(p, p[1:])):
                problems.append(f"start {v}: itinerary of cop {c} uses a non-edge")
            if p[-1] not in s.target_vertices(t):
                problems.append(f"start {v}: itinerary of cop {c} misses target {t}")
    return problems


# --- strategy files --------------------------------------------------------------------

def format_strategy(s: CopStrategy) -> str:
    lines = ["# cop strategy", f"mode {s.mode}", f"j {s.j}", f"n {s.graph.n}",
             "cops " + " ".join(map(str, s.cop_starts))]
    for v in sorted(s.assignments):
        for t, c in sorted(s.assignments[v].items()):
            lines.append(" ".join(map(str, [v, t, c] + s.path(c, t))))
    return "\n".join(lines) + "\n"


def write_strategy(s: CopStrategy, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_strategy(s))


def parse_strategy(text: str, G: Hypergraph) -> CopStrategy:
    header, assignments, paths = {}, {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head in ("mode", "j", "n"):
            if len(rest) != 1:
                raise FormatError(f"{head} takes one value", lineno)
            header[head] = rest[0]
            continue
        if head == "cops":
            try:
                header["cops"] = tuple(sorted(int(x) for x in rest))
            except ValueError:
                raise FormatError("cop ids must be integers", lineno) from None
            continue
        try:
            nums = [int(x) for x in line.split()]
        except ValueError:
            raise FormatError(f"unrecognised line {raw!r}", lineno) from None
        if len(nums) < 4:
            raise FormatError("assignment needs v target cop and a path", lineno)
        v, t, c, *p = nums
        if p[0] != c:
            raise FormatError("path must start at the cop", lineno)
        assignments.setdefault(v, {})[t] = c
        paths[(c, t)] = p
    for key in ("mode", "j", "n", "cops"):
        if key not in header:
            raise FormatError(f"missing {key!r} line")
    if header["mode"] not in MODES:
        raise FormatError(f"unknown mode {header['mode']!r}")
    if int(header["n"]) != G.n:
        raise FormatError(f"strategy is for n={header['n']}, hypergraph has n={G.n}")
    s = CopStrategy(G, header["mode"], int(header["j"]), header["cops"], assignments)
    s._paths.update(paths)
    return s


def read_strategy(path, G: Hypergraph) -> CopStrategy:
    with open(path) as fh:
        return parse_strategy(fh.read(), G)
