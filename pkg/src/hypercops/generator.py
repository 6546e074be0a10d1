"""Sampling G^k(n, p) and the two constructions relating graphs and k-graphs."""
from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import DomainError, ResourceError
from .hypercore import Hypergraph, is_connected

ENUMERATION_BUDGET = 2 ** 26
DEFAULT_MAX_EDGES = 5_000_000
_FLIP_CHUNK = 2 ** 22


def make_rng(seed: int) -> np.random.Generator:
    """Philox4x64 counter-based generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) % 2 ** 64))


def derive_seed(*parts) -> int:
    """64-bit seed from BLAKE2b over the colon-joined ``repr`` of ``parts``."""
    h = hashlib.blake2b(":".join(repr(p) for p in parts).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "big")


@dataclass(frozen=True)
class ModelParams:
    n: int
    k: int
    p: float
    seed: int = 0

    def __post_init__(self):
        if not 2 <= self.k <= self.n:
            raise DomainError(f"need 2 <= k <= n, got k={self.k}, n={self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {self.p}")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_dhat(cls, n: int, k: int, dhat: float, seed: int = 0) -> "ModelParams":
        """Solve d_hat = p k C(n-1, k-1) for p."""
        return cls(n, k, p_for_dhat(n, k, dhat), seed)


def p_for_dhat(n: int, k: int, dhat: float) -> float:
    with mpmath.workdps(50):
        p = mpmath.mpf(dhat) / (k * mpmath.binomial(n - 1, k - 1))
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"d_hat={dhat} needs p={p}, outside [0, 1]")
    return p


@dataclass(frozen=True)
class DerivedStats:
    d_hat: float
    expected_degree: float
    expected_edge_count: float
    delta: float | None


def derived_stats(params: ModelParams) -> DerivedStats:
    n, k, p = params.n, params.k, params.p
    with mpmath.workdps(50):
        mp_p = mpmath.mpf(p)
        d_hat = mp_p * k * mpmath.binomial(n - 1, k - 1)
        edges = mp_p * mpmath.binomial(n, k)
        if p == 0:
            exp_deg = mpmath.mpf(0)
        elif p == 1:
            exp_deg = mpmath.mpf(n - 1)
        else:
            # (n-1)(1 - (1-p)^C(n-2, k-2)) without cancellation
            power = mpmath.binomial(n - 2, k - 2) * mpmath.log1p(-mp_p)
            exp_deg = (n - 1) * -mpmath.expm1(power)
        delta = math.sqrt(math.log(math.log(n))) / math.log(n) if n >= 16 else None
        return DerivedStats(float(d_hat), float(exp_deg), float(edges), delta)


# --- sampling ----------------------------------------------------------------

def sample_gknp(params: ModelParams, max_edges: int = DEFAULT_MAX_EDGES) -> Hypergraph:
    """Each k-subset of [n] becomes an edge independently with probability p.

    Small models (C(n, k) <= 2**26) flip one coin per k-set.  Larger ones
    draw the edge count first and then that many distinct uniform k-sets.
    """
    n, k, p = params.n, params.k, params.p
    rng = make_rng(params.seed)
    total = math.comb(n, k)
    if p == 0.0:
        return Hypergraph(n, k)
    if total <= ENUMERATION_BUDGET:
        if p * total > max_edges * 1.5:
            raise ResourceError(f"expected {p * total:.0f} edges exceeds max_edges={max_edges}")
        ranks = []
        for start in range(0, total, _FLIP_CHUNK):
            size = min(_FLIP_CHUNK, total - start)
            ranks.append(start + np.flatnonzero(rng.random(size) < p))
        ranks = np.concatenate(ranks)
        if ranks.size > max_edges:
            raise ResourceError(f"sampled {ranks.size} edges, max_edges={max_edges}")
        return Hypergraph(n, k, unrank_colex(ranks, n, k))
    m = _edge_count(rng, total, p)
    if m > max_edges:
        raise ResourceError(
            f"C({n},{k}) exceeds the enumeration budget 2**26 and the drawn edge "
            f"count {m} exceeds max_edges={max_edges}")
    return Hypergraph(n, k, _distinct_ksets(rng, n, k, m))


def _edge_count(rng, total: int, p: float) -> int:
    if total < 2 ** 62:
        return int(rng.binomial(total, p))
    # Bin(C, p) vs Poisson(Cp): total variation <= C p^2, negligible at this scale
    return int(rng.poisson(float(mpmath.mpf(total) * p)))


def _distinct_ksets(rng, n: int, k: int, m: int) -> np.ndarray:
    out = np.empty((m, k), dtype=np.int64)
    seen = set()
    have = 0
    accept = math.prod((n - i) / n for i in range(k))
    while have < m:
        need = m - have
        if accept > 0.2:
            batch = int(need / accept * 1.05) + 16
            rows = np.sort(rng.integers(0, n, size=(batch, k)), axis=1)
            rows = rows[np.all(rows[:, 1:] != rows[:, :-1], axis=1)]
        else:
            rows = np.sort(np.array([rng.choice(n, k, replace=False) for _ in range(need)]), axis=1)
        for row in rows:
            key = row.tobytes()
            if key in seen:
                continue
            seen.add(key)
            out[have] = row
            have += 1
            if have == m:
                break
    return out


def unrank_colex(ranks: np.ndarray, n: int, k: int) -> np.ndarray:
    """k-subsets of range(n) with the given colexicographic ranks."""
    ranks = np.asarray(ranks, dtype=np.int64).copy()
    out = np.empty((ranks.size, k), dtype=np.int64)
    for i in range(k, 0, -1):
        table = np.array([math.comb(c, i) for c in range(n)], dtype=np.int64)
        c = np.searchsorted(table, ranks, side="right") - 1
        out[:, i - 1] = c
        ranks -= table[c]
    return out


# --- constructions ---------------------------------------------------------------

def blow_up(G2: Hypergraph, k_half: int) -> tuple[Hypergraph, list[range]]:
    """Replace every vertex by a block of ``k_half`` vertices.

    Each graph edge {u, v} becomes the 2*k_half-edge ``block(u) | block(v)``.
    Block of v is ``range(v * k_half, (v + 1) * k_half)``; the list of blocks
    is returned alongside the hypergraph.
    """
    if G2.k != 2:
        raise DomainError(f"blow-up needs a 2-graph, got k={G2.k}")
    if k_half < 1:
        raise DomainError(f"k_half must be >= 1, got {k_half}")
    blocks = [range(v * k_half, (v + 1) * k_half) for v in range(G2.n)]
    edges = [list(blocks[u]) + list(blocks[v]) for u, v in G2.edges]
    return Hypergraph(G2.n * k_half, 2 * k_half, edges), blocks


def clique_expansion(G: Hypergraph) -> Hypergraph:
    """2-graph joining every pair of vertices that share an edge."""
    arr = G.edge_array
    pairs = [arr[:, [i, j]] for i, j in itertools.combinations(range(G.k), 2)]
    pairs = np.concatenate(pairs) if pairs and arr.size else np.empty((0, 2), dtype=np.int64)
    return Hypergraph(G.n, 2, pairs)


# --- small named graphs --------------------------------------------------------

def path_graph(n: int) -> Hypergraph:
    return Hypergraph(n, 2, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Hypergraph:
    if n < 3:
        raise DomainError("a cycle needs at least 3 vertices")
    return Hypergraph(n, 2, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Hypergraph:
    return Hypergraph(n, 2, list(itertools.combinations(range(n), 2)))


def petersen_graph() -> Hypergraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Hypergraph(10, 2, outer + spokes + inner)


def random_tree(n: int, rng: np.random.Generator) -> Hypergraph:
    """Uniform labelled tree via a random Pruefer sequence."""
    if n <= 1:
        return Hypergraph(n, 2)
    if n == 2:
        return Hypergraph(2, 2, [(0, 1)])
    seq = rng.integers(0, n, size=n - 2).tolist()
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = min(v for v in range(n) if degree[v] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, w = [v for v in range(n) if degree[v] == 1]
    edges.append((u, w))
    return Hypergraph(n, 2, edges)


def random_connected_hypergraph(rng: np.random.Generator, n: int, k: int, m: int,
                                max_tries: int = 1000) -> Hypergraph:
    """Uniform draw of m distinct k-sets on [n], rejected until connected."""
    if n > 1 + m * (k - 1):
        raise DomainError(f"{m} edges of size {k} cannot connect {n} vertices")
    if m > math.comb(n, k):
        raise DomainError(f"only {math.comb(n, k)} distinct {k}-sets on {n} vertices")
    for _ in range(max_tries):
        ranks = rng.choice(math.comb(n, k), size=m, replace=False)
        G = Hypergraph(n, k, unrank_colex(ranks, n, k))
        if is_connected(G):
            return G
    raise ResourceError(f"no connected sample after {max_tries} tries")


def connected_graphs(n: int) -> list[Hypergraph]:
    """All connected simple graphs on n <= 6 vertices, one per isomorphism class.

    Every edge subset of K_n is mapped to the minimum of its images under all
    vertex permutations; distinct minima are the isomorphism classes.
    """
    if not 1 <= n <= 6:
        raise DomainError("exhaustive generation supports 1 <= n <= 6")
    pairs = list(itertools.combinations(range(n), 2))
    index = {pr: i for i, pr in enumerate(pairs)}
    masks = np.arange(2 ** len(pairs), dtype=np.int64)
    canon = masks.copy()
    for perm in itertools.permutations(range(n)):
        image = np.zeros_like(masks)
        for i, (a, b) in enumerate(pairs):
            j = index[tuple(sorted((perm[a], perm[b])))]
            image |= ((masks >> i) & 1) << j
        np.minimum(canon, image, out=canon)
    out = []
    for mask in np.unique(canon).tolist():
        G = Hypergraph(n, 2, [pairs[i] for i in range(len(pairs)) if mask >> i & 1])
        if is_connected(G):
            out.append(G)
    return out
