"""k-uniform hypergraphs, loose-path distances and neighbourhoods.

Vertices are the integers ``0..n-1``.  Distances follow the loose-path
metric: two vertices are at distance ``t`` if ``t`` edges with consecutive
non-empty intersections lead from one to the other.
"""
from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, FormatError, ResourceError

# Sentinel used in the dense distance tables for "unreachable".
UNREACHABLE = np.iinfo(np.int16).max
DENSE_METRIC_MAX_N = 20_000


class Hypergraph:
    """Immutable k-uniform hypergraph on vertices ``0..n-1``.

    Edges are stored as sorted k-tuples, deduplicated, in lexicographic
    order, so two hypergraphs with the same edge sets compare equal.
    """

    def __init__(self, n: int, k: int, edges: Iterable[Iterable[int]] | np.ndarray = ()):
        if k < 2:
            raise DomainError(f"uniformity k must be >= 2, got {k}")
        if n < 0:
            raise DomainError(f"vertex count must be >= 0, got {n}")
        arr = _canonical_edge_array(n, k, edges)
        self.n = int(n)
        self.k = int(k)
        self.edges: tuple[tuple[int, ...], ...] = tuple(map(tuple, arr.tolist()))
        self.__dict__["edge_array"] = arr
        self.incidence: tuple[tuple[int, ...], ...] = _incidence_lists(n, arr)

    # equality and hashing only look at the canonical edge list
    def __eq__(self, other):
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (self.n, self.k, self.edges) == (other.n, other.k, other.edges)

    def __hash__(self):
        return hash((self.n, self.k, self.edges))

    def __repr__(self):
        return f"Hypergraph(n={self.n}, k={self.k}, m={len(self.edges)})"

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def incidence_matrix(self) -> sp.csr_matrix:
        """Vertex-by-edge 0/1 matrix (float32, CSR)."""
        m = len(self.edges)
        rows = self.edge_array.ravel()
        cols = np.repeat(np.arange(m), self.k)
        data = np.ones(rows.size, dtype=np.float32)
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n, m))

    @cached_property
    def neighbours(self) -> tuple[np.ndarray, ...]:
        """Closed first neighbourhood of every vertex as a sorted array."""
        out = []
        for v in range(self.n):
            if self.incidence[v]:
                out.append(np.unique(self.edge_array[list(self.incidence[v])]))
            else:
                out.append(np.array([v], dtype=np.int64))
        return tuple(out)

    @cached_property
    def metric(self) -> "MetricTables":
        return metric_tables(self)


def _canonical_edge_array(n, k, edges) -> np.ndarray:
    if isinstance(edges, np.ndarray):
        arr = np.asarray(edges, dtype=np.int64)
    else:
        rows = [tuple(e) for e in edges]
        for e in rows:
            if len(e) != k:
                raise DomainError(f"edge {e} has {len(e)} vertices, expected {k}")
        arr = np.array(rows, dtype=np.int64).reshape(len(rows), k)
    if arr.ndim != 2 or arr.shape[1] != k:
        raise DomainError(f"edge array must have shape (m, {k}), got {arr.shape}")
    if arr.size == 0:
        return np.empty((0, k), dtype=np.int64)
    if arr.min() < 0 or arr.max() >= n:
        raise DomainError(f"edge vertex outside 0..{n - 1}")
    arr = np.sort(arr, axis=1)
    if np.any(arr[:, 1:] == arr[:, :-1]):
        bad = arr[np.any(arr[:, 1:] == arr[:, :-1], axis=1)][0]
        raise DomainError(f"edge {tuple(bad.tolist())} repeats a vertex")
    arr = np.unique(arr, axis=0)
    arr.setflags(write=False)
    return arr


def _incidence_lists(n, arr):
    m, k = arr.shape
    flat = arr.ravel()
    order = np.argsort(flat, kind="stable")
    edge_ids = (order // k).tolist()
    counts = np.bincount(flat, minlength=n).tolist() if m else [0] * n
    out = []
    pos = 0
    for c in counts:
        out.append(tuple(edge_ids[pos:pos + c]))
        pos += c
    return tuple(out)


def _check_vertex_set(G: Hypergraph, A) -> list[int]:
    A = sorted(set(int(a) for a in A))
    if not A:
        raise DomainError("vertex set must be non-empty")
    if A[0] < 0 or A[-1] >= G.n:
        raise DomainError(f"vertex set not contained in 0..{G.n - 1}")
    return A


@dataclass(frozen=True)
class DistanceTable:
    """Loose-path distances from ``source`` to every vertex.

    ``dist`` holds ``UNREACHABLE`` for vertices in other components;
    indexing returns ``math.inf`` for those.
    """

    source: tuple[int, ...]
    dist: np.ndarray

    def __getitem__(self, x):
        d = int(self.dist[x])
        return math.inf if d == UNREACHABLE else d

    def to_set(self, B) -> float:
        """Distance from the source to the vertex set ``B``."""
        return min(self[x] for x in B)


def distances_from(G: Hypergraph, A) -> DistanceTable:
    """Breadth-first search alternating between vertex and edge layers."""
    A = _check_vertex_set(G, A)
    dist = np.full(G.n, UNREACHABLE, dtype=np.int32)
    dist[A] = 0
    seen_edge = bytearray(G.m)
    frontier = A
    t = 0
    while frontier:
        t += 1
        nxt = []
        for v in frontier:
            for e in G.incidence[v]:
                if seen_edge[e]:
                    continue
                seen_edge[e] = 1
                for x in G.edges[e]:
                    if dist[x] == UNREACHABLE:
                        dist[x] = t
                        nxt.append(x)
        frontier = nxt
    return DistanceTable(tuple(A), dist)


def vertex_neighborhood(G: Hypergraph, A, r: int) -> frozenset[int]:
    """Closed r-th vertex neighbourhood: vertices within distance r of A."""
    if r < 0:
        raise DomainError(f"radius must be >= 0, got {r}")
    table = distances_from(G, A)
    return frozenset(np.flatnonzero(table.dist <= r).tolist())


def edge_neighborhood(G: Hypergraph, A, r: int) -> frozenset[int]:
    """Indices of edges within distance r-1 of A (so its vertices are N_V^r(A))."""
    if r < 1:
        raise DomainError(f"edge neighbourhoods need r >= 1, got {r}")
    table = distances_from(G, A)
    inner = np.flatnonzero(table.dist <= r - 1).tolist()
    return frozenset(e for v in inner for e in G.incidence[v])


def vertices_of_edges(G: Hypergraph, B) -> frozenset[int]:
    return frozenset(x for e in B for x in G.edges[e])


def average_vertex_degree(G: Hypergraph) -> Fraction:
    """Mean size of the closed first neighbourhood |N_V^1(v)|."""
    if G.n == 0:
        raise DomainError("average degree of the empty hypergraph is undefined")
    return Fraction(sum(len(nb) for nb in G.neighbours), G.n)


def legal_moves(G: Hypergraph, v: int) -> frozenset[int]:
    """Vertices reachable in one turn, staying put included."""
    if not 0 <= v < G.n:
        raise DomainError(f"vertex {v} not in 0..{G.n - 1}")
    return frozenset(G.neighbours[v].tolist())


def components(G: Hypergraph) -> list[list[int]]:
    """Connected components, each sorted, ordered by smallest vertex."""
    label = [-1] * G.n
    out = []
    for s in range(G.n):
        if label[s] >= 0:
            continue
        comp = np.flatnonzero(distances_from(G, [s]).dist != UNREACHABLE).tolist()
        for v in comp:
            label[v] = len(out)
        out.append(comp)
    return out


def is_connected(G: Hypergraph) -> bool:
    if G.n <= 1:
        return True
    return bool(np.all(distances_from(G, [0]).dist != UNREACHABLE))


@dataclass(frozen=True)
class MetricTables:
    """All-pairs loose-path distances.

    ``vv[u, x]`` is dist(u, x).  The distance from u to edge e is the
    distance to its nearest vertex; it is kept as a dense (n, m) table
    ``ve`` only when n * m fits ``DENSE_EDGE_TABLE_MAX``, and otherwise
    derived from ``vv`` row by row.  Both use ``UNREACHABLE`` for infinity.
    """

    vv: np.ndarray
    edge_array: np.ndarray
    dense_ve: np.ndarray | None = None

    @property
    def ve(self) -> np.ndarray:
        if self.dense_ve is None:
            raise ResourceError(f"dense vertex-edge table needs n*m <= {DENSE_EDGE_TABLE_MAX}, "
                                f"got {self.vv.shape[0]}*{len(self.edge_array)}")
        return self.dense_ve

    def ve_rows(self, rows) -> np.ndarray:
        """(len(rows), m) distances from the given vertices to every edge."""
        rows = np.asarray(rows, dtype=np.int64)
        if self.dense_ve is not None:
            return self.dense_ve[rows]
        m, k = self.edge_array.shape
        out = np.empty((rows.size, m), dtype=np.int16)
        step = max(1, _CHUNK_ENTRIES // max(1, m * k))
        for a in range(0, rows.size, step):
            out[a:a + step] = self.vv[rows[a:a + step]][:, self.edge_array].min(axis=2)
        return out

    def edge_rows(self, edges) -> np.ndarray:
        """(len(edges), n) distances from the given edges to every vertex."""
        edges = np.asarray(edges, dtype=np.int64)
        return self.vv[self.edge_array[edges]].min(axis=1)


# Dense (n, m) vertex-edge tables above this many entries are not built.
DENSE_EDGE_TABLE_MAX = 5 * 10 ** 7
_CHUNK_ENTRIES = 2 * 10 ** 7


def metric_tables(G: Hypergraph) -> MetricTables:
    """Dense all-pairs distances grown one edge layer at a time.

    Each layer is two sparse products with the incidence matrix, so the
    cost is O(n * nnz) per layer rather than one BFS per vertex.  Sources
    are processed in row blocks so the (block, m) intermediates stay small.
    """
    n, m = G.n, G.m
    if n > DENSE_METRIC_MAX_N:
        raise ResourceError(f"dense metric limited to n <= {DENSE_METRIC_MAX_N}, got {n}")
    inc = G.incidence_matrix
    inc_t = inc.T.tocsr()
    vv = np.full((n, n), UNREACHABLE, dtype=np.int16)
    np.fill_diagonal(vv, 0)
    keep_ve = n * m <= DENSE_EDGE_TABLE_MAX
    ve = np.full((n, m), UNREACHABLE, dtype=np.int16) if keep_ve else None
    step = max(1, min(n, _CHUNK_ENTRIES // max(1, m)))
    for a in range(0, n, step):
        rows = np.arange(a, min(n, a + step))
        reached = np.zeros((n, rows.size), dtype=np.float32)
        reached[rows, np.arange(rows.size)] = 1
        seen_e = np.zeros((m, rows.size), dtype=bool) if keep_ve else None
        r = 0
        while True:
            r += 1
            touch = np.asarray(inc_t @ reached) > 0  # (m, block): edges meeting N^{r-1}
            if keep_ve:
                ei, ci = np.nonzero(touch & ~seen_e)
                ve[rows[ci], ei] = r - 1
                seen_e |= touch
            grown = np.asarray(inc @ touch.astype(np.float32)) > 0
            old = reached > 0
            new_v = grown & ~old
            if not new_v.any():
                break
            vi, ci = np.nonzero(new_v)
            vv[rows[ci], vi] = r
            reached = (grown | old).astype(np.float32)
    vv.setflags(write=False)
    if keep_ve:
        ve.setflags(write=False)
    return MetricTables(vv, G.edge_array, ve)


def shortest_path(G: Hypergraph, source: int, targets, vv: np.ndarray | None = None) -> list[int]:
    """Vertex itinerary from ``source`` to the nearest vertex of ``targets``.

    Consecutive vertices share an edge.  Ties go to the smallest vertex id,
    so the itinerary is deterministic.
    """
    targets = sorted(set(int(t) for t in targets))
    if vv is None:
        table = distances_from(G, targets).dist
    else:
        table = vv[targets].min(axis=0) if len(targets) > 1 else vv[targets[0]]
    d = int(table[source])
    if d == UNREACHABLE:
        raise DomainError(f"no path from {source} to {targets}")
    path = [source]
    cur = source
    while d > 0:
        nb = G.neighbours[cur]
        cur = int(nb[np.flatnonzero(table[nb] == d - 1)[0]])
        path.append(cur)
        d -= 1
    return path


# --- text format -----------------------------------------------------------

def format_hypergraph(G: Hypergraph) -> str:
    lines = [f"{G.n} {G.k} {G.m}"]
    lines.extend(" ".join(map(str, e)) for e in G.edges)
    return "\n".join(lines) + "\n"


def parse_hypergraph(text: str) -> Hypergraph:
    """Read the ``n k m`` header followed by m lines of k vertex ids."""
    rows = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines())]
    rows = [(i, toks) for i, toks in rows if toks and not toks[0].startswith("#")]
    if not rows:
        raise FormatError("missing header line 'n k m'")
    lineno, head = rows[0]
    if len(head) != 3:
        raise FormatError("header must be 'n k m'", lineno)
    try:
        n, k, m = (int(t) for t in head)
    except ValueError:
        raise FormatError("header fields must be integers", lineno) from None
    body = rows[1:]
    if len(body) != m:
        raise FormatError(f"header announces {m} edges, found {len(body)}", lineno)
    edges = []
    for lineno, toks in body:
        if len(toks) != k:
            raise FormatError(f"edge has {len(toks)} vertices, expected k={k}", lineno)
        try:
            edges.append([int(t) for t in toks])
        except ValueError:
            raise FormatError("vertex ids must be integers", lineno) from None
    try:
        return Hypergraph(n, k, edges)
    except DomainError as exc:
        raise FormatError(str(exc)) from None


def read_hypergraph(path) -> Hypergraph:
    return parse_hypergraph(Path(path).read_text())


def write_hypergraph(G: Hypergraph, path) -> None:
    Path(path).write_text(format_hypergraph(G))
