"""Exact cop-win decisions on small hypergraphs by backward induction.

Positions are (cop multiset, robber vertex, side to move).  Cop multisets
are stored sorted, so permuting cops does not create new positions.

After the cops and then the robber have placed, the cops move first.  The
cops win with m cops when some placement C makes every robber placement r
a cop win with the cops to move, which includes r already lying in C.
"""
from __future__ import annotations

import itertools
import math
from collections import deque

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, ResourceError
from .generator import clique_expansion
from .hypercore import Hypergraph, is_connected, legal_moves

DEFAULT_BUDGET = 10 ** 8
MAX_MOVE_ENTRIES = 5 * 10 ** 7


def state_count(n: int, m: int) -> int:
    """Positions per side: multisets of m cops times robber vertices."""
    return math.comb(n + m - 1, m) * n


def _check_budget(n, m, budget):
    if m < 1:
        raise DomainError(f"need at least one cop, got m={m}")
    count = state_count(n, m)
    if count > budget:
        raise ResourceError(f"{count} states for n={n}, m={m} exceeds the budget of {budget}")
    return count


def _multisets(n, m):
    arr = np.array(list(itertools.combinations_with_replacement(range(n), m)), dtype=np.int64)
    return arr.reshape(-1, m)


def _closed_adjacency(G2: Hypergraph) -> sp.csr_matrix:
    n = G2.n
    e = G2.edge_array
    rows = np.concatenate([e[:, 0], e[:, 1], np.arange(n)]) if e.size else np.arange(n)
    cols = np.concatenate([e[:, 1], e[:, 0], np.arange(n)]) if e.size else np.arange(n)
    return sp.csr_matrix((np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(n, n))


def _cop_moves(N: sp.csr_matrix, ms: np.ndarray, n: int) -> sp.csr_matrix:
    """S x S matrix: multiset s can become multiset s' in one cop move."""
    S, m = ms.shape
    A = N.astype(bool)
    K = A
    for _ in range(m - 1):
        K = sp.kron(K, A, format="csr")
    if K.nnz > MAX_MOVE_ENTRIES:
        raise ResourceError(f"cop move relation has {K.nnz} entries, limit {MAX_MOVE_ENTRIES}")
    weights = n ** np.arange(m - 1, -1, -1, dtype=np.int64)
    rep = ms @ weights  # ordered index of each multiset's sorted representative
    sub = K[rep].tocoo()
    # column index = ordered tuple reached; decode it and map to its multiset
    digits = (sub.col[:, None] // weights[None, :]) % n
    code = np.sort(digits, axis=1) @ weights
    lookup = {int(c): i for i, c in enumerate(rep.tolist())}
    cols = np.fromiter((lookup[int(c)] for c in code), dtype=np.int64, count=code.size)
    M = sp.csr_matrix((np.ones(cols.size, dtype=np.float32), (sub.row, cols)), shape=(S, S))
    M.data[:] = 1.0
    return M


def solve(G: Hypergraph, m: int, budget: int = DEFAULT_BUDGET):
    """Winning sets of the cop-to-move and robber-to-move positions.

    Returns (multisets, Wc, Wr) where rows index cop multisets and columns
    robber vertices.  Computed on the clique expansion as a least fixed
    point seeded by captures.
    """
    n = G.n
    if n == 0:
        raise DomainError("empty hypergraph")
    _check_budget(n, m, budget)
    G2 = G if G.k == 2 else clique_expansion(G)
    N = _closed_adjacency(G2)
    ms = _multisets(n, m)
    S = ms.shape[0]
    capture = np.zeros((S, n), dtype=bool)
    for i in range(m):
        capture[np.arange(S), ms[:, i]] = True
    M = _cop_moves(N, ms, n)
    Nf = N.astype(np.float32)
    Wc = capture.copy()
    Wr = capture.copy()
    while True:
        # robber to move loses if every move (staying included) lands in a cop-win
        escape = (Nf @ (~Wc).T.astype(np.float32)).T > 0
        Wr_new = capture | ~escape
        Wc_new = capture | (np.asarray(M @ Wr_new.astype(np.float32)) > 0)
        if np.array_equal(Wc_new, Wc) and np.array_equal(Wr_new, Wr):
            break
        Wc, Wr = Wc_new, Wr_new
    return ms, Wc, Wr


def cops_win(G: Hypergraph, m: int, budget: int = DEFAULT_BUDGET) -> bool:
    _, Wc, _ = solve(G, m, budget)
    return bool(Wc.all(axis=1).any())


def cop_number(G: Hypergraph, max_m: int | None = None, budget: int = DEFAULT_BUDGET) -> int:
    """Least m for which m cops win, trying m = 1, 2, ..."""
    if not is_connected(G):
        raise DomainError("cop number is only defined here for connected hypergraphs")
    top = G.n if max_m is None else max_m
    for m in range(1, top + 1):
        if cops_win(G, m, budget):
            return m
    raise ResourceError(f"no m <= {top} cops win")


def direct_hypergraph_cops_win(G: Hypergraph, m: int, budget: int = DEFAULT_BUDGET) -> bool:
    """Same decision computed on the hypergraph itself by a counter-based worklist.

    Cops move along hyperedges through ``legal_moves``; no clique expansion
    and no matrix algebra.
    """
    if not is_connected(G):
        raise DomainError("direct solver requires a connected hypergraph")
    _check_budget(G.n, m, budget)
    n = G.n
    moves = [sorted(legal_moves(G, v)) for v in range(n)]
    states = list(itertools.combinations_with_replacement(range(n), m))
    index = {s: i for i, s in enumerate(states)}
    succ = []
    for s in states:
        succ.append(sorted({index[tuple(sorted(t))] for t in itertools.product(*(moves[c] for c in s))}))
    # the move relation is symmetric, so successors double as predecessors
    S = len(states)
    win_c = [[False] * n for _ in range(S)]
    win_r = [[False] * n for _ in range(S)]
    left = [[len(moves[r]) for r in range(n)] for _ in range(S)]
    queue = deque()
    for i, s in enumerate(states):
        for c in set(s):
            win_c[i][c] = win_r[i][c] = True
            queue.append((i, c, 0))
            queue.append((i, c, 1))
    while queue:
        i, r, side = queue.popleft()
        if side == 0:
            # cop-to-move (i, r) won: robber positions (i, r') moving to r lose a route
            for rp in moves[r]:
                if win_r[i][rp]:
                    continue
                left[i][rp] -= 1
                if left[i][rp] == 0:
                    win_r[i][rp] = True
                    queue.append((i, rp, 1))
        else:
            # robber-to-move (i, r) won: any cop position that can move into it wins
            for ip in succ[i]:
                if not win_c[ip][r]:
                    win_c[ip][r] = True
                    queue.append((ip, r, 0))
    return any(all(row) for row in win_c)
