"""Maximum bipartite matching (Hopcroft-Karp) and Hall-condition witnesses.

Left vertices are ``0..len(adj)-1``; ``adj[u]`` lists the right vertices
``0..n_right-1`` adjacent to ``u``.  Matchings are returned as two lists,
``match_left[u]`` and ``match_right[w]``, with -1 for unmatched.
"""
from __future__ import annotations

from collections import deque
from collections.abc import Sequence

FREE = -1


def maximum_matching(adj: Sequence[Sequence[int]], n_right: int) -> tuple[list[int], list[int]]:
    n_left = len(adj)
    match_left = [FREE] * n_left
    match_right = [FREE] * n_right
    # greedy start: most small instances are finished here
    for u in range(n_left):
        for w in adj[u]:
            if match_right[w] == FREE:
                match_left[u] = w
                match_right[w] = u
                break
    inf = n_left + 1
    while True:
        layer = [inf] * n_left
        queue = deque()
        for u in range(n_left):
            if match_left[u] == FREE:
                layer[u] = 0
                queue.append(u)
        found = False
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                v = match_right[w]
                if v == FREE:
                    found = True
                elif layer[v] == inf:
                    layer[v] = layer[u] + 1
                    queue.append(v)
        if not found:
            break
        progress = False
        for root in range(n_left):
            if match_left[root] == FREE and _augment(root, adj, layer, match_left, match_right, inf):
                progress = True
        if not progress:
            break
    return match_left, match_right


def _augment(root, adj, layer, match_left, match_right, inf) -> bool:
    # iterative layered DFS; on success flips the path root -> free right vertex
    stack = [(root, iter(adj[root]))]
    trail = []
    while stack:
        u, it = stack[-1]
        advanced = False
        for w in it:
            v = match_right[w]
            if v == FREE:
                trail.append((u, w))
                for a, b in trail:
                    match_left[a] = b
                    match_right[b] = a
                return True
            if layer[v] == layer[u] + 1:
                trail.append((u, w))
                stack.append((v, iter(adj[v])))
                advanced = True
                break
        if not advanced:
            layer[u] = inf  # dead end, prune for this phase
            stack.pop()
            if trail:
                trail.pop()
    return False


def matching_size(match_left: Sequence[int]) -> int:
    return sum(1 for w in match_left if w != FREE)


def has_augmenting_path(adj, match_left, match_right) -> bool:
    """Plain alternating BFS from every free left vertex."""
    seen_right = set()
    queue = deque(u for u in range(len(adj)) if match_left[u] == FREE)
    seen_left = set(queue)
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w in seen_right:
                continue
            seen_right.add(w)
            v = match_right[w]
            if v == FREE:
                return True
            if v not in seen_left:
                seen_left.add(v)
                queue.append(v)
    return False


def hall_violating_set(adj, match_left, match_right) -> frozenset[int] | None:
    """Left set X with |N(X)| < |X|, or None if the matching saturates the left.

    X is everything reachable by alternating paths from the unmatched left
    vertices.  Given a maximum matching, every right vertex reached is
    matched back into X, so |X| - |N(X)| equals the number of unmatched
    left vertices, the largest deficiency any subset can have.
    """
    unmatched = [u for u in range(len(adj)) if match_left[u] == FREE]
    if not unmatched:
        return None
    reached = set(unmatched)
    queue = deque(unmatched)
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            v = match_right[w]
            if v != FREE and v not in reached:
                reached.add(v)
                queue.append(v)
    return frozenset(reached)


def neighbourhood(adj, X) -> set[int]:
    return {w for u in X for w in adj[u]}
