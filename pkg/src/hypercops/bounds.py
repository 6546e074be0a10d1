"""Regime bounds on the cop number, zigzag exponent curves and Chernoff tails.

All logarithms are natural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

REGIMES = ("a", "b", "c", "d")
VERTEX_REGIMES = ("a", "d")
EDGE_REGIMES = ("b", "c")
_REL_TOL = 1e-12


@dataclass(frozen=True)
class RegimeBound:
    regime: str
    j: int
    lower: float
    upper: float
    lam: int
    bound: float | None
    collapsed: bool = False

    @property
    def mode(self) -> str:
        return "vertex" if self.regime in VERTEX_REGIMES else "edge"

    @property
    def strategy_j(self) -> int:
        """Surrounding radius of the strategy realizing this bound.

        Regime (a) with index j is realized by vertex surrounding at
        radius j + 1; the other regimes use j itself.
        """
        return self.j + 1 if self.regime == "a" else self.j


def _root(x: float, e: int) -> float:
    return math.exp(math.log(x) / e)


def regime_interval(n: int, k: int, regime: str, j: int) -> tuple[float, float]:
    """Closed d-interval of a regime; lower > upper means it collapsed."""
    if j < 1:
        raise DomainError(f"j must be >= 1, got {j}")
    if regime == "a":
        return _root(n, 2 * j + 1), _root(n / k, 2 * j)
    if regime == "b":
        return _root(n / k, 2 * j), _root(n, 2 * j)
    if regime == "c":
        return _root(n, 2 * j), _root(n * k, 2 * j)
    if regime == "d":
        return _root(n * k, 2 * j), _root(n, 2 * j - 1)
    raise DomainError(f"unknown regime {regime!r}")


def regime_lambda(n: int, k: int, d: float, regime: str, j: int) -> int:
    ln = math.log(n)
    if regime == "a":
        return max(1, math.ceil(n / d ** (2 * j + 1) * ln))
    if regime == "c":
        return max(1, math.ceil(n / d ** (2 * j) * ln), math.ceil(k / d ** j * ln))
    return 1


def regime_bound(n: int, k: int, d: float, regime: str, j: int, xi: float = 1.0) -> float:
    """Cop-count bound of one regime, evaluated whether or not d lies inside it."""
    _check_xi(xi)
    ln = math.log(n)
    lam = regime_lambda(n, k, d, regime, j)
    if regime == "a":
        return 20 * xi ** -2 * d ** j * lam
    if regime == "b":
        return 20 / xi * n / (k * d ** j) * ln
    if regime == "c":
        return 20 * xi ** -2 * d ** j / k * lam
    if regime == "d":
        return 20 / xi * n / d ** j * ln
    raise DomainError(f"unknown regime {regime!r}")


def _check_xi(xi):
    if not 0 < xi <= 1:
        raise DomainError(f"xi must lie in (0, 1], got {xi}")


def _inside(x, lo, hi):
    return lo * (1 - _REL_TOL) <= x <= hi * (1 + _REL_TOL)


def classify_regime(n: int, k: int, d: float, xi: float = 1.0,
                    require_k_le_d: bool = True) -> list[RegimeBound]:
    """Every (regime, j) whose closed interval contains d, ordered by j then regime.

    A collapsed regime (empty interval) is reported, flagged and without a
    bound, when d lies between its two crossed endpoints.  Passing
    ``require_k_le_d=False`` allows d < k, which no connected k-graph has,
    so that collapsed regimes can be inspected on their own.
    """
    if not 2 <= k <= n:
        raise DomainError(f"need 2 <= k <= n, got k={k}, n={n}")
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    if require_k_le_d and d < k:
        raise DomainError(f"d={d} < k={k}: a connected k-graph has k <= d")
    if d > n:
        raise DomainError(f"d={d} exceeds n={n}")
    _check_xi(xi)
    out = []
    j = 1
    while _root(n, 2 * j - 1) >= d * (1 - _REL_TOL) or j == 1:
        for regime in REGIMES:
            lo, hi = regime_interval(n, k, regime, j)
            if lo <= hi * (1 + _REL_TOL):
                if _inside(d, lo, hi):
                    out.append(RegimeBound(regime, j, lo, hi, regime_lambda(n, k, d, regime, j),
                                           regime_bound(n, k, d, regime, j, xi)))
            elif _inside(d, hi, lo):
                out.append(RegimeBound(regime, j, lo, hi, 1, None, collapsed=True))
        j += 1
    return out


def best_bound(n: int, k: int, d: float, xi: float = 1.0) -> RegimeBound:
    live = [rb for rb in classify_regime(n, k, d, xi) if not rb.collapsed]
    return min(live, key=lambda rb: rb.bound)


def meyniel_bound(n: int, k: int, xi: float = 1.0) -> float:
    """20 xi^-2 sqrt(n/k) log n."""
    if not 2 <= k <= n:
        raise DomainError(f"need 2 <= k <= n, got k={k}, n={n}")
    _check_xi(xi)
    return 20 * xi ** -2 * math.sqrt(n / k) * math.log(n)


# --- zigzag exponents --------------------------------------------------------------

@dataclass(frozen=True)
class ZigzagPoint:
    alpha: float
    beta: float
    f_vertex: float
    f_edge: float

    @property
    def f(self) -> float:
        return min(self.f_vertex, self.f_edge)


def _exponents(alpha: float, beta: float) -> tuple[float, float]:
    # alpha in [1/(m+1), 1/m]; even m = 2j sits between regimes (a) and (b),
    # odd m = 2j-1 between (c) and (d)
    m = math.floor(1 / alpha)
    if m % 2 == 0:
        j = m // 2
        return j * alpha, 1 - j * alpha - beta
    j = (m + 1) // 2
    return 1 - j * alpha, j * alpha - beta


def zigzag_point(beta: float, alpha: float) -> ZigzagPoint:
    """Log-scale exponents of the vertex and edge strategy bounds.

    With d = n^alpha and k = n^beta, constants and logarithmic factors
    dropped, the vertex strategy gives n^(j alpha) or n^(1 - j alpha) and
    the edge strategy n^(1 - j alpha - beta) or n^(j alpha - beta).
    """
    if not 0 <= beta < 1:
        raise DomainError(f"beta must lie in [0, 1), got {beta}")
    if not alpha < 1:
        raise DomainError(f"alpha must be < 1, got {alpha}")
    if alpha <= beta:
        raise DomainError(f"alpha={alpha} must exceed beta={beta}")
    if not math.isfinite(1 / alpha):
        raise DomainError(f"alpha={alpha} is too small to place on the zigzag")
    fv, fe = _exponents(alpha, beta)
    return ZigzagPoint(alpha, beta, fv, fe)


def zigzag_curves(beta: float, alphas) -> list[ZigzagPoint]:
    return [zigzag_point(beta, a) for a in alphas]


def zigzag_intersections(beta: float) -> list[float]:
    """alpha values in (beta, 1) where the vertex and edge curves cross.

    They are (1 - beta)/(2j) and (1 + beta)/(2j); both curves equal
    (1 - beta)/2 there.
    """
    out = []
    j = 1
    while (1 + beta) / (2 * j) > beta:
        for a in ((1 - beta) / (2 * j), (1 + beta) / (2 * j)):
            if beta < a < 1:
                out.append(a)
        j += 1
    return sorted(out)


def graph_zigzag(alpha: float) -> float:
    """Reference exponent for G(n, p): j x between 1/(2j+1) and 1/(2j), 1 - j x above."""
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return _exponents(alpha, 0.0)[0]


# --- Chernoff tails ------------------------------------------------------------------

CHERNOFF_KINDS = ("two-sided", "lower", "small-a")


def chernoff_tail(ex: float, t: float, which: str = "two-sided") -> float:
    """Upper bound on a binomial tail probability.

    two-sided: P(|X - EX| >= t) <= 2 exp(-t^2 / (2 (EX + t/3)))
    lower:     P(X <= EX - t)   <= exp(-t^2 / (2 EX))
    small-a:   P(X <= a)        <= exp(-4a), with ``t`` playing a; needs 10a <= EX
    """
    if ex < 0 or t < 0:
        raise DomainError(f"need ex >= 0 and t >= 0, got ex={ex}, t={t}")
    if which == "two-sided":
        if t == 0:
            return 2.0
        return 2 * math.exp(-t * t / (2 * (ex + t / 3)))
    if which == "lower":
        if t == 0:
            return 1.0
        if ex == 0:
            return 0.0
        return math.exp(-t * t / (2 * ex))
    if which == "small-a":
        if 10 * t > ex:
            raise DomainError(f"small-a bound needs 10a <= EX, got a={t}, EX={ex}")
        return math.exp(-4 * t)
    raise DomainError(f"unknown tail kind {which!r}")
