"""Measuring neighbourhood growth: the xi-expanding properties A1-A3 and
empirical first-neighbourhood concentration checks on G^k(n, p).

A1  |N_E^r(v)| <= d^r / (xi k)              for r >= 1 with d^r <= sqrt(nk)
A2  xi min(|A| d^r, n) <= |N_V^r(A)| <= |A| d^r / xi
A3  xi min(|B| k d^r, n) <= |N_V^r(B)|

Quantifying over every subset is exponential, so A2 and A3 are checked
exactly on singletons and pairs and on random subsets of each size 2^i
beyond that.  The outcome is a sampled certificate, not a proof.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError
from .generator import ModelParams, derive_seed, derived_stats, make_rng, sample_gknp
from .hypercore import (UNREACHABLE, Hypergraph, average_vertex_degree, edge_neighborhood,
                        vertex_neighborhood, vertices_of_edges)

PROPERTIES = ("A1", "A2", "A3")
DEFAULT_BUDGET = 16
DEFAULT_MAX_WITNESSES = 1000
_PAIR_BLOCK = 2048


@dataclass(frozen=True)
class Witness:
    """One (set, r) instance of a property together with its measured size.

    ``members`` are vertices for A1/A2 and edge indices for A3.  ``bound``
    is the side of the inequality the measurement is compared against,
    evaluated at ``xi``.
    """

    property: str
    side: str
    members: tuple[int, ...]
    r: int
    measured: int
    bound: float
    xi: float

    def recompute(self, G: Hypergraph) -> int:
        """Measure the neighbourhood again from the hypergraph alone."""
        if self.property == "A1":
            return len(edge_neighborhood(G, self.members, self.r))
        if self.property == "A2":
            return len(vertex_neighborhood(G, self.members, self.r))
        return len(vertex_neighborhood(G, vertices_of_edges(G, self.members), self.r))


@dataclass
class CertifyResult:
    property: str
    xi: float
    d: float
    passed: bool
    tested: int
    violation_count: int
    violations: list[Witness]


@dataclass
class ExpansionReport:
    degree_used: str
    d: float
    xi_A1: float
    xi_A2: float
    xi_A3: float
    tested_counts: dict[str, int]
    violations: list[Witness]
    r_max: int
    subset_budget: int
    seed: int
    label: str = "sampled certificate"
    notes: list[str] = field(default_factory=list)

    @property
    def xi(self) -> float:
        return min(self.xi_A1, self.xi_A2, self.xi_A3)

    def rows(self) -> list[tuple[str, str, str]]:
        out = [("report", "label", self.label), ("report", "degree_used", self.degree_used),
               ("report", "d", repr(self.d)), ("report", "r_max", str(self.r_max)),
               ("report", "subset_budget", str(self.subset_budget))]
        for prop in PROPERTIES:
            out.append((prop, "xi", repr(getattr(self, f"xi_{prop}"))))
            out.append((prop, "tested", str(self.tested_counts[prop])))
        for w in self.violations:
            out.append((w.property, f"binding_{w.side}",
                        f"r={w.r} measured={w.measured} bound={w.bound!r} set={' '.join(map(str, w.members))}"))
        return out


# --- bookkeeping of the inequalities -----------------------------------------------

def _check_inputs(d, xi=None):
    if not d > 0:
        raise DomainError(f"d must be positive, got {d}")
    if xi is not None and not 0 < xi <= 1:
        raise DomainError(f"xi must lie in (0, 1], got {xi}")


def _violates(prop, side, measured, a, dr, n, k, xi):
    """Vectorised: True where the inequality fails at this xi."""
    if prop == "A1":
        return measured > dr / (xi * k)
    if side == "upper":
        return measured > a * dr / xi
    scale = k if prop == "A3" else 1
    return xi * np.minimum(a * scale * dr, n) > measured


def _bound(prop, side, a, dr, n, k, xi):
    if prop == "A1":
        return dr / (xi * k)
    if side == "upper":
        return a * dr / xi
    scale = k if prop == "A3" else 1
    return xi * min(a * scale * dr, n)


def _ratio(prop, side, measured, a, dr, n, k):
    """Largest xi (before rounding) for which the instance holds."""
    with np.errstate(divide="ignore"):
        if prop == "A1":
            return np.where(measured > 0, dr / (k * np.maximum(measured, 1)), np.inf)
        if side == "upper":
            return a * dr / measured
        scale = k if prop == "A3" else 1
        return measured / np.minimum(a * scale * dr, n)


@dataclass
class _Batch:
    prop: str
    side: str
    r: int
    dr: float
    a: np.ndarray
    measured: np.ndarray
    members: object  # callable index -> tuple

    def witness(self, i, n, k, xi) -> Witness:
        return Witness(self.prop, self.side, self.members(i), self.r, int(self.measured[i]),
                       float(_bound(self.prop, self.side, int(self.a[i]), self.dr, n, k, xi)), xi)


# --- families of tested sets ----------------------------------------------------------

def _radius_range(G, tables, d):
    finite = tables.vv[tables.vv != UNREACHABLE]
    stable = int(finite.max()) if finite.size else 0
    grow = math.ceil(math.log(G.n) / math.log(d)) if d > 1 and G.n > 1 else 0
    return max(1, stable, grow)


def _pair_unions(R: np.ndarray):
    """Yield (i, j, |row_i OR row_j|) over all row pairs i < j of a boolean matrix."""
    rows, n = R.shape
    if rows < 2:
        return
    s = R.sum(axis=1).astype(np.int64)
    M = R.astype(np.float32)  # counts stay below 2**24, so float32 products are exact
    for start in range(0, rows - 1, _PAIR_BLOCK):
        stop = min(rows, start + _PAIR_BLOCK)
        inter = M[start:stop] @ M.T
        upper = np.arange(start, stop)[:, None] < np.arange(rows)[None, :]
        ii, jj = np.nonzero(upper)
        union = s[ii + start] + s[jj] - inter[upper].astype(np.int64)
        yield ii + start, jj, union


def _sample_sizes(total):
    sizes = []
    i = 2
    while 2 ** i < total:
        sizes.append(2 ** i)
        i += 1
    if total > 2:
        sizes.append(total)
    return sizes


def _sampled(rng, total, budget):
    """Uniform subsets of range(total), ``budget`` per size class 2^i (>= 4) plus the full set."""
    out = []
    for size in _sample_sizes(total):
        reps = 1 if size == total else budget
        for _ in range(reps):
            out.append(np.sort(rng.choice(total, size=size, replace=False)))
    return out


def _batches(G: Hypergraph, d: float, prop: str, budget: int, seed: int, tables):
    n, k = G.n, G.k
    r_max = _radius_range(G, tables, d)
    vv, ve = tables.vv, tables.ve
    if prop == "A1":
        limit = math.sqrt(n * k)
        for r in range(1, r_max + 1):
            dr = float(d) ** r
            if dr > limit:
                break
            counts = (ve <= r - 1).sum(axis=1)
            yield _Batch("A1", "upper", r, dr, np.ones(n, dtype=np.int64), counts, lambda i: (int(i),))
        return
    rng = make_rng(derive_seed(seed, "expansion", prop))
    if prop == "A2":
        reach_rows = vv
        total = n
        sides = ("lower", "upper")
        sets = _sampled(rng, n, budget)
        set_dist = [vv[s].min(axis=0) for s in sets]
    else:
        reach_rows = ve.T
        total = G.m
        sides = ("lower",)
        if total == 0:
            return
        sets = _sampled(rng, total, budget)
        set_dist = [ve[:, s].min(axis=1) for s in sets]
    sizes = np.array([len(s) for s in sets], dtype=np.int64)
    for r in range(1, r_max + 1):
        dr = float(d) ** r
        R = reach_rows <= r
        single = R.sum(axis=1).astype(np.int64)
        # a pair containing a saturated row has union |V|, which the singleton
        # checks already dominate on both sides, so only unsaturated rows pair up
        open_rows = np.flatnonzero(single < R.shape[1])
        pairs = [(open_rows[ii], open_rows[jj], u) for ii, jj, u in _pair_unions(R[open_rows])]
        sampled = np.array([int((sd <= r).sum()) for sd in set_dist], dtype=np.int64)
        for side in sides:
            yield _Batch(prop, side, r, dr, np.ones(total, dtype=np.int64), single, lambda i: (int(i),))
            for ii, jj, union in pairs:
                yield _Batch(prop, side, r, dr, np.full(len(ii), 2, dtype=np.int64), union,
                             lambda t, ii=ii, jj=jj: (int(ii[t]), int(jj[t])))
            if sets:
                yield _Batch(prop, side, r, dr, sizes, sampled,
                             lambda t: tuple(int(x) for x in sets[t]))


# --- public API --------------------------------------------------------------------

def _certify(G, d, xi, prop, budget, seed, max_witnesses):
    _check_inputs(d, xi)
    n, k = G.n, G.k
    tested = 0
    count = 0
    found = []
    for b in _batches(G, d, prop, budget, seed, G.metric):
        tested += len(b.measured)
        bad = np.flatnonzero(_violates(prop, b.side, b.measured, b.a, b.dr, n, k, xi))
        count += len(bad)
        for i in bad[: max(0, max_witnesses - len(found))]:
            found.append(b.witness(i, n, k, xi))
    return CertifyResult(prop, xi, float(d), count == 0, tested, count, found)


def certify_A1(G: Hypergraph, d: float, xi: float,
               max_witnesses: int | None = None) -> CertifyResult:
    """Every vertex and every r >= 1 with d^r <= sqrt(nk); all violations are returned."""
    return _certify(G, d, xi, "A1", 0, 0, max_witnesses if max_witnesses is not None else G.n * 64)


def certify_A2(G: Hypergraph, d: float, xi: float, subset_budget: int = DEFAULT_BUDGET,
               seed: int = 0, max_witnesses: int = DEFAULT_MAX_WITNESSES) -> CertifyResult:
    return _certify(G, d, xi, "A2", subset_budget, seed, max_witnesses)


def certify_A3(G: Hypergraph, d: float, xi: float, subset_budget: int = DEFAULT_BUDGET,
               seed: int = 0, max_witnesses: int = DEFAULT_MAX_WITNESSES) -> CertifyResult:
    return _certify(G, d, xi, "A3", subset_budget, seed, max_witnesses)


def _largest_xi(G, d, prop, budget, seed):
    """Largest xi in (0, 1] passing every tested instance, plus binding witnesses."""
    n, k = G.n, G.k
    best = 1.0
    keep = []
    tested = 0
    for b in _batches(G, d, prop, budget, seed, G.metric):
        tested += len(b.measured)
        ratio = _ratio(prop, b.side, b.measured.astype(np.float64), b.a, b.dr, n, k)
        if not ratio.size:
            continue
        lo = float(ratio.min())
        best = min(best, lo)
        near = np.flatnonzero(ratio <= best * (1 + 1e-9))
        if near.size:
            keep.append((b, near))
    xi = best
    # the division above may round up; step down until every near-binding instance holds
    while xi > 0 and any(_violates(prop, b.side, b.measured[idx], b.a[idx], b.dr, n, k, xi).any()
                         for b, idx in keep):
        xi = float(np.nextafter(xi, 0.0))
    binding = []
    if best < 1.0:
        for b, idx in keep:
            ratio = _ratio(prop, b.side, b.measured[idx].astype(np.float64), b.a[idx], b.dr, n, k)
            for t in idx[ratio <= best * (1 + 1e-9)]:
                binding.append(b.witness(t, n, k, xi))
                break
        binding = binding[:1]
    return xi, tested, binding


def measure_expansion(G: Hypergraph, d: float | None = None, degree_used: str = "d",
                      subset_budget: int = DEFAULT_BUDGET, seed: int = 0) -> ExpansionReport:
    """Largest xi for which each of A1, A2, A3 holds on the tested family.

    ``d`` defaults to the measured average vertex degree.  Radii run until
    neighbourhoods stop growing and |A| d^r reaches n; larger r can only
    loosen the inequalities.
    """
    if d is None:
        d = float(average_vertex_degree(G))
    _check_inputs(d)
    tables = G.metric
    values, tested, binding = {}, {}, []
    for prop in PROPERTIES:
        values[prop], tested[prop], w = _largest_xi(G, d, prop, subset_budget, seed)
        binding.extend(w)
    r_max = _radius_range(G, tables, d)
    notes = [f"radii truncated at r={r_max}, where every neighbourhood has stabilised"]
    return ExpansionReport(degree_used, float(d), values["A1"], values["A2"], values["A3"],
                           tested, binding, r_max, subset_budget, seed, notes=notes)


def expansion_reports(G: Hypergraph, d_hat: float | None = None, subset_budget: int = DEFAULT_BUDGET,
                      seed: int = 0) -> list[ExpansionReport]:
    """Reports against the measured degree and, when given, the model degree d_hat."""
    out = [measure_expansion(G, None, "d", subset_budget, seed)]
    if d_hat is not None and d_hat > 0:
        out.append(measure_expansion(G, d_hat, "d_hat", subset_budget, seed))
    return out


# --- empirical concentration of first neighbourhoods ---------------------------------

LEMMA_TAGS = ("lemma-4.1-small", "lemma-4.1-large", "lemma-4.2-small", "lemma-4.2-large",
              "lemma-4.3-small", "lemma-4.3-large", "lemma-4.3")
DEFAULT_EPS = 0.5


@dataclass(frozen=True)
class ConcentrationReport:
    property: str
    trials: int
    passes: int
    parameters: tuple[tuple[str, float], ...]
    status: str = "ok"
    sets_checked: int = 0
    set_failures: int = 0
    flags: tuple[str, ...] = ()

    @property
    def pass_fraction(self) -> float:
        return self.passes / self.trials if self.trials else 0.0

    def merge(self, other: "ConcentrationReport") -> "ConcentrationReport":
        if (self.property, self.parameters, self.status) != (other.property, other.parameters, other.status):
            raise DomainError("only reports of the same property and parameters can be merged")
        return replace(self, trials=self.trials + other.trials, passes=self.passes + other.passes,
                       sets_checked=self.sets_checked + other.sets_checked,
                       set_failures=self.set_failures + other.set_failures,
                       flags=tuple(sorted(set(self.flags) | set(other.flags))))


def default_delta(n: int) -> float:
    return math.sqrt(math.log(math.log(n))) / math.log(n)


def lemma_size_range(tag: str, n: int, k: int, d_hat: float, m: int, eps: float = DEFAULT_EPS) -> tuple[int, int]:
    """Inclusive range of |A| (or |B|) a property quantifies over; empty when lo > hi."""
    if tag == "lemma-4.1-small":
        return 1, min(n, math.floor(2 * n / (k * math.log(n))))
    if tag == "lemma-4.2-small":
        # (|B| k / n)^eps <= 2^-5
        return 1, min(m, math.floor(n * 2.0 ** (-5 / eps) / k))
    if tag == "lemma-4.3-small":
        if d_hat <= 0:
            return 1, n
        return 1, min(n, math.floor(n * 2.0 ** (-6 / eps) / d_hat))
    if tag == "lemma-4.2-large":
        return 1, m
    return 1, n


def _log_uniform_size(rng, hi):
    return int(min(hi, max(1, math.floor(math.exp(rng.random() * math.log(hi + 1))))))


class _Neighbourhoods:
    """First neighbourhoods of vertex and edge sets via the incidence matrix."""

    def __init__(self, G: Hypergraph):
        self.G = G
        inc = G.incidence_matrix
        self.indptr, self.indices = inc.indptr, inc.indices
        self.edges = G.edge_array

    def edges_meeting(self, A) -> np.ndarray:
        mark = np.zeros(self.G.m, dtype=bool)
        for v in A:
            mark[self.indices[self.indptr[v]:self.indptr[v + 1]]] = True
        return np.flatnonzero(mark)

    def vertex_nbhd_size(self, A) -> int:
        mark = np.zeros(self.G.n, dtype=bool)
        mark[np.asarray(A)] = True
        mark[self.edges[self.edges_meeting(A)].ravel()] = True
        return int(mark.sum())

    def span(self, B) -> int:
        return int(np.unique(self.edges[np.asarray(B)].ravel()).size)


def _inequality(tag, nb, S, n, k, d_hat, delta, eps) -> bool:
    a = len(S)
    if tag == "lemma-4.1-small":
        x = nb.edges_meeting(S).size
        return (1 - delta) * a * d_hat / k <= x <= (1 + delta) * a * d_hat / k
    if tag == "lemma-4.1-large":
        return nb.edges_meeting(S).size >= min(a * d_hat / k, n / k) / 16
    if tag == "lemma-4.2-small":
        return nb.span(S) >= (1 - eps) * a * k
    if tag == "lemma-4.2-large":
        return nb.span(S) >= 2.0 ** -12 * min(a * k, n)
    x = nb.vertex_nbhd_size(S)
    if tag == "lemma-4.3-small":
        return (1 - eps) * (1 - delta) * a * d_hat <= x <= (1 + delta) * a * d_hat
    return 2.0 ** -16 * min(a * d_hat, n) <= x <= 2.0 ** 12 * a * d_hat


def _components(tag):
    return ("lemma-4.3-small", "lemma-4.3-large") if tag == "lemma-4.3" else (tag,)


def _hypothesis_flags(n, k, d_hat):
    flags = []
    ratio = d_hat / k
    flags.append(f"dhat/k={ratio:.6g}")
    flags.append(f"(dhat/k)/log^3(n)={ratio / math.log(n) ** 3:.6g}")
    flags.append(f"k/log(n)={k / math.log(n):.6g}")
    flags.append(f"dhat/n={d_hat / n:.6g}")
    if ratio == 0:
        flags.append("degenerate: dhat/k = 0")
    return tuple(flags)


def empirical_lemma_suite(params: ModelParams, which, trials: int, set_budget: int,
                          delta: float | None = None, eps: float = DEFAULT_EPS,
                          max_edges: int | None = None) -> dict[str, ConcentrationReport]:
    """Run several property tags on the same sampled hypergraphs.

    Each trial samples G^k(n, p) with a seed derived from (params.seed,
    trial), draws ``set_budget`` sets per tag with log-uniform size in the
    tag's range, and passes when every set satisfies the inequality.
    """
    which = list(which)
    for tag in which:
        if tag not in LEMMA_TAGS:
            raise DomainError(f"unknown property tag {tag!r}")
    n, k = params.n, params.k
    d_hat = derived_stats(params).d_hat
    if delta is None:
        delta = default_delta(n)
    if not 0 < eps <= 0.5:
        raise DomainError(f"eps must lie in (0, 1/2], got {eps}")
    parameters = (("n", n), ("k", k), ("p", params.p), ("delta", delta), ("eps", eps))
    flags = _hypothesis_flags(n, k, d_hat)
    passes = {t: 0 for t in which}
    checked = {t: 0 for t in which}
    failures = {t: 0 for t in which}
    vacuous = {t: False for t in which}
    for trial in range(trials):
        seed = derive_seed(params.seed, "lemma", trial)
        kwargs = {} if max_edges is None else {"max_edges": max_edges}
        G = sample_gknp(replace(params, seed=seed), **kwargs)
        nb = _Neighbourhoods(G)
        for tag in which:
            rng = make_rng(derive_seed(params.seed, "lemma-sets", tag, trial))
            ok_all = True
            empty = True
            for part in _components(tag):
                lo, hi = lemma_size_range(part, n, k, d_hat, G.m, eps)
                if lo > hi:
                    continue
                empty = False
                total = G.m if part.startswith("lemma-4.2") else n
                for _ in range(set_budget):
                    S = rng.choice(total, size=_log_uniform_size(rng, hi), replace=False)
                    checked[tag] += 1
                    if not _inequality(part, nb, S, n, k, d_hat, delta, eps):
                        failures[tag] += 1
                        ok_all = False
            if empty:
                vacuous[tag] = True
            elif ok_all:
                passes[tag] += 1
    out = {}
    for tag in which:
        # d_hat = 0 makes both sides of every inequality 0; the hypothesis
        # on d_hat / k is plainly unmet, so no trial is counted as a pass
        status = "degenerate" if d_hat == 0 else "vacuous" if vacuous[tag] else "ok"
        out[tag] = ConcentrationReport(tag, trials, passes[tag] if status == "ok" else 0, parameters,
                                       status, checked[tag], failures[tag], flags)
    return out


def empirical_lemma_check(params: ModelParams, which: str, trials: int, set_budget: int,
                          delta: float | None = None, eps: float = DEFAULT_EPS) -> ConcentrationReport:
    return empirical_lemma_suite(params, [which], trials, set_budget, delta, eps)[which]
