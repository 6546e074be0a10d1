"""Monte Carlo campaigns: sample, measure expansion, synthesize, play, compare
against the regime bound, and write one CSV row per (grid point, trial).

Plan files are flat ``key = value`` lines; ``#`` starts a comment.

    seed = 2024                      # plan seed, 64-bit
    retries = 20                     # synthesis attempts per trial
    robbers.scripted = 50            # scripted robbers per strategy
    expansion.budget = 8             # random subsets per size class; 0 skips measurement
    threshold.escapes_max = 0
    threshold.success_rate_min = 0.5
    threshold.bound_rate_min = 1.0
    point = n=2000 k=12 dhat=90 mode=vertex j=1 trials=100
    point = n=4096 beta=0.105 alpha=0.3 mode=edge j=1 trials=10 xi=1

A point gives n, then k or beta (k = round(n^beta)), then p, dhat or
alpha (dhat = n^alpha), plus mode, j and trials.  Optional keys: xi
(``measured`` by default, or a number used in the cop density), regime,
q, and seed (replaces the plan seed for this point).  With
expansion.budget = 0 no expansion report is made, so every point needs a
numeric xi and the bound columns stay empty.

Seeds.  Every seed is BLAKE2b-64 over the colon-joined reprs of its parts:
the hypergraph of trial t is keyed by (seed, "graph", n, k, p, t, attempt),
so points with equal model parameters and seed share their samples;
disconnected samples are redrawn with the next attempt index.  Expansion
sampling uses (seed, "expansion", t), synthesis (seed, point index, t) and
robbers (seed, point index, t, "robbers").
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .bounds import classify_regime, regime_bound, regime_interval
from .engine import RobberPolicy, play, scripted_robbers
from .errors import DomainError, FormatError, ProtocolError, ResourceError
from .expansion import measure_expansion
from .generator import ModelParams, derive_seed, p_for_dhat, sample_gknp
from .hypercore import average_vertex_degree, is_connected
from .strategy import (MODE_REGIMES, OffRegimeWarning, SynthesisConfig, default_density,
                       strategy_size, synthesize, verify_strategy)

MAX_CONNECT_ATTEMPTS = 100

COLUMNS = ("point", "trial", "n", "k", "p", "dhat", "graph_attempts", "edges", "d",
           "xi_measured", "mode", "j", "xi_q", "q", "q_clamped", "success", "attempts",
           "strategy_size", "regime", "regime_j", "in_regime", "lambda", "bound", "bound_ok",
           "games", "escapes", "max_capture_round", "capture_rounds", "schedule_ok",
           "structure_problems")


@dataclass(frozen=True)
class GridPoint:
    n: int
    k: int
    p: float
    mode: str
    j: int
    trials: int
    xi: str = "measured"
    regime: str | None = None
    q: float | None = None
    seed: int | None = None

    @property
    def dhat(self) -> float:
        return self.p * self.k * math.comb(self.n - 1, self.k - 1)


@dataclass
class ExperimentPlan:
    seed: int = 0
    points: list[GridPoint] = field(default_factory=list)
    retries: int = 20
    scripted: int = 50
    budget: int = 8
    outputs: dict[str, str] = field(default_factory=dict)
    thresholds: dict[str, float] = field(default_factory=dict)


_SETTINGS = {"seed", "retries", "robbers.scripted", "expansion.budget"}


def _parse_point(text, lineno) -> GridPoint:
    fields = {}
    for tok in text.split():
        if "=" not in tok:
            raise FormatError(f"point field {tok!r} is not key=value", lineno)
        key, val = tok.split("=", 1)
        fields[key] = val
    try:
        n = int(fields.pop("n"))
        if "k" in fields:
            k = int(fields.pop("k"))
        else:
            k = round(n ** float(fields.pop("beta")))
        if "p" in fields:
            p = float(fields.pop("p"))
        elif "dhat" in fields:
            p = p_for_dhat(n, k, float(fields.pop("dhat")))
        else:
            p = p_for_dhat(n, k, n ** float(fields.pop("alpha")))
        mode = fields.pop("mode")
        j = int(fields.pop("j"))
        trials = int(fields.pop("trials"))
        xi = fields.pop("xi", "measured")
        if xi != "measured":
            float(xi)
        regime = fields.pop("regime", None)
        q = fields.pop("q", None)
        q = None if q is None else float(q)
        seed = fields.pop("seed", None)
        seed = None if seed is None else int(seed)
    except KeyError as exc:
        raise FormatError(f"point is missing {exc.args[0]!r}", lineno) from None
    except (ValueError, DomainError) as exc:
        raise FormatError(f"bad point value: {exc}", lineno) from None
    if fields:
        raise FormatError(f"unknown point fields {sorted(fields)}", lineno)
    if mode not in MODE_REGIMES:
        raise FormatError(f"mode must be vertex or edge, got {mode!r}", lineno)
    if regime is not None and regime not in MODE_REGIMES[mode]:
        raise FormatError(f"regime {regime!r} does not belong to {mode} mode", lineno)
    if j < 1 or trials < 0:
        raise FormatError("need j >= 1 and trials >= 0", lineno)
    return GridPoint(n, k, p, mode, j, trials, xi, regime, q, seed)


def parse_plan(text: str) -> ExperimentPlan:
    plan = ExperimentPlan()
    measured_at = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"expected key = value, got {raw!r}", lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        try:
            if key == "point":
                plan.points.append(_parse_point(val, lineno))
            elif key == "seed":
                plan.seed = int(val)
            elif key == "retries":
                plan.retries = int(val)
            elif key == "robbers.scripted":
                plan.scripted = int(val)
            elif key == "expansion.budget":
                plan.budget = int(val)
            elif key.startswith("threshold."):
                plan.thresholds[key[len("threshold."):]] = float(val)
            elif key.startswith("output."):
                plan.outputs[key[len("output."):]] = val
            else:
                raise FormatError(f"unknown key {key!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"bad value for {key}: {val!r}", lineno) from None
        if key == "point" and plan.points[-1].xi == "measured":
            measured_at = measured_at or lineno
    if plan.budget <= 0 and measured_at:
        raise FormatError("xi=measured needs expansion.budget > 0", measured_at)
    return plan


def read_plan(path) -> ExperimentPlan:
    with open(path) as fh:
        return parse_plan(fh.read())


# --- running -----------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _format_hist(hist) -> str:
    return " ".join(f"{r}:{hist[r]}" for r in sorted(hist))


def _parse_hist(text, lineno) -> Counter:
    hist = Counter()
    for tok in text.split():
        r, _, c = tok.partition(":")
        try:
            hist[int(r)] += int(c)
        except ValueError:
            raise FormatError(f"bad capture histogram entry {tok!r}", lineno) from None
    return hist


def _bound_regime(mode, j, chosen):
    """Bound regime label and index realised by a strategy (mode, j, density regime)."""
    if mode == "vertex":
        return ("a", j - 1) if chosen == "a" else ("d", j)
    return chosen, j


def _sample_connected(plan_seed, pt: GridPoint, trial):
    plan_seed = _seed(plan_seed, pt)
    for attempt in range(MAX_CONNECT_ATTEMPTS):
        seed = derive_seed(plan_seed, "graph", pt.n, pt.k, pt.p, trial, attempt)
        G = sample_gknp(ModelParams(pt.n, pt.k, pt.p, seed))
        if is_connected(G):
            return G, attempt + 1
    raise DomainError(f"no connected sample in {MAX_CONNECT_ATTEMPTS} attempts at n={pt.n}, "
                      f"k={pt.k}, p={pt.p}")


def _seed(plan_seed, pt):
    return plan_seed if pt.seed is None else pt.seed


def _run_point_trial(plan, index, pt, trial, G, attempts, report):
    seed = _seed(plan.seed, pt)
    d = float(average_vertex_degree(G))
    xi_m = None if report is None else report.xi
    xi_q = xi_m if pt.xi == "measured" else float(pt.xi)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OffRegimeWarning)
        dens = default_density(G.n, G.k, d, pt.j, pt.mode, pt.regime, xi_q)
    q = dens.q if pt.q is None else pt.q
    cfg = SynthesisConfig(pt.mode, pt.j, q, plan.retries, "d", xi_q, dens.regime)
    res = synthesize(G, cfg, derive_seed(seed, index, trial))
    regime, rj = _bound_regime(pt.mode, pt.j, dens.regime)
    lam = bound = bound_ok = in_regime = None
    if rj >= 1:
        lo, hi = regime_interval(G.n, G.k, regime, rj)
        in_regime = lo * (1 - 1e-12) <= d <= hi * (1 + 1e-12)
        live = [rb for rb in classify_regime(G.n, G.k, d, xi_m or 1.0)
                if rb.regime == regime and rb.j == rj and not rb.collapsed] if d >= G.k else []
        if xi_m is not None:
            bound = regime_bound(G.n, G.k, d, regime, rj, xi_m)
            lam = live[0].lam if live else None
    row = {"point": index, "trial": trial, "n": G.n, "k": G.k, "p": pt.p, "dhat": pt.dhat,
           "graph_attempts": attempts, "edges": G.m, "d": d, "xi_measured": xi_m,
           "mode": pt.mode, "j": pt.j, "xi_q": xi_q, "q": q, "q_clamped": dens.clamped and pt.q is None,
           "success": res.ok, "attempts": res.attempts, "strategy_size": strategy_size(res.strategy),
           "regime": regime, "regime_j": rj, "in_regime": in_regime, "lambda": lam, "bound": bound}
    games = escapes = 0
    worst = None
    hist = Counter()
    problems = None
    if res.ok:
        s = res.strategy
        bound_ok = strategy_size(s) <= bound if bound is not None else None
        rseed = derive_seed(seed, index, trial, "robbers")
        robbers = [RobberPolicy("greedy", seed=rseed), RobberPolicy("random", seed=rseed)]
        robbers += scripted_robbers(G, s, plan.scripted, rseed)
        deadline = pt.j if pt.mode == "vertex" else pt.j + 1
        for rob in robbers:
            out = play(G, s, rob)
            games += 1
            if not out.captured:
                escapes += 1
            else:
                hist[out.capture_round] += 1
                worst = out.capture_round if worst is None else max(worst, out.capture_round)
        late = worst is not None and worst > deadline
        if escapes:
            problems = len(verify_strategy(G, s))
        row["schedule_ok"] = escapes == 0 and not late
    else:
        row["schedule_ok"] = None
    row.update(bound_ok=bound_ok, games=games, escapes=escapes, max_capture_round=worst,
               capture_rounds=_format_hist(hist), structure_problems=problems)
    return row


def _run_group(plan, members, trial):
    """All points sharing (n, k, p) on the hypergraph of one trial."""
    pt0 = members[0][1]
    try:
        G, attempts = _sample_connected(plan.seed, pt0, trial)
        report = None
        if plan.budget > 0:
            report = measure_expansion(G, subset_budget=plan.budget,
                                       seed=derive_seed(_seed(plan.seed, pt0), "expansion", trial))
        return [_run_point_trial(plan, i, pt, trial, G, attempts, report)
                for i, pt in members if trial < pt.trials]
    except (DomainError, ResourceError, ProtocolError) as exc:
        raise type(exc)(f"grid points {[i for i, _ in members]}, trial {trial}: {exc}") from exc


def run_campaign(plan: ExperimentPlan, jobs: int = 1) -> str:
    """CSV text with one row per (point, trial), ordered by point then trial."""
    groups = defaultdict(list)
    for i, pt in enumerate(plan.points):
        groups[(pt.n, pt.k, pt.p, pt.seed)].append((i, pt))
    tasks = [(members, t) for members in groups.values()
             for t in range(max(pt.trials for _, pt in members))]
    rows = []
    if jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            for chunk in ex.map(_run_group, [plan] * len(tasks), *zip(*tasks)):
                rows.extend(chunk)
    else:
        for members, t in tasks:
            rows.extend(_run_group(plan, members, t))
    rows.sort(key=lambda r: (r["point"], r["trial"]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in COLUMNS])
    return buf.getvalue()


# --- summaries and thresholds ------------------------------------------------------------

SUMMARY_COLUMNS = ("point", "rows", "successes", "success_rate", "mean_size", "max_size",
                   "capture_rounds", "bound_checked", "bound_rate", "escapes")


def parse_report(text: str) -> list[dict[str, str]]:
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty report", 1)
    header = next(csv.reader([lines[0]]))
    for col in ("point", "trial", "success", "strategy_size", "bound", "bound_ok",
                "escapes", "capture_rounds", "in_regime"):
        if col not in header:
            raise FormatError(f"missing column {col!r}", 1)
    rows = []
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        vals = next(csv.reader([line]))
        if len(vals) != len(header):
            raise FormatError(f"expected {len(header)} fields, got {len(vals)}", lineno)
        row = dict(zip(header, vals))
        try:
            int(row["point"]), int(row["trial"]), int(row["strategy_size"]), int(row["escapes"] or 0)
            if row["success"] not in ("0", "1"):
                raise ValueError(row["success"])
            if row["bound"]:
                float(row["bound"])
        except ValueError:
            raise FormatError("malformed field", lineno) from None
        row["_hist"] = _parse_hist(row["capture_rounds"], lineno)
        row["_line"] = lineno
        rows.append(row)
    return rows


def recompute_bound_ok(row: dict[str, str]) -> str:
    """bound_ok from the row's own strategy_size and bound columns."""
    if row["success"] != "1" or not row["bound"]:
        return ""
    return "1" if int(row["strategy_size"]) <= float(row["bound"]) else "0"


def _aggregate(rows):
    by_point = defaultdict(list)
    for r in rows:
        by_point[int(r["point"])].append(r)
    out = []
    for pt in sorted(by_point):
        rs = by_point[pt]
        ok = [r for r in rs if r["success"] == "1"]
        sizes = [int(r["strategy_size"]) for r in ok]
        hist = sum((r["_hist"] for r in rs), Counter())
        checked = [r for r in ok if r["bound_ok"] and r["in_regime"] == "1"]
        out.append({
            "point": pt, "rows": len(rs), "successes": len(ok),
            "success_rate": len(ok) / len(rs),
            "mean_size": sum(sizes) / len(sizes) if sizes else None,
            "max_size": max(sizes) if sizes else None,
            "capture_rounds": _format_hist(hist),
            "bound_checked": len(checked),
            "bound_rate": (sum(r["bound_ok"] == "1" for r in checked) / len(checked)) if checked else None,
            "escapes": sum(int(r["escapes"] or 0) for r in rs),
        })
    return out


def summarize(text: str) -> str:
    """Per-point aggregates of a campaign report as CSV."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for agg in _aggregate(parse_report(text)):
        w.writerow([_fmt(agg[c]) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def check_thresholds(text: str, thresholds: dict[str, float]) -> list[str]:
    """Failed acceptance checks, one message each; empty when all pass.

    Only thresholds present in ``thresholds`` are applied.
    """
    rows = parse_report(text)
    failed = []
    for r in rows:
        if r.get("bound_ok", "") != recompute_bound_ok(r):
            failed.append(f"line {r['_line']}: bound_ok does not match its columns")
    for agg in _aggregate(rows):
        pt = agg["point"]
        if "escapes_max" in thresholds and agg["escapes"] > thresholds["escapes_max"]:
            failed.append(f"point {pt}: {agg['escapes']} escapes")
        if "success_rate_min" in thresholds and agg["success_rate"] < thresholds["success_rate_min"]:
            failed.append(f"point {pt}: success rate {agg['success_rate']:.3f}")
        if ("bound_rate_min" in thresholds and agg["bound_rate"] is not None
                and agg["bound_rate"] < thresholds["bound_rate_min"]):
            failed.append(f"point {pt}: bound satisfied in {agg['bound_rate']:.3f} of rows")
    late = [r for r in rows if r.get("schedule_ok") == "0"]
    if "escapes_max" in thresholds and late:
        failed.append(f"{len(late)} rows missed the capture schedule")
    return failed
