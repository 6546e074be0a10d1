"""Command-line front end: ``hypercops <subcommand> ...``.

Exit status: 0 on success, 1 when an acceptance threshold or a requested
certificate fails, 2 on usage errors (bad arguments, malformed files,
out-of-domain parameters, exhausted resource limits).
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
import warnings

from . import bounds, campaign, engine, expansion, generator, hypercore, oracle, strategy
from .errors import DomainError, FormatError, ProtocolError, ResourceError


class _UsageError(Exception):
    pass


def _csv(rows, header=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, text: str) -> None:
    path = getattr(args, "output", None)
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _model(args) -> generator.ModelParams:
    given = [x for x in (args.p, args.dhat) if x is not None]
    if len(given) != 1:
        raise _UsageError("give exactly one of --p and --dhat")
    if args.dhat is not None:
        return generator.ModelParams.from_dhat(args.n, args.k, args.dhat, args.seed)
    return generator.ModelParams(args.n, args.k, args.p, args.seed)


# --- subcommands -----------------------------------------------------------------------

def cmd_gen(args) -> int:
    params = _model(args)
    G = generator.sample_gknp(params)
    if args.stats:
        st = generator.derived_stats(params)
        print(f"p={params.p!r} expected_edges={st.expected_edge_count!r} E[d]={st.expected_degree!r} "
              f"dhat={st.d_hat!r} delta={st.delta!r} edges={G.m}", file=sys.stderr)
    _emit(args, hypercore.format_hypergraph(G))
    return 0


def cmd_bounds(args) -> int:
    if args.what == "regime":
        rows = bounds.classify_regime(args.n, args.k, args.d, args.xi,
                                      require_k_le_d=not args.allow_small_d)
        _emit(args, _csv([(r.regime, r.j, repr(r.lower), repr(r.upper),
                           "" if r.lam is None else r.lam, "" if r.bound is None else repr(r.bound),
                           int(r.collapsed)) for r in rows],
                         ("regime", "j", "lower", "upper", "lambda", "bound", "collapsed")))
    elif args.what == "zigzag":
        if args.step <= 0:
            raise _UsageError("--step must be positive")
        count = int(round((args.alpha_max - args.alpha_min) / args.step)) + 1
        alphas = [args.alpha_min + i * args.step for i in range(count)]
        alphas = [a for a in alphas if a <= args.alpha_max + 1e-12]
        pts = bounds.zigzag_curves(args.beta, alphas)
        _emit(args, _csv([(repr(z.alpha), repr(z.f_vertex), repr(z.f_edge), repr(z.f)) for z in pts],
                         ("alpha", "f_vertex", "f_edge", "f")))
    elif args.what == "intersections":
        _emit(args, _csv([(repr(a),) for a in bounds.zigzag_intersections(args.beta)], ("alpha",)))
    else:
        _emit(args, f"{bounds.meyniel_bound(args.n, args.k, args.xi)!r}\n")
    return 0


def cmd_expansion(args) -> int:
    if args.what == "certify":
        G = hypercore.read_hypergraph(args.input)
        d = args.d if args.d is not None else None
        report = expansion.measure_expansion(G, d, "d" if d is None else "given",
                                             args.budget, args.seed)
        rows = list(report.rows())
        failed = []
        if args.xi is not None:
            checks = (expansion.certify_A1(G, report.d, args.xi),
                      expansion.certify_A2(G, report.d, args.xi, args.budget, args.seed),
                      expansion.certify_A3(G, report.d, args.xi, args.budget, args.seed))
            for res in checks:
                rows.append((res.property, "certified_at", repr(args.xi)))
                rows.append((res.property, "passed", str(int(res.passed))))
                rows.append((res.property, "violations", str(res.violation_count)))
                if not res.passed:
                    failed.append(res.property)
        _emit(args, _csv(rows, ("property", "parameter", "value")))
        print(f"{report.label}: d={report.d:.4f} xi_A1={report.xi_A1:.4g} xi_A2={report.xi_A2:.4g} "
              f"xi_A3={report.xi_A3:.4g} xi={report.xi:.4g}", file=sys.stderr)
        if failed:
            print(f"not {args.xi}-expanding on the tested family: {', '.join(failed)}", file=sys.stderr)
            return 1
        return 0
    params = _model(args)
    tags = [t for spec in args.which for t in spec.split(",") if t]
    reports = expansion.empirical_lemma_suite(params, tags, args.trials, args.sets, args.delta, args.eps)
    rows = []
    for tag in tags:
        r = reports[tag]
        rows += [(tag, "status", r.status), (tag, "trials", str(r.trials)), (tag, "passes", str(r.passes)),
                 (tag, "pass_fraction", repr(r.pass_fraction)), (tag, "sets_checked", str(r.sets_checked)),
                 (tag, "set_failures", str(r.set_failures))]
        rows += [(tag, name, repr(val)) for name, val in r.parameters]
        rows += [(tag, "flag", f) for f in r.flags]
        print(f"{tag}: {r.passes}/{r.trials} trials passed ({r.status})", file=sys.stderr)
    _emit(args, _csv(rows, ("property", "parameter", "value")))
    return 0


def cmd_strategy(args) -> int:
    G = hypercore.read_hypergraph(args.input)
    if args.q is not None and args.regime is not None:
        raise _UsageError("give at most one of --q and --regime")
    d = float(hypercore.average_vertex_degree(G))
    if args.q is not None:
        q, regime = args.q, None
    else:
        dens = strategy.default_density(G.n, G.k, d, args.j, args.mode, args.regime, args.xi)
        q, regime = dens.q, dens.regime
    cfg = strategy.SynthesisConfig(args.mode, args.j, q, args.retries, "d", args.xi, regime)
    res = strategy.synthesize(G, cfg, args.seed)
    if not res.ok:
        f = res.failure
        print(f"synthesis failed after {res.attempts} attempts at q={q!r}: "
              f"{len(f.failures)} starts without a saturating matching", file=sys.stderr)
        for vf in f.failures[:5]:
            print(f"  start {vf.v}: {vf.matched}/{vf.targets} targets matched, "
                  f"deficiency {vf.deficiency}", file=sys.stderr)
        return 1
    print(f"strategy with {strategy.strategy_size(res.strategy)} cops (q={q!r}, "
          f"attempt {res.attempts})", file=sys.stderr)
    _emit(args, strategy.format_strategy(res.strategy))
    return 0


def cmd_engine(args) -> int:
    G = hypercore.read_hypergraph(args.input)
    s = strategy.read_strategy(args.strategy, G)
    if args.robber == "script":
        if not args.script:
            raise _UsageError("--robber script needs --script")
        try:
            script = tuple(int(x) for x in args.script.replace(",", " ").split())
        except ValueError:
            raise _UsageError("--script must list vertex ids") from None
        policy = engine.RobberPolicy("scripted", args.seed, script)
    else:
        policy = engine.RobberPolicy(args.robber, args.seed, start=args.start)
    out = engine.play(G, s, policy, args.max_rounds)
    _emit(args, engine.format_transcript(out))
    verdict = f"captured in round {out.capture_round}" if out.captured else "robber escaped"
    print(f"{verdict} (robber started at {out.robber_start})", file=sys.stderr)
    return 0


def cmd_oracle(args) -> int:
    G = hypercore.read_hypergraph(args.input)
    if args.m is not None:
        win = oracle.cops_win(G, args.m, args.budget)
        _emit(args, f"{int(win)}\n")
    else:
        _emit(args, f"{oracle.cop_number(G, args.max_m, args.budget)}\n")
    return 0


def cmd_campaign(args) -> int:
    plan = campaign.read_plan(args.plan)
    text = campaign.run_campaign(plan, jobs=args.jobs)
    if not getattr(args, "output", None) and "csv" in plan.outputs:
        args.output = plan.outputs["csv"]
    _emit(args, text)
    if "summary" in plan.outputs:
        with open(plan.outputs["summary"], "w") as fh:
            fh.write(campaign.summarize(text))
    failed = campaign.check_thresholds(text, plan.thresholds)
    for msg in failed:
        print(f"threshold failed: {msg}", file=sys.stderr)
    return 1 if failed else 0


def cmd_summarize(args) -> int:
    with open(args.input) as fh:
        _emit(args, campaign.summarize(fh.read()))
    return 0


# --- parser --------------------------------------------------------------------------

def _globals(sub: bool) -> argparse.ArgumentParser:
    # on subcommands the defaults are suppressed so flags given before the
    # subcommand name are not overwritten
    p = argparse.ArgumentParser(add_help=False)
    d = (lambda v: argparse.SUPPRESS) if sub else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="64-bit seed")
    p.add_argument("--jobs", type=int, default=d(1), help="parallel workers for campaigns")
    p.add_argument("--output", default=d(None), help="write the result here instead of stdout")
    return p


def _model_args(p):
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--dhat", type=float)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="hypercops", parents=[_globals(False)],
                                  description="Cops and robber on k-uniform hypergraphs.")
    common = _globals(True)
    subs = top.add_subparsers(dest="command", required=True)

    p = subs.add_parser("gen", parents=[common], help="sample G^k(n, p)")
    _model_args(p)
    p.add_argument("--stats", action="store_true", help="print model statistics to stderr")
    p.set_defaults(func=cmd_gen)

    p = subs.add_parser("bounds", parents=[common], help="regime bounds and zigzag curves")
    bsub = p.add_subparsers(dest="what", required=True)
    b = bsub.add_parser("regime", parents=[common])
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--d", type=float, required=True)
    b.add_argument("--xi", type=float, default=1.0)
    b.add_argument("--allow-small-d", action="store_true", help="permit d < k")
    b = bsub.add_parser("zigzag", parents=[common])
    b.add_argument("--beta", type=float, required=True)
    b.add_argument("--alpha-min", type=float, required=True)
    b.add_argument("--alpha-max", type=float, required=True)
    b.add_argument("--step", type=float, required=True)
    b = bsub.add_parser("intersections", parents=[common])
    b.add_argument("--beta", type=float, required=True)
    b = bsub.add_parser("meyniel", parents=[common])
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--xi", type=float, default=1.0)
    p.set_defaults(func=cmd_bounds)

    p = subs.add_parser("expansion", parents=[common], help="expansion certificates and lemma checks")
    esub = p.add_subparsers(dest="what", required=True)
    e = esub.add_parser("certify", parents=[common])
    e.add_argument("--input", required=True)
    e.add_argument("--xi", type=float, help="also certify every property at this xi")
    e.add_argument("--budget", type=int, default=expansion.DEFAULT_BUDGET,
                   help="random subsets per size class")
    e.add_argument("--d", type=float, help="degree parameter (default: measured average degree)")
    e = esub.add_parser("lemma", parents=[common])
    e.add_argument("--which", action="append", required=True, help=f"one of {', '.join(expansion.LEMMA_TAGS)}")
    e.add_argument("--trials", type=int, required=True)
    e.add_argument("--sets", type=int, default=200, help="sets per trial")
    e.add_argument("--delta", type=float)
    e.add_argument("--eps", type=float, default=expansion.DEFAULT_EPS)
    _model_args(e)
    p.set_defaults(func=cmd_expansion)

    p = subs.add_parser("strategy", parents=[common], help="cop strategy synthesis")
    ssub = p.add_subparsers(dest="what", required=True)
    s = ssub.add_parser("synth", parents=[common])
    s.add_argument("--input", required=True)
    s.add_argument("--mode", choices=strategy.MODES, required=True)
    s.add_argument("--j", type=int, required=True)
    s.add_argument("--q", type=float)
    s.add_argument("--regime", choices=bounds.REGIMES)
    s.add_argument("--xi", type=float, default=1.0)
    s.add_argument("--retries", type=int, default=20)
    p.set_defaults(func=cmd_strategy)

    p = subs.add_parser("engine", parents=[common], help="play a strategy against a robber")
    gsub = p.add_subparsers(dest="what", required=True)
    g = gsub.add_parser("play", parents=[common])
    g.add_argument("--input", required=True)
    g.add_argument("--strategy", required=True)
    g.add_argument("--robber", choices=("greedy", "random", "script", "stay"), required=True)
    g.add_argument("--script", help="robber vertices, placement first")
    g.add_argument("--start", type=int, help="fixed robber placement")
    g.add_argument("--max-rounds", type=int)
    p.set_defaults(func=cmd_engine)

    p = subs.add_parser("oracle", parents=[common], help="exact cop numbers of small hypergraphs")
    osub = p.add_subparsers(dest="what", required=True)
    o = osub.add_parser("copnum", parents=[common])
    o.add_argument("--input", required=True)
    o.add_argument("--max-m", type=int)
    o.add_argument("--m", type=int, help="only decide whether m cops win")
    o.add_argument("--budget", type=int, default=oracle.DEFAULT_BUDGET)
    p.set_defaults(func=cmd_oracle)

    p = subs.add_parser("campaign", parents=[common], help="run an experiment plan")
    p.add_argument("--plan", required=True)
    p.set_defaults(func=cmd_campaign)

    p = subs.add_parser("summarize", parents=[common], help="aggregate a campaign CSV")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_summarize)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    warnings.formatwarning = lambda message, *rest, **kw: f"hypercops: warning: {message}\n"
    try:
        return args.func(args)
    except _UsageError as exc:
        parser.error(str(exc))
    except (DomainError, FormatError, ResourceError, ProtocolError, OSError) as exc:
        print(f"hypercops: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
