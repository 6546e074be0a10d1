"""Vertex versus edge strategies along the beta = 2/19 zigzag at n = 4096.

For each alpha (dhat = n^alpha, k = round(n^beta) = 2) every (mode, j) whose
per-start target set is small enough to match runs with xi = 1 in the cop
density and the default claim regime.  The empirical winner is the mode of
the (mode, j) with the smallest mean strategy size, a failed synthesis
counting as n cops; it is compared with the smaller analytic branch.  The
script prints the per-alpha comparison and writes the raw campaign CSV that
the test suite freezes as a fixture.

    python3 notebooks/zigzag_sweep.py [out.csv]
"""
import math
import sys
import time

from hypercops.bounds import zigzag_point
from hypercops.campaign import parse_plan, parse_report, run_campaign

N = 4096
BETA = 2 / 19
K = round(N ** BETA)
ALPHAS = (0.40, 0.42, 0.46, 0.48, 0.50, 0.52, 0.54, 0.57, 0.60, 0.63, 0.66, 0.70)
TRIALS = 2
# expected targets per robber start above which matching every start is too slow
TARGET_CAP = 400


def expected_targets(alpha, mode, j):
    dhat = N ** alpha
    nbrs = dhat * (K - 1) / K
    return nbrs ** (j - 1) * (1 if mode == "vertex" else dhat / K)


def candidates(alpha):
    """(mode, j) pairs run at alpha, in plan order."""
    out = []
    for mode in ("vertex", "edge"):
        j = 1
        while expected_targets(alpha, mode, j) <= TARGET_CAP:
            out.append((mode, j))
            j += 1
    return out


def grid(alphas=ALPHAS):
    return [(a, mode, j) for a in alphas for mode, j in candidates(a)]


def plan_text(alphas=ALPHAS, trials=TRIALS, limit=None):
    lines = ["seed = 19", "retries = 20", "robbers.scripted = 0", "expansion.budget = 0"]
    for a, mode, j in grid(alphas)[:limit]:
        lines.append(f"point = n={N} beta={BETA!r} alpha={a!r} mode={mode} j={j} "
                     f"xi=1 trials={trials}")
    return "\n".join(lines) + "\n"


def winners(report_text, alphas=ALPHAS):
    """alpha -> (analytic mode, empirical mode or None on a tie, {(mode, j): mean size})."""
    rows = parse_report(report_text)
    sizes = {}
    for r in rows:
        size = int(r["strategy_size"]) if r["success"] == "1" else int(r["n"])
        sizes.setdefault(int(r["point"]), []).append(size)
    means = {}
    for i, (a, mode, j) in enumerate(grid(alphas)):
        means.setdefault(a, {})[mode, j] = sum(sizes[i]) / len(sizes[i])
    out = {}
    for a in alphas:
        z = zigzag_point(BETA, a)
        analytic = "vertex" if z.f_vertex < z.f_edge else "edge"
        best = {mode: min(v for (m, _), v in means[a].items() if m == mode)
                for mode in ("vertex", "edge")}
        empirical = None if best["vertex"] == best["edge"] else min(best, key=best.get)
        out[a] = (analytic, empirical, means[a])
    return out


def main(argv):
    t = time.time()
    report = run_campaign(parse_plan(plan_text()))
    if len(argv) > 1:
        with open(argv[1], "w") as fh:
            fh.write(report)
    table = winners(report)
    agree = 0
    print("alpha  analytic  empirical  mean size per (mode, j)")
    for a, (an, em, means) in table.items():
        agree += an == em
        cells = "  ".join(f"{m[0]}{j}={v:.1f}" for (m, j), v in means.items())
        print(f"{a:5.2f}  {an:8s}  {str(em):9s}  {cells}")
    print(f"agreement {agree}/{len(table)} = {agree / len(table):.3f}; {time.time() - t:.0f} s")


if __name__ == "__main__":
    main(sys.argv)
