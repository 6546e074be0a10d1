import subprocess
import sys
from pathlib import Path

import pytest

from hypercops.cli import main
from hypercops.generator import cycle_graph, petersen_graph
from hypercops.hypercore import parse_hypergraph, write_hypergraph

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def graph_file(tmp_path):
    path = tmp_path / "g.txt"
    code = main(["gen", "--n", "40", "--k", "3", "--dhat", "30", "--seed", "4", "--output", str(path)])
    assert code == 0
    return path


def test_gen_is_seeded(capsys):
    a = run(capsys, "--seed", "5", "gen", "--n", "20", "--k", "3", "--p", "0.05", "--stats")
    b = run(capsys, "gen", "--n", "20", "--k", "3", "--p", "0.05", "--seed", "5")
    assert a[0] == b[0] == 0 and a[1] == b[1]
    assert "dhat=" in a[2]
    G = parse_hypergraph(a[1])
    assert (G.n, G.k) == (20, 3)


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--n", "20", "--k", "3"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["bounds"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["nosuch"])
    assert exc.value.code == 2


def test_domain_errors_exit_2(capsys):
    code, _, err = run(capsys, "gen", "--n", "5", "--k", "7", "--p", "0.1")
    assert code == 2 and err.startswith("hypercops: error:")
    code, _, err = run(capsys, "summarize", "--input", "/nonexistent/report.csv")
    assert code == 2


def test_bounds_subcommands(capsys):
    code, out, _ = run(capsys, "bounds", "regime", "--n", "10000", "--k", "100", "--d", "100")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "regime,j,lower,upper,lambda,bound,collapsed"
    assert any(line.startswith("b,1,") for line in lines[1:])
    code, out, _ = run(capsys, "bounds", "zigzag", "--beta", "0.1", "--alpha-min", "0.2",
                       "--alpha-max", "0.3", "--step", "0.05")
    assert code == 0 and len(out.splitlines()) == 4
    code, out, _ = run(capsys, "bounds", "intersections", "--beta", "0.1")
    assert code == 0 and len(out.splitlines()) > 2
    code, out, _ = run(capsys, "bounds", "meyniel", "--n", "50", "--k", "50")
    assert code == 0 and float(out) == pytest.approx(78.24, abs=0.01)


def test_expansion_certify_exit_codes(capsys, graph_file):
    code, out, err = run(capsys, "expansion", "certify", "--input", str(graph_file), "--budget", "2")
    assert code == 0 and out.startswith("property,parameter,value") and "sampled certificate" in err
    code, _, err = run(capsys, "expansion", "certify", "--input", str(graph_file), "--budget", "2",
                       "--xi", "1.0")
    assert code == 1 and "not 1.0-expanding" in err
    code, _, _ = run(capsys, "expansion", "certify", "--input", str(graph_file), "--budget", "2",
                     "--xi", "1e-6")
    assert code == 0


def test_expansion_lemma(capsys):
    code, out, _ = run(capsys, "expansion", "lemma", "--which", "lemma-4.1-small,lemma-4.1-large",
                       "--trials", "2", "--sets", "5", "--n", "300", "--k", "3", "--dhat", "60")
    assert code == 0
    assert "lemma-4.1-small,pass_fraction," in out and "lemma-4.1-large,status," in out


def test_strategy_engine_oracle_pipeline(capsys, tmp_path):
    gpath, spath = tmp_path / "c.txt", tmp_path / "s.txt"
    write_hypergraph(cycle_graph(6), gpath)
    code, _, _ = run(capsys, "strategy", "synth", "--input", str(gpath), "--mode", "vertex",
                     "--j", "1", "--q", "1.0", "--output", str(spath))
    assert code == 0 and spath.read_text().startswith("# cop strategy")
    code, out, err = run(capsys, "engine", "play", "--input", str(gpath), "--strategy", str(spath),
                         "--robber", "greedy")
    assert code == 0 and out.startswith("round,phase,piece,from,to") and "captured" in err
    code, _, err = run(capsys, "engine", "play", "--input", str(gpath), "--strategy", str(spath),
                       "--robber", "script", "--script", "99")
    assert code == 2 and "not a vertex" in err
    with pytest.raises(SystemExit):
        main(["engine", "play", "--input", str(gpath), "--strategy", str(spath),
              "--robber", "script", "--script", "a b"])
    code, out, _ = run(capsys, "oracle", "copnum", "--input", str(gpath))
    assert code == 0 and out == "2\n"
    code, out, _ = run(capsys, "oracle", "copnum", "--input", str(gpath), "--m", "1")
    assert code == 0 and out == "0\n"
    ppath = tmp_path / "p.txt"
    write_hypergraph(petersen_graph(), ppath)
    code, _, err = run(capsys, "oracle", "copnum", "--input", str(ppath), "--budget", "100")
    assert code == 2 and "budget" in err


def test_strategy_failure_exits_1(capsys, tmp_path):
    gpath = tmp_path / "c.txt"
    write_hypergraph(cycle_graph(8), gpath)
    code, _, err = run(capsys, "strategy", "synth", "--input", str(gpath), "--mode", "vertex",
                       "--j", "3", "--q", "0.01", "--retries", "2")
    assert code == 1 and "synthesis failed" in err


def test_campaign_and_summarize(capsys, tmp_path):
    out = tmp_path / "r.csv"
    code, _, _ = run(capsys, "campaign", "--plan", str(DATA / "fixture.plan"), "--output", str(out))
    assert code == 0
    assert out.read_text() == (DATA / "fixture.csv").read_text()
    code, text, _ = run(capsys, "summarize", "--input", str(out))
    assert code == 0 and text == (DATA / "golden_summary.csv").read_text()


def test_campaign_threshold_failure_exits_1(capsys, tmp_path):
    plan = tmp_path / "p.plan"
    plan.write_text((DATA / "fixture.plan").read_text() + "threshold.success_rate_min = 0.5\n")
    code, _, err = run(capsys, "campaign", "--plan", str(plan), "--output", str(tmp_path / "r.csv"))
    assert code == 1 and "point 3: success rate" in err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hypercops", "bounds", "meyniel", "--n", "100",
                           "--k", "4"], capture_output=True, text=True)
    assert proc.returncode == 0 and float(proc.stdout) > 0
    proc = subprocess.run([sys.executable, "-m", "hypercops", "campaign"], capture_output=True, text=True)
    assert proc.returncode == 2
