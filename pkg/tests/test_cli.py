import io
import json
import subprocess
import sys

import pytest

from paramrsh.cli import main
from paramrsh.graphs import read_graph
from paramrsh.harness import parse_csv
from paramrsh.tsp.geometry import read_points


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def resolved(text):
    first = text.splitlines()[0]
    assert first.startswith("# resolved config: ")
    return json.loads(first[len("# resolved config: "):])


def test_gen_gloc_writes_expected_graph(tmp_path):
    path = tmp_path / "g.txt"
    code, text = run(["gen", "gloc", "--r", "4", "--n", "16", "-o", str(path)])
    assert code == 0
    assert resolved(text)["seed"] == 0
    g = read_graph(path)
    assert (g.n, g.m) == (16, 21)


def test_oracle_prints_optimum(tmp_path):
    path = tmp_path / "g.txt"
    run(["gen", "kab", "--a", "3", "--b", "5", "-o", str(path)])
    code, text = run(["oracle", "vc", str(path)])
    assert code == 0
    assert "optimum 3" in text and "search_space" in text


def test_oracle_tsp_prints_tour(tmp_path):
    path = tmp_path / "p.txt"
    run(["gen", "points", "--layout", "inner", "--n", "8", "--k", "2", "--seed", "3", "-o", str(path)])
    assert read_points(path).k == 2
    code, text = run(["oracle", "tsp", str(path)])
    assert code == 0
    tour = next(line for line in text.splitlines() if line.startswith("tour "))
    assert sorted(int(v) for v in tour.split()[1:]) == list(range(8))


def test_verify_is_clean():
    code, text = run(["verify"])
    assert code == 0
    assert "FAIL" not in text
    assert text.count("PASS") == 12


def test_usage_errors_exit_two(tmp_path, capsys):
    assert run(["gen", "gloc", "--bogus", "-o", str(tmp_path / "x")])[0] == 2
    assert run(["frobnicate"])[0] == 2
    assert run(["oracle", "vc", str(tmp_path / "missing.txt")])[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["sweep", str(bad), "-o", str(tmp_path / "o.csv")])[0] == 2
    assert "paramrsh" in capsys.readouterr().err


def test_oracle_cap_exits_one(tmp_path):
    path = tmp_path / "big.txt"
    run(["gen", "graph", "--n", "30", "--p", "0.2", "-o", str(path)])
    assert run(["oracle", "lp", str(path)])[0] == 1


def test_run_emits_records(tmp_path):
    path = tmp_path / "p.txt"
    run(["gen", "points", "--layout", "convex", "--n", "8", "-o", str(path)])
    code, text = run(["run", "tsp", str(path), "--algo", "ea", "--mutation", "mixed", "--replicates", "3", "--seed", "9"])
    assert code == 0
    cfg = resolved(text)
    assert cfg["master_seed"] == 9 and cfg["algorithm"]["id"] == "mu_lambda"
    body = "\n".join(text.splitlines()[1:]) + "\n"
    recs = parse_csv(body)
    assert len(recs) == 3 and all(r.success for r in recs)
    again = run(["run", "tsp", str(path), "--algo", "ea", "--mutation", "mixed", "--replicates", "3", "--seed", "9"])[1]
    assert again == text


def test_run_vc_and_mlst(tmp_path):
    g = tmp_path / "g.txt"
    run(["gen", "gloc", "--r", "3", "--n", "9", "-o", str(g)])
    code, text = run(["run", "mlst", str(g), "--variant", "tree_based", "--start", "lopt", "--budget", "100000"])
    assert code == 0 and parse_csv(text.split("\n", 1)[1])[0].success
    code, text = run(["run", "vc", str(g), "--fitness", "f2", "--mutation", "alternative"])
    rec = parse_csv(text.split("\n", 1)[1])[0]
    assert code == 0 and rec.success and rec.t_opt is not None


def test_sweep_writes_csv_and_reports_assertions(tmp_path):
    cfg = {
        "name": "cli-sweep",
        "algorithm": {"id": "rls", "params": {}},
        "instance": {"generator": "convex", "params": {}, "grid": {"n": [6, 7, 8]}},
        "replicates": 4,
        "master_seed": 1,
        "budget": {"rule": "fixed", "max_evaluations": 100000},
        "assertions": [{"kind": "all_success"}],
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "out.csv"
    code, text = run(["sweep", str(path), "-o", str(out)])
    assert code == 0 and "PASS all_success" in text
    assert len(parse_csv(out.read_text())) == 12
    assert (tmp_path / "out_summary.csv").exists()
    cfg["assertions"] = [{"kind": "median_max", "expr": "1"}]
    path.write_text(json.dumps(cfg))
    code, text = run(["sweep", str(path), "-o", str(out)])
    assert code == 1 and "FAIL median_max" in text


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "paramrsh", "gen", "kab", "-o", str(tmp_path / "k.txt")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("# resolved config: ")
    proc = subprocess.run([sys.executable, "-m", "paramrsh", "run", "tsp"], capture_output=True, text=True)
    assert proc.returncode == 2


@pytest.mark.parametrize("argv", [["run", "tsp", "x", "--algo", "ea-k", "--mutation", "mixed"]])
def test_incompatible_flags_are_usage_errors(argv):
    assert run(argv)[0] == 2


def test_lopt_start_needs_gloc_instance(tmp_path):
    g = tmp_path / "k.txt"
    run(["gen", "kab", "--a", "2", "--b", "3", "-o", str(g)])
    assert run(["run", "mlst", str(g), "--start", "lopt"])[0] == 2
