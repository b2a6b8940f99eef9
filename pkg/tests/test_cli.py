import csv

import pytest

from llrp import random_instance
from llrp.cli import main
from llrp.harness import derive_seeds, read_report, ttt_probabilities
from llrp.instance import write_canonical

FAST = ["--generations", "5", "--pop-size", "4"]


@pytest.fixture
def inst_file(tmp_path):
    path = tmp_path / "tiny.txt"
    write_canonical(random_instance(90, 8, 2, n_vehicles=2, max_open_depots=1, name="tiny"), path)
    return path


def solve(inst_file, out, *extra):
    return main(["solve", str(inst_file), "--out", str(out), *FAST, *extra])


def test_solve_then_validate(inst_file, tmp_path, capsys):
    sol = tmp_path / "tiny.sol"
    assert solve(inst_file, sol, "--seed", "3") == 0
    assert main(["validate", str(inst_file), str(sol)]) == 0
    assert capsys.readouterr().out.strip().endswith("PASS")


def test_same_seed_identical_files(inst_file, tmp_path):
    a, b = tmp_path / "a.sol", tmp_path / "b.sol"
    solve(inst_file, a, "--seed", "7")
    solve(inst_file, b, "--seed", "7")
    assert a.read_bytes() == b.read_bytes()


def test_env_seed_and_precedence(inst_file, tmp_path, monkeypatch):
    a, b, c = (tmp_path / f"{k}.sol" for k in "abc")
    solve(inst_file, a, "--seed", "11")
    monkeypatch.setenv("LLRP_SEED", "11")
    solve(inst_file, b)
    solve(inst_file, c, "--seed", "11")
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()
    monkeypatch.setenv("LLRP_SEED", "x")
    assert solve(inst_file, c) == 2


def test_duplicate_customer_named(inst_file, tmp_path, capsys):
    sol = tmp_path / "s.sol"
    solve(inst_file, sol)
    lines = sol.read_text().splitlines()
    k = next(i for i, ln in enumerate(lines) if ln.startswith("ROUTE"))
    victim = lines[k].split()[-1]
    lines[k + 1] += f" {victim}"
    sol.write_text("\n".join(lines) + "\n")
    capsys.readouterr()
    assert main(["validate", str(inst_file), str(sol)]) == 1
    out = capsys.readouterr().out
    assert f"customer {victim} visited more than once" in out and out.strip().endswith("FAIL")


def test_wrong_objective_fails(inst_file, tmp_path, capsys):
    sol = tmp_path / "s.sol"
    solve(inst_file, sol)
    lines = sol.read_text().splitlines()
    f = float(lines[1].split()[1])
    lines[1] = f"OBJECTIVE {f + 1.0:.2f}"
    sol.write_text("\n".join(lines) + "\n")
    assert main(["validate", str(inst_file), str(sol)]) == 1
    assert "FAIL objective" in capsys.readouterr().out


def test_qtable_and_population_dumps(inst_file, tmp_path):
    q, p = tmp_path / "q.csv", tmp_path / "p.csv"
    assert solve(inst_file, tmp_path / "s.sol", "--qtable", str(q), "--population-csv", str(p)) == 0
    assert len(q.read_text().splitlines()) == 449
    assert p.read_text().startswith("member,f,pdist,age")


def write_manifest(tmp_path):
    rows = []
    for k in range(2):
        inst = random_instance(91 + k, 6, 2, n_vehicles=2, max_open_depots=1, name=f"m{k}")
        write_canonical(inst, tmp_path / f"m{k}.txt")
        rows.append(f"m{k},m{k}.txt,canonical,6,2,2,1,{100 + k}")
    path = tmp_path / "manifest.csv"
    path.write_text("name,path,format,n_customers,n_depots,n_vehicles,max_open_depots,bks\n"
                    + "\n".join(rows) + "\n")
    return path


def test_bench_report(tmp_path):
    man = write_manifest(tmp_path)
    out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    args = ["bench", str(man), "--runs", "2", "--preset", "rlhea4", "--no-timing", *FAST]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert out1.read_text().startswith("# schema_version=1\n")
    rows = read_report(out1)
    assert [r["name"] for r in rows] == ["m0", "m1"]
    from llrp.config import preset
    assert all(r["fingerprint"] == preset("rlhea4", max_generations=5, pop_size=4).fingerprint()
               for r in rows)
    assert all(r["runs"] == "2" and r["t_avg"] == "" and not r["error"] for r in rows)
    assert rows[0]["seeds"] == " ".join(map(str, derive_seeds(0, 2)))
    assert float(rows[0]["f_best"]) <= float(rows[0]["f_avg"])


def test_bench_bad_instance_row(tmp_path):
    man = write_manifest(tmp_path)
    (tmp_path / "m1.txt").write_text("garbage\n")
    out = tmp_path / "r.csv"
    assert main(["bench", str(man), "--runs", "1", "--out", str(out), *FAST]) == 0
    rows = read_report(out)
    assert rows[0]["error"] == "" and rows[1]["error"].startswith("load failed")


def test_ttt_single_run(inst_file, tmp_path):
    out = tmp_path / "t.csv"
    assert main(["ttt", str(inst_file), "--target", "1e9", "--runs", "1", "--budget", "10",
                 "--out", str(out), *FAST]) == 0
    (row,) = read_report(out)
    assert float(row["rho"]) == 0.5 and row["censored"] == "0"


def test_ttt_censored(inst_file, tmp_path):
    out = tmp_path / "t.csv"
    assert main(["ttt", str(inst_file), "--target", "1e-6", "--runs", "3", "--budget", "0.2",
                 "--out", str(out), *FAST]) == 0
    rows = read_report(out)
    assert all(r["censored"] == "1" and float(r["time"]) == 0.2 for r in rows)
    assert [float(r["rho"]) for r in rows] == ttt_probabilities(3)


def test_ttt_probabilities():
    assert ttt_probabilities(4) == [0.125, 0.375, 0.625, 0.875]
    with pytest.raises(ValueError):
        ttt_probabilities(0)


def test_analyze_edges(inst_file, tmp_path):
    d = tmp_path / "sols"
    d.mkdir()
    for s in (1, 2, 3):
        solve(inst_file, d / f"s{s}.sol", "--seed", str(s))
    (d / "s9.sol").write_text((d / "s1.sol").read_text())
    assert main(["analyze-edges", str(inst_file), str(d), "--out", str(tmp_path / "e")]) == 0
    with open(tmp_path / "e_matrix.csv") as fh:
        mat = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    labels = mat[0][1:]
    vals = [[int(x) for x in r[1:]] for r in mat[1:]]
    n = len(labels)
    assert all(vals[i][j] == vals[j][i] for i in range(n) for j in range(n))
    i, j = labels.index("s1.sol"), labels.index("s9.sol")
    assert vals[i][j] == vals[i][i] == 8 + 2  # customers plus one return per route
    ratios = read_report(tmp_path / "e_ratio.csv")
    assert float(ratios[0]["ratio"]) == 1.0
    fs = [float(r["f"]) for r in ratios]
    assert fs == sorted(fs)


def test_analyze_edges_disjoint(tmp_path):
    from llrp import Instance, Solution
    from llrp.harness import edge_analysis
    inst = Instance("d", [[0, 0]], [[1, 0], [2, 0]], [1, 1], 10, 1, 1)
    _, mat, ratios = edge_analysis([Solution(inst, [[1, 2]], [0]), Solution(inst, [[2, 1]], [0])])
    assert mat[0][1] == 0 and ratios[1] == 0.0


def test_convert(tmp_path):
    raw = tmp_path / "r.dat"
    raw.write_text("3\n2\n0 0\n10 0\n1 0\n2 0\n3 0\n50\n100 100\n5 6 7\n10 20\n")
    out = tmp_path / "r.txt"
    assert main(["convert", str(raw), "--format", "prodhon", "--n-vehicles", "2",
                 "--max-depots", "1", "--out", str(out)]) == 0
    assert main(["solve", str(out), "--out", str(tmp_path / "r.sol"), *FAST]) == 0


def test_usage_errors(inst_file, tmp_path, capsys):
    assert main(["solve", str(tmp_path / "missing.txt")]) == 2
    assert solve(inst_file, tmp_path / "s.sol", "--threads", "0") == 2
    assert main(["validate", str(inst_file), str(tmp_path / "nope.sol")]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
