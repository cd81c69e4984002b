import csv
import json
import subprocess
import sys

import pytest

from superpose.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_contribution_table(capsys, fixture_path):
    code, out, _ = run(capsys, "analyze", fixture_path("vcvs_divider.cir"), "--contributions")
    assert code == 0
    line = next(l for l in out.splitlines() if l.startswith("i[R3]"))
    # columns: V1 part, E1 part, total
    assert [float(v) for v in line.split()[1:]] == [-1.0, 4.0, 3.0]


def test_analyze_json_schema(capsys, fixture_path):
    code, out, _ = run(capsys, "analyze", fixture_path("thevenin_two_controlled.cir"),
                       "--thevenin", "A", "B", "--json")
    assert code == 0
    report = json.loads(out)
    assert set(report) == {"branches", "contributions", "thevenin", "residuals", "strategy"}
    assert report["strategy"] == "control"
    assert report["thevenin"]["v_open"] == pytest.approx(5.75, rel=1e-9)
    assert report["thevenin"]["r_eq"] == pytest.approx(0.5, rel=1e-9)
    assert report["thevenin"]["v_open_contributions"]["V0"] == pytest.approx(5.0)
    assert report["residuals"]["strategy_deviation"] <= 1e-8


def test_json_floats_round_trip(capsys, fixture_path):
    from superpose.netlist import parse_netlist
    from superpose.superposition import solve_direct
    from superpose.tableau import assemble

    path = fixture_path("ccvs_tableau.cir")
    _, out, _ = run(capsys, "analyze", path, "--json", "--contributions")
    report = json.loads(out)
    x = solve_direct(assemble(parse_netlist(path.read_text())))
    assert [b["current"] for b in report["branches"]] == [float(v) for v in x.currents]
    rows = report["contributions"]["branches"]
    for row in rows:
        for q in ("current", "voltage"):
            assert sum(row[q]["parts"].values()) == pytest.approx(row[q]["total"], abs=1e-12)


@pytest.mark.parametrize("strategy", ["direct", "full", "control"])
def test_strategies(capsys, fixture_path, strategy):
    code, out, _ = run(capsys, "analyze", fixture_path("vccs_two_sources.cir"),
                       "--strategy", strategy, "--json")
    assert code == 0
    report = json.loads(out)
    assert report["strategy"] == strategy
    i0 = next(b["current"] for b in report["branches"] if b["name"] == "V1")
    assert i0 == pytest.approx(9.0)


@pytest.mark.parametrize("name", ["voltage_loop.cir", "current_cutset.cir"])
def test_singular_exit_code(capsys, fixture_path, name):
    code, out, err = run(capsys, "analyze", fixture_path(name))
    assert code == 3
    assert out == ""
    assert "SingularSystem" in err and "column" in err


def test_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.cir"
    bad.write_text("R1 1 0 1\nE1 2 0 Rx 0.5\n")
    code, _, err = run(capsys, "analyze", bad)
    assert code == 2
    assert ":2:" in err and "UnresolvedControlRef" in err


def test_missing_file(capsys, tmp_path):
    code, _, _ = run(capsys, "analyze", tmp_path / "nope.cir")
    assert code == 2


def test_bad_terminal(capsys, fixture_path):
    code, _, _ = run(capsys, "analyze", fixture_path("vcvs_divider.cir"), "--thevenin", "1", "9")
    assert code == 2


def test_l0_singular_falls_back(capsys, tmp_path):
    f = tmp_path / "l0.cir"
    f.write_text("V1 1 0 2\nH1 1 0 V1 4\nR1 1 0 1\n")
    code, out, err = run(capsys, "analyze", f, "--json")
    assert code == 0
    assert json.loads(out)["strategy"] == "direct"
    assert "L0" in err


def test_verification_mismatch_exit_code(capsys, fixture_path):
    # an impossible tolerance turns roundoff into a reported mismatch
    code, _, err = run(capsys, "analyze", fixture_path("ccvs_tableau.cir"), "--tol", "-1")
    assert code == 4
    assert "verification" in err


def test_dump_system(capsys, fixture_path, tmp_path):
    out_csv = tmp_path / "sys.csv"
    code, _, _ = run(capsys, "analyze", fixture_path("ccvs_tableau.cir"), "--dump-system", out_csv)
    assert code == 0
    rows = list(csv.reader(out_csv.open()))
    assert rows[0][0] == "row" and rows[0][-1] == "U"
    assert len(rows) == 11


def test_verify_small_campaign(capsys):
    code, out, _ = run(capsys, "verify", "--count", "25", "--seed", "3")
    assert code == 0
    assert "ALL PASS" in out


def test_verify_zero_cases(capsys):
    code, out, _ = run(capsys, "verify", "--count", "0")
    assert code == 0
    assert "0 cases" in out


def test_verify_is_deterministic(capsys):
    first = run(capsys, "verify", "--count", "20", "--seed", "9", "--json")
    second = run(capsys, "verify", "--count", "20", "--seed", "9", "--json")
    assert first == second
    assert json.loads(first[1])["ok"] is True


def test_module_entry_point(fixture_path):
    proc = subprocess.run([sys.executable, "-m", "superpose", "analyze",
                           str(fixture_path("voltage_loop.cir"))], capture_output=True, text=True)
    assert proc.returncode == 3
    proc = subprocess.run([sys.executable, "-m", "superpose", "analyze",
                           str(fixture_path("vcvs_divider.cir")), "--json"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["strategy"] == "control"
