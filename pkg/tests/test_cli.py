import json
import shutil
import subprocess
import sys

import pytest

from kkwsym import datafile
from kkwsym.boundary import BoundaryData, random_boundary_data
from kkwsym.cli import main
from kkwsym.datafile import DataError
from kkwsym.lichnerowicz import GeometryData, gen_geometry
from kkwsym.report import Item, Report
from kkwsym.scalar import Poly, parse_poly


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# exit codes --------------------------------------------------------------------


def test_thm13_exact(capsys):
    code, out, _ = run(capsys, "verify", "thm13")
    assert code == 0
    assert "(4*i)*pi^2" in out and "exact" in out


def test_phi1_exact(capsys):
    assert run(capsys, "verify", "phi:aI:star")[0] == 0


def test_phi2_printed_value(capsys):
    # stated expectation: the recomputed Φ₂ matches the printed value
    code, out, _ = run(capsys, "verify", "phi:aII:star")
    assert code == 0, out


def test_strict_total_mismatch_fixture(capsys):
    # the recomputed total is judged against the printed total, which no recomputation meets
    code, out, _ = run(capsys, "verify", "thm11", "--strict-total", "--format", "json")
    assert code == 1
    doc = json.loads(out)
    item = next(i for i in doc["items"] if i["name"] == "recomputed_total")
    assert item["match"] == "mismatch"
    assert item["expected"]["text"] == "(-3/2*i)*h1 + (-1/4)*pi^2 + (-27/8)*h1*pi^2"


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "verify", "bogus")[0] == 2
    assert run(capsys, "verify", "thm13", "--dim", "4")[0] == 2
    assert run(capsys, "verify", "thm13", "--format", "xml")[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "verify", "thm13", "--data", str(tmp_path / "missing.txt"))[0] == 2
    assert run(capsys, "trace-eval", "tr[")[0] == 2
    assert run(capsys, "gen-data", "--seed", "1", "--dim", "2", "--kind", "geometry")[0] == 2
    assert run(capsys, "--help")[0] == 0


def test_malformed_data_file(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("kind = boundary\nn = 3\nV = 1, 0\n")
    code, _, err = run(capsys, "verify", "thm13", "--data", str(bad))
    assert code == 2 and "error" in err


def test_tampered_data_file(capsys, tmp_path):
    # V no longer unit: a data error, not a mismatch
    lines = datafile.dump_boundary(random_boundary_data(2, 3)).splitlines()
    lines = ["V = 1, 1, 0" if l.startswith("V = ") else l for l in lines]
    p = tmp_path / "tampered.txt"
    p.write_text("\n".join(lines) + "\n")
    code, _, err = run(capsys, "verify", "thm13", "--data", str(p))
    assert code == 2 and "unit" in err


def test_wrong_data_kind(capsys, tmp_path):
    p = tmp_path / "g.txt"
    p.write_text(datafile.generate(1, 3, "geometry"))
    assert run(capsys, "verify", "thm13", "--data", str(p))[0] == 2
    assert run(capsys, "verify", "lichnerowicz", "--data", str(p))[0] == 0


# determinism and formats --------------------------------------------------------


def test_json_is_deterministic(capsys, tmp_path):
    outs = []
    for k in range(2):
        f = tmp_path / f"r{k}.json"
        code, msg, _ = run(capsys, "verify", "thm11", "--seed", "5", "--format", "json", "--output", str(f))
        assert code == 1 and str(f) in msg
        outs.append(f.read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert set(doc) >= {"version", "target", "mode", "seed", "items", "status"}
    assert doc["seed"] == 5 and doc["status"] == "mismatch"
    names = [i["name"] for i in doc["items"]]
    assert names[:5] == ["Phi1", "Phi2", "Phi3", "Phi4", "Phi5"]
    assert {"printed_total", "printed_parts_sum", "recomputed_total"} <= set(names)
    assert any("differs from the sum of printed parts" in n for n in doc["notes"])


def test_text_and_latex_formats(capsys):
    code, out, _ = run(capsys, "verify", "thm13", "--format", "latex")
    assert code == 0 and "\\pi^{2}" in out
    code, out, _ = run(capsys, "verify", "thm13", "--mode", "literal")
    assert code == 0 and "Psi" in out


def test_lichnerowicz_target(capsys):
    code, out, _ = run(capsys, "verify", "lichnerowicz", "--format", "json", "--seed", "3")
    assert code == 0
    doc = json.loads(out)
    assert {i["name"] for i in doc["items"]} >= {"SquareTrace", "TraceE_square", "wres_star", "wres_square"}
    assert all(i["match"] == "exact" for i in doc["items"])


def test_inverse_target(capsys):
    code, out, _ = run(capsys, "verify", "inverse", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    ctl = [i for i in doc["items"] if i["name"].endswith("corrupted")]
    assert ctl and all(i["match"] == "no-target" and i["computed"]["text"] != "0" for i in ctl)


# gen-data and trace-eval -------------------------------------------------------


@pytest.mark.parametrize("kind, n", [("boundary", 4), ("boundary", 3), ("geometry", 4)])
def test_gen_data_round_trip(capsys, tmp_path, kind, n):
    code, out, _ = run(capsys, "gen-data", "--seed", "9", "--dim", str(n), "--kind", kind)
    assert code == 0
    data = datafile.load(out)
    assert isinstance(data, BoundaryData if kind == "boundary" else GeometryData)
    assert data == (random_boundary_data(9, n) if kind == "boundary" else gen_geometry(9, n))
    p = tmp_path / "d.txt"
    p.write_text(out)
    code, out2, _ = run(capsys, "trace-eval", "tr[hc(V)*c(xi')*hc(V)*c(xi')]", "--data", str(p))
    assert code == 0
    want = " + ".join(f"({2**n})*xi{k}^2" for k in range(1, n))
    assert out2.strip() == want


def test_trace_eval(capsys):
    assert run(capsys, "trace-eval", "tr[hc(V)*c(dxn)*hc(V)*c(dxn)]", "--dim", "3")[1].strip() == "(8)"
    assert run(capsys, "trace-eval", "c(e1)*c(e1)", "--dim", "4")[1].strip() == "((-1)) * id"
    out = run(capsys, "trace-eval", "sum[j](tr[c(ej)*c(ej)])", "--dim", "4", "--expand", "4")[1]
    assert out.strip() == "(-64)"
    out = run(capsys, "trace-eval", "h1*tr[hc(V)*c(xi')*hc(V)*c(xi')]", "--latex")[1]
    assert "h'(0)" in out


def test_console_script():
    exe = shutil.which("kkwsym")
    cmd = [exe] if exe else [sys.executable, "-m", "kkwsym.cli"]
    r = subprocess.run(cmd + ["verify", "thm13", "--format", "json"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["status"] == "exact"


# data file parsing ---------------------------------------------------------------


def test_datafile_round_trips():
    for seed in range(3):
        bd = random_boundary_data(seed)
        assert datafile.load(datafile.dump_boundary(bd)) == bd
        g = gen_geometry(seed, 3)
        assert datafile.load(datafile.dump_geometry(g)) == g


@pytest.mark.parametrize(
    "text, line",
    [
        ("n = 4\nn = 4\n", 2),
        ("kind = boundary\nn = four\n", 2),
        ("junk line\n", 1),
        ("kind = boundary\nn = 3\nV = 1, 0, 0\nV2 = 1\n", 4),
    ],
)
def test_datafile_errors(text, line):
    with pytest.raises(DataError) as e:
        datafile.load(text)
    assert f"line {line}" in str(e.value)


def test_datafile_rejects_missing_keys_and_bad_kind():
    with pytest.raises(DataError, match="missing key"):
        datafile.load("kind = boundary\nn = 3\nV = 1, 0, 0\n")
    with pytest.raises(DataError):
        datafile.load("kind = sphere\nn = 3\n")


# report invariants ---------------------------------------------------------------


def test_report_status_rule():
    r = Report("t", "paper", 0)
    r.add("a", Poly.const(1), Poly.const(1))
    r.add("b", parse_poly("(1)*h1"))
    assert r.status == "exact" and r.exit_code == 0
    r.add("c", Poly.const(1), Poly.const(2))
    assert r.status == "mismatch" and r.exit_code == 1
    assert Item("x", Poly.const(0), None).match == "no-target"


def test_run_verify_api():
    from kkwsym.cli import UsageError, run_verify

    rep, code = run_verify("thm13", seed=2)
    assert code == 0 and rep.status == "exact" and rep.seed == 2
    with pytest.raises(UsageError):
        run_verify("thm13", colour="red")
