import json
from fractions import Fraction

import pytest

from mapflow.cli import EX_USAGE, load_config, main
from mapflow.dynamics import AttractorClass
from mapflow.errors import DomainError
from mapflow.io import read_plane_csv
from mapflow.scenarios import SCENARIOS
from mapflow.stability import HurwitzReport, Verdict


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_stability_n6(capsys):
    code, out, _ = run(capsys, "stability", "--order", "6", "--alpha", "1")
    assert code == 0
    u3 = [ln for ln in out.splitlines() if ln.startswith("U_3 = ")][0]
    assert Fraction(u3.split("= ")[1]) == Fraction(-2, 518400)
    assert "verdict: Unstable" in out


def test_truncate_cubic(capsys):
    code, out, _ = run(capsys, "truncate", "--map", "logistic:4", "--order", "3")
    assert code == 0
    assert "coefficients: 1,3,6,6" in out
    code, out, _ = run(capsys, "truncate", "--map", "logistic:4", "--order", "3", "--format", "json")
    d = json.loads(out)
    assert d["integer_coeffs"] == [1, 3, 6, 6]
    assert d["companion_at_fixed_points"]["0.75"][2] == [-18.0, -6.0, -3.0]


def test_reproduce_n5(capsys):
    code, out, _ = run(capsys, "reproduce", "n5-instability")
    assert code == 0
    assert out.startswith("PASS n5-instability")


def test_reproduce_list(capsys):
    code, out, _ = run(capsys, "reproduce", "--list")
    assert code == 0
    assert all(name in out for name in SCENARIOS)


def test_usage_errors(capsys):
    assert run(capsys, "stability", "--bogus")[0] == EX_USAGE
    assert run(capsys, "frobnicate")[0] == EX_USAGE
    assert run(capsys, "stability", "--order", "0")[0] == EX_USAGE
    assert run(capsys)[0] == EX_USAGE


def test_help_mentions_defaults(capsys):
    code, out, _ = run(capsys, "classify", "--help")
    assert code == 0
    assert "default: 2500.0" in out and "--seed" in out


def test_domain_error_exit(capsys):
    code, _, err = run(capsys, "truncate", "--map", "poly:0,1")
    assert code == 1 and "degenerate" in err
    assert run(capsys, "stability", "--order", "3")[0] == 1


def test_numeric_error_exit(capsys):
    code, out, _ = run(capsys, "lyapunov", "--map", "logistic:3.5", "--order", "5", "--t-end", "300",
                       "--t-transient", "100")
    assert code == 2
    d = json.loads(out)
    assert d["status"] == "Unstable" and d["lyapunov"] is None and d["escape_time"] < 300


def test_stability_json_round_trip(capsys):
    code, out, _ = run(capsys, "stability", "--order", "5", "--alpha", "5/3", "--format", "json")
    d = json.loads(out)
    rep = HurwitzReport.from_dict(d)
    assert rep.u_sequence[4] == -Fraction(20, 9) / 120**2
    assert rep.verdict is Verdict.UNSTABLE


def test_stability_from_map(capsys):
    code, out, _ = run(capsys, "stability", "--map", "logistic:3", "--at", "0.6666666666666666", "--format", "json")
    assert json.loads(out)["verdict"] == "Stable"


def test_classify_json_round_trip(capsys):
    code, out, _ = run(capsys, "classify", "--map", "logistic:4.2", "--x0", "0.5")
    d = json.loads(out)
    assert d["class"] == "Periodic(1)"
    c = AttractorClass.from_dict(d)
    assert str(c) == "Periodic(1)"


def test_roots_and_linear(capsys):
    code, out, _ = run(capsys, "roots", "--order", "1", "--alpha", "2")
    assert code == 0 and float(out.split()[0]) == -2.0
    code, out, _ = run(capsys, "linear", "--order", "2", "--alpha", "1/2", "--t", "1", "--xi0", "1,0")
    assert "degenerate" in out
    code, out, _ = run(capsys, "linear", "--order", "3", "--map", "logistic:3.5", "--at", "0.3",
                       "--t", "2", "--format", "json")
    d = json.loads(out)
    assert d["max_abs_difference"] < 1e-12


def test_integrate_csv(capsys, tmp_path):
    path = tmp_path / "traj.csv"
    code, _, _ = run(capsys, "integrate", "--map", "logistic:3.9", "--order", "5", "--t-end", "200",
                     "--sample-stride", "1", "-o", str(path))
    text = path.read_text()
    assert code == 2
    assert text.splitlines()[0] == "t,xi1,xi2,xi3,xi4,xi5"
    assert text.splitlines()[-1].startswith("# status=Diverged at_time=")
    code, out, _ = run(capsys, "integrate", "--system", "scaled", "--lambda", "0.5", "--x0", "0.5",
                       "--t-end", "1", "--sample-stride", "0.5")
    assert code == 0
    assert out.splitlines()[1:4] == ["0,0.5,0,0", "0.5,0.5,0,0", "1,0.5,0,0"]


def test_config_file(tmp_path, capsys):
    empty = tmp_path / "empty.cfg"
    empty.write_text("# nothing here\n\n")
    assert load_config(empty).values == {}
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = 5/3   # vertex\norder = 5\ndivergence_bound = 1e6\n")
    values = load_config(cfg).values
    assert values == {"alpha": Fraction(5, 3), "order": 5, "divergence_bound": 1e6}
    stab = tmp_path / "stab.cfg"
    stab.write_text("alpha = 5/3   # vertex\norder = 5\n")
    code, out, _ = run(capsys, "stability", "--config", str(stab), "--format", "json")
    d = json.loads(out)
    assert d["coeffs"][-1] == "5/3" and d["order"] == 5
    # flags win over the file
    code, out, _ = run(capsys, "stability", "--config", str(stab), "--order", "4", "--format", "json")
    assert json.loads(out)["order"] == 4


def test_config_overrides_integrator(tmp_path, capsys):
    cfg = tmp_path / "int.cfg"
    cfg.write_text("divergence_bound = 10\nt_end = 50\nmap = logistic:3.9\norder = 5\n")
    code, out, _ = run(capsys, "integrate", "--config", str(cfg), "--sample-stride", "1")
    assert code == 2
    t_stop = float(out.splitlines()[-1].split("at_time=")[1])
    assert t_stop < 20


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("order = 3\nthis line is wrong\n")
    with pytest.raises(DomainError, match=":2:"):
        load_config(bad)
    unknown = tmp_path / "unknown.cfg"
    unknown.write_text("colour = blue\n")
    code, _, err = run(capsys, "stability", "--config", str(unknown), "--alpha", "1")
    assert code == 1 and "valid keys" in err and "alpha" in err


def test_bifurcate_outputs(tmp_path, capsys):
    path = tmp_path / "bif.csv"
    argv = ["bifurcate", "--lo", "1.0", "--hi", "1.2", "--steps", "3", "--t-end", "800", "--t-transient", "300"]
    assert run(capsys, *argv, "-o", str(path))[0] == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "param,peak" and len(lines) > 3
    side = json.loads(path.with_suffix(".json").read_text())
    assert [p["param"] for p in side["points"]] == [1.0, 1.1, 1.2]
    code, out, _ = run(capsys, *argv, "--format", "svg")
    assert out.startswith("<svg") and out.count("<circle") == len(lines) - 1


def test_scan_csv_and_seed_noop(capsys):
    argv = ["scan", "--nu-steps", "2", "--lambda-steps", "2", "--lambda-hi", "0.4", "--nu-lo", "0.9",
            "--nu-hi", "1.0", "--lambda-lo", "0.3"]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out.splitlines()[0] == "nu,lambda,class,period,lyapunov,escape_time"
    table = read_plane_csv(out)
    assert table["class"].tolist() == [0, 0, 0, 0]
    assert run(capsys, *argv, "--seed", "99")[1] == out
