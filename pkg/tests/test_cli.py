import csv
import io
import json
import math

import pytest

from heisids import __version__, weylsim
from heisids.cli import COMMANDS, run, to_csv


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), stdout=buf)
    return code, buf.getvalue()


def call_json(*argv):
    code, out = call(*argv, "--format", "json")
    return code, json.loads(out)


def test_every_command_registered():
    assert set(COMMANDS) == {
        "ids-magnetic", "ids-sub", "gamma", "dos", "kernel-projection", "kernel-resolvent",
        "kernel-density", "kernel-resolvent-sub", "green-closed", "green-integral",
        "folland-constant", "folland-repr", "verify-appendix", "weyl-count", "weyl-study", "selftest",
    }


def test_ids_magnetic_example():
    code, doc = call_json("ids-magnetic", "--n", "1", "--lambda", "0.5")
    assert code == 0
    assert doc["results"][0]["value"] == pytest.approx(1 / math.pi, rel=1e-15)
    assert doc["command"] == "ids-magnetic"
    assert doc["meta"]["version"] == __version__
    assert doc["meta"]["walltime_ms"] >= 0


def test_gamma_example():
    code, doc = call_json("gamma", "--n", "1", "--tol", "1e-10")
    assert code == 0
    assert doc["results"][0]["value"] == pytest.approx(0.22155673136319, rel=1e-12)
    assert doc["results"][0]["converged"] is True


def test_verify_appendix_example():
    code, doc = call_json("verify-appendix", "--n", "2", "--mu", "2", "--theta", "1")
    assert code == 0
    steps = {r["step"]: r["residual"] for r in doc["results"]}
    assert "A6" in steps and "final" in steps
    assert max(steps.values()) < 1e-6


def test_flags_echo_exactly():
    code, doc = call_json("kernel-density", "--n", "2", "--rho", "0.30000000000000004",
                          "--theta", "1e-3", "--lambda", "1.7", "--tol", "1e-9")
    assert code == 0
    cfg = doc["config"]
    assert cfg["rho"] == 0.30000000000000004
    assert cfg["theta"] == 1e-3
    assert cfg["lam"] == [1.7]
    assert cfg["tol"] == 1e-9


@pytest.mark.parametrize("argv", [
    ("ids-sub", "--n", "2", "--lambda", "0.7", "2.5", "--route", "both"),
    ("kernel-resolvent", "--z", "0.3+0.2j", "--w=-0.4j", "--zeta-re", "-0.7", "--zeta-im", "0.2"),
    ("dos", "--n", "3", "--lambda-max", "4"),
])
def test_json_and_csv_agree(argv):
    _, doc = call_json(*argv)
    code, text = call(*argv, "--format", "csv")
    assert code == 0
    assert "\r" not in text
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == len(doc["results"])
    for row, rec in zip(rows, doc["results"]):
        for key, val in rec.items():
            if isinstance(val, dict):
                assert float(row[f"{key}_re"]) == val["re"]
                assert float(row[f"{key}_im"]) == val["im"]
            elif isinstance(val, float):
                assert float(row[key]) == val
                assert format(val, ".17g") == row[key]


def test_csv_splits_complex():
    text = to_csv([{"value": 1 + 2j, "n": 1}])
    assert text.splitlines()[0] == "value_re,value_im,n"


@pytest.mark.parametrize("argv", [
    ("ids-magnetic", "--n", "0", "--lambda", "1"),
    ("ids-magnetic", "--lambda", "1"),
    ("kernel-resolvent-sub", "--n", "1", "--rho", "1", "--zeta-re", "0.5"),
    ("kernel-resolvent-sub", "--n", "1", "--rho", "-1", "--zeta-re", "-0.5"),
    ("kernel-resolvent", "--z", "1", "--w", "0", "--zeta-re", "0"),
    ("kernel-projection", "--n", "2", "--z", "1", "--lambda", "1"),
    ("verify-appendix", "--n", "1", "--mu", "1", "--theta", "0"),
    ("folland-repr", "--n", "1", "--z2", "0"),
    ("weyl-count", "--L", "1", "--N", "3", "--lambda", "0.5"),
    ("dos", "--n", "1", "--lambda-max", "-1"),
    ("no-such-command",),
    ("gamma", "--n", "not-a-number"),
])
def test_validation_exit_code(argv, capsys):
    code, _ = call(*argv)
    assert code == 2
    err = capsys.readouterr().err
    assert err


def test_bad_parameter_names_flag(capsys):
    call("kernel-resolvent-sub", "--n", "1", "--rho", "1", "--zeta-re", "0.5")
    assert "--zeta-re" in capsys.readouterr().err


def test_nonconvergence_exit_code():
    code, doc = call_json("gamma", "--n", "2", "--tol", "1e-30")
    assert code == 3
    assert doc["results"][0]["converged"] is False
    assert doc["results"][0]["value"] == pytest.approx(0.011753949657244923, rel=1e-10)


def test_selftest_passes_and_is_deterministic():
    code1, a = call("selftest", "--format", "csv")
    code2, b = call("selftest", "--format", "csv")
    assert code1 == code2 == 0
    assert a == b
    assert all(r["passed"] == "true" for r in csv.DictReader(io.StringIO(a)))


def test_selftest_injected_fault():
    code, _ = call("selftest", "--tol", "1e-30")
    assert code != 0


def test_config_precedence(tmp_path, monkeypatch):
    env_cfg = tmp_path / "env.ini"
    env_cfg.write_text("[heisids]\ntol = 1e-30\nformat = json\n")
    flag_cfg = tmp_path / "flag.ini"
    flag_cfg.write_text("[heisids]\ntol = 1e-9\n")
    monkeypatch.setenv("HEISIDS_CONFIG", str(env_cfg))
    # env config alone: unreachable tolerance, JSON output
    code, out = call("gamma", "--n", "2")
    assert code == 3 and json.loads(out)["config"]["tol"] == 1e-30
    # --config replaces the env file
    code, out = call("gamma", "--n", "2", "--config", str(flag_cfg), "--format", "json")
    assert code == 0 and json.loads(out)["config"]["tol"] == 1e-9
    # explicit flags beat any file
    code, out = call("gamma", "--n", "2", "--tol", "1e-8", "--format", "json")
    assert code == 0 and json.loads(out)["config"]["tol"] == 1e-8


def test_unreadable_config(tmp_path):
    code, _ = call("gamma", "--n", "1", "--config", str(tmp_path / "missing.ini"))
    assert code == 2


def test_output_and_plot_files(tmp_path):
    out, plot = tmp_path / "r.csv", tmp_path / "p.csv"
    code, text = call("ids-magnetic", "--n", "2", "--lambda", "1.5", "--format", "csv",
                      "--output", str(out), "--emit-plot-data", str(plot))
    assert code == 0 and text == ""
    assert out.read_text().startswith("n,lambda,value,route\n")
    lines = plot.read_bytes().split(b"\n")
    assert lines[0] == b"lambda,ids"
    assert b"\r" not in plot.read_bytes()
    assert len(lines) > 100


def test_weyl_count_records_nudge(monkeypatch):
    real = weylsim.count_eigenvalues_below
    seen = []

    def flaky(H, lam, rtol=1e-12):
        if not seen:
            seen.append(lam)
            raise weylsim.SingularShift(lam)
        return real(H, lam, rtol)

    monkeypatch.setattr(weylsim, "count_eigenvalues_below", flaky)
    code, doc = call_json("weyl-count", "--L", "2", "--N", "12", "--lambda", "0.5")
    assert code == 0
    rec = doc["results"][0]
    assert rec["nudge"] == 1e-9
    assert rec["count"] == real(weylsim.discretize_magnetic_hamiltonian(weylsim.GridSpec(2.0, 12)), 0.5 + 1e-9)


def test_weyl_study_columns():
    code, text = call("weyl-study", "--L", "2", "3", "--h", "0.2", "--lambda", "0.5", "--format", "csv")
    assert code == 0
    assert text.splitlines()[0] == ",".join(weylsim.STUDY_COLUMNS)


@pytest.mark.parametrize("argv", [
    ("kernel-projection", "--z", "1,0.5j", "--w", "0,0", "--lambda", "2"),
    ("kernel-resolvent", "--z", "1", "--w", "0", "--zeta-re", "-1", "--route", "both"),
    ("kernel-resolvent-sub", "--z", "1", "--w", "0", "--tau", "0.5", "--zeta-re", "-1"),
    ("green-closed", "--n", "2", "--mu", "2", "--theta", "1"),
    ("green-integral", "--n", "1", "--mu", "1", "--theta", "0.5"),
    ("folland-constant", "--n", "2"),
    ("folland-repr", "--n", "2", "--z2", "1", "--tau", "0.5"),
])
def test_commands_run(argv):
    code, doc = call_json(*argv)
    assert code == 0
    assert doc["results"]
