import json
import os
import subprocess
import sys
import textwrap

import pytest

from kinterp.cli import main
from kinterp.config import ConfigError, load_config

FULL_CONFIG = textwrap.dedent("""\
    # exercises every scenario kind
    [sv-check tail]
    weight = log(0,-2)
    q = 1
    expect_sv0q = true
    out = sv.csv

    [norm chi]
    profile = min1
    theta = 0
    q = 1
    b = log(0,-2)
    out = norm.csv

    [holmstedt pair]
    case = limiting00
    q0 = 1
    b0 = log(0,-2)
    q1 = 2
    b1 = log(0,-2)
    profile = min1
    grid = 1e-4,1e4,8
    out = pair.csv

    [negative-demo nd]
    theta = 0.5
    q0 = 1
    q1 = 2
    b0 = log(-3,-3)
    b1 = one
    grid = 1e-6,1e6,8
    out = nd.csv

    [reiterate re]
    side = 0
    theta = 0.5
    q = 1
    b = one
    q0 = 1
    b0 = log(-2,-2)
    q1 = 1
    b1 = log(0,-3)
    out = re.csv

    [lk-check lk]
    q = 1
    b = log(-2,0)
    count = 4
    seed = 7
    out = lk.csv

    [hardy-check h1]
    case = HET1
    alpha = 2
    w = expdecay(1)
    phi = const(1)
    samples = 8
    seed = 11
    out = hardy.csv

    [constants a3]
    p = 1
    q = 2
    v = log(0,-2)
    w = log(0,-2)
    which = A3
    expect = 0.61237
    tol = 1e-3
    out = a3.csv
    """)


@pytest.fixture()
def config_file(tmp_path):
    path = tmp_path / "suite.cfg"
    path.write_text(FULL_CONFIG)
    return str(path)


def test_load_config_minimal(tmp_path):
    path = tmp_path / "one.cfg"
    path.write_text("[sv-check a]\nweight = one\nq = 2\n")
    scenarios = load_config(str(path))
    assert len(scenarios) == 1
    assert scenarios[0].kind == "sv-check"


def test_load_config_reports_line_and_column(tmp_path):
    path = tmp_path / "typo.cfg"
    path.write_text("[sv-check a]\nweight = log(0,-2\nq = 1\n")
    with pytest.raises(ConfigError) as exc:
        load_config(str(path))
    assert exc.value.line == 2
    assert exc.value.column == 8


def test_load_config_rejects_unknown_kind(tmp_path):
    path = tmp_path / "kind.cfg"
    path.write_text("[frobnicate a]\nx = 1\n")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_load_config_rejects_infinite_q_reiteration(tmp_path):
    path = tmp_path / "qinf.cfg"
    path.write_text(textwrap.dedent("""\
        [reiterate bad]
        side = 0
        theta = 0.5
        q = inf
        b = one
        q0 = 1
        b0 = log(-2,-2)
        q1 = 1
        b1 = log(0,-3)
        """))
    with pytest.raises(ConfigError, match="finite q"):
        load_config(str(path))


def test_run_exit_codes(tmp_path, config_file):
    out = tmp_path / "out"
    code = main(["run", config_file, "--out-dir", str(out), "--quiet"])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert all(r["status"] == "pass" for r in summary["results"])
    header = (out / "pair.csv").read_text().splitlines()[0]
    assert header == "t,lhs,rhs,ratio"
    nd_header = (out / "nd.csv").read_text().splitlines()[0]
    assert nd_header == "t,head_bound,upper_bound,M"
    nd = [r for r in summary["results"] if r["name"] == "nd"]
    assert nd[0]["summary"]["verdict"] == "nonexistence confirmed"


def test_run_failure_exit_code(tmp_path):
    path = tmp_path / "fail.cfg"
    path.write_text(textwrap.dedent("""\
        [holmstedt gated]
        case = limiting00
        q0 = 1
        b0 = log(0,-2)
        q1 = 2
        b1 = log(0,-1)
        profile = min1
        out = gated.csv
        """))
    out = tmp_path / "out"
    code = main(["run", str(path), "--out-dir", str(out), "--quiet"])
    assert code == 1
    summary = json.loads((out / "summary.json").read_text())
    assert summary["results"][0]["status"] == "fail"
    assert "rho_eps" in summary["results"][0]["summary"]["condition"]
    assert not (out / "gated.csv").exists()


def test_config_error_exit_code(tmp_path):
    path = tmp_path / "broken.cfg"
    path.write_text("[sv-check a]\nweight = frog(1)\nq = 1\n")
    assert main(["run", str(path), "--quiet"]) == 2


def test_empty_config_passes(tmp_path):
    path = tmp_path / "empty.cfg"
    path.write_text("# nothing to do\n")
    assert main(["run", str(path), "--quiet",
                 "--out-dir", str(tmp_path / "out")]) == 0


def test_run_determinism(tmp_path, config_file):
    out1 = tmp_path / "r1"
    out2 = tmp_path / "r2"
    assert main(["run", config_file, "--out-dir", str(out1), "--quiet"]) == 0
    assert main(["run", config_file, "--out-dir", str(out2), "--quiet"]) == 0
    names = sorted(os.listdir(out1))
    assert names == sorted(os.listdir(out2))
    for name in names:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_subcommand_holmstedt(tmp_path):
    code = main(["holmstedt", "--case", "limiting00", "--profile", "min1",
                 "--b0", "log(0,-2)", "--q0", "1", "--b1", "log(0,-2)",
                 "--q1", "2", "--grid", "1e-3,1e3,8",
                 "--out", "scan.csv", "--out-dir", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "scan.csv").exists()


def test_subcommand_negative_demo(tmp_path):
    code = main(["negative-demo", "--theta", "0.5", "--q0", "1", "--q1", "2",
                 "--b0", "log(-3,-3)", "--b1", "one",
                 "--out", "nd.csv", "--out-dir", str(tmp_path)])
    assert code == 0


def test_subcommand_reiterate_with_profiles(tmp_path):
    profiles = tmp_path / "profiles.txt"
    profiles.write_text("min1\npiecewise[(0.5,0.5),(2,1)]\n")
    code = main(["reiterate", "--side", "0", "--theta", "0.5", "--q", "1",
                 "--b", "one", "--q0", "1", "--b0", "log(-2,-2)",
                 "--q1", "1", "--b1", "log(0,-3)",
                 "--profiles", str(profiles),
                 "--out", "re.csv", "--out-dir", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / "re.csv").read_text().splitlines()
    assert len(lines) == 3  # header + two profiles


def test_subcommand_lk_check(tmp_path):
    code = main(["lk-check", "--q", "1", "--b", "log(-2,0)", "--count", "3",
                 "--seed", "5", "--out", "lk.csv", "--out-dir", str(tmp_path)])
    assert code == 0


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kinterp.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "kinterp" in proc.stdout
