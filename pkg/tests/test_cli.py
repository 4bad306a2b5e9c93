import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from combicalc.cli import COMMANDS, main

DATA = Path(__file__).resolve().parent.parent / "data"


def run_cli(*args):
    out, err = io.StringIO(), io.StringIO()
    from contextlib import redirect_stderr, redirect_stdout

    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(args))
    return code, out.getvalue(), err.getvalue()


def test_cohomology_annulus_file():
    code, out, _ = run_cli("cohomology", "--mesh", str(DATA / "annulus.json"))
    doc = json.loads(out)
    assert code == 0 and doc["h0"] == 1 and doc["h1"] == 1


def test_whirl_check_zero_field():
    code, out, _ = run_cli("whirl-check", "--mesh", str(DATA / "disc.json"),
                           "--field", str(DATA / "zero.json"))
    assert code == 0 and json.loads(out)["residual"] == 0


def test_green_csv_lshape():
    code, out, _ = run_cli("green", "--region", str(DATA / "lshape.json"),
                           "--builtin-field", "rot", "--levels", "0..6")
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "level,h,lhs,rhs,residual,combinatorial_residual"
    assert [int(r.split(",")[0]) for r in lines[1:]] == list(range(7))
    for r in lines[1:]:
        lhs, rhs = float(r.split(",")[2]), float(r.split(",")[3])
        assert lhs == pytest.approx(6.0) and rhs == pytest.approx(6.0)


def test_green_json_and_threads(monkeypatch):
    monkeypatch.setenv("COMBICALC_THREADS", "3")
    code, out, _ = run_cli("green", "--region", "builtin:square", "--builtin-field", "cubic",
                           "--levels", "1..3", "--format", "json")
    assert code == 0 and len(json.loads(out)["rows"]) == 3


@pytest.mark.parametrize("args", [
    ("validate", "--mesh", "builtin:annulus"),
    ("orient", "--mesh", "builtin:torus"),
    ("euler", "--mesh", "builtin:pants"),
    ("boundary", "--mesh", "builtin:annulus"),
    ("homology", "--mesh", "builtin:tetrahedron"),
    ("tiltawhirl-check", "--mesh", "builtin:holes3", "--field", "builtin:random"),
    ("conservative", "--mesh", "builtin:annulus", "--field", str(DATA / "annulus_field.json")),
    ("decompose-loop", "--mesh", "builtin:annulus", "--loop", "0+,1+,0+,0-,0+,1+"),
    ("discretize", "--region", "builtin:square", "--builtin-field", "x2"),
    ("converge-curl", "--builtin-field", "x2", "--point", "0.5,0.5", "--levels", "2..7"),
    ("mvt-check", "--builtin-field", "x2", "--rect", "0,1,0,1"),
    ("cov-check", "--builtin-diffeo", "affine_rev"),
])
def test_subcommands_succeed(args):
    code, out, err = run_cli(*args)
    assert code == 0, err
    assert out.strip()


def test_every_command_is_exercised():
    assert len(COMMANDS) == 17


def test_conservative_reports_witness():
    code, out, _ = run_cli("conservative", "--mesh", "builtin:annulus",
                           "--field", str(DATA / "annulus_field.json"))
    doc = json.loads(out)
    assert code == 0 and doc["conservative"] is False and doc["witness"]


def test_potential_failure_exit_1():
    code, out, _ = run_cli("potential", "--mesh", "builtin:annulus",
                           "--field", str(DATA / "annulus_field.json"))
    doc = json.loads(out)
    assert code == 1 and doc["failed"] == "potential" and abs(doc["integral"]) == 1


def test_orient_moebius_exit_1():
    code, out, _ = run_cli("orient", "--mesh", "builtin:moebius")
    assert code == 1 and "failed" in out


@pytest.mark.parametrize("args", [
    ("cohomology",),
    ("cohomology", "--mesh", "builtin:nope"),
    ("cohomology", "--mesh", "/nonexistent/mesh.json"),
    ("green", "--region", "builtin:square", "--builtin-field", "rot", "--levels", "3..1"),
    ("mvt-check", "--builtin-field", "rot", "--rect", "0,1,0,1"),
    ("decompose-loop", "--mesh", "builtin:annulus", "--loop", "0+,2+"),
    ("potential", "--mesh", "builtin:annulus", "--field", "builtin:zero", "--home", "9"),
])
def test_config_errors_exit_2(args):
    code, _, err = run_cli(*args)
    assert code == 2
    assert err.strip()


def test_bad_mesh_file_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"vertices": [{"id": 0}], "edges": [{"id": 0, "src": 0, "dst": 3}],'
                   ' "faces": []}')
    code, _, err = run_cli("validate", "--mesh", str(bad))
    assert code == 2 and "edges[0].dst" in err


def test_argparse_error_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["no-such-command"])
    assert info.value.code == 2


def test_suite_is_deterministic():
    env = dict(os.environ)
    cmd = [sys.executable, "-m", "combicalc", "suite", "--seed", "7", "--count", "30"]
    a = subprocess.run(cmd, capture_output=True, env=env, check=False)
    b = subprocess.run(cmd, capture_output=True, env=env, check=False)
    assert a.returncode == 0, a.stderr
    assert a.stdout == b.stdout
    assert json.loads(a.stdout)["ok"] is True
