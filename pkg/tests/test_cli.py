import json
import subprocess
import sys

import pytest

from fourframes import cli
from fourframes import jets as J
from fourframes import models as M
from fourframes import verify as V


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_list_everything(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0
    for mid in M.MODEL_IDS:
        assert f"\n  {mid}\n" in out
    n_checks = int(out.split("checks (")[1].split(")")[0])
    assert n_checks >= 28
    for c in V.registry():
        assert c.anchor in out


def test_list_one_model(capsys):
    code, out, _ = run(capsys, "list", "--model", "gibbons-hawking")
    assert code == 0
    assert "    a (number" in out and "    b (number" in out
    assert "U = a/r + b" in out
    assert "nil3" not in out.split("checks applicable")[0]
    code, _, err = run(capsys, "list", "--model", "torus")
    assert code == 2 and "unknown model" in err


def test_verify_examples(capsys):
    code, out, _ = run(capsys, "verify", "--model", "nil3", "--checks", "all", "--samples", "200", "--seed", "7", "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["seed"] == 7 and all(c["pass"] for c in report["checks"])
    code, out, _ = run(capsys, "verify", "--model", "gibbons-hawking", "--params", "a=1,b=0", "--checks", "frame_*")
    assert code == 0 and "3/3 checks passed" in out
    code, out, _ = run(capsys, "verify", "--model", "ak4", "--params", "w=nonholo", "--checks", "J_kahler")
    assert code == 1 and "FAIL" in out


def test_json_is_byte_identical(capsys):
    args = ("verify", "--model", "ak4", "--params", "w=mixed", "--samples", "40", "--format", "json")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    assert "timestamp" not in first
    _, stamped, _ = run(capsys, *args, "--timestamp")
    assert "timestamp" in json.loads(stamped)


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["verify", "--model", "moebius"], "unknown model"),
        (["verify", "--model", "nil3", "--checks", "nope"], "unknown check"),
        (["verify", "--model", "nil3", "--checks", "J_kahler"], "does not apply"),
        (["verify", "--model", "nil3", "--params", "zz=1"], "unknown parameter"),
        (["verify", "--model", "nil3", "--params", "variant"], "name=value"),
        (["verify", "--model", "ak4", "--params", "alpha=1"], "alpha = 1"),
        (["verify", "--model", "nil3", "--samples", "many"], "integer"),
        (["verify", "--model", "nil3", "--samples", "0"], "at least 1"),
        (["verify", "--model", "nil3", "--tol", "eq28=abc"], "not a number"),
        (["verify", "--model", "nil3", "--checks", "eq28", "--tol", "eq29=1e-3"], "not selected"),
        (["verify"], "no model"),
        (["verify", "--model", "nil3", "--manifest", "/nonexistent.json"], "cannot read"),
    ],
)
def test_config_errors_exit_2(capsys, argv, needle):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert needle in err
    assert out == ""


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "--format", "yaml"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2


def test_evaluation_error_exit_3(capsys, monkeypatch):
    chart = J.Box([-1.0] * 4, [1.0] * 4)
    from fourframes import forms as F
    import numpy as np

    g = F.MetricField(lambda x: J.stack([x[0] * 0.0 + 1.0] * 3 + [x[0]], axis=-1)[..., None] * np.eye(4), chart)
    bad = M.ModelInstance("degenerate", {}, chart, g, {}, [], tags=frozenset({"metric"}))
    monkeypatch.setattr(M, "build", lambda model_id, params=None: bad)
    code, out, err = run(capsys, "verify", "--model", "nil3", "--checks", "hodge_involution", "--samples", "16")
    assert code == 3
    assert "hodge_involution" in err and "(-" in err
    assert out == ""


def test_manifest_and_flag_precedence(capsys, tmp_path):
    manifest = tmp_path / "run.json"
    manifest.write_text(json.dumps({"model": "ak4", "params": {"w": "nonholo"}, "checks": "J_kahler", "seed": 5, "format": "json"}))
    code, out, _ = run(capsys, "verify", "--manifest", str(manifest), "--samples", "16")
    assert code == 1 and json.loads(out)["seed"] == 5
    code, out, _ = run(capsys, "verify", "--manifest", str(manifest), "--samples", "16", "--seed", "9", "--tol", "J_kahler=10")
    assert code == 0 and json.loads(out)["seed"] == 9
    manifest.write_text(json.dumps({"model": "nil3", "colour": "blue"}))
    code, _, err = run(capsys, "verify", "--manifest", str(manifest))
    assert code == 2 and "colour" in err


def test_seed_environment_variable(capsys, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "123")
    _, out, _ = run(capsys, "verify", "--model", "nil3", "--checks", "eq28", "--samples", "8", "--format", "json")
    assert json.loads(out)["seed"] == 123
    _, out, _ = run(capsys, "verify", "--model", "nil3", "--checks", "eq28", "--samples", "8", "--format", "json", "--seed", "4")
    assert json.loads(out)["seed"] == 4


def test_output_file(capsys, tmp_path):
    path = tmp_path / "report.txt"
    code, out, _ = run(capsys, "verify", "--model", "nil3", "--checks", "eq28,eq29", "--samples", "8", "--output", str(path))
    assert code == 0 and out == ""
    assert "2/2 checks passed" in path.read_text()


def test_help_lists_every_flag(capsys):
    with pytest.raises(SystemExit):
        cli.main(["verify", "--help"])
    text = capsys.readouterr().out
    parser = cli.make_parser()
    verify = parser._subparsers._group_actions[0].choices["verify"]
    for action in verify._actions:
        for flag in action.option_strings:
            assert flag in text


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fourframes.cli", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "checks (" in proc.stdout
