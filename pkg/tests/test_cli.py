import json
from pathlib import Path

import pandas as pd
import pytest

import run
from framework.base_problem import BaseProblem, run_calibrate
from framework.constants_store import file_hash
from framework.errors import ConfigError

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture
def cli(tmp_path, constants_file):
    """run.main with a fixed constants file and output folder."""
    def invoke(*argv):
        return run.main([*argv, "--constants", str(constants_file), "--out", str(tmp_path / "out")])
    return invoke


def test_bound(cli, tmp_path, capsys):
    assert cli("bound", "subcritical_n2") == 0
    out = capsys.readouterr().out
    assert "threshold = 4.9348" in out
    assert "✅ Done" in out
    assert (tmp_path / "out" / "certificate.json").exists()


def test_bound_without_applicable_lemma(cli, capsys):
    assert cli("bound", "resonant_n2_no_radius") == 3
    assert "NoApplicableBound" in capsys.readouterr().out


def test_unknown_problem(cli):
    assert cli("bound", "no_such_problem") == 2


def test_bad_override(cli):
    assert cli("verify", "subcritical_n2", "-t", "verify.trials=0") == 2
    assert cli("bound", "subcritical_n2", "-t", "nonsense=1") == 2


def test_verify(cli, tmp_path):
    small = "verify.trials=2,verify.explicit_trials=2,verify.hardy_littlewood_trials=3,verify.hardy_littlewood_trials_2d=1"
    assert cli("verify", "subcritical_n2", "-t", small) == 0
    df = pd.read_csv(tmp_path / "out" / "verification.csv")
    assert df["pass"].all()


def test_explicit_suite_has_its_own_trial_count(cli, capsys):
    settings = BaseProblem(ROOT / "problems" / "subcritical_n2").settings["verify"]
    assert (settings["trials"], settings["explicit_trials"]) == (20, 100)
    small = "verify.trials=1,verify.explicit_trials=1,verify.hardy_littlewood_trials=0,verify.hardy_littlewood_trials_2d=0"
    assert cli("verify", "subcritical_n2", "-t", small) == 0
    assert "explicit-constant suite: 16 random sources" in capsys.readouterr().out


def test_verify_stress_fails(cli):
    small = "verify.explicit_trials=20,verify.hardy_littlewood_trials=2,verify.hardy_littlewood_trials_2d=1"
    assert cli("verify", "subcritical_n2", "--stress", "-t", small) == 4


def test_sharpness_example(cli, tmp_path):
    assert cli("sharpness", "--example", "evanescent_large", "--params", "delta=10") == 0
    df = pd.read_csv(tmp_path / "out" / "tightness.csv")
    assert df["normalized"].iloc[0] == pytest.approx(1.1, rel=1e-9)


def test_sharpness_bad_params(cli):
    assert cli("sharpness", "--example", "staircase", "--params", "width=2") == 2


def test_kernel(cli, tmp_path):
    assert cli("kernel", "n3_two_modes", "-t", "kernel.points=20") == 0
    assert len(pd.read_csv(tmp_path / "out" / "kernel.csv")) == 20


def test_list(capsys):
    assert run.main(["--list"]) == 0
    out = capsys.readouterr().out
    assert "subcritical_n2" in out
    assert "evanescent_large" in out


def test_sweep(cli, tmp_path):
    assert cli("sweep", "evanescent_large_sweep") == 0
    df = pd.read_csv(tmp_path / "out" / "sweep.csv")
    assert len(df) == 5
    assert (tmp_path / "out" / "sweep.svg").exists()


def test_calibrate_writes_constants(tmp_path):
    hashes = run_calibrate([2], trials=2, seed=1, constants_dir=tmp_path)
    assert hashes[2] == file_hash(tmp_path / "constants_n2.json")
    with pytest.raises(ConfigError):
        run_calibrate([2], trials=0, seed=1, constants_dir=tmp_path)


@pytest.mark.parametrize("nested", [True, False])
def test_problem_overrides_keep_the_rest_of_the_problem(tmp_path, nested):
    problem = {"n": 2, "k": 4.934802200544679, "support": {"kind": "measure", "measure": 10.0}}
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"problem": problem} if nested else problem), encoding="utf-8")
    bp = BaseProblem(config_path=path)
    bp.set_params({"problem.k": 3.0, "problem.support.measure": 2.0})
    assert bp.problem.n == 2
    assert bp.problem.k == pytest.approx(3.0)
    assert bp.problem.measure == pytest.approx(2.0)
