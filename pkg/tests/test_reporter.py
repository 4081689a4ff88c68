import json

import pandas as pd
import pytest

from framework import reporter
from framework.bound_engine import aggregate
from framework.oracle import VerificationResult
from framework.sharpness import REPORT_COLUMNS, build_example
from framework.spectral_core import PI2, MeasureOnly, SlabProblem
from framework.sweeps import SweepSpec, run_sweep


@pytest.fixture
def certificate(constants):
    return aggregate(SlabProblem(2, 0.5 * PI2, MeasureOnly(10.0)), constants)


def test_certificate_files(tmp_path, certificate):
    payload = reporter.write_certificate(certificate, tmp_path, "subcritical", "ab" * 32)
    saved = json.loads((tmp_path / "certificate.json").read_text(encoding="utf-8"))
    assert saved["threshold"] == pytest.approx(0.5 * PI2)
    assert saved["constants_sha256"] == "ab" * 32
    assert payload["tail"] == saved["tail"]
    modes = pd.read_csv(tmp_path / "modes.csv")
    assert modes["m"].tolist() == [1, 2]
    markdown = (tmp_path / "certificate.md").read_text(encoding="utf-8")
    assert "threshold 1/c" in markdown
    assert "not an interval enclosure" not in markdown


def test_csv_format(tmp_path):
    df = pd.DataFrame({"b": [1.0 / 3.0], "a": [2]})
    path = reporter.write_csv(df, tmp_path / "x.csv", ["a", "b"])
    assert path.read_bytes() == b"a,b\n2,0.333333333333\n"


def test_verification_columns(tmp_path):
    rows = [VerificationResult(1.0, 2.0, 1e-9, "fourier", 1)]
    path = reporter.write_verification(rows, tmp_path)
    df = pd.read_csv(path)
    assert list(df.columns) == reporter.VERIFICATION_COLUMNS
    assert df["margin"].tolist() == [1.0]
    assert bool(df["pass"].iloc[0])


def test_tightness_columns(tmp_path, constants):
    _, report = build_example("evanescent_large", {"delta": 10.0}, constants)
    path = reporter.write_tightness([report], tmp_path)
    df = pd.read_csv(path)
    assert list(df.columns) == REPORT_COLUMNS
    assert df["example"].tolist() == ["evanescent_large"]


def test_dump(tmp_path, constants):
    solution, _ = build_example("outer_kernel", None, constants)
    df = pd.read_csv(reporter.write_dump(solution, tmp_path))
    assert list(df.columns) == ["r", "u_re", "u_im", "V_re", "V_im"]
    assert len(df) == solution.coords["r"].size


def test_sweep_outputs_are_reproducible(tmp_path, constants):
    spec = SweepSpec("delta", 1.0, 3.0, 3, scale="linear")
    df = run_sweep(spec, constants, SlabProblem(2, 0.0, MeasureOnly(10.0)))
    trend = reporter.write_sweep(df, spec, tmp_path / "a", "sweep")
    reporter.write_sweep(df, spec, tmp_path / "b", "sweep")
    assert trend["monotone"] == "increasing"
    assert trend["last"] == pytest.approx(9.0)
    for name in ("sweep.csv", "sweep.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert (tmp_path / "a" / "summary.md").exists()
