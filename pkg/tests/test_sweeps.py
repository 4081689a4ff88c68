import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from framework.errors import ConfigError
from framework.spectral_core import PI2, Ball, MeasureOnly, SlabProblem
from framework.sweeps import (
    BOUND_COLUMNS,
    SWEEP_COLUMNS,
    SweepSpec,
    is_monotone,
    load_sweep,
    run_sweep,
    vary_problem,
)

ROOT = Path(__file__).resolve().parent.parent


class TestSpec:

    @pytest.mark.parametrize("kwargs", [
        {"parameter": "delta", "start": 1.0, "stop": 2.0, "points": 1},
        {"parameter": "width", "start": 1.0, "stop": 2.0, "points": 3},
        {"parameter": "delta", "start": 1.0, "stop": 2.0, "points": 3, "scale": "log"},
        {"parameter": "k", "start": -1.0, "stop": 2.0, "points": 3},
        {"parameter": "measure", "start": 0.0, "stop": 2.0, "points": 3, "scale": "linear"},
        {"parameter": "delta", "start": 1.0, "stop": 2.0, "points": 3, "target": "no_such_example"},
        {"parameter": "delta", "start": 2.0, "stop": 3.0, "points": 3, "target": "staircase", "params": {"n": 2}},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            SweepSpec(**kwargs)

    def test_values(self):
        spec = SweepSpec("delta", 10.0, 1000.0, 3)
        assert spec.values() == pytest.approx([10.0, 100.0, 1000.0])
        assert SweepSpec("k", -1.0, 1.0, 3, scale="linear").values() == pytest.approx([-1.0, 0.0, 1.0])

    def test_load(self):
        spec = load_sweep(ROOT / "problems" / "evanescent_large_sweep" / "sweep.json")
        assert spec.target == "evanescent_large"
        assert spec.points == 5
        assert spec.columns == SWEEP_COLUMNS
        with pytest.raises(ConfigError):
            load_sweep(ROOT / "problems" / "missing" / "sweep.json")
        with pytest.raises(ConfigError):
            SweepSpec.from_dict({"parameter": "delta", "start": 1.0})


class TestVary:

    def test_delta_sets_k(self):
        problem = SlabProblem(2, 0.0, MeasureOnly(10.0))
        assert vary_problem(problem, "delta", 2.0).k == pytest.approx(PI2 - 4.0)

    def test_measure_and_rho(self):
        problem = SlabProblem(3, 1.0, Ball(1.0))
        assert vary_problem(problem, "measure", 0.5).measure == 0.5
        assert vary_problem(problem, "rho", 2.0).radius == 2.0
        with pytest.raises(ConfigError):
            vary_problem(SlabProblem(2, 1.0, MeasureOnly(1.0)), "rho", 2.0)


class TestRun:

    def test_bound_sweep(self, constants):
        spec = SweepSpec("delta", 1.0, 3.0, 3, scale="linear")
        df = run_sweep(spec, constants, SlabProblem(2, 0.0, MeasureOnly(10.0)))
        assert list(df.columns) == BOUND_COLUMNS
        assert df["threshold"].tolist() == pytest.approx([1.0, 4.0, 9.0])
        assert is_monotone(df["threshold"]) == "increasing"

    def test_bound_sweep_without_bound(self, constants):
        spec = SweepSpec("k", PI2, 2.0 * PI2, 2, scale="linear")
        df = run_sweep(spec, constants, SlabProblem(2, PI2, MeasureOnly(0.5)))
        assert math.isnan(df["threshold"].iloc[0])
        assert df["winning"].iloc[0].startswith("none")
        assert df["threshold"].iloc[1] > 0

    def test_bound_sweep_needs_problem(self, constants):
        with pytest.raises(ConfigError):
            run_sweep(SweepSpec("delta", 1.0, 2.0, 2), constants)

    def test_evanescent_example_sweep(self, constants):
        spec = SweepSpec("delta", 10.0, 250.0, 3, target="evanescent_large", params={"n": 2.0})
        df = run_sweep(spec, constants)
        assert list(df.columns) == SWEEP_COLUMNS
        expected = 1.0 + 1.0 / spec.values()
        assert df["normalized"].to_numpy() == pytest.approx(expected, rel=1e-9)
        assert is_monotone(df["normalized"]) == "decreasing"

    def test_resonant_annulus_ratio_stays_in_a_band(self, constants):
        spec = load_sweep(ROOT / "problems" / "resonant_annulus_sweep" / "sweep.json")
        fractions = np.asarray(spec.values()) / (math.pi * spec.params["rho"] ** 2)
        assert fractions == pytest.approx([0.1, 10 ** -1.5, 0.01])
        ratios = run_sweep(spec, constants)["ratio"].to_numpy()
        assert np.all((ratios >= 0.05) & (ratios <= 1.0))
        assert ratios.max() / ratios.min() < 1.2

    def test_pool_keeps_order(self, constants):
        spec = SweepSpec("delta", 1.0, 3.0, 3, scale="linear")
        problem = SlabProblem(2, 0.0, MeasureOnly(10.0))
        pd.testing.assert_frame_equal(run_sweep(spec, constants, problem, workers=2),
                                      run_sweep(spec, constants, problem))


def test_is_monotone():
    assert is_monotone(pd.Series([1.0, np.nan, 3.0])) == "increasing"
    assert is_monotone(pd.Series([3.0, 2.0])) == "decreasing"
    assert is_monotone(pd.Series([1.0, 3.0, 2.0])) is None
    assert is_monotone(pd.Series([1.0])) is None
