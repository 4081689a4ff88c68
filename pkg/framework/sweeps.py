"""
framework/sweeps.py

Parameter sweeps. A SweepSpec varies one parameter (k, delta, measure or rho)
over a geometric or linear range and evaluates a target at every point:

    target = "bound"        → certificate of the problem with that parameter
    target = <example id>   → the sharpness example with that parameter

sweep.json (optional, in the problem folder):
    {"parameter": "delta", "start": 10, "stop": 250, "points": 5,
     "scale": "geometric", "target": "evanescent_large", "params": {"n": 2}}

Points are independent; with workers > 1 they run in a Pool and come back
in sweep order.
"""

import json
import math
from dataclasses import dataclass, field, replace
from multiprocessing import Pool
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from framework.bound_engine import GenericConstants, aggregate
from framework.errors import ConfigError, NoApplicableBound, SlabError
from framework.sharpness import EXAMPLES, build_example, example_params
from framework.spectral_core import Ball, MeasureOnly, SlabProblem

PARAMETERS = ("k", "delta", "measure", "rho")
SCALES = ("geometric", "linear")
BOUND_TARGET = "bound"

SWEEP_COLUMNS = ["parameter", "value", "bound", "achieved", "ratio", "normalized", "note"]
BOUND_COLUMNS = ["parameter", "value", "aggregate_c", "threshold", "m_tail", "winning"]


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    points: int
    scale: str = "geometric"
    target: str = BOUND_TARGET
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ConfigError(f"sweep parameter must be one of {', '.join(PARAMETERS)}, got '{self.parameter}'")
        if self.scale not in SCALES:
            raise ConfigError(f"sweep scale must be one of {', '.join(SCALES)}, got '{self.scale}'")
        if int(self.points) != self.points or self.points < 2:
            raise ConfigError(f"a sweep needs points ≥ 2, got {self.points}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ConfigError("sweep endpoints must be finite")
        if self.scale == "geometric" and not (self.start > 0 and self.stop > 0):
            raise ConfigError(f"a geometric sweep needs positive endpoints, got {self.start} → {self.stop}")
        if self.parameter != "k" and min(self.start, self.stop) <= 0:
            raise ConfigError(f"'{self.parameter}' must stay positive over the sweep")
        if self.target != BOUND_TARGET:
            # rejects unknown example ids and parameters the example does not take
            example_params(self.target, {**self.params, self.parameter: self.start})

    @property
    def is_bound(self) -> bool:
        return self.target == BOUND_TARGET

    @property
    def columns(self) -> list:
        return BOUND_COLUMNS if self.is_bound else SWEEP_COLUMNS

    @property
    def plotted(self) -> str:
        """Column drawn against the parameter."""
        return "threshold" if self.is_bound else "normalized"

    def values(self) -> np.ndarray:
        if self.scale == "geometric":
            return np.geomspace(self.start, self.stop, int(self.points))
        return np.linspace(self.start, self.stop, int(self.points))

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        try:
            return cls(
                parameter=data["parameter"],
                start=float(data["start"]),
                stop=float(data["stop"]),
                points=int(data["points"]),
                scale=data.get("scale", "geometric"),
                target=data.get("target", data.get("example", BOUND_TARGET)),
                params={key: float(v) for key, v in data.get("params", {}).items()},
            )
        except KeyError as e:
            raise ConfigError(f"sweep spec is missing {e}") from e
        except (TypeError, ValueError) as e:
            if isinstance(e, SlabError):
                raise
            raise ConfigError(f"invalid sweep spec: {e}") from e


def load_sweep(path: Path) -> SweepSpec:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"sweep file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    return SweepSpec.from_dict(data)


# ─── Points ─────────────────────────────────────────────────────────────────

def vary_problem(problem: SlabProblem, parameter: str, value: float) -> SlabProblem:
    """The problem with one parameter replaced (delta means δ₊ = √(π² − k))."""
    if parameter == "k":
        return replace(problem, k=value)
    if parameter == "delta":
        return replace(problem, k=math.pi ** 2 - value ** 2)
    support = problem.support
    if parameter == "measure":
        if isinstance(support, Ball):
            return replace(problem, support=replace(support, measure=value))
        return replace(problem, support=MeasureOnly(value))
    if not isinstance(support, Ball):
        raise ConfigError("sweeping rho needs a ball support")
    return replace(problem, support=replace(support, radius=value))


def _bound_point(problem: SlabProblem, C: GenericConstants, parameter: str, value: float) -> dict:
    try:
        certificate = aggregate(vary_problem(problem, parameter, value), C)
    except NoApplicableBound as e:
        return {"parameter": parameter, "value": value, "aggregate_c": math.nan,
                "threshold": math.nan, "m_tail": -1, "winning": f"none: {e}"}
    worst = max(certificate.modes, key=lambda b: b.c_m)
    return {
        "parameter": parameter,
        "value": value,
        "aggregate_c": certificate.aggregate_c,
        "threshold": certificate.threshold,
        "m_tail": certificate.m_tail,
        "winning": f"m={worst.m}:{worst.source}",
    }


def _example_point(spec: SweepSpec, C: GenericConstants, value: float) -> dict:
    _, report = build_example(spec.target, {**spec.params, spec.parameter: value}, C)
    row = report.as_row()
    return {"parameter": spec.parameter, "value": value, **{c: row[c] for c in SWEEP_COLUMNS[2:]}}


def sweep_point(job: tuple) -> dict:
    spec, problem, C, value = job
    if spec.is_bound:
        return _bound_point(problem, C, spec.parameter, float(value))
    return _example_point(spec, C, float(value))


def run_sweep(spec: SweepSpec, C: GenericConstants, problem: Optional[SlabProblem] = None,
              workers: int = 1) -> pd.DataFrame:
    """One row per sweep point, in sweep order."""
    if spec.is_bound and problem is None:
        raise ConfigError("a bound sweep needs a problem")
    jobs = [(spec, problem, C, value) for value in spec.values()]
    if workers > 1:
        with Pool(workers) as pool:
            rows = pool.map(sweep_point, jobs)
    else:
        rows = [sweep_point(job) for job in jobs]
    return pd.DataFrame(rows, columns=spec.columns)


def is_monotone(series: pd.Series) -> Optional[str]:
    """'increasing' / 'decreasing' / None, ignoring NaN rows."""
    values = series.dropna().to_numpy(dtype=float)
    if values.size < 2:
        return None
    steps = np.diff(values)
    if np.all(steps <= 0):
        return "decreasing"
    if np.all(steps >= 0):
        return "increasing"
    return None


def available_targets() -> list:
    return [BOUND_TARGET, *EXAMPLES]
