"""
framework/verifier.py

Verification suites. Each suite turns a list of tasks into VerificationResult
rows (lemma, m, lhs, rhs, margin, pass):

- problem suite:   every candidate lemma of every certified mode of a problem,
                   checked against random f supported in I.
- explicit suite:  the explicit-constant n = 2 lemmas over a fixed grid of
                   |k_m| × class × |I| configurations.
- Hardy–Littlewood: random nonnegative triples on small 1-D / 2-D grids.

A task carries its own seed, so rows do not depend on how many workers ran them.
With stress=True every c_m is halved; a sound suite must then fail somewhere.
"""

import math
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Optional

import numpy as np

from framework.bound_engine import GenericConstants, ModeBound, aggregate, cm_fourier, cm_n2
from framework.errors import ConfigError
from framework.oracle import (
    Grid,
    SampledFunction,
    VerificationResult,
    inequality_grid,
    random_bumps,
    random_radial_bumps,
    support_radius,
    verify_hardy_littlewood,
    verify_mode_inequality,
)
from framework.spectral_core import Ball, ModeClass, SlabProblem

EXPLICIT_MODULI = (0.2, 1.0, 3.0, 10.0)
EXPLICIT_MEASURES = (0.5, 2.0)
HL_HALF_NODES = 8   # 17 nodes per axis, 16 cells on [−1, 1]; odd so the origin is a node


@dataclass(frozen=True)
class VerifyTask:
    suite: str                  # "problem" | "explicit" | "hardy_littlewood"
    seed: int
    index: int
    problem: Optional[SlabProblem] = None
    bounds: tuple = ()          # ModeBound rows to check against one f each
    d: int = 1
    stress: bool = False

    def rng(self) -> np.random.Generator:
        return np.random.default_rng([self.seed, self.index])


def _stressed(bound: ModeBound, stress: bool) -> ModeBound:
    if not stress:
        return bound
    return ModeBound(bound.m, 0.5 * bound.c_m, bound.source, bound.applicability, bound.provenance)


def _random_source(problem: SlabProblem, m: int, rng: np.random.Generator):
    k_m = problem.mode(m)
    if problem.d <= 2:
        grid, mask = inequality_grid(problem, k_m)
        return random_bumps(grid, mask, rng)
    return random_radial_bumps(problem.d, support_radius(problem), rng)


# ─── Task builders ──────────────────────────────────────────────────────────

def problem_tasks(problem: SlabProblem, C: GenericConstants, trials: int, seed: int,
                  stress: bool = False) -> list[VerifyTask]:
    """
    One task per (trial, certified mode). Every lemma that applies to the
    mode is checked, not only the one that wins the certificate.
    """
    if trials < 1:
        raise ConfigError(f"verify.trials must be ≥ 1, got {trials}")
    certificate = aggregate(problem, C)
    tasks = []
    for bound in certificate.modes:
        candidates = tuple(
            ModeBound(bound.m, c_m, source)
            for source, c_m in sorted(bound.candidates.items())
        ) or (bound,)
        for _ in range(trials):
            tasks.append(VerifyTask("problem", seed, len(tasks), problem=problem,
                                    bounds=candidates, d=problem.d, stress=stress))
    return tasks


def explicit_problem(modulus: float, kind: ModeClass, measure: float) -> tuple[SlabProblem, int]:
    """
    An n = 2 problem on the interval of length |I| whose mode m has the
    requested |k_m| and class.
    """
    if kind == ModeClass.PROPAGATING:
        return SlabProblem(2, math.pi ** 2 + modulus ** 2, Ball(measure / 2.0)), 1
    m = 1
    while (m * math.pi) ** 2 <= modulus ** 2 * (1.0 + 1e-9):
        m += 1
    return SlabProblem(2, (m * math.pi) ** 2 - modulus ** 2, Ball(measure / 2.0)), m


def explicit_tasks(trials: int, seed: int, stress: bool = False) -> list[VerifyTask]:
    """The fourier / n2_convolution grid with explicit constants."""
    if trials < 1:
        raise ConfigError(f"verify.explicit_trials must be ≥ 1, got {trials}")
    tasks = []
    for modulus in EXPLICIT_MODULI:
        for kind in (ModeClass.EVANESCENT, ModeClass.PROPAGATING):
            for measure in EXPLICIT_MEASURES:
                problem, m = explicit_problem(modulus, kind, measure)
                k_m = problem.mode(m)
                bounds = [cm_n2(k_m, problem.measure)]
                if kind == ModeClass.EVANESCENT:
                    bounds.insert(0, cm_fourier(k_m))
                for _ in range(trials):
                    tasks.append(VerifyTask("explicit", seed, len(tasks), problem=problem,
                                            bounds=tuple(bounds), d=1, stress=stress))
    return tasks


def hardy_littlewood_tasks(trials_1d: int, trials_2d: int, seed: int) -> list[VerifyTask]:
    if trials_1d < 0 or trials_2d < 0:
        raise ConfigError("Hardy–Littlewood trial counts must be ≥ 0")
    tasks = [VerifyTask("hardy_littlewood", seed, i, d=1) for i in range(trials_1d)]
    tasks += [VerifyTask("hardy_littlewood", seed, trials_1d + i, d=2) for i in range(trials_2d)]
    return tasks


# ─── Runners ────────────────────────────────────────────────────────────────

def _random_triple(d: int, rng: np.random.Generator) -> tuple:
    grid = Grid.centered(d, 1.0 / HL_HALF_NODES, HL_HALF_NODES)
    mask = np.ones(grid.shape, dtype=bool)
    out = []
    for _ in range(3):
        values = rng.uniform(0.0, 1.0, grid.shape) * (rng.random(grid.shape) < 0.7)
        out.append(SampledFunction(grid, values, mask))
    return tuple(out)


def run_task(task: VerifyTask) -> list[VerificationResult]:
    rng = task.rng()
    if task.suite == "hardy_littlewood":
        return [verify_hardy_littlewood(*_random_triple(task.d, rng))]
    m = task.bounds[0].m
    f = _random_source(task.problem, m, rng)
    return [verify_mode_inequality(task.problem, m, f, _stressed(bound, task.stress))
            for bound in task.bounds]


def run_tasks(tasks: list[VerifyTask], workers: int = 1) -> list[VerificationResult]:
    """Runs every task; results come back in task order whatever the worker count."""
    if workers > 1 and len(tasks) > 1:
        with Pool(workers) as pool:
            chunks = pool.map(run_task, tasks)
    else:
        chunks = [run_task(task) for task in tasks]
    return [row for chunk in chunks for row in chunk]


def failures(results: list[VerificationResult]) -> list[VerificationResult]:
    return [r for r in results if not r.passed]


def summarize(results: list[VerificationResult]) -> dict:
    """Row count, failures and worst relative margin per lemma."""
    out = {}
    for r in results:
        entry = out.setdefault(r.lemma, {"rows": 0, "failed": 0, "worst_ratio": 0.0})
        entry["rows"] += 1
        entry["failed"] += 0 if r.passed else 1
        if r.rhs > 0:
            entry["worst_ratio"] = max(entry["worst_ratio"], r.lhs / r.rhs)
    return out
