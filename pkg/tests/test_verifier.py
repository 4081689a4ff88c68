import numpy as np
import pytest

from framework.errors import ConfigError, DomainError
from framework.oracle import Grid, SampledFunction, VerificationResult, verify_hardy_littlewood
from framework.spectral_core import PI2, MeasureOnly, ModeClass, SlabProblem
from framework.verifier import (
    EXPLICIT_MEASURES,
    EXPLICIT_MODULI,
    HL_HALF_NODES,
    explicit_problem,
    explicit_tasks,
    failures,
    hardy_littlewood_tasks,
    problem_tasks,
    run_tasks,
    summarize,
)


@pytest.mark.parametrize("modulus", EXPLICIT_MODULI)
@pytest.mark.parametrize("kind", [ModeClass.PROPAGATING, ModeClass.EVANESCENT])
def test_explicit_problem_hits_the_requested_mode(modulus, kind):
    problem, m = explicit_problem(modulus, kind, 2.0)
    k_m = problem.mode(m)
    assert k_m.kind == kind
    assert k_m.modulus == pytest.approx(modulus)
    assert problem.measure == pytest.approx(2.0)


def test_explicit_suite_shape():
    tasks = explicit_tasks(2, seed=0)
    assert len(tasks) == 2 * 2 * len(EXPLICIT_MODULI) * len(EXPLICIT_MEASURES)
    assert [t.index for t in tasks] == list(range(len(tasks)))


def test_explicit_suite_passes():
    results = run_tasks(explicit_tasks(1, seed=11))
    assert not failures(results)
    assert {r.lemma for r in results} == {"fourier", "n2_convolution"}


def test_problem_suite_checks_every_certified_mode(constants):
    problem = SlabProblem(2, 0.5 * PI2, MeasureOnly(10.0))
    tasks = problem_tasks(problem, constants, trials=2, seed=0)
    assert len(tasks) == 4
    results = run_tasks(tasks)
    assert sorted({r.m for r in results}) == [1, 2]
    assert not failures(results)


def test_trials_must_be_positive(constants):
    with pytest.raises(ConfigError):
        problem_tasks(SlabProblem(2, 1.0, MeasureOnly(1.0)), constants, trials=0, seed=0)
    with pytest.raises(ConfigError):
        explicit_tasks(0, seed=0)
    with pytest.raises(ConfigError):
        hardy_littlewood_tasks(-1, 0, seed=0)


def test_hardy_littlewood_suite():
    tasks = hardy_littlewood_tasks(3, 2, seed=5)
    assert [t.d for t in tasks] == [1, 1, 1, 2, 2]
    results = run_tasks(tasks)
    assert len(results) == 5
    assert not failures(results)


def test_hardy_littlewood_grids_have_sixteen_cells_and_a_centre_node():
    grid = Grid.centered(2, 1.0 / HL_HALF_NODES, HL_HALF_NODES)
    assert grid.shape == (17, 17)
    assert grid.extent() == pytest.approx(2.0)
    assert grid.is_centered
    even = Grid((-7.5 / HL_HALF_NODES,), 1.0 / HL_HALF_NODES, (16,))
    assert not even.is_centered
    f = SampledFunction(even, np.ones(even.shape), np.ones(even.shape, dtype=bool))
    with pytest.raises(DomainError):
        verify_hardy_littlewood(f, f, f)


def test_rows_do_not_depend_on_workers():
    tasks = hardy_littlewood_tasks(4, 0, seed=9)
    serial = [r.lhs for r in run_tasks(tasks, workers=1)]
    pooled = [r.lhs for r in run_tasks(tasks, workers=2)]
    assert serial == pooled


def test_stress_halves_the_bound(constants):
    problem = SlabProblem(2, 0.5 * PI2, MeasureOnly(10.0))
    plain = run_tasks(problem_tasks(problem, constants, 1, seed=3))
    stressed = run_tasks(problem_tasks(problem, constants, 1, seed=3, stress=True))
    for a, b in zip(plain, stressed):
        assert b.lhs == pytest.approx(a.lhs)
        assert b.rhs == pytest.approx(0.5 * a.rhs)


def test_summarize():
    rows = [
        VerificationResult(1.0, 2.0, 0.0, "fourier", 1),
        VerificationResult(3.0, 2.0, 0.0, "fourier", 2),
        VerificationResult(1.0, 4.0, 0.0, "agmon", 1),
    ]
    summary = summarize(rows)
    assert summary["fourier"] == {"rows": 2, "failed": 1, "worst_ratio": 1.5}
    assert summary["agmon"]["failed"] == 0
    assert failures(rows) == [rows[1]]
