import math

import numpy as np
import pytest

from framework.bound_engine import (
    AGMON_MIN_PRODUCT,
    GenericConstants,
    Provenance,
    aggregate,
    best_mode_bound,
    cm_agmon,
    cm_fourier,
    cm_n2,
    cm_n2_resonant,
    cm_n3_lorentz,
    cm_n3_resonant,
    cm_n3_smallgap,
    cm_n4,
    cm_n4_resonant,
    find_tail,
    theorem_bounds,
)
from framework.errors import ConfigError, NoApplicableBound, NotApplicable
from framework.spectral_core import PI2, Ball, MeasureOnly, ModeClass, ModeWavenumber, SlabProblem

RESONANT = ModeWavenumber(1, 0j, ModeClass.RESONANT)


def propagating(modulus: float, m: int = 1) -> ModeWavenumber:
    return ModeWavenumber(m, complex(modulus, 0.0), ModeClass.PROPAGATING)


def evanescent(modulus: float, m: int = 1) -> ModeWavenumber:
    return ModeWavenumber(m, complex(0.0, modulus), ModeClass.EVANESCENT)


class TestConstants:

    def test_user_supplied(self, constants):
        assert constants.C_agmon.value == 2.0
        assert constants.C_agmon.provenance == Provenance.USER_SUPPLIED

    def test_missing_constant(self):
        with pytest.raises(ConfigError):
            GenericConstants.user_supplied(C_agmon=1.0)

    def test_nonpositive_constant(self):
        with pytest.raises(ConfigError):
            GenericConstants.user_supplied(C_agmon=0.0, C_lorentz=1.0, C_n3S=1.0, C_n4=1.0, C_n4res=1.0)

    def test_dict_round_trip_and_overrides(self, constants):
        assert GenericConstants.from_dict(constants.to_dict()) == constants
        changed = constants.with_overrides({"C_lorentz": 3.0})
        assert changed.C_lorentz.value == 3.0
        assert changed.C_agmon == constants.C_agmon
        with pytest.raises(ConfigError):
            constants.with_overrides({"C_unknown": 1.0})


class TestLemmas:

    def test_fourier(self):
        assert cm_fourier(evanescent(2.0)).c_m == pytest.approx(0.25)
        with pytest.raises(NotApplicable):
            cm_fourier(propagating(2.0))

    def test_agmon(self, constants):
        bound = cm_agmon(propagating(4.0), Ball(0.5), constants)
        assert bound.c_m == pytest.approx(2.0 * 0.5 / 4.0)
        assert bound.provenance == Provenance.USER_SUPPLIED
        with pytest.raises(NotApplicable):
            cm_agmon(propagating(4.0), MeasureOnly(1.0), constants)
        with pytest.raises(NotApplicable):
            cm_agmon(propagating(AGMON_MIN_PRODUCT), Ball(1.0), constants)
        with pytest.raises(NotApplicable):
            cm_agmon(evanescent(4.0), Ball(0.5), constants)

    def test_n2(self):
        assert cm_n2(propagating(3.0), 1.5).c_m == pytest.approx(0.25)
        assert cm_n2(evanescent(3.0), 1.5).provenance == Provenance.EXPLICIT
        with pytest.raises(NotApplicable):
            cm_n2(RESONANT, 1.0)
        with pytest.raises(NotApplicable):
            cm_n2(propagating(3.0), 1.0, n=3)

    def test_n2_resonant_needs_unit_ball(self):
        assert cm_n2_resonant(0.5, 1.0, RESONANT).c_m == pytest.approx(1.0)
        assert cm_n2_resonant(0.5, 2.0).c_m == pytest.approx(2.0)
        with pytest.raises(NotApplicable):
            cm_n2_resonant(0.5, 0.9, RESONANT)
        with pytest.raises(NotApplicable):
            cm_n2_resonant(0.5, None, RESONANT)

    def test_n3_family(self, constants):
        assert cm_n3_lorentz(propagating(4.0), 16.0, constants).c_m == pytest.approx(0.5 * 8.0)
        small = cm_n3_smallgap(propagating(0.1), 0.25, constants)
        assert small.c_m == pytest.approx(0.25 * (1.0 - math.log(0.05)))
        with pytest.raises(NotApplicable):
            cm_n3_smallgap(propagating(3.0), 1.0, constants)
        resonant = cm_n3_resonant(math.pi, 1.0)
        assert resonant.c_m == pytest.approx(1.0)
        with pytest.raises(NotApplicable):
            cm_n3_resonant(4.0, 1.0)

    def test_n4_family(self, constants):
        n = 5
        bound = cm_n4(propagating(4.0), 1.0, n, constants)
        assert bound.c_m == pytest.approx(4.0 ** 0.5 + 1.0)
        assert cm_n4_resonant(4.0, n, constants).c_m == pytest.approx(2.0)
        with pytest.raises(NotApplicable):
            cm_n4(propagating(4.0), 1.0, 3, constants)


class TestAggregate:

    def test_subcritical_measure_only(self, constants):
        problem = SlabProblem(2, 0.5 * PI2, MeasureOnly(10.0))
        certificate = aggregate(problem, constants)
        assert certificate.threshold == pytest.approx(0.5 * PI2)
        assert certificate.modes[0].source == "fourier"
        assert certificate.m_tail == 2
        assert certificate.tail_bound == pytest.approx(1.0 / (8.5 * PI2))
        assert certificate.theorem_comparisons["subcritical"] == pytest.approx(1.0 / (0.5 * PI2))

    @pytest.mark.parametrize("k", [0.0, 0.5 * PI2, 0.9 * PI2])
    def test_threshold_is_gap_below_first_mode(self, constants, k):
        certificate = aggregate(SlabProblem(2, k, MeasureOnly(10.0)), constants)
        assert certificate.threshold == pytest.approx(PI2 - k)

    def test_n3_two_modes(self, constants):
        problem = SlabProblem(3, 2.0 * PI2, Ball(1.0, center=(0.0, 0.0), measure=1.0))
        certificate = aggregate(problem, constants)
        assert [b.m for b in certificate.modes] == [1, 2, 3]
        assert certificate.m_tail == 3
        assert certificate.modes[0].source == "n3_lorentz"
        assert certificate.modes[0].c_m == pytest.approx(1.0 / math.sqrt(math.pi))
        assert certificate.modes[1].source == "fourier"
        assert certificate.modes[1].c_m == pytest.approx(1.0 / (2.0 * PI2))
        assert certificate.threshold == pytest.approx(math.sqrt(math.pi))
        assert set(certificate.modes[0].candidates) == {"agmon", "n3_lorentz"}

    def test_resonant_n2(self, constants):
        problem = SlabProblem(2, PI2, Ball(1.0, measure=0.5))
        certificate = aggregate(problem, constants)
        assert certificate.modes[0].source == "n2_resonant"
        assert certificate.threshold == pytest.approx(1.0)
        assert certificate.m_tail == 3
        assert any("ρ ≥ 1" in note for note in certificate.notes)

    def test_resonant_without_radius(self, constants):
        problem = SlabProblem(2, PI2, MeasureOnly(0.5))
        with pytest.raises(NoApplicableBound):
            aggregate(problem, constants)

    def test_active_modes_skip_the_tail(self, constants):
        problem = SlabProblem(2, PI2 - 2500.0, Ball(1.0))
        certificate = aggregate(problem, constants, active_modes=(1,))
        assert certificate.threshold == pytest.approx(2500.0)
        assert certificate.tail_bound == 0.0
        with pytest.raises(NoApplicableBound):
            aggregate(problem, constants, active_modes=())

    def test_tail_modes_are_dominated(self, constants):
        problem = SlabProblem(3, 2.0 * PI2, Ball(1.0, measure=1.0))
        modes, m_tail = find_tail(problem, constants)
        c = max(b.c_m for b in modes)
        for m in range(m_tail + 1, m_tail + 20):
            assert best_mode_bound(problem, m, constants).c_m <= c

    def test_calibrated_note(self, constants):
        problem = SlabProblem(3, 2.0 * PI2, Ball(1.0, measure=1.0))
        notes = aggregate(problem, constants).notes
        assert any("not an interval enclosure" in note for note in notes)

    def test_table(self, constants):
        certificate = aggregate(SlabProblem(2, 0.5 * PI2, MeasureOnly(10.0)), constants)
        table = certificate.to_table()
        assert list(table.columns) == ["m", "class", "abs_k_m", "c_m", "source", "provenance"]
        assert table["class"].tolist() == ["evanescent", "evanescent"]
        payload = certificate.to_dict()
        assert payload["tail"]["from_m"] == 3
        assert payload["threshold"] == pytest.approx(0.5 * PI2)


class TestTheorems:

    def test_subcritical_value(self, constants):
        theorems = theorem_bounds(SlabProblem(2, PI2 - 0.1, Ball(1.0)), constants)
        assert theorems["subcritical"] == pytest.approx(10.0)
        assert theorems["gap_agmon"] == pytest.approx(10.0)

    def test_n2_gap_forms(self, constants):
        theorems = theorem_bounds(SlabProblem(2, 2.0 * PI2, Ball(1.0)), constants)
        assert theorems["n2_gap"] == pytest.approx(2.0 / (2.0 * math.pi))
        assert theorems["n2_combined"] == pytest.approx(max(1.0 / math.pi, min(1.0 / (math.sqrt(2.0) * math.pi),
                                                                             1.0 / (2.0 * PI2))))
        assert "subcritical" not in theorems

    def test_n3_log_only_for_small_gap(self, constants):
        near = theorem_bounds(SlabProblem(3, PI2 + 1e-4, Ball(0.2)), constants)
        assert "n3_log" in near
        far = theorem_bounds(SlabProblem(3, 2.0 * PI2, Ball(1.0)), constants)
        assert "n3_log" not in far

    def test_resonant_n3(self, constants):
        theorems = theorem_bounds(SlabProblem(3, PI2, Ball(1.0, measure=1.0)), constants)
        resonant = 1.0 / math.pi * (1.0 + math.log(math.pi))
        assert theorems["n3_resonant"] == pytest.approx(max(1.0, resonant))
        assert "n3_resonant_refined" in theorems

    def test_n4_floor(self, constants):
        theorems = theorem_bounds(SlabProblem(5, 2.0 * PI2, Ball(0.01)), constants)
        assert theorems["n4"] == 1.0

    def test_certificate_dominates_theorems(self, constants):
        rng = np.random.default_rng(7)
        for _ in range(40):
            n = int(rng.integers(2, 6))
            k = float(rng.uniform(0.1, 30.0))
            problem = SlabProblem(n, k, Ball(float(rng.uniform(0.3, 2.0))))
            certificate = aggregate(problem, constants)
            for name, value in certificate.theorem_comparisons.items():
                assert certificate.aggregate_c <= value * (1.0 + 1e-12), name
