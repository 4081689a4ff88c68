import math

import numpy as np
import pytest

from framework.errors import ConfigError, DomainError, HypothesisViolated, InvalidBoundary, SizeViolation
from framework.sharpness import (
    REPORT_COLUMNS,
    build_example,
    construct_dLarge,
    construct_n3_log,
    construct_propagating_staircase,
    construct_resonant,
    construct_resonant_annulus,
    construct_resonant_power,
    construct_resonant_tent,
    construct_resonant_two_mode,
    dimension_of,
    example_params,
    parabolic_patch_complex,
    parabolic_patch_real,
    parse_params,
)
from framework.spectral_core import PI2, ModeClass, ModeWavenumber


class TestPatches:

    def test_real_patch_bound_is_attained_at_the_edge(self):
        k_m = ModeWavenumber(1, 1j, ModeClass.EVANESCENT)
        patch = parabolic_patch_real((2.0, -1.0), 3, k_m)
        assert patch.bound == pytest.approx(1.0)
        assert patch.shifted_potential(np.array([1.0]))[0] == pytest.approx(patch.bound)
        assert patch.matching_jump(2.0, -1.0) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("boundary", [(0.0, -1.0), (1.0, 0.5)])
    def test_real_patch_rejects(self, boundary):
        with pytest.raises(InvalidBoundary):
            parabolic_patch_real(boundary, 2, ModeWavenumber(1, 1j, ModeClass.EVANESCENT))

    def test_complex_patch_rejects(self):
        k_m = ModeWavenumber(1, 1 + 0j, ModeClass.PROPAGATING)
        with pytest.raises(InvalidBoundary):
            parabolic_patch_complex((-1.0, -1.0), 3, k_m)
        with pytest.raises(HypothesisViolated):
            parabolic_patch_complex((1.0, 1.0), 3, k_m)


class TestKernelTail:

    @pytest.mark.parametrize("delta", [10.0, 50.0, 250.0])
    def test_evanescent_large_normalization(self, constants, delta):
        _, report = build_example("evanescent_large", {"delta": delta}, constants)
        assert report.achieved == pytest.approx(delta ** 2 + delta, rel=1e-9)
        assert report.bound == pytest.approx(delta ** 2)
        assert report.normalized == pytest.approx(1.0 + 1.0 / delta, rel=1e-9)

    def test_evanescent_large_approaches_one(self, constants):
        normalized = [build_example("evanescent_large", {"delta": d}, constants)[1].normalized
                      for d in (10.0, 50.0, 250.0)]
        assert normalized == sorted(normalized, reverse=True)

    def test_evanescent_small(self, constants):
        _, report = build_example("evanescent_small", {"delta": 0.1}, constants)
        assert report.bound == pytest.approx(0.1)
        assert report.normalized == pytest.approx(1.1, rel=1e-9)

    def test_outer_kernel_evanescent(self, constants):
        solution, report = build_example("outer_kernel", None, constants)
        assert solution.extras["observed_c"] == pytest.approx(1.0)
        assert solution.extras["c1_jump"] < 1e-12
        assert solution.outside_max == 0.0
        assert list(report.as_row()) == REPORT_COLUMNS

    def test_propagating_patch_matches(self):
        solution = construct_dLarge(3, ModeWavenumber(1, 2 + 0j, ModeClass.PROPAGATING))
        assert solution.extras["c1_jump"] < 1e-12
        assert solution.outside_max == 0.0


class TestStaircase:

    def test_profile(self):
        solution = construct_propagating_staircase(10.0)
        extras = solution.extras
        assert extras["B"] == pytest.approx(8.0 * math.pi / 30.0)
        assert extras["c1_jump"] < 1e-9
        assert extras["nondecreasing"]
        assert extras["phi2_ratio"] == pytest.approx(40.0 / PI2)
        assert extras["phi2_ratio"] <= 5.0
        assert extras["levels"][-1] == pytest.approx(1.0)

    def test_potential_lives_where_cos_is_large(self):
        solution = construct_propagating_staircase(10.0)
        assert solution.outside_max == 0.0
        assert solution.extras["gap_region_max"] <= 1e-12
        assert solution.extras["off_support_phase_error"] < 1e-12

    def test_needs_large_gap(self):
        with pytest.raises(DomainError):
            construct_propagating_staircase(0.5)


class TestLogGap:

    def test_patch_matches_bessel_tail(self):
        solution = construct_n3_log(0.01)
        assert solution.extras["c1_jump"] < 1e-8
        assert solution.outside_max == 0.0
        assert solution.extras["re_u_R"] > 0


class TestSubcritical:

    def test_supremum(self, constants):
        solution, report = build_example("subcritical", None, constants)
        assert solution.extras["sup_formula"] == pytest.approx(PI2 + math.pi / 100.0)
        assert solution.V_norm == pytest.approx(PI2 + math.pi / 100.0, rel=1e-12)
        assert solution.outside_max == 0.0
        assert report.bound == pytest.approx(PI2)
        assert report.normalized == pytest.approx(1.0 + 1.0 / (100.0 * math.pi), rel=1e-12)


class TestResonant:

    def test_tent(self, constants):
        _, report = build_example("resonant_tent", None, constants)
        assert report.bound == pytest.approx(0.06)
        assert 0.0 < report.ratio < 1.0
        assert 0.05 < report.normalized < 0.15

    def test_tent_size(self):
        with pytest.raises(SizeViolation):
            construct_resonant_tent(3.0, 1.0)

    def test_tent_dilation_scales_lengths(self):
        small = construct_resonant_tent(0.03, 1.0)
        large = construct_resonant_tent(0.06, 2.0)
        assert large.extras["L"] == pytest.approx(2.0 * small.extras["L"])
        assert large.norm_ratio == pytest.approx(4.0 * small.norm_ratio)

    def test_two_mode_is_dominated(self):
        solution = construct_resonant_two_mode(0.05)
        assert solution.extras["dominated"]
        assert solution.extras["k"] == pytest.approx(4.0 * PI2)
        assert solution.outside_max == 0.0

    def test_two_mode_size(self):
        with pytest.raises(SizeViolation):
            construct_resonant_two_mode(1.0)

    def test_annulus(self, constants):
        solution = construct_resonant_annulus(0.1 * math.pi)
        assert solution.extras["greens_inner"] == pytest.approx(2.0 * math.pi)
        assert solution.extras["greens_outer"] == pytest.approx(2.0 * math.pi)
        r = solution.coords["r"]
        assert np.abs(solution.u[r >= 1.0]).max() <= 1e-12
        _, report = build_example("resonant_annulus", None, constants)
        assert report.achieved <= report.bound

    def test_annulus_size(self):
        with pytest.raises(SizeViolation):
            construct_resonant_annulus(4.0, 1.0)

    def test_power(self):
        solution = construct_resonant_power(5, 1.0)
        assert solution.extras["above_floor"]
        assert solution.extras["f0"] == pytest.approx(8.0 * solution.extras["r0"] ** -4)

    def test_dispatch(self):
        assert construct_resonant(2, {"measure": 0.03}).example == "resonant_tent"
        assert construct_resonant(2, {"measure": 0.05, "modes": 2}).example == "resonant_two_mode"
        assert construct_resonant(3, {"measure": 0.1}).example == "resonant_annulus"
        assert construct_resonant(4, {"measure": 1.0}).example == "resonant_power"


class TestRegistry:

    def test_parse_params(self):
        assert parse_params("delta=10, n=2") == {"delta": 10.0, "n": 2.0}
        assert parse_params("") == {}
        with pytest.raises(ConfigError):
            parse_params("delta")
        with pytest.raises(ConfigError):
            parse_params("delta=x")

    def test_example_params(self):
        assert example_params("staircase", {"delta": 4})["delta"] == 4.0
        with pytest.raises(ConfigError):
            example_params("no_such_example")
        with pytest.raises(ConfigError):
            example_params("staircase", {"n": 2})

    def test_dimension_of(self):
        assert dimension_of("staircase") == 2
        assert dimension_of("log_gap") == 3
        assert dimension_of("resonant_annulus") == 3
        assert dimension_of("resonant_power") == 5
        assert dimension_of("subcritical", {"n": 3}) == 3
