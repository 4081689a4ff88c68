import math

import numpy as np
import pytest
from scipy import special as sp

from framework.errors import NotApplicable, UnsupportedDimension, UnsupportedEvaluation
from framework.green_kernel import (
    HankelKernel,
    N2Kernel,
    N2ResonantKernel,
    N3ResonantLogKernel,
    N4PlusResonantKernel,
    build_kernel,
    eval_g,
    kernel_bound,
    kernel_radial_residual,
    log_derivative_bound,
    log_derivative_ratio,
    tabulate_kernel,
)
from framework.spectral_core import ModeClass, ModeWavenumber


def propagating(modulus: float, m: int = 1) -> ModeWavenumber:
    return ModeWavenumber(m, complex(modulus, 0.0), ModeClass.PROPAGATING)


def evanescent(modulus: float, m: int = 1) -> ModeWavenumber:
    return ModeWavenumber(m, complex(0.0, modulus), ModeClass.EVANESCENT)


RESONANT = ModeWavenumber(1, 0j, ModeClass.RESONANT)


class TestFactory:

    def test_variants(self):
        assert isinstance(build_kernel(2, propagating(1.0)), N2Kernel)
        assert isinstance(build_kernel(2, RESONANT), N2ResonantKernel)
        assert isinstance(build_kernel(3, evanescent(1.0)), HankelKernel)
        assert isinstance(build_kernel(3, RESONANT, rho=1.0), N3ResonantLogKernel)
        assert isinstance(build_kernel(5, RESONANT), N4PlusResonantKernel)

    def test_resonant_n3_needs_radius(self):
        with pytest.raises(UnsupportedEvaluation):
            build_kernel(3, RESONANT)

    def test_dimension_range(self):
        with pytest.raises(UnsupportedDimension):
            build_kernel(9, propagating(1.0))
        with pytest.raises(UnsupportedDimension):
            build_kernel(1, propagating(1.0))

    def test_origin_is_rejected(self):
        with pytest.raises(UnsupportedEvaluation):
            eval_g(build_kernel(3, propagating(1.0)), 0.0)


class TestValues:

    def test_n2_propagating_has_constant_modulus(self):
        kernel = build_kernel(2, propagating(3.0))
        r = np.linspace(0.0, 10.0, 7)
        assert np.abs(kernel.sample(r)) == pytest.approx(np.full(r.shape, 1.0 / 6.0))

    def test_n2_evanescent_decays(self):
        kernel = build_kernel(2, evanescent(2.0))
        assert eval_g(kernel, 1.5) == pytest.approx(-math.exp(-3.0) / (2j * 2j))

    def test_n2_cell_integral(self):
        kernel = build_kernel(2, evanescent(2.0))
        # ∫_0^∞ e^{−2r}/4 dr
        assert kernel.cell_integral(np.array(0.0), np.array(50.0)) == pytest.approx(0.125)

    @pytest.mark.parametrize("r", [0.01, 0.8, 5.0, 40.0])
    def test_n3_matches_hankel(self, r):
        k = 2.0
        kernel = build_kernel(3, propagating(k))
        assert eval_g(kernel, r) == pytest.approx(0.25j * complex(sp.hankel1(0, k * r)), rel=1e-8)

    @pytest.mark.parametrize("r", [0.3, 1.0, 4.0])
    def test_n5_matches_hankel(self, r):
        k = 1.5
        kernel = build_kernel(5, propagating(k))
        expected = 0.25j * (k / (2.0 * math.pi * r)) * complex(sp.hankel1(1, k * r))
        assert eval_g(kernel, r) == pytest.approx(expected, rel=1e-8)

    @pytest.mark.parametrize("r", [0.2, 1.0, 3.0])
    def test_n4_closed_form(self, r):
        kernel = build_kernel(4, evanescent(2.0))
        assert eval_g(kernel, r) == pytest.approx(math.exp(-2.0 * r) / (4.0 * math.pi * r), rel=1e-12)
        outgoing = build_kernel(4, propagating(2.0))
        assert eval_g(outgoing, r) == pytest.approx(np.exp(2j * r) / (4.0 * math.pi * r), rel=1e-12)

    def test_pointwise_and_vectorized_agree(self):
        kernel = build_kernel(3, evanescent(1.0))
        r = np.array([0.005, 0.5, 2.0])
        sampled = kernel.sample(r)
        for i, radius in enumerate(r):
            assert sampled[i] == pytest.approx(kernel.evaluate(float(radius)), rel=1e-8)

    def test_n3_log_remainder(self):
        kernel = build_kernel(3, propagating(2.0))
        r = 1e-6
        assert kernel.evaluate(r) + math.log(r) / (2.0 * math.pi) == pytest.approx(kernel.log_remainder(), abs=1e-8)

    def test_resonant_kernels(self):
        assert eval_g(build_kernel(2, RESONANT), 3.0) == pytest.approx(-1.5)
        n3 = build_kernel(3, RESONANT, rho=1.0)
        assert eval_g(n3, 2.0) == pytest.approx(0.0)
        n5 = build_kernel(5, RESONANT)
        assert eval_g(n5, 2.0) == pytest.approx(1.0 / (4.0 * math.pi ** 2) / 4.0)


class TestBounds:

    @pytest.mark.parametrize("n", [3, 4, 5])
    @pytest.mark.parametrize("make", [propagating, evanescent])
    def test_pointwise_bound_holds(self, n, make):
        k_m = make(2.0)
        kernel = build_kernel(n, k_m)
        for r in (0.01, 0.3, 1.0, 5.0):
            assert abs(eval_g(kernel, r)) <= kernel_bound(n, k_m, r)

    def test_pointwise_bound_not_for_n2(self):
        with pytest.raises(NotApplicable):
            kernel_bound(2, propagating(1.0), 1.0)
        with pytest.raises(NotApplicable):
            kernel_bound(3, RESONANT, 1.0)

    @pytest.mark.parametrize("n", [3, 4])
    def test_log_derivative_within_bound(self, n):
        k_m = propagating(1.0)
        for a in (0.15, 0.5, 3.0):
            assert log_derivative_ratio(n, k_m, a) <= log_derivative_bound(n, k_m, a)

    def test_log_derivative_n2_is_modulus(self):
        assert log_derivative_bound(2, evanescent(3.0), 0.5) == 3.0
        kernel_ratio = log_derivative_ratio(2, evanescent(3.0), 0.5)
        assert kernel_ratio == pytest.approx(3.0, rel=1e-6)


class TestDiagnostics:

    @pytest.mark.parametrize("n, make, r", [
        (3, propagating, 1.0),
        (3, evanescent, 0.5),
        (4, evanescent, 1.0),
        (5, propagating, 2.0),
    ])
    def test_radial_residual(self, n, make, r):
        assert kernel_radial_residual(build_kernel(n, make(2.0)), r) <= 1e-5

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    @pytest.mark.parametrize("modulus", [0.5, 2.0, 10.0])
    @pytest.mark.parametrize("make", [propagating, evanescent])
    def test_radial_residual_across_dimensions(self, n, modulus, make):
        kernel = build_kernel(n, make(modulus))
        worst = max(kernel_radial_residual(kernel, float(r)) for r in np.geomspace(0.05, 20.0, 7))
        assert worst <= 1e-6

    def test_table_columns(self):
        table = tabulate_kernel(build_kernel(3, propagating(1.0)), np.geomspace(0.1, 10.0, 5))
        assert list(table.columns) == ["r", "re", "im", "bound"]
        assert len(table) == 5
        assert (np.hypot(table["re"], table["im"]) <= table["bound"]).all()

    def test_table_n2_bound(self):
        table = tabulate_kernel(build_kernel(2, propagating(2.0)), np.array([0.5, 1.0]))
        assert table["bound"].tolist() == pytest.approx([0.25, 0.25])
