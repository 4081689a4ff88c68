"""
framework/green_kernel.py

Pluggable outgoing fundamental solutions g_m of −Δ_x − k_m² on ℝ^{n−1}.
The variant is fixed by (n, class of k_m); build_kernel() picks it.

All kernels share the same interface:
    kernel.evaluate(r)   → complex        (pointwise, method chosen by |k_m r|)
    kernel.sample(r)     → np.ndarray     (vectorized, for grids)

Available variants: N2Kernel, N2ResonantKernel, HankelKernel,
N3ResonantLogKernel, N4PlusResonantKernel
"""

import math
from functools import lru_cache
from typing import Optional

import numpy as np
import pandas as pd
from scipy import special

from framework.errors import (
    DomainError,
    NotApplicable,
    UnsupportedDimension,
    UnsupportedEvaluation,
)
from framework.spectral_core import ModeClass, ModeWavenumber
from framework.special import (
    CONSTANTS,
    QuadratureSpec,
    I_s_expansion,
    I_s_integral,
    is_half_integer,
)

MAX_DIMENSION = 8
SERIES_FACTOR = 0.1          # series for |k_m r| ≤ 0.1 (s+1)
ASYMPTOTIC_THRESHOLD = 30.0  # expansion of I_s for |k_m r| ≥ 30
SAFETY_FACTOR = 1.1

# Pointwise evaluation inside finite differences needs more digits than the default.
TIGHT_QUADRATURE = QuadratureSpec(rel_tol=1e-13, abs_tol=1e-300, max_subdivisions=400)


class GreenKernel:
    variant = "base"
    log_singular = False   # leading term −(1/2π) ln r at the origin (d = 2)

    def __init__(self, n: int, k_m: ModeWavenumber, quadrature: QuadratureSpec = QuadratureSpec()):
        self.n = n
        self.k_m = k_m
        self.quadrature = quadrature

    @property
    def d(self) -> int:
        return self.n - 1

    def evaluate(self, r: float) -> complex:
        raise NotImplementedError

    def sample(self, r: np.ndarray) -> np.ndarray:
        return np.vectorize(self.evaluate, otypes=[complex])(r)

    def with_quadrature(self, quadrature: QuadratureSpec) -> "GreenKernel":
        clone = object.__new__(type(self))
        clone.__dict__.update(self.__dict__)
        clone.quadrature = quadrature
        return clone

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, k_m={self.k_m.value:.6g})"


class N2Kernel(GreenKernel):
    """g = −e^{ik r}/(2ik): bounded, with a kink at the origin."""
    variant = "N2"

    def evaluate(self, r: float) -> complex:
        k = self.k_m.value
        return complex(-np.exp(1j * k * r) / (2j * k))

    def sample(self, r: np.ndarray) -> np.ndarray:
        k = self.k_m.value
        return -np.exp(1j * k * np.asarray(r, dtype=float)) / (2j * k)

    def cell_integral(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """∫_a^b g(r) dr for 0 ≤ a ≤ b."""
        k = self.k_m.value
        return (np.exp(1j * k * b) - np.exp(1j * k * a)) / (2.0 * k * k)


class N2ResonantKernel(GreenKernel):
    variant = "N2Resonant"

    def evaluate(self, r: float) -> complex:
        return complex(-r / 2.0)

    def sample(self, r: np.ndarray) -> np.ndarray:
        return -np.asarray(r, dtype=float) / 2.0 + 0j

    def cell_integral(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return -(np.asarray(b) ** 2 - np.asarray(a) ** 2) / 4.0 + 0j


class HankelKernel(GreenKernel):
    """
    g = (i/4)(k/2πr)^s H_s(kr), s = (n−3)/2, evaluated through
        g = c(s) (−ik)^{s−1/2} r^{−s−1/2} e^{ikr} I_s(−ikr)
    with c(s) = √(2/π) / (4 (2π)^s Γ(s+1/2)).
    """
    variant = "HankelRep"

    def __init__(self, n: int, k_m: ModeWavenumber, quadrature: QuadratureSpec = QuadratureSpec()):
        super().__init__(n, k_m, quadrature)
        self.s = (n - 3) / 2.0
        self.c_s = math.sqrt(2.0 / math.pi) / (4.0 * (2.0 * math.pi) ** self.s * special.gamma(self.s + 0.5))
        self.log_singular = n == 3

    def method_for(self, r: float) -> str:
        x = self.k_m.modulus * r
        if is_half_integer(self.s):
            return "closed"
        if x >= ASYMPTOTIC_THRESHOLD:
            return "asymptotic"
        if x <= SERIES_FACTOR * (self.s + 1.0):
            return "series"
        return "quadrature"

    def evaluate(self, r: float) -> complex:
        k = self.k_m.value
        method = self.method_for(r)
        if method == "series":
            return complex(0.25j * (k / (2.0 * math.pi * r)) ** self.s * special.hankel1(self.s, k * r))
        z = -1j * k * r
        if method == "quadrature":
            i_s = I_s_integral(self.s, z, self.quadrature)
        else:
            i_s = I_s_expansion(self.s, z)
        return complex(self.c_s * (-1j * k) ** (self.s - 0.5) * r ** (-self.s - 0.5)
                       * np.exp(1j * k * r) * i_s)

    def sample(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        k = self.k_m.value
        if is_half_integer(self.s):
            z = -1j * k * r
            total = np.zeros_like(z)
            term = np.full_like(z, special.gamma(self.s + 0.5))
            total = total + term
            for j in range(int(round(self.s - 0.5))):
                term = term * (self.s - 0.5 - j) * (self.s + 0.5 + j) / ((j + 1) * 2.0 * z)
                total = total + term
            with np.errstate(divide="ignore", invalid="ignore"):
                return (self.c_s * (-1j * k) ** (self.s - 0.5) * r ** (-self.s - 0.5)
                        * np.exp(1j * k * r) * total)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return 0.25j * (k / (2.0 * math.pi * r)) ** self.s * special.hankel1(self.s, k * r)

    def log_remainder(self) -> complex:
        """lim_{r→0} g(r) + (1/2π) ln r, for n = 3."""
        k = self.k_m.value
        return 0.25j - (np.log(k / 2.0) + CONSTANTS.euler_gamma) / (2.0 * math.pi)


class N3ResonantLogKernel(GreenKernel):
    """G = (1/2π) ln(2ρ/r); only this normalization is used, so ρ is required."""
    variant = "N3ResonantLog"
    log_singular = True

    def __init__(self, n: int, k_m: ModeWavenumber, rho: float, quadrature: QuadratureSpec = QuadratureSpec()):
        super().__init__(n, k_m, quadrature)
        if not rho > 0:
            raise DomainError(f"resonant n=3 kernel needs ρ > 0, got {rho}")
        self.rho = rho

    def evaluate(self, r: float) -> complex:
        return complex(math.log(2.0 * self.rho / r) / (2.0 * math.pi))

    def sample(self, r: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(2.0 * self.rho / np.asarray(r, dtype=float)) / (2.0 * math.pi) + 0j

    def log_remainder(self) -> complex:
        return complex(math.log(2.0 * self.rho) / (2.0 * math.pi))


class N4PlusResonantKernel(GreenKernel):
    """Newtonian kernel Γ((n−3)/2) / (4π^{(n−1)/2}) r^{3−n}."""
    variant = "N4PlusResonant"

    def __init__(self, n: int, k_m: ModeWavenumber, quadrature: QuadratureSpec = QuadratureSpec()):
        super().__init__(n, k_m, quadrature)
        self.coefficient = math.gamma((n - 3) / 2.0) / (4.0 * math.pi ** ((n - 1) / 2.0))

    def evaluate(self, r: float) -> complex:
        return complex(self.coefficient * r ** (3 - self.n))

    def sample(self, r: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return self.coefficient * np.asarray(r, dtype=float) ** (3 - self.n) + 0j


def build_kernel(
    n: int,
    k_m: ModeWavenumber,
    rho: Optional[float] = None,
    quadrature: QuadratureSpec = QuadratureSpec(),
) -> GreenKernel:
    """
    Factory: build a kernel from (n, k_m).

    Example:
        build_kernel(3, mode_wavenumber(2 * PI2, 2))
    """
    if n < 2 or n > MAX_DIMENSION:
        raise UnsupportedDimension(f"kernels are implemented for 2 ≤ n ≤ {MAX_DIMENSION}, got n = {n}")
    resonant = k_m.kind == ModeClass.RESONANT
    if n == 2:
        return N2ResonantKernel(n, k_m, quadrature) if resonant else N2Kernel(n, k_m, quadrature)
    if not resonant:
        return HankelKernel(n, k_m, quadrature)
    if n == 3:
        if rho is None:
            raise UnsupportedEvaluation("the resonant n=3 kernel needs a ball radius ρ (MeasureOnly support given)")
        return N3ResonantLogKernel(n, k_m, rho, quadrature)
    return N4PlusResonantKernel(n, k_m, quadrature)


def eval_g(kernel: GreenKernel, r: float) -> complex:
    if not r > 0:
        raise UnsupportedEvaluation(f"g_m is evaluated only at r > 0, got r = {r}")
    return kernel.evaluate(r)


# ─── Pointwise bounds ───────────────────────────────────────────────────────

def kernel_bound_shape(n: int, modulus: float, r: float) -> float:
    """Shape of |g_m| without its constant: (|k|r)^{−1/2} / log branch for n=3, r^{3−n}(...) for n ≥ 4."""
    x = modulus * r
    if n == 3:
        if 2.0 * x > 1.0:
            return x ** -0.5
        # √2 keeps the two branches continuous at 2|k|r = 1
        return math.sqrt(2.0) * (1.0 - math.log(2.0 * x))
    return r ** (3 - n) * (x ** ((n - 4) / 2.0) + 1.0)


_CALIBRATION_GRID = np.logspace(-5, 3, 641)


@lru_cache(maxsize=None)
def kernel_constant(n: int) -> float:
    """Calibrated C with |g_m(r)| ≤ C·shape for both classes (depends on |k_m|r only)."""
    if n < 3 or n > MAX_DIMENSION:
        raise NotApplicable(f"no pointwise kernel bound for n = {n}")
    worst = 0.0
    for value in (1.0 + 0j, 1j):
        kernel = HankelKernel(n, ModeWavenumber(1, value, ModeClass.PROPAGATING if value == 1 else ModeClass.EVANESCENT))
        g = np.abs(kernel.sample(_CALIBRATION_GRID))
        shape = np.array([kernel_bound_shape(n, 1.0, r) for r in _CALIBRATION_GRID])
        worst = max(worst, float(np.nanmax(g / shape)))
    return SAFETY_FACTOR * worst


def kernel_bound(n: int, k_m: ModeWavenumber, r: float) -> float:
    if n == 2:
        raise NotApplicable("pointwise kernel bound is stated for n ≥ 3")
    if k_m.kind == ModeClass.RESONANT:
        raise NotApplicable("pointwise kernel bound needs a nonresonant mode")
    if not r > 0:
        raise UnsupportedEvaluation(f"bound evaluated only at r > 0, got r = {r}")
    return kernel_constant(n) * kernel_bound_shape(n, k_m.modulus, r)


# ─── Logarithmic derivative ─────────────────────────────────────────────────

def log_derivative_ratio(n: int, k_m: ModeWavenumber, a: float) -> float:
    """|g'(a)/g(a)| by Richardson-extrapolated central differences (h = 1e−6·a)."""
    if k_m.kind == ModeClass.RESONANT:
        raise NotApplicable("log-derivative ratio is defined for nonresonant modes")
    if not a > 0:
        raise DomainError(f"a must be positive, got {a}")
    kernel = build_kernel(n, k_m, quadrature=TIGHT_QUADRATURE)
    g0 = kernel.evaluate(a)
    if not np.isfinite(g0) or abs(g0) < 1e-300:
        raise UnsupportedEvaluation(f"|g_m({a})| underflows for |k_m| = {k_m.modulus}")
    h = 1e-6 * a

    def central(step: float) -> complex:
        return (kernel.evaluate(a + step) - kernel.evaluate(a - step)) / (2.0 * step)

    derivative = (4.0 * central(h / 2.0) - central(h)) / 3.0
    return abs(derivative) / abs(g0)


@lru_cache(maxsize=None)
def log_derivative_constant(n: int) -> float:
    """Calibrated C with |g'/g|(a) ≤ C(1/a + |k_m|), using g'/g = −k H_{s+1}(ka)/H_s(ka)."""
    if n < 3 or n > MAX_DIMENSION:
        raise NotApplicable(f"log-derivative constant is calibrated for 3 ≤ n ≤ {MAX_DIMENSION}")
    s = (n - 3) / 2.0
    x = np.logspace(-5, 2.5, 601)
    worst = 0.0
    for phase in (1.0 + 0j, 1j):
        w = phase * x
        with np.errstate(all="ignore"):
            ratio = x * np.abs(special.hankel1(s + 1.0, w) / special.hankel1(s, w))
        worst = max(worst, float(np.nanmax(ratio / (1.0 + x))))
    return SAFETY_FACTOR * worst


def log_derivative_bound(n: int, k_m: ModeWavenumber, a: float) -> float:
    if k_m.kind == ModeClass.RESONANT:
        raise NotApplicable("log-derivative bound needs a nonresonant mode")
    if n == 2:
        return k_m.modulus
    return log_derivative_constant(n) * (1.0 / a + k_m.modulus)


# ─── Diagnostics ────────────────────────────────────────────────────────────

def kernel_radial_residual(kernel: GreenKernel, r: float) -> float:
    """
    |g'' + ((n−2)/r) g' + k_m² g| at r by five-point differences with one
    Richardson step, relative to |k_m² g| (or to the largest term when k_m = 0).
    """
    tight = kernel.with_quadrature(TIGHT_QUADRATURE)
    k = kernel.k_m.value
    h = 0.01 * r
    if kernel.k_m.modulus > 0:
        h = min(h, 0.05 / kernel.k_m.modulus)

    def derivatives(step: float) -> tuple[complex, complex]:
        gm2, gm1, g0, gp1, gp2 = (tight.evaluate(r + j * step) for j in (-2, -1, 0, 1, 2))
        d1 = (-gp2 + 8.0 * gp1 - 8.0 * gm1 + gm2) / (12.0 * step)
        d2 = (-gp2 + 16.0 * gp1 - 30.0 * g0 + 16.0 * gm1 - gm2) / (12.0 * step * step)
        return d1, d2

    d1_h, d2_h = derivatives(h)
    d1_half, d2_half = derivatives(h / 2.0)
    d1 = (16.0 * d1_half - d1_h) / 15.0
    d2 = (16.0 * d2_half - d2_h) / 15.0
    g = tight.evaluate(r)
    transport = (kernel.n - 2) / r * d1
    residual = abs(d2 + transport + k * k * g)
    scale = abs(k * k * g) if kernel.k_m.modulus > 0 else max(abs(d2), abs(transport))
    return residual / scale


def tabulate_kernel(kernel: GreenKernel, radii: np.ndarray) -> pd.DataFrame:
    """Table with the fixed columns r, re, im, bound."""
    rows = []
    for r in radii:
        g = eval_g(kernel, float(r))
        if isinstance(kernel, HankelKernel):
            bound = kernel_bound(kernel.n, kernel.k_m, float(r))
        elif isinstance(kernel, N2Kernel):
            bound = 1.0 / (2.0 * kernel.k_m.modulus)
        else:
            bound = float("nan")
        rows.append({"r": float(r), "re": g.real, "im": g.imag, "bound": bound})
    return pd.DataFrame(rows, columns=["r", "re", "im", "bound"])
