"""
framework/oracle.py

Numerical ground truth for the per-mode estimates:
    convolve            u_m = g_m * f_m on a uniform grid (d ≤ 2) or radially (d ≥ 2)
    norms               L1 / L2 / L∞, weighted ‖·‖_{0,s}, Lorentz (p,∞)
    rearrange           symmetric decreasing rearrangement on the grid
    verify_*            inequality checks returning VerificationResult
    pde_residual        finite-difference residual of −Δu = (k+V)u on the slab
    radiation_check     outgoing condition on a radial profile
    fourier_solve       Fourier-side solution for evanescent modes

Grids are uniform boxes; a node stands for the cell of side h around it.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy import signal, special

from framework.errors import (
    DomainError,
    GridTooCoarse,
    InsufficientExtent,
    NegativeValues,
    SingularityError,
    UnsupportedDimension,
)
from framework.green_kernel import GreenKernel, build_kernel
from framework.spectral_core import (
    ModeClass,
    ModeWavenumber,
    SlabProblem,
    SlabSamples,
    ball_volume,
)

LORENTZ_LEVELS = 64


# ─── Grids and samples ──────────────────────────────────────────────────────

@dataclass(frozen=True)
class Grid:
    """Uniform grid with node i at origin + i·h on every axis."""
    origin: tuple
    h: float
    shape: tuple

    def __post_init__(self):
        if not self.h > 0:
            raise DomainError(f"grid spacing must be positive, got {self.h}")
        if len(self.origin) != len(self.shape):
            raise DomainError("origin and shape disagree on the dimension")

    @classmethod
    def centered(cls, d: int, h: float, half: int) -> "Grid":
        return cls(origin=(-half * h,) * d, h=h, shape=(2 * half + 1,) * d)

    @property
    def d(self) -> int:
        return len(self.shape)

    @property
    def cell_volume(self) -> float:
        return self.h ** self.d

    @property
    def is_centered(self) -> bool:
        return all(n % 2 == 1 and abs(o + (n // 2) * self.h) < 1e-12 * max(1.0, abs(o))
                   for o, n in zip(self.origin, self.shape))

    def axes(self) -> list:
        return [o + self.h * np.arange(n) for o, n in zip(self.origin, self.shape)]

    def mesh(self) -> list:
        return np.meshgrid(*self.axes(), indexing="ij")

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c ** 2 for c in self.mesh()))

    def extent(self) -> float:
        return self.h * (max(self.shape) - 1)


@dataclass(frozen=True)
class SampledFunction:
    grid: Grid
    values: np.ndarray = field(repr=False)
    support_mask: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.grid.d > 2:
            raise UnsupportedDimension("grid functions are limited to d ≤ 2; use RadialSample for d ≥ 3")
        if self.values.shape != self.grid.shape or self.support_mask.shape != self.grid.shape:
            raise DomainError(f"values {self.values.shape} / mask {self.support_mask.shape} "
                              f"do not match the grid {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("sampled values must be finite")

    def with_values(self, values: np.ndarray) -> "SampledFunction":
        return SampledFunction(self.grid, np.asarray(values), self.support_mask)

    def l2_on_support(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values[self.support_mask]) ** 2) * self.grid.cell_volume))


def sphere_area(d: int) -> float:
    """|S^{d−1}|, the area of the unit sphere in ℝ^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


@dataclass(frozen=True)
class RadialSample:
    """Radial function on [0, radius] at composite Gauss–Legendre nodes, in ℝ^d."""
    d: int
    r: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    radius: float = 1.0

    @classmethod
    def on_ball(cls, d: int, radius: float, func: Callable[[np.ndarray], np.ndarray],
                panels: int = 8, nodes_per_panel: int = 16) -> "RadialSample":
        if d < 2:
            raise UnsupportedDimension("radial samples need d ≥ 2")
        t, w = np.polynomial.legendre.leggauss(nodes_per_panel)
        edges = np.linspace(0.0, radius, panels + 1)
        r = np.concatenate([0.5 * (b - a) * t + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
        wts = np.concatenate([0.5 * (b - a) * w for a, b in zip(edges[:-1], edges[1:])])
        return cls(d, r, wts, np.asarray(func(r), dtype=complex), radius)

    def with_values(self, values: np.ndarray) -> "RadialSample":
        return RadialSample(self.d, self.r, self.weights, np.asarray(values, dtype=complex), self.radius)

    def l2_on_support(self) -> float:
        mass = sphere_area(self.d) * np.sum(self.weights * self.r ** (self.d - 1) * np.abs(self.values) ** 2)
        return float(np.sqrt(mass))


AnySample = Union[SampledFunction, RadialSample]


def box_grid(d: int, radius: float, h: float) -> Grid:
    """Smallest centered grid of spacing h covering [−radius, radius]^d."""
    return Grid.centered(d, h, int(math.ceil(radius / h)))


def ball_of_measure(d: int, measure: float) -> float:
    """Radius of the ball in ℝ^d with the given measure."""
    return (measure / ball_volume(d, 1.0)) ** (1.0 / d)


def support_radius(problem: SlabProblem) -> float:
    """Concentric ball carrying |I|; I itself is represented by that ball."""
    return ball_of_measure(problem.d, problem.measure)


def grid_spacing(k_m: ModeWavenumber, diameter: float, min_cells: int = 40) -> float:
    h = diameter / min_cells
    if k_m.modulus > 0:
        h = min(h, 0.05 / k_m.modulus)
    return h


def default_grid(d: int, measure: float, k_m: ModeWavenumber) -> Grid:
    """Extent ≥ 4·diam(I), plus 10/|k_m| for evanescent tails; |k_m| h ≤ 0.05."""
    diameter = 2.0 * ball_of_measure(d, measure)
    h = grid_spacing(k_m, diameter)
    half_extent = 2.0 * diameter
    if k_m.kind == ModeClass.EVANESCENT:
        half_extent += 10.0 / k_m.modulus
    return box_grid(d, half_extent, h)


def inequality_grid(problem: SlabProblem, k_m: ModeWavenumber, min_cells: int = 40) -> tuple[Grid, np.ndarray]:
    """Bounding-box grid of I (only u on I is ever needed) and the mask of I."""
    if problem.d > 2:
        raise UnsupportedDimension(f"grid checks are limited to d ≤ 2, got d = {problem.d}")
    radius = support_radius(problem)
    grid = box_grid(problem.d, radius, grid_spacing(k_m, 2.0 * radius, min_cells))
    return grid, cells_inside(grid, radius)


def cells_inside(grid: Grid, radius: float) -> np.ndarray:
    """Nodes whose whole cell lies in the ball, so the mask never outweighs |I|."""
    return grid.radius() + 0.5 * grid.h * math.sqrt(grid.d) <= radius * (1.0 + 1e-12)


# ─── Convolution ────────────────────────────────────────────────────────────

def _log_cell_integral(h: float) -> float:
    """∫ ln|x| over the square of side h centred at the origin."""
    return 0.5 * h * h * (2.0 * math.log(h / 2.0) + math.log(2.0) - 3.0 + math.pi / 2.0)


def kernel_weights(kernel: GreenKernel, grid: Grid) -> np.ndarray:
    """
    Cell integrals of g over every offset between two grid nodes
    (shape 2N−1 per axis, offset 0 in the middle).
    """
    h = grid.h
    offsets = [h * np.arange(-(n - 1), n) for n in grid.shape]
    if grid.d == 1:
        x = offsets[0]
        if not hasattr(kernel, "cell_integral"):
            raise SingularityError(f"{kernel!r} has no cell rule on a 1-D grid")
        a = np.maximum(np.abs(x) - h / 2.0, 0.0)
        b = np.abs(x) + h / 2.0
        weights = kernel.cell_integral(a, b)
        centre = len(x) // 2
        weights[centre] = 2.0 * kernel.cell_integral(np.array(0.0), np.array(h / 2.0))
        return np.asarray(weights, dtype=complex)
    if grid.d == 2:
        X, Y = np.meshgrid(*offsets, indexing="ij")
        r = np.hypot(X, Y)
        with np.errstate(all="ignore"):
            weights = grid.cell_volume * kernel.sample(r)
        centre = tuple(len(o) // 2 for o in offsets)
        if not kernel.log_singular:
            raise SingularityError(f"{kernel!r} has no local rule for the singular cell in d = 2")
        weights[centre] = (-_log_cell_integral(h) / (2.0 * math.pi)
                           + kernel.log_remainder() * grid.cell_volume)
        return np.asarray(weights, dtype=complex)
    raise UnsupportedDimension(f"grid convolution needs d ≤ 2, got d = {grid.d}")


def convolve(f: AnySample, kernel: GreenKernel) -> AnySample:
    """u = g * f sampled at the nodes of f (f piecewise constant on cells)."""
    if isinstance(f, RadialSample):
        return convolve_radial(f, kernel)
    if f.grid.d != kernel.d:
        raise DomainError(f"grid is {f.grid.d}-dimensional but the kernel lives in ℝ^{kernel.d}")
    weights = kernel_weights(kernel, f.grid)
    u = signal.fftconvolve(f.values.astype(complex), weights, mode="same")
    return f.with_values(u)


def _theta_rule() -> tuple[np.ndarray, np.ndarray]:
    """Geometrically graded Gauss–Legendre rule on (0, π)."""
    t, w = np.polynomial.legendre.leggauss(10)
    edges = np.concatenate([[0.0], np.logspace(-8, 0, 17), [math.pi / 2.0, math.pi]])
    nodes = np.concatenate([0.5 * (b - a) * t + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
    weights = np.concatenate([0.5 * (b - a) * w for a, b in zip(edges[:-1], edges[1:])])
    return nodes, weights


def convolve_radial(f: RadialSample, kernel: GreenKernel) -> RadialSample:
    """
    u(r) = ∫ f(ρ) ρ^{d−1} A(r, ρ) dρ with the spherical average
    A(r, ρ) = |S^{d−2}| ∫_0^π g(√(r² + ρ² − 2rρ cos θ)) sin^{d−2}θ dθ.
    """
    if f.d != kernel.d:
        raise DomainError(f"radial sample lives in ℝ^{f.d} but the kernel in ℝ^{kernel.d}")
    theta, w_theta = _theta_rule()
    r = f.r[:, None, None]
    rho = f.r[None, :, None]
    dist = np.sqrt(np.maximum(r * r + rho * rho - 2.0 * r * rho * np.cos(theta), 0.0))
    # the nodes avoid θ = 0, so dist > 0 everywhere
    g = kernel.sample(dist)
    angular = w_theta * np.sin(theta) ** (f.d - 2)
    average = sphere_area(f.d - 1) * np.tensordot(g, angular, axes=([2], [0]))
    u = average @ (f.weights * f.r ** (f.d - 1) * f.values)
    return f.with_values(u)


# ─── Norms ──────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class NormReport:
    L1: float
    L2: float
    Linf: float
    weighted: dict
    lorentz: dict


def lorentz_quasinorm(values: np.ndarray, cell_volume: float, p: float, levels: int = LORENTZ_LEVELS) -> float:
    """sup_α α·|{|f| ≥ α}|^{1/p} over a geometric grid of levels."""
    mags = np.abs(values).ravel()
    nonzero = mags[mags > 0]
    if nonzero.size == 0:
        return 0.0
    lo, hi = float(nonzero.min()), float(nonzero.max())
    alphas = np.geomspace(lo, hi, levels) if hi > lo else np.array([hi])
    sorted_mags = np.sort(nonzero)
    counts = sorted_mags.size - np.searchsorted(sorted_mags, alphas, side="left")
    return float(np.max(alphas * (counts * cell_volume) ** (1.0 / p)))


def norms(f: SampledFunction, lorentz: Sequence[float] = (), weights: Sequence[float] = (-1.0, 1.0),
          on_support: bool = False) -> NormReport:
    for p in lorentz:
        if p < 1:
            raise DomainError(f"Lorentz exponent must be ≥ 1, got {p}")
    values = np.where(f.support_mask, f.values, 0.0) if on_support else f.values
    mags = np.abs(values)
    dv = f.grid.cell_volume
    radius = f.grid.radius()
    weighted = {s: float(np.sqrt(np.sum((1.0 + radius) ** (2.0 * s) * mags ** 2) * dv)) for s in weights}
    return NormReport(
        L1=float(np.sum(mags) * dv),
        L2=float(np.sqrt(np.sum(mags ** 2) * dv)),
        Linf=float(mags.max()) if mags.size else 0.0,
        weighted=weighted,
        lorentz={p: lorentz_quasinorm(values, dv, p) for p in lorentz},
    )


# ─── Rearrangement ──────────────────────────────────────────────────────────

def _real_nonnegative(f: SampledFunction) -> np.ndarray:
    values = np.asarray(f.values)
    if np.iscomplexobj(values):
        if np.any(np.abs(values.imag) > 1e-14 * max(1.0, float(np.abs(values).max()))):
            raise NegativeValues("rearrangement needs real values")
        values = values.real
    if np.any(values < 0):
        raise NegativeValues(f"rearrangement needs nonnegative values (min {values.min():.3g})")
    return values.astype(float)


def rearrange(f: SampledFunction) -> SampledFunction:
    """Largest values on the nodes closest to the origin (stable order among equal distances)."""
    values = _real_nonnegative(f).ravel()
    by_distance = np.argsort(f.grid.radius().ravel(), kind="stable")
    out = np.empty_like(values)
    out[by_distance] = np.sort(values, kind="stable")[::-1]
    out = out.reshape(f.grid.shape)
    return SampledFunction(f.grid, out, out > 0)


# ─── Verification ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class VerificationResult:
    lhs: float
    rhs: float
    numerical_error: float
    lemma: str = ""
    m: int = 0

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.margin >= -self.numerical_error

    def as_row(self) -> dict:
        return {"lemma": self.lemma, "m": self.m, "lhs": self.lhs, "rhs": self.rhs,
                "margin": self.margin, "pass": self.passed}


def _step_rearranged(values: np.ndarray) -> np.ndarray:
    """1-D symmetric decreasing rearrangement of a cell step function, on the half-cell grid."""
    v = np.sort(values)[::-1]
    out = np.empty(2 * v.size)
    o = v.size
    k = np.arange(1, v.size + 1)
    out[k - 1 + o] = v
    out[o - k] = v
    return out


def _step_pairing(h_half: np.ndarray, f_half: np.ndarray, g_half: np.ndarray, s: float) -> float:
    """∫ h (f * g) for step functions on half-cells of width s (exact)."""
    o = h_half.size // 2
    conv = np.convolve(f_half, g_half)
    a = np.arange(h_half.size)
    return float(s * s * np.sum(h_half * 0.5 * (conv[a + o - 1] + conv[a + o])))


def verify_hardy_littlewood(h: SampledFunction, f: SampledFunction, g: SampledFunction) -> VerificationResult:
    """
    ∫ h (f*g) ≤ ∫ h̄ (f̄*ḡ). In d = 1 the functions are treated as cell step
    functions and both sides are exact; in d = 2 the grid rearrangement and
    direct sums are used.
    """
    for item in (h, f, g):
        if not item.grid.is_centered or item.grid != h.grid:
            raise DomainError("Hardy–Littlewood check needs the three functions on one centered grid")
    hv, fv, gv = (_real_nonnegative(item) for item in (h, f, g))
    grid = h.grid
    if grid.d == 1:
        s = grid.h / 2.0
        lhs = _step_pairing(np.repeat(hv, 2), np.repeat(fv, 2), np.repeat(gv, 2), s)
        rhs = _step_pairing(_step_rearranged(hv), _step_rearranged(fv), _step_rearranged(gv), s)
        return VerificationResult(lhs, rhs, 1e-12 * max(abs(rhs), 1e-300), "hardy_littlewood")
    half = tuple(n // 2 for n in grid.shape)
    dv = grid.cell_volume

    def pairing(hh, ff, gg):
        full = signal.fftconvolve(ff, gg, mode="full")
        window = tuple(slice(c, c + n) for c, n in zip(half, grid.shape))
        return float(np.sum(hh * full[window]) * dv * dv)

    lhs = pairing(hv, fv, gv)
    rhs = pairing(*(rearrange(item).values for item in (h, f, g)))
    error = 4.0 * grid.h / max(grid.extent(), grid.h) * abs(rhs) + 1e-12 * abs(rhs)
    return VerificationResult(lhs, rhs, error, "hardy_littlewood")


def verify_mode_inequality(problem: SlabProblem, m: int, f: AnySample, bound) -> VerificationResult:
    """‖g_m * f‖_{L²(I)} against c_m ‖f‖_{L²(I)} for f supported in I."""
    k_m = problem.mode(m)
    kernel = build_kernel(problem.n, k_m, rho=problem.radius)
    rhs = bound.c_m * f.l2_on_support()
    if rhs == 0.0:
        return VerificationResult(0.0, 0.0, 0.0, bound.source, m)
    if isinstance(f, SampledFunction):
        restricted = f.with_values(np.where(f.support_mask, f.values, 0.0))
        lhs = convolve(restricted, kernel).l2_on_support()
        h = f.grid.h
    else:
        lhs = convolve(f, kernel).l2_on_support()
        h = f.radius / f.r.size
    scale = ball_of_measure(problem.d, problem.measure)
    error = rhs * (k_m.modulus * h + h / scale)
    return VerificationResult(lhs, rhs, error, bound.source, m)


# ─── Slab residuals ─────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ResidualReport:
    max_residual: float
    boundary_max: float
    checked: int
    excluded: int


def _jump_mask(V: np.ndarray, axes: Sequence[int], jump_tol: float) -> np.ndarray:
    """Nodes whose 3-point stencil sees a jump of V along one of the axes."""
    V = np.asarray(V)
    scale = jump_tol * (1.0 + float(np.abs(V).max()))
    bad = np.zeros(V.shape, dtype=bool)
    for ax in axes:
        step = np.abs(np.diff(V, axis=ax)) > scale
        lead = [(0, 0)] * V.ndim
        lead[ax] = (1, 0)
        trail = [(0, 0)] * V.ndim
        trail[ax] = (0, 1)
        bad |= np.pad(step, lead) | np.pad(step, trail)
    return bad


def _uniform_step(axis: np.ndarray, name: str) -> float:
    if axis.size < 3:
        raise GridTooCoarse(f"{name}-axis needs at least 3 nodes, got {axis.size}")
    steps = np.diff(axis)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise GridTooCoarse(f"{name}-axis must be uniform for finite differences")
    return float(steps[0])


def pde_residual(u: SlabSamples, V: np.ndarray, k: float, radial_dim: Optional[int] = None,
                 jump_tol: float = 0.05, exclude: Optional[np.ndarray] = None) -> ResidualReport:
    """
    max over interior nodes of |−Δ_h u − (k+V)u| / (1 + (|k|+|V|)|u|), and
    max |u| on the walls y ∈ {0, 1}. With radial_dim = d the single x-axis is
    the radius in ℝ^d (Δ_x = ∂_rr + (d−1)/r ∂_r, nodes with r > 0 only).
    exclude marks extra nodes known to sit on an interface of the data.
    """
    values = np.asarray(u.values)
    V = np.broadcast_to(np.asarray(V), values.shape)
    nx = len(u.x_axes)
    dy = _uniform_step(u.y, "y")
    steps = [_uniform_step(np.asarray(ax), "x") for ax in u.x_axes]
    lap = np.zeros(values.shape, dtype=complex)
    interior = np.ones(values.shape, dtype=bool)
    for ax, hx in enumerate(steps + [dy]):
        lap[(slice(None),) * ax + (slice(1, -1),)] += (
            np.take(values, range(2, values.shape[ax]), axis=ax)
            - 2.0 * np.take(values, range(1, values.shape[ax] - 1), axis=ax)
            + np.take(values, range(0, values.shape[ax] - 2), axis=ax)
        ) / (hx * hx)
        edge = [slice(None)] * values.ndim
        edge[ax] = [0, -1]
        interior[tuple(edge)] = False
    if radial_dim is not None:
        if nx != 1:
            raise DomainError("radial residual needs exactly one x-axis")
        r = np.asarray(u.x_axes[0])[:, None]
        first = np.zeros(values.shape, dtype=complex)
        first[1:-1] = (values[2:] - values[:-2]) / (2.0 * steps[0])
        with np.errstate(divide="ignore", invalid="ignore"):
            lap = lap + np.where(r > 0, (radial_dim - 1) / r * first, 0.0)
        interior &= np.broadcast_to(r > 0, values.shape)
    excluded_mask = _jump_mask(V, range(values.ndim), jump_tol)
    if exclude is not None:
        excluded_mask = excluded_mask | np.broadcast_to(exclude, values.shape)
    excluded_mask &= interior
    check = interior & ~excluded_mask
    residual = np.abs(-lap - (k + V) * values) / (1.0 + (abs(k) + np.abs(V)) * np.abs(values))
    walls = np.abs(np.concatenate([values[..., 0].ravel(), values[..., -1].ravel()]))
    return ResidualReport(
        max_residual=float(residual[check].max()) if check.any() else 0.0,
        boundary_max=float(walls.max()),
        checked=int(check.sum()),
        excluded=int(excluded_mask.sum()),
    )


def mode_ode_residual(r: np.ndarray, u: np.ndarray, V: np.ndarray, k_m: ModeWavenumber, d: int,
                      jump_tol: float = 0.05) -> ResidualReport:
    """
    Residual of u'' + ((d−1)/r)u' + (k_m² + V)u = 0 on a uniform radial grid,
    relative to 1 + (|k_m²| + |V|)|u|.
    """
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=complex)
    V = np.broadcast_to(np.asarray(V), u.shape)
    h = _uniform_step(r, "r")
    d2 = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
    d1 = (u[2:] - u[:-2]) / (2.0 * h)
    rc, uc, Vc = r[1:-1], u[1:-1], V[1:-1]
    k2 = k_m.value ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        transport = np.where(rc > 0, (d - 1) / rc * d1, 0.0)
    residual = np.abs(d2 + transport + (k2 + Vc) * uc) / (1.0 + (abs(k2) + np.abs(Vc)) * np.abs(uc))
    jumps = _jump_mask(V, [0], jump_tol)[1:-1]
    check = (rc > 0) & ~jumps
    return ResidualReport(
        max_residual=float(residual[check].max()) if check.any() else 0.0,
        boundary_max=0.0,
        checked=int(check.sum()),
        excluded=int(jumps.sum()),
    )


def source_residual(r: np.ndarray, u: np.ndarray, f: np.ndarray, k_m: ModeWavenumber, d: int,
                    jump_tol: float = 0.05) -> ResidualReport:
    """
    Residual of −u'' − ((d−1)/r)u' − k_m²u = f on a uniform radial grid, relative
    to the scale max|f| + |k_m|² max|u| of the equation (so it is dilation-free).
    """
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=complex)
    f = np.broadcast_to(np.asarray(f), u.shape)
    h = _uniform_step(r, "r")
    d2 = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
    d1 = (u[2:] - u[:-2]) / (2.0 * h)
    rc = r[1:-1]
    k2 = k_m.value ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        transport = np.where(rc > 0, (d - 1) / rc * d1, 0.0)
    scale = float(np.abs(f).max()) + abs(k2) * float(np.abs(u).max())
    if scale == 0.0:
        scale = 1.0
    residual = np.abs(d2 + transport + k2 * u[1:-1] + f[1:-1]) / scale
    jumps = _jump_mask(f, [0], jump_tol)[1:-1]
    check = (rc > 0) & ~jumps
    return ResidualReport(
        max_residual=float(residual[check].max()) if check.any() else 0.0,
        boundary_max=0.0,
        checked=int(check.sum()),
        excluded=int(jumps.sum()),
    )


@dataclass(frozen=True)
class RadiationReport:
    radii: tuple
    values: tuple
    normalized: tuple
    decaying: bool


def radiation_check(r: np.ndarray, u: np.ndarray, k_m: ModeWavenumber, radii: Sequence[float],
                    n: int) -> RadiationReport:
    """r^{(n−2)/2} |(∂_r − ik_m) u| at each radius (heuristic trend, not a proof)."""
    if k_m.kind != ModeClass.PROPAGATING:
        raise DomainError(f"radiation check is for propagating modes, got {k_m.kind.value}")
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=complex)
    if max(radii) > r[-2]:
        raise InsufficientExtent(f"samples end at r = {r[-1]:.4g}, radii go to {max(radii):.4g}")
    du = np.gradient(u, r, edge_order=2)
    k = k_m.value.real
    values, normalized = [], []
    for R in radii:
        u_R = np.interp(R, r, u.real) + 1j * np.interp(R, r, u.imag)
        du_R = np.interp(R, r, du.real) + 1j * np.interp(R, r, du.imag)
        q = R ** ((n - 2) / 2.0) * abs(du_R - 1j * k * u_R)
        values.append(float(q))
        normalized.append(float(q / max(R ** ((n - 2) / 2.0) * k * abs(u_R), 1e-300)))
    trend = all(b <= a for a, b in zip(normalized, normalized[1:])) and normalized[-1] <= 0.75 * normalized[0]
    decaying = normalized[-1] <= 1e-3 or trend
    return RadiationReport(tuple(radii), tuple(values), tuple(normalized), decaying)


# ─── Fourier side ───────────────────────────────────────────────────────────

def fourier_solve(f: SampledFunction, k_m: ModeWavenumber, pad: int = 2) -> SampledFunction:
    """û = f̂ / (|ξ|² + |k_m|²) on the zero-padded periodic grid (evanescent modes)."""
    if k_m.kind != ModeClass.EVANESCENT:
        raise DomainError("Fourier-side solve needs an evanescent mode")
    shape = tuple(pad * n for n in f.grid.shape)
    F = np.fft.fftn(f.values.astype(complex), s=shape)
    freqs = np.meshgrid(*[2.0 * math.pi * np.fft.fftfreq(n, d=f.grid.h) for n in shape], indexing="ij")
    xi2 = sum(q ** 2 for q in freqs)
    u = np.fft.ifftn(F / (xi2 + k_m.modulus ** 2))
    window = tuple(slice(0, n) for n in f.grid.shape)
    return f.with_values(u[window])


def plancherel_gap(f: SampledFunction) -> float:
    """Relative gap between Σ|f|² and the discrete Parseval sum Σ|f̂|²/N."""
    values = f.values.astype(complex)
    direct = float(np.sum(np.abs(values) ** 2))
    if direct == 0.0:
        return 0.0
    spectral = float(np.sum(np.abs(np.fft.fftn(values)) ** 2) / values.size)
    return abs(direct - spectral) / direct


def h1_growth(f: SampledFunction, radii: Sequence[float]) -> pd.DataFrame:
    """Discrete H¹ seminorm over growing balls; bounded growth is what the check can see."""
    grads = np.gradient(f.values.astype(complex), f.grid.h)
    if f.grid.d == 1:
        grads = [grads]
    density = sum(np.abs(g) ** 2 for g in grads)
    radius = f.grid.radius()
    rows = [{"radius": float(R),
             "seminorm": float(np.sqrt(np.sum(density[radius <= R]) * f.grid.cell_volume))}
            for R in radii]
    return pd.DataFrame(rows, columns=["radius", "seminorm"])


# ─── Random ensembles ───────────────────────────────────────────────────────

def random_bumps(grid: Grid, mask: np.ndarray, rng: np.random.Generator, count: int = 3,
                 zero_mean: bool = False, complex_values: bool = True) -> SampledFunction:
    """Sum of cos² bumps with random centres/widths inside the mask, cut to the mask."""
    mesh = grid.mesh()
    inside = np.argwhere(mask)
    if inside.size == 0:
        raise DomainError("support mask is empty")
    scale = grid.h * max(2.0, 0.5 * (inside.shape[0] ** (1.0 / grid.d)))
    values = np.zeros(grid.shape, dtype=complex)
    for _ in range(count):
        centre = inside[rng.integers(len(inside))]
        width = scale * rng.uniform(0.5, 2.0)
        dist = np.sqrt(sum((c - c[tuple(centre)]) ** 2 for c in mesh))
        bump = np.where(dist < width, np.cos(0.5 * math.pi * dist / width) ** 2, 0.0)
        amplitude = rng.normal() + (1j * rng.normal() if complex_values else 0.0)
        values += amplitude * bump
    values = np.where(mask, values, 0.0)
    if zero_mean:
        values = np.where(mask, values - values[mask].mean(), 0.0)
    if not complex_values:
        values = values.real
    return SampledFunction(grid, values, mask)


def random_radial_bumps(d: int, radius: float, rng: np.random.Generator, count: int = 3) -> RadialSample:
    centres = rng.uniform(0.0, radius, count)
    widths = radius * rng.uniform(0.1, 0.5, count)
    amps = rng.normal(size=count) + 1j * rng.normal(size=count)

    def profile(r):
        total = np.zeros_like(r, dtype=complex)
        for c, w, a in zip(centres, widths, amps):
            total += a * np.where(np.abs(r - c) < w, np.cos(0.5 * math.pi * (r - c) / w) ** 2, 0.0)
        return total

    return RadialSample.on_ball(d, radius, profile)


def bessel_oracle(kind: str, x: np.ndarray) -> np.ndarray:
    """scipy reference values for J0, J1, Y0, Y1."""
    return {"J0": special.j0, "J1": special.j1, "Y0": special.y0, "Y1": special.y1}[kind](x)
