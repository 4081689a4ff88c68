"""
framework/sharpness.py

Explicit solutions that come close to the uniqueness thresholds.

Every construction returns a ConstructedSolution (sampled u, V or f, and the
checks run on it). build_example() also measures the construction against
the certificate and returns a TightnessReport row:

    ratio = bound / achieved     ‖V‖ sharpness (a solution exists at ‖V‖ = achieved)
    ratio = achieved / bound     ‖u_m‖/‖f_m‖ sharpness

Example ids:
    outer_kernel        u_m = g_m outside B_R, parabolic patch inside
    evanescent_large    ‖V_m‖ ≈ δ₊² as δ₊ → ∞
    evanescent_small    ‖V_m‖ ≈ δ (n = 2) or bounded (n ≥ 4) as δ → 0
    staircase           n = 2 propagating mode, ‖V_m‖ ≈ δ₋
    log_gap             n = 3 propagating mode, ‖V_m‖ ≈ 1/|ln δ|
    subcritical         k < π², ‖V‖ = δ₊² + (n−1)δ₊/r₀
    resonant_tent       n = 2 resonant mode, ‖u_m‖/‖f_m‖ ≈ |I|
    resonant_two_mode   n = 2, modes 1 and M, ‖V‖ ≈ 1/|D|
    resonant_annulus    n = 3 resonant mode, log profile on two annuli
    resonant_power      n ≥ 4 resonant mode, r^{3−n} tail
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import pandas as pd
from scipy import integrate, special

from framework.bound_engine import (
    GenericConstants,
    aggregate,
    cm_n2_resonant,
    cm_n3_resonant,
    cm_n4_resonant,
    theorem_bounds,
)
from framework.errors import (
    ConfigError,
    ConstructionFailure,
    DomainError,
    HypothesisViolated,
    InvalidBoundary,
    NotApplicable,
    SizeViolation,
)
from framework.green_kernel import build_kernel
from framework.oracle import (
    ResidualReport,
    mode_ode_residual,
    pde_residual,
    radiation_check,
    source_residual,
    sphere_area,
)
from framework.special import bessel
from framework.spectral_core import (
    PI2,
    Ball,
    ModeClass,
    ModeWavenumber,
    SlabProblem,
    SlabSamples,
    ball_volume,
    uniform_y,
)

REPORT_COLUMNS = ["example", "param", "bound", "achieved", "ratio", "normalized", "note"]


# ─── Results ────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class PatchResult:
    """
    ψ(r) = a − b r² on [0, R], matched C¹ to the boundary data at R.
    On the patch V_ψ + k_m² = −Δψ/ψ = 2bd/ψ(r), d = n − 1.
    """
    R: float
    n: int
    k_m: ModeWavenumber
    a: complex
    b: complex
    bound: float
    is_complex: bool

    @property
    def d(self) -> int:
        return self.n - 1

    def values(self, r: np.ndarray) -> np.ndarray:
        return self.a - self.b * np.asarray(r) ** 2

    def derivative(self, r: np.ndarray) -> np.ndarray:
        return -2.0 * self.b * np.asarray(r)

    def shifted_potential(self, r: np.ndarray) -> np.ndarray:
        """V_ψ + k_m² on the patch."""
        return 2.0 * self.b * self.d / self.values(r)

    def potential(self, r: np.ndarray) -> np.ndarray:
        return self.shifted_potential(r) - self.k_m.value ** 2

    def matching_jump(self, value: complex, slope: complex) -> float:
        """Relative value + derivative mismatch at R against the outer data."""
        jump = abs(self.values(self.R) - value) + abs(self.derivative(self.R) - slope)
        return float(jump / max(abs(value) + abs(slope), 1e-300))


@dataclass
class ConstructedSolution:
    example: str
    n: int
    k_m: Optional[ModeWavenumber]
    coords: dict
    u: np.ndarray = field(repr=False)
    V: Optional[np.ndarray] = field(default=None, repr=False)
    f: Optional[np.ndarray] = field(default=None, repr=False)
    V_norm: Optional[float] = None
    norm_ratio: Optional[float] = None
    residual: Optional[ResidualReport] = None
    outside_max: float = 0.0
    support_radius: float = 1.0
    extras: dict = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        """Sampled functions as a flat table (one row per node) for dumps."""
        names = list(self.coords)
        grids = np.meshgrid(*[self.coords[c] for c in names], indexing="ij")
        data = {c: g.ravel() for c, g in zip(names, grids)}
        u = np.asarray(self.u)
        data["u_re"] = u.real.ravel()
        data["u_im"] = u.imag.ravel()
        if self.V is not None:
            V = np.broadcast_to(np.asarray(self.V, dtype=complex), u.shape)
            data["V_re"] = V.real.ravel()
            data["V_im"] = V.imag.ravel()
        if self.f is not None:
            data["f"] = np.broadcast_to(np.real(self.f), u.shape).ravel()
        return pd.DataFrame(data)


@dataclass(frozen=True)
class TightnessReport:
    example: str
    param: str
    bound: float
    achieved: float
    ratio: float
    normalized: float = math.nan
    note: str = ""

    def as_row(self) -> dict:
        return {c: getattr(self, c) for c in REPORT_COLUMNS}


# ─── Parabolic patching ─────────────────────────────────────────────────────

def _check_radius(R: float):
    if not R > 0:
        raise DomainError(f"patch radius must be positive, got {R}")


def parabolic_patch_real(v_boundary: tuple, n: int, k_m: ModeWavenumber, R: float = 1.0) -> PatchResult:
    """
    v = a − br² on [0, R] with v(R), v'(R) matched. For v(R) > 0 ≥ v'(R),
    |V_v + k_m²| ≤ (n−1)|v'(R)| / (R v(R)), attained at r = R.
    """
    _check_radius(R)
    v, dv = (float(x) for x in v_boundary)
    if not v > 0:
        raise InvalidBoundary(f"real patch needs v(R) > 0, got {v}")
    if dv > 0:
        raise InvalidBoundary(f"real patch needs v'(R) ≤ 0, got {dv}")
    b = -dv / (2.0 * R)
    a = v + b * R * R
    return PatchResult(R, n, k_m, a, b, (n - 1) * abs(dv) / (R * v), is_complex=False)


def parabolic_patch_complex(psi_boundary: tuple, n: int, k_m: ModeWavenumber, R: float = 1.0) -> PatchResult:
    """
    ψ = A − Br² on [0, R]. With Re ψ(R) > 0 and Re B ≥ 0, Re ψ ≥ Re ψ(R) on the
    patch and |V_ψ + k_m²| ≤ (n−1)|ψ'(R)| / (R Re ψ(R)).
    """
    _check_radius(R)
    psi, dpsi = (complex(x) for x in psi_boundary)
    if not psi.real > 0:
        raise InvalidBoundary(f"complex patch needs Re ψ(R) > 0, got {psi.real}")
    B = -dpsi / (2.0 * R)
    if B.real < 0:
        raise HypothesisViolated(f"Re B = {B.real:.6g} < 0: the boundary data grow outward")
    A = psi + B * R * R
    return PatchResult(R, n, k_m, A, B, (n - 1) * abs(dpsi) / (R * psi.real), is_complex=True)


# ─── Grids ──────────────────────────────────────────────────────────────────

def _radii_through(R: float, extent: float, h: float) -> tuple[np.ndarray, int]:
    """Uniform radii on [0, extent] with R landing exactly on node i_R."""
    i_R = max(int(math.ceil(R / h)), 1)
    step = R / i_R
    total = int(math.ceil(extent / step))
    r = step * np.arange(total + 1)
    r[i_R] = R
    return r, i_R


def _sup(values: np.ndarray) -> float:
    values = np.asarray(values)
    return float(np.max(np.abs(values))) if values.size else 0.0


# ─── Kernel tail with a patch inside ────────────────────────────────────────

def _log_derivative(n: int, k_m: ModeWavenumber, R: float) -> complex:
    """g_m'(R)/g_m(R) = −k H_{s+1}(kR)/H_s(kR), s = (n−3)/2 (= ik for n = 2)."""
    k = k_m.value
    if n == 2:
        return 1j * k
    s = (n - 3) / 2.0
    return complex(-k * special.hankel1e(s + 1.0, k * R) / special.hankel1e(s, k * R))


def construct_dLarge(n: int, k_m: ModeWavenumber, R: float = 1.0) -> ConstructedSolution:
    """
    u_m = g_m/g_m(R) for r ≥ R and a parabolic patch inside, so V_m is
    supported in B_R and ‖V_m + k_m²‖_∞ is the patch bound.
    """
    if k_m.is_resonant:
        raise DomainError("the kernel-tail construction needs a nonresonant mode")
    kernel = build_kernel(n, k_m)
    modulus = k_m.modulus
    slope = _log_derivative(n, k_m, R)
    if k_m.kind == ModeClass.EVANESCENT:
        patch = parabolic_patch_real((1.0, slope.real), n, k_m, R)
    else:
        patch = parabolic_patch_complex((1.0 + 0j, slope), n, k_m, R)

    h = min(R / 400.0, 0.02 / modulus)
    extent = R + max(0.5 * R, min(10.0 / modulus, 20.0))
    r, i_R = _radii_through(R, extent, h)
    inside = np.arange(r.size) <= i_R
    g_R = kernel.sample(np.array([R]))[0]

    u = np.empty(r.shape, dtype=complex)
    u[inside] = patch.values(r[inside])
    u[~inside] = kernel.sample(r[~inside]) / g_R
    V = np.zeros(r.shape, dtype=complex)
    V[inside] = patch.potential(r[inside])
    shifted = _sup(patch.shifted_potential(r[inside]))

    extras = {
        "R": R,
        "patch_a": patch.a,
        "patch_b": patch.b,
        "patch_bound": patch.bound,
        "shifted_norm": shifted,
        "observed_c": shifted / (modulus if n == 2 else modulus + 1.0),
        "c1_jump": patch.matching_jump(1.0, slope),
    }
    if k_m.kind == ModeClass.PROPAGATING:
        radii = [R + f * (extent - R) for f in (0.25, 0.5, 0.9)]
        extras["radiation_decaying"] = radiation_check(r, u, k_m, radii, n).decaying
    return ConstructedSolution(
        example="outer_kernel",
        n=n,
        k_m=k_m,
        coords={"r": r},
        u=u,
        V=V,
        V_norm=_sup(V),
        residual=mode_ode_residual(r, u, V, k_m, n - 1),
        outside_max=_sup(V[~inside]),
        support_radius=R,
        extras=extras,
    )


def _mode(modulus: float, kind: ModeClass) -> ModeWavenumber:
    if kind == ModeClass.EVANESCENT:
        return ModeWavenumber(1, complex(0.0, modulus), kind)
    return ModeWavenumber(1, complex(modulus, 0.0), kind)


def _threshold(n: int, k: float, support, C: GenericConstants, active=(1,)) -> float:
    """Uniqueness threshold of the certificate for a problem where only `active` modes carry data."""
    return aggregate(SlabProblem(n=n, k=k, support=support), C, active_modes=active).threshold


def construct_evanescent_sharp(n: int, delta: float, C: GenericConstants,
                               regime: Optional[str] = None) -> TightnessReport:
    """Kernel-tail construction for an evanescent mode with |k_m| = δ, against the certificate."""
    _, report = _evanescent(n, delta, C, regime)
    return report


def _evanescent(n: int, delta: float, C: GenericConstants, regime: Optional[str] = None):
    if not delta > 0:
        raise DomainError(f"δ must be positive, got {delta}")
    regime = regime or ("large" if delta > 1.0 else "small")
    solution = construct_dLarge(n, _mode(delta, ModeClass.EVANESCENT))
    bound = _threshold(n, PI2 - delta ** 2, Ball(radius=1.0), C)
    achieved = solution.V_norm
    if regime == "large":
        normalized, note = achieved / delta ** 2, "‖V_m‖/δ₊²"
    elif n == 2:
        normalized, note = achieved / delta, "‖V_m‖/δ"
    else:
        normalized, note = achieved, "‖V_m‖ (bounded as δ → 0)"
    example = f"evanescent_{regime}"
    solution.example = example
    report = TightnessReport(example, _format_params({"n": n, "delta": delta}), bound, achieved,
                             bound / achieved, normalized, note)
    return solution, report


# ─── Propagating staircase (n = 2) ──────────────────────────────────────────

@dataclass(frozen=True)
class _Piece:
    """level + curvature·(x − anchor)² on [lo, hi)."""
    lo: float
    hi: float
    level: float
    curvature: float
    anchor: float

    def at(self, x: float) -> tuple[float, float]:
        return self.level + self.curvature * (x - self.anchor) ** 2, 2.0 * self.curvature * (x - self.anchor)


def staircase_profile(delta: float) -> tuple[list, float]:
    """
    Even C¹ staircase φ on [0, ∞): constant where |cos(δx)| < 1/2, two
    antisymmetric parabolas on every interval where |cos(δx)| ≥ 1/2, and
    φ ≡ 1 from B on. B is the largest zero of |cos(δB)| − 1/2 in (0, 1].
    """
    q = int(math.floor(3.0 * delta / math.pi))
    if q % 3 == 0:
        q -= 1
    if q < 1:
        raise ConstructionFailure(f"δ₋ = {delta} < π/3: no point with |cos(δ₋B)| = 1/2 in (0, 1]")
    B = q * math.pi / (3.0 * delta)

    intervals = [(0.0, math.pi / (3.0 * delta))]
    j = 1
    while True:
        a, b = (j - 1.0 / 3.0) * math.pi / delta, (j + 1.0 / 3.0) * math.pi / delta
        if b > B * (1.0 + 1e-12):
            break
        intervals.append((a, b))
        j += 1

    raw, level, prev = [], 0.0, 0.0
    for a, b in intervals:
        if a > prev:
            raw.append((prev, a, level, 0.0, a))
        mid = 0.5 * (a + b)
        top = level + 0.5 * delta * (b - a) ** 2
        raw.append((a, mid, level, delta, a))
        raw.append((mid, b, top, -delta, b))
        level, prev = top, b
    if B > prev * (1.0 + 1e-12):
        raw.append((prev, B, level, 0.0, B))

    scale = 1.0 / level
    pieces = [_Piece(lo, hi, lvl * scale, curv * scale, anchor) for lo, hi, lvl, curv, anchor in raw]
    pieces.append(_Piece(B, math.inf, 1.0, 0.0, B))
    return pieces, B


def _evaluate_pieces(pieces: list, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    starts = np.array([p.lo for p in pieces])
    idx = np.clip(np.searchsorted(starts, x, side="right") - 1, 0, len(pieces) - 1)
    level = np.array([p.level for p in pieces])[idx]
    curv = np.array([p.curvature for p in pieces])[idx]
    anchor = np.array([p.anchor for p in pieces])[idx]
    return level + curv * (x - anchor) ** 2, 2.0 * curv * (x - anchor), 2.0 * curv


def _knot_jump(pieces: list) -> float:
    worst = 0.0
    for left, right in zip(pieces, pieces[1:]):
        v_l, d_l = left.at(left.hi)
        v_r, d_r = right.at(right.lo)
        worst = max(worst, abs(v_l - v_r) + abs(d_l - d_r))
    return worst


def construct_propagating_staircase(delta: float) -> ConstructedSolution:
    """
    u_m = φ(x) sin(δ|x|) − i cos(δx) for n = 2, k_m = δ₋. Then
    −u_m'' − δ²u_m = −E with E = φ''s + 2φ's', so V_m = −E/u_m, and |u_m| ≥ 1/2
    wherever E ≠ 0. Sampled on x ≥ 0 (everything is even).
    """
    if not delta > 1:
        raise DomainError(f"the staircase needs δ₋ > 1, got {delta}")
    pieces, B = staircase_profile(delta)
    h = 0.005 / delta
    x = h * np.arange(int(math.ceil((B + 0.5) / h)) + 1)
    phi, dphi, d2phi = _evaluate_pieces(pieces, x)
    s, c = np.sin(delta * x), np.cos(delta * x)
    u = phi * s - 1j * c
    E = d2phi * s + 2.0 * dphi * delta * c
    V = -E / u
    k_m = _mode(delta, ModeClass.PROPAGATING)

    outside = x > B * (1.0 + 1e-12)
    gap = np.abs(c) < 0.5 - 1e-9
    V_norm = _sup(V)
    extras = {
        "B": B,
        "levels": sorted({p.level for p in pieces}),
        "phi2_ratio": _sup(d2phi) / delta,
        "V_ratio": V_norm / delta,
        "c1_jump": _knot_jump(pieces),
        "nondecreasing": bool(np.all(np.diff(phi) >= -1e-14)),
        "gap_region_max": _sup(V[gap]),
        "off_support_phase_error": _sup(1j * u[outside] - np.exp(1j * delta * x[outside])),
    }
    return ConstructedSolution(
        example="staircase",
        n=2,
        k_m=k_m,
        coords={"x": x},
        u=u,
        V=V,
        V_norm=V_norm,
        residual=mode_ode_residual(x, u, V, k_m, 1),
        outside_max=_sup(V[outside]),
        support_radius=B,
        extras=extras,
    )


# ─── Log gap (n = 3) ────────────────────────────────────────────────────────

def construct_n3_log(delta: float, R: float = 0.5) -> ConstructedSolution:
    """u_m = −Y0(δr) + iJ0(δr) = 4g_m for r ≥ R, complex patch of radius R inside."""
    if not delta > 0:
        raise DomainError(f"δ must be positive, got {delta}")
    k_m = _mode(delta, ModeClass.PROPAGATING)
    x_R = delta * R
    psi = complex(-bessel("Y0", x_R), bessel("J0", x_R))
    dpsi = delta * complex(bessel("Y1", x_R), -bessel("J1", x_R))
    patch = parabolic_patch_complex((psi, dpsi), 3, k_m, R)

    r, i_R = _radii_through(R, 4.0 * R, R / 500.0)
    inside = np.arange(r.size) <= i_R
    outer = r[~inside]
    u = np.empty(r.shape, dtype=complex)
    u[inside] = patch.values(r[inside])
    u[~inside] = -special.y0(delta * outer) + 1j * special.j0(delta * outer)
    V = np.zeros(r.shape, dtype=complex)
    V[inside] = patch.potential(r[inside])

    value_R = -special.y0(x_R) + 1j * special.j0(x_R)
    slope_R = delta * (special.y1(x_R) - 1j * special.j1(x_R))
    V_norm = _sup(V)
    log_delta = abs(math.log(delta))
    extras = {
        "R": R,
        "patch_bound": patch.bound,
        "c1_jump": patch.matching_jump(value_R, slope_R),
        "product": V_norm * log_delta,
        "product_half": V_norm * abs(math.log(delta / 2.0)),
        "re_u_R": psi.real,
        "observed_c": psi.real / log_delta,
        "im_du_R": abs(dpsi.imag),
    }
    return ConstructedSolution(
        example="log_gap",
        n=3,
        k_m=k_m,
        coords={"r": r},
        u=u,
        V=V,
        V_norm=V_norm,
        residual=mode_ode_residual(r, u, V, k_m, 2),
        outside_max=_sup(V[~inside]),
        support_radius=R,
        extras=extras,
    )


# ─── Subcritical k < π² ─────────────────────────────────────────────────────

def construct_subcritical(n: int, k: float, r0: float, h: float = 1e-3,
                          window: float = 0.05) -> ConstructedSolution:
    """
    u = s(|x|) sin(πy) with s(r) = e^{−δ₊(r−r₀)} for r > r₀ and Ar² + B inside
    (s(r₀) = 1, C¹ at r₀). The slab residual is checked on windows around the
    origin and around r₀.
    """
    if k >= PI2:
        raise DomainError(f"the subcritical construction needs k < π², got {k}")
    if not r0 > 0:
        raise DomainError(f"r₀ must be positive, got {r0}")
    delta = math.sqrt(PI2 - k)
    d = n - 1
    A, B = -delta / (2.0 * r0), 1.0 + 0.5 * delta * r0

    def s(r):
        return np.where(r > r0, np.exp(-delta * (r - r0)), A * r * r + B)

    def V(r):
        with np.errstate(divide="ignore"):
            outer = (d - 1) * delta / np.where(r > 0, r, 1.0)
        return np.where(r > r0, outer, delta ** 2 + 2.0 * delta * d / (2.0 * r0 + delta * r0 * r0 - delta * r * r))

    r, i_R = _radii_through(r0, r0 + 10.0 / delta, max(h, r0 / 20000.0))
    profile_V = V(r)
    sup_formula = delta ** 2 + delta * d / r0

    y, wy = uniform_y(int(round(1.0 / h)) + 1)
    reports = []
    for centre in (0.0, r0):
        lo = centre - window if n == 2 else max(centre - window, 0.0)
        axis = lo + h * np.arange(int(round((centre + window - lo) / h)) + 1)
        radius = np.abs(axis)
        samples = SlabSamples.from_function((axis,), y, wy, lambda X, Y: s(np.abs(X)) * np.sin(math.pi * Y))
        reports.append(pde_residual(samples, V(radius)[:, None], k, radial_dim=None if n == 2 else d))
    residual = ResidualReport(
        max_residual=max(rep.max_residual for rep in reports),
        boundary_max=max(rep.boundary_max for rep in reports),
        checked=sum(rep.checked for rep in reports),
        excluded=sum(rep.excluded for rep in reports),
    )
    outside = np.arange(r.size) > i_R
    return ConstructedSolution(
        example="subcritical",
        n=n,
        k_m=_mode(delta, ModeClass.EVANESCENT),
        coords={"r": r},
        u=s(r).astype(complex),
        V=profile_V,
        V_norm=_sup(profile_V),
        residual=residual,
        outside_max=_sup(profile_V[outside]) if n == 2 else 0.0,
        support_radius=r0 if n == 2 else math.inf,
        extras={"delta_plus": delta, "k": k, "r0": r0, "sup_formula": sup_formula},
    )


# ─── Resonant constructions ─────────────────────────────────────────────────

_RESONANT = ModeWavenumber(1, 0j, ModeClass.RESONANT)


@dataclass(frozen=True)
class _Tent:
    """
    C¹ tent on ℝ (ρ = 1): u = 2/3 − L/4 − x²/L near 0, slope −1 after, and a
    convex blend to 0 around ±2/3. f = −u'' is 2/L, 0, −1/L on the three
    pieces, so I (where f ≠ 0) has measure 3L.
    """
    L: float

    @property
    def knot(self) -> float:
        return 2.0 / 3.0 - 0.5 * self.L

    def values(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.abs(np.asarray(x, dtype=float))
        L, p = self.L, self.knot
        u0 = 2.0 / 3.0 - 0.25 * L
        u = np.select(
            [x < 0.5 * L, x < p, x < p + L],
            [u0 - x * x / L, u0 - 0.25 * L - (x - 0.5 * L), 0.5 * L - (x - p) + (x - p) ** 2 / (2.0 * L)],
            default=0.0,
        )
        f = np.select([x < 0.5 * L, x < p, x < p + L], [2.0 / L, 0.0, -1.0 / L], default=0.0)
        return u, f

    def norms_on_support(self) -> tuple[float, float]:
        L, p = self.L, self.knot

        def u2(t):
            return float(self.values(np.array([t]))[0][0]) ** 2

        centre = integrate.quad(u2, 0.0, 0.5 * L, epsabs=0.0, epsrel=1e-12)[0]
        side = integrate.quad(u2, p, p + L, epsabs=0.0, epsrel=1e-12)[0]
        return math.sqrt(2.0 * (centre + side)), math.sqrt(6.0 / L)


def construct_resonant_tent(measure: float, rho: float = 1.0) -> ConstructedSolution:
    """n = 2, k = m²π²: the tent dilated by ρ, with |I| = measure ≤ 2ρ."""
    if not (measure > 0 and rho > 0):
        raise DomainError("measure and ρ must be positive")
    if measure > 2.0 * rho * (1.0 + 1e-12):
        raise SizeViolation(f"|I| = {measure} > 2ρ = {2.0 * rho}")
    tent = _Tent(measure / rho / 3.0)
    u_norm, f_norm = tent.norms_on_support()
    ratio = rho ** 2 * u_norm / f_norm

    h = min(1e-3, tent.L / 200.0)
    x = h * np.arange(int(math.ceil(1.0 / h)) + 1)
    u, f = tent.values(x)
    x_phys, f_phys = rho * x, f / rho ** 2
    return ConstructedSolution(
        example="resonant_tent",
        n=2,
        k_m=_RESONANT,
        coords={"x": x_phys},
        u=u.astype(complex),
        f=f_phys,
        norm_ratio=ratio,
        residual=source_residual(x_phys, u, f_phys, _RESONANT, 1),
        outside_max=0.0,
        support_radius=rho,
        extras={"L": rho * tent.L, "u_norm": math.sqrt(rho) * u_norm, "f_norm": f_norm / rho ** 1.5},
    )


def construct_resonant_two_mode(measure: float, M: int = 2, h: float = 2e-3) -> ConstructedSolution:
    """
    k = M²π², u = u₁(x) sin(πy) + u₂(x) sin(Mπy) with u₁ = 2cos(√(M²−1)πx) and
    u₂ a narrow tent. V = −U_{M−1}(cos πy) u₂'' / (u₁ + U_{M−1}(cos πy) u₂),
    U the Chebyshev polynomial of the second kind (= 2cos πy for M = 2).
    """
    M = int(M)
    if M < 2:
        raise DomainError(f"the two-mode construction needs M ≥ 2, got {M}")
    k1 = math.sqrt(M * M - 1.0) * math.pi
    width = min(0.15, 1.0 / (3.0 * math.sqrt(M * M - 1.0)), 3.0 / (4.0 * M))
    if not measure > 0:
        raise DomainError("measure must be positive")
    if measure > 2.0 * width * (1.0 + 1e-12):
        raise SizeViolation(f"|D| = {measure} > {2.0 * width:.4g} for M = {M}")
    tent = _Tent(measure / width / 3.0)

    hx = min(h, width * tent.L / 20.0)
    half = int(math.ceil(1.2 * width / hx))
    x = hx * np.arange(-half, half + 1)
    t_u, t_f = tent.values(x / width)
    u2 = width * t_u
    u2_dd = -t_f / width
    u1 = 2.0 * np.cos(k1 * x)
    y, wy = uniform_y(int(round(1.0 / h)) + 1)
    cheb = special.eval_chebyu(M - 1, np.cos(math.pi * y))

    denominator = u1[:, None] + cheb[None, :] * u2[:, None]
    active = (u2_dd != 0.0)[:, None]
    V = np.where(active, -cheb[None, :] * u2_dd[:, None] / np.where(active, denominator, 1.0), 0.0)
    values = u1[:, None] * np.sin(math.pi * y)[None, :] + u2[:, None] * np.sin(M * math.pi * y)[None, :]
    samples = SlabSamples((x,), y, wy, values)

    knots = np.diff(u2_dd) != 0.0
    near_knot = np.zeros(x.shape, dtype=bool)
    near_knot[:-1] |= knots
    near_knot[1:] |= knots
    support = u2 > 0
    dominance = float(np.min(u1[support] - M * u2[support])) if support.any() else math.inf
    V_norm = _sup(V)
    return ConstructedSolution(
        example="resonant_two_mode",
        n=2,
        k_m=_RESONANT,
        coords={"x": x, "y": y},
        u=values,
        V=V,
        V_norm=V_norm,
        residual=pde_residual(samples, V, M * M * PI2, exclude=near_knot[:, None]),
        outside_max=_sup(V[~np.broadcast_to(active, V.shape)]),
        support_radius=width,
        extras={"M": M, "k": M * M * PI2, "width": width, "dominance_margin": dominance,
                "dominated": bool(dominance >= 0.0 and np.all(u2 >= 0.0)), "product": V_norm * measure},
    )


def construct_resonant_annulus(measure: float, rho: float = 1.0) -> ConstructedSolution:
    """
    n = 3, ρ = 1 after dilation: v₁ = −ln r, replaced on I₁ = B_a and on
    I₂ = {b < r < 1} (|I₁| = |I₂| = |I|/2) by profiles with −Δ constant,
    then shifted by ε = v₂(1) so u_m vanishes C¹ at r = 1.
    """
    if not (measure > 0 and rho > 0):
        raise DomainError("measure and ρ must be positive")
    base = measure / rho ** 2
    if base > math.pi * (1.0 + 1e-12):
        raise SizeViolation(f"|I| = {measure} > πρ² = {math.pi * rho ** 2}")
    a = math.sqrt(base / (2.0 * math.pi))
    b = math.sqrt(1.0 - base / (2.0 * math.pi))
    c1 = 2.0 / a ** 2
    c2 = -2.0 / (1.0 - b ** 2)
    beta = 0.5 * c2
    alpha = -math.log(b) - beta * math.log(b) + 0.25 * c2 * b ** 2
    eps = alpha - 0.25 * c2

    def profile(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            log_r = np.log(np.where(r > 0, r, 1.0))
        v = np.select(
            [r < a, r <= b, r <= 1.0],
            [-math.log(a) + 0.25 * c1 * (a * a - r * r), -log_r, alpha + beta * log_r - 0.25 * c2 * r * r],
            default=eps,
        )
        f = np.select([r < a, r <= b, r < 1.0], [c1, 0.0, c2], default=0.0)
        return v - eps, f

    def weighted(lo, hi):
        return integrate.quad(lambda t: float(profile(np.array([t]))[0][0]) ** 2 * t, lo, hi,
                              epsabs=0.0, epsrel=1e-12, limit=200)[0]

    u_norm = math.sqrt(2.0 * math.pi * (weighted(0.0, a) + weighted(b, 1.0)))
    f_norm = math.sqrt(c1 ** 2 * math.pi * a * a + c2 ** 2 * math.pi * (1.0 - b * b))
    ratio = rho ** 2 * u_norm / f_norm

    h = min(1e-3, a / 200.0)
    r = h * np.arange(int(math.ceil(1.2 / h)) + 1)
    u, f = profile(r)
    r_phys, f_phys = rho * r, f / rho ** 2
    return ConstructedSolution(
        example="resonant_annulus",
        n=3,
        k_m=_RESONANT,
        coords={"r": r_phys},
        u=u.astype(complex),
        f=f_phys,
        norm_ratio=ratio,
        residual=source_residual(r_phys, u, f_phys, _RESONANT, 2),
        outside_max=0.0,
        support_radius=rho,
        extras={"a": rho * a, "b": rho * b, "c1": c1 / rho ** 2, "c2": c2 / rho ** 2, "epsilon": eps,
                "greens_inner": c1 * math.pi * a * a, "greens_outer": abs(c2) * math.pi * (1.0 - b * b)},
    )


def construct_resonant_power(n: int, measure: float) -> ConstructedSolution:
    """n ≥ 4: u_m = r^{3−n} outside B_{r₀} (|B_{r₀}| = |I|), −Δu_m constant inside."""
    if n < 4:
        raise DomainError(f"the power-law construction needs n ≥ 4, got {n}")
    if not measure > 0:
        raise DomainError("measure must be positive")
    d = n - 1
    r0 = (measure / ball_volume(d, 1.0)) ** (1.0 / d)
    f0 = d * (d - 2) * r0 ** (-d)
    alpha = r0 ** (2 - d) + f0 * r0 * r0 / (2.0 * d)

    def profile(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            tail = np.where(r > 0, r, 1.0) ** (2 - d)
        return np.where(r <= r0, alpha - f0 * r * r / (2.0 * d), tail), np.where(r < r0, f0, 0.0)

    mass = integrate.quad(lambda t: (alpha - f0 * t * t / (2.0 * d)) ** 2 * t ** (d - 1), 0.0, r0,
                          epsabs=0.0, epsrel=1e-12)[0]
    u_norm = math.sqrt(sphere_area(d) * mass)
    f_norm = f0 * math.sqrt(measure)

    h = r0 / 400.0
    r = h * np.arange(int(math.ceil(3.0 * r0 / h)) + 1)
    u, f = profile(r)
    floor = math.sqrt(measure) * r0 ** (2 - d)
    return ConstructedSolution(
        example="resonant_power",
        n=n,
        k_m=_RESONANT,
        coords={"r": r},
        u=u.astype(complex),
        f=f,
        norm_ratio=u_norm / f_norm,
        residual=source_residual(r, u, f, _RESONANT, d),
        outside_max=0.0,
        support_radius=r0,
        extras={"r0": r0, "f0": f0, "u_norm": u_norm, "u_floor": floor, "above_floor": u_norm >= floor},
    )


def construct_resonant(n: int, params: dict) -> ConstructedSolution:
    """Dispatch on n (and on `modes` = 2 for the two-mode potential when n = 2)."""
    measure = float(params.get("measure", 0.03))
    if n == 2:
        if int(params.get("modes", 1)) == 2:
            return construct_resonant_two_mode(measure, int(params.get("M", 2)))
        return construct_resonant_tent(measure, float(params.get("rho", 1.0)))
    if n == 3:
        return construct_resonant_annulus(measure, float(params.get("rho", 1.0)))
    return construct_resonant_power(n, measure)


# ─── Example registry ───────────────────────────────────────────────────────

def _format_params(params: dict) -> str:
    return ",".join(f"{key}={value:g}" for key, value in sorted(params.items()))


def _norm_report(example: str, params: dict, solution: ConstructedSolution, lemma: Callable[[], float],
                 shape: float, note: str) -> TightnessReport:
    achieved = solution.norm_ratio
    try:
        bound = lemma()
    except NotApplicable as e:
        return TightnessReport(example, _format_params(params), math.nan, achieved, math.nan,
                               achieved / shape, f"no certificate: {e}")
    return TightnessReport(example, _format_params(params), bound, achieved, achieved / bound,
                           achieved / shape, note)


def _v_report(example: str, params: dict, solution: ConstructedSolution, bound: float,
              normalized: float, note: str) -> TightnessReport:
    achieved = solution.V_norm
    return TightnessReport(example, _format_params(params), bound, achieved, bound / achieved, normalized, note)


def _outer_kernel(p: dict, C: GenericConstants):
    n, delta = int(p["n"]), p["delta"]
    kind = ModeClass.EVANESCENT if p["evanescent"] else ModeClass.PROPAGATING
    solution = construct_dLarge(n, _mode(delta, kind))
    k = PI2 - delta ** 2 if kind == ModeClass.EVANESCENT else PI2 + delta ** 2
    bound = _threshold(n, k, Ball(radius=1.0), C)
    return solution, _v_report("outer_kernel", p, solution, bound, solution.extras["observed_c"],
                               "‖V_m + k_m²‖ / (|k_m| (+1 for n ≥ 3))")


def _evanescent_large(p: dict, C: GenericConstants):
    return _evanescent(int(p["n"]), p["delta"], C, "large")


def _evanescent_small(p: dict, C: GenericConstants):
    return _evanescent(int(p["n"]), p["delta"], C, "small")


def _staircase(p: dict, C: GenericConstants):
    delta = p["delta"]
    solution = construct_propagating_staircase(delta)
    bound = _threshold(2, PI2 + delta ** 2, Ball(radius=solution.support_radius), C)
    return solution, _v_report("staircase", p, solution, bound, solution.extras["V_ratio"], "‖V_m‖/δ₋")


def _log_gap(p: dict, C: GenericConstants):
    delta = p["delta"]
    solution = construct_n3_log(delta)
    bound = _threshold(3, PI2 + delta ** 2, Ball(radius=solution.support_radius), C)
    return solution, _v_report("log_gap", p, solution, bound, solution.extras["product"], "‖V_m‖·|ln δ|")


def _subcritical(p: dict, C: GenericConstants):
    n, k, r0 = int(p["n"]), p["k"], p["r0"]
    solution = construct_subcritical(n, k, r0)
    c = theorem_bounds(SlabProblem(n=n, k=k, support=Ball(radius=r0)), C)["subcritical"]
    delta = solution.extras["delta_plus"]
    return solution, _v_report("subcritical", p, solution, 1.0 / c, solution.V_norm / delta ** 2, "‖V‖/δ₊²")


def _resonant_tent(p: dict, C: GenericConstants):
    measure, rho = p["measure"], p["rho"]
    solution = construct_resonant_tent(measure, rho)
    return solution, _norm_report("resonant_tent", p, solution,
                                  lambda: cm_n2_resonant(measure, rho).c_m, measure, "ratio/|I|")


def _resonant_two_mode(p: dict, C: GenericConstants):
    measure, M = p["measure"], int(p["M"])
    solution = construct_resonant_two_mode(measure, M)
    bound = _threshold(2, M * M * PI2, Ball(radius=1.0, measure=measure), C, active=(1, M))
    note = "‖V‖·|D|" if M == 2 else "‖V‖·|D| (M ≠ 2 extrapolates the k = 4π² construction)"
    return solution, _v_report("resonant_two_mode", p, solution, bound, solution.extras["product"], note)


def _resonant_annulus(p: dict, C: GenericConstants):
    measure, rho = p["measure"], p["rho"]
    solution = construct_resonant_annulus(measure, rho)
    shape = measure * math.log(1.0 + math.pi * rho * rho / measure)
    return solution, _norm_report("resonant_annulus", p, solution,
                                  lambda: cm_n3_resonant(measure, rho).c_m, shape, "ratio/(|I| ln(1 + πρ²/|I|))")


def _resonant_power(p: dict, C: GenericConstants):
    n, measure = int(p["n"]), p["measure"]
    solution = construct_resonant_power(n, measure)
    return solution, _norm_report("resonant_power", p, solution,
                                  lambda: cm_n4_resonant(measure, n, C).c_m,
                                  measure ** (2.0 / (n - 1)), "ratio/|I|^{2/(n−1)}")


# example id → (builder, default params)
EXAMPLES: dict[str, tuple[Callable, dict]] = {
    "outer_kernel": (_outer_kernel, {"n": 2, "delta": 5.0, "evanescent": 1}),
    "evanescent_large": (_evanescent_large, {"n": 2, "delta": 50.0}),
    "evanescent_small": (_evanescent_small, {"n": 2, "delta": 0.1}),
    "staircase": (_staircase, {"delta": 10.0}),
    "log_gap": (_log_gap, {"delta": 0.01}),
    "subcritical": (_subcritical, {"n": 2, "k": 0.0, "r0": 100.0}),
    "resonant_tent": (_resonant_tent, {"measure": 0.03, "rho": 1.0}),
    "resonant_two_mode": (_resonant_two_mode, {"measure": 0.05, "M": 2}),
    "resonant_annulus": (_resonant_annulus, {"measure": 0.1 * math.pi, "rho": 1.0}),
    "resonant_power": (_resonant_power, {"n": 5, "measure": 1.0}),
}


def example_params(example_id: str, overrides: Optional[dict] = None) -> dict:
    if example_id not in EXAMPLES:
        raise ConfigError(f"unknown example '{example_id}'. Available: {', '.join(EXAMPLES)}")
    params = dict(EXAMPLES[example_id][1])
    unknown = set(overrides or {}) - set(params)
    if unknown:
        raise ConfigError(f"example '{example_id}' has no parameter(s) {', '.join(sorted(unknown))}; "
                          f"expected {', '.join(params)}")
    params.update({key: float(value) for key, value in (overrides or {}).items()})
    return params


def parse_params(text: str) -> dict:
    """'delta=10,n=2' → {'delta': 10.0, 'n': 2.0}."""
    out = {}
    for item in filter(None, (part.strip() for part in (text or "").split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"parameter '{item}' is not key=value")
        try:
            out[key.strip()] = float(value)
        except ValueError as e:
            raise ConfigError(f"parameter '{key.strip()}' is not a number: {value!r}") from e
    return out


def build_example(example_id: str, params: Optional[dict], C: GenericConstants
                  ) -> tuple[ConstructedSolution, TightnessReport]:
    full = example_params(example_id, params)
    builder, _ = EXAMPLES[example_id]
    return builder(full, C)


def dimension_of(example_id: str, params: Optional[dict] = None) -> int:
    """Slab dimension the example lives in (decides which constants file it needs)."""
    full = example_params(example_id, params)
    if "n" in full:
        return int(full["n"])
    return 3 if example_id in ("log_gap", "resonant_annulus") else 2
