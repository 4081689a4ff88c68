"""
framework/spectral_core.py

The slab problem  −Δu = (k+V)u  on  ℝ^{n−1} × (0,1)  and its mode structure.

Each mode u_m(x) = 2∫ u(x,y) sin(mπy) dy solves a Helmholtz problem in
ℝ^{n−1} with wavenumber k_m = √(k − m²π²):
    real       → propagating
    imaginary  → evanescent
    zero       → resonant  (k = m²π², within a relative band ε_K)

Config layout (problems/<name>/config.json, "problem" section):
    {"n": 2, "k": 4.93, "support": {"kind": "ball", "radius": 1.0,
     "center": [0.0], "measure": 2.0}, "resonance_tolerance": 1e-9}
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from framework.errors import (
    ConfigError,
    DomainError,
    GridTooCoarse,
    NonpositiveK,
    ResonantInput,
)

PI2 = math.pi ** 2
DEFAULT_RESONANCE_TOLERANCE = 1e-9


class ModeClass(str, Enum):
    PROPAGATING = "propagating"
    EVANESCENT = "evanescent"
    RESONANT = "resonant"


# ─── Supports ───────────────────────────────────────────────────────────────

def ball_volume(d: int, radius: float) -> float:
    """Lebesgue measure of a ball of the given radius in ℝ^d."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * radius ** d


@dataclass(frozen=True)
class Ball:
    radius: float
    center: tuple = ()
    measure: Optional[float] = None   # |I|; defaults to the full ball volume
    kind = "ball"


@dataclass(frozen=True)
class MeasureOnly:
    measure: float
    kind = "measure"

    @property
    def radius(self) -> None:
        return None


SupportDescriptor = Union[Ball, MeasureOnly]


@dataclass(frozen=True)
class SlabProblem:
    n: int
    k: float
    support: SupportDescriptor
    resonance_tolerance: float = DEFAULT_RESONANCE_TOLERANCE

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"dimension n must be an integer ≥ 2, got {self.n}")
        if not math.isfinite(self.k):
            raise DomainError(f"k must be finite, got {self.k}")
        if self.resonance_tolerance <= 0:
            raise DomainError("resonance_tolerance must be positive")
        s = self.support
        if isinstance(s, Ball):
            if not s.radius > 0:
                raise DomainError(f"ball radius must be positive, got {s.radius}")
            if s.center and len(s.center) != self.n - 1:
                raise DomainError(
                    f"ball center has {len(s.center)} coordinates, expected {self.n - 1}"
                )
            full = ball_volume(self.n - 1, s.radius)
            if s.measure is not None:
                if not s.measure > 0:
                    raise DomainError(f"support measure must be positive, got {s.measure}")
                if s.measure > full * (1 + 1e-12):
                    raise DomainError(
                        f"|I| = {s.measure} exceeds the volume {full:.6g} of B_ρ (ρ = {s.radius})"
                    )
        elif isinstance(s, MeasureOnly):
            if not (s.measure > 0 and math.isfinite(s.measure)):
                raise DomainError(f"support measure must be finite and positive, got {s.measure}")
        else:
            raise DomainError(f"unknown support descriptor {s!r}")

    @property
    def d(self) -> int:
        return self.n - 1

    @property
    def measure(self) -> float:
        s = self.support
        if isinstance(s, Ball) and s.measure is None:
            return ball_volume(self.d, s.radius)
        return s.measure

    @property
    def radius(self) -> Optional[float]:
        return self.support.radius

    def mode(self, m: int) -> "ModeWavenumber":
        return mode_wavenumber(self.k, m, self.resonance_tolerance)


# ─── Modes and gaps ─────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ModeWavenumber:
    m: int
    value: complex
    kind: ModeClass

    @property
    def modulus(self) -> float:
        return abs(self.value)

    @property
    def is_resonant(self) -> bool:
        return self.kind == ModeClass.RESONANT


def _band(k: float, eps_k: float) -> float:
    return eps_k * max(1.0, k)


def mode_wavenumber(k: float, m: int, eps_k: float = DEFAULT_RESONANCE_TOLERANCE) -> ModeWavenumber:
    if m < 1:
        raise DomainError(f"mode index must be ≥ 1, got {m}")
    if eps_k <= 0:
        raise DomainError("ε_K must be positive")
    gap = m * m * PI2 - k
    if abs(gap) <= _band(k, eps_k):
        return ModeWavenumber(m, 0j, ModeClass.RESONANT)
    if gap < 0:
        return ModeWavenumber(m, complex(math.sqrt(-gap), 0.0), ModeClass.PROPAGATING)
    return ModeWavenumber(m, complex(0.0, math.sqrt(gap)), ModeClass.EVANESCENT)


def dilate_mode(k_m: ModeWavenumber, lam: float) -> ModeWavenumber:
    """Mode seen after x → x/λ: k_m → k_m/λ (class unchanged)."""
    if lam <= 0:
        raise DomainError("dilation factor must be positive")
    return ModeWavenumber(k_m.m, k_m.value / lam, k_m.kind)


def dilate_support(support: SupportDescriptor, lam: float, d: int) -> SupportDescriptor:
    if lam <= 0:
        raise DomainError("dilation factor must be positive")
    if isinstance(support, Ball):
        measure = None if support.measure is None else support.measure * lam ** d
        center = tuple(lam * c for c in support.center)
        return Ball(radius=support.radius * lam, center=center, measure=measure)
    return MeasureOnly(measure=support.measure * lam ** d)


def dilate_problem(problem: SlabProblem, lam: float) -> tuple[SlabProblem, Callable[[ModeWavenumber], ModeWavenumber]]:
    """
    I → λI with the slab width kept at 1. Per mode, W(x) = h(x/λ) turns
    −Δh − k_m²h = G into −ΔW − (k_m/λ)²W = λ^{−2}G(x/λ), so modes map k_m → k_m/λ.
    """
    scaled = SlabProblem(
        n=problem.n, k=problem.k,
        support=dilate_support(problem.support, lam, problem.d),
        resonance_tolerance=problem.resonance_tolerance,
    )
    return scaled, lambda k_m: dilate_mode(k_m, lam)


@dataclass(frozen=True)
class InK:
    m0: int


@dataclass(frozen=True)
class NotInK:
    pass


def classify_k(k: float, eps_k: float = DEFAULT_RESONANCE_TOLERANCE) -> Union[InK, NotInK]:
    if k <= 0:
        return NotInK()
    m0 = max(1, round(math.sqrt(k) / math.pi))
    if abs(m0 * m0 * PI2 - k) <= _band(k, eps_k):
        return InK(m0)
    return NotInK()


def first_evanescent_index(k: float, eps_k: float = DEFAULT_RESONANCE_TOLERANCE) -> int:
    """Smallest m with m²π² > k (outside the resonance band)."""
    m = 1 if k <= 0 else int(math.floor(math.sqrt(k) / math.pi))
    m = max(m, 1)
    while mode_wavenumber(k, m, eps_k).kind != ModeClass.EVANESCENT:
        m += 1
    while m > 1 and mode_wavenumber(k, m - 1, eps_k).kind == ModeClass.EVANESCENT:
        m -= 1
    return m


@dataclass(frozen=True)
class SpectralGaps:
    delta_plus: float
    delta_minus: float     # math.inf when k < π²
    delta: float


def spectral_gaps(k: float, eps_k: float = DEFAULT_RESONANCE_TOLERANCE) -> SpectralGaps:
    top = int(math.ceil(math.sqrt(max(k, 0.0)) / math.pi)) + 1
    plus, minus = math.inf, math.inf
    for m in range(1, top + 1):
        km = mode_wavenumber(k, m, eps_k)
        if km.kind == ModeClass.RESONANT:
            raise ResonantInput(f"k = {k} is resonant with mode m = {m} (|m²π² − k| ≤ ε_K·max(1,k))")
        if km.kind == ModeClass.EVANESCENT:
            plus = min(plus, km.modulus)
        else:
            minus = min(minus, km.modulus)
    return SpectralGaps(plus, minus, min(plus, minus))


# ─── Sampled slab functions ─────────────────────────────────────────────────

def gauss_legendre_y(nodes_per_panel: int, panels: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss–Legendre nodes and weights on (0,1)."""
    t, w = np.polynomial.legendre.leggauss(nodes_per_panel)
    edges = np.linspace(0.0, 1.0, panels + 1)
    ys, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        ys.append(0.5 * (b - a) * t + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * w)
    return np.concatenate(ys), np.concatenate(ws)


def uniform_y(ny: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform nodes including both walls, trapezoid weights."""
    y = np.linspace(0.0, 1.0, ny)
    w = np.full(ny, 1.0 / (ny - 1))
    w[0] = w[-1] = 0.5 / (ny - 1)
    return y, w


@dataclass(frozen=True)
class SlabSamples:
    """Values of a slab function on (x-grid) × (y-nodes); last axis is y."""
    x_axes: tuple
    y: np.ndarray
    y_weights: np.ndarray
    values: np.ndarray = field(repr=False)

    @classmethod
    def from_function(cls, x_axes, y, y_weights, func) -> "SlabSamples":
        grids = np.meshgrid(*x_axes, y, indexing="ij")
        return cls(tuple(x_axes), y, y_weights, np.asarray(func(*grids)))


def mode_project(samples: SlabSamples, m: int) -> np.ndarray:
    """u_m(x) = 2∫ u(x,y) sin(mπy) dy by the samples' y-quadrature."""
    if m < 1:
        raise DomainError(f"mode index must be ≥ 1, got {m}")
    interior = int(np.count_nonzero((samples.y > 0) & (samples.y < 1)))
    if interior < 8 * m:
        raise GridTooCoarse(
            f"{interior} interior y-nodes cannot resolve sin({m}πy); need at least {8 * m}"
        )
    weights = 2.0 * samples.y_weights * np.sin(m * math.pi * samples.y)
    return samples.values @ weights


def mode_resum(modes: dict, y: np.ndarray) -> np.ndarray:
    """Σ_m u_m(x) sin(mπy) over the supplied modes."""
    total = None
    for m, um in sorted(modes.items()):
        term = np.asarray(um)[..., None] * np.sin(m * math.pi * y)
        total = term if total is None else total + term
    return total


# ─── Refraction index ↔ potential ───────────────────────────────────────────

def refraction_to_potential(k: float, n_index: np.ndarray) -> np.ndarray:
    """Helmholtz form Δu + k n² u = 0 rewritten as V = k(n² − 1)."""
    if k <= 0:
        raise NonpositiveK(f"refraction transform needs k > 0, got {k}")
    n_index = np.asarray(n_index)
    return k * (n_index ** 2 - 1.0)


def potential_to_refraction(k: float, V: np.ndarray) -> np.ndarray:
    if k <= 0:
        raise NonpositiveK(f"refraction transform needs k > 0, got {k}")
    ratio = 1.0 + np.asarray(V, dtype=float) / k
    if np.any(ratio < 0):
        raise DomainError("V < −k somewhere: no real refraction index")
    return np.sqrt(ratio)


# ─── Config (de)serialization ───────────────────────────────────────────────

def problem_to_dict(problem: SlabProblem) -> dict:
    s = problem.support
    if isinstance(s, Ball):
        support = {"kind": "ball", "radius": s.radius,
                   "center": list(s.center) or [0.0] * problem.d,
                   "measure": problem.measure}
    else:
        support = {"kind": "measure", "measure": s.measure}
    return {
        "n": problem.n,
        "k": problem.k,
        "support": support,
        "resonance_tolerance": problem.resonance_tolerance,
    }


def problem_from_dict(data: dict) -> SlabProblem:
    try:
        n = data["n"]
        k = float(data["k"])
        sup = data["support"]
        kind = sup.get("kind", "ball" if "radius" in sup else "measure")
        if kind == "ball":
            measure = sup.get("measure")
            support = Ball(
                radius=float(sup["radius"]),
                center=tuple(float(c) for c in sup.get("center", [])),
                measure=None if measure is None else float(measure),
            )
        elif kind == "measure":
            support = MeasureOnly(measure=float(sup["measure"]))
        else:
            raise ConfigError(f"unknown support.kind '{kind}' (expected 'ball' or 'measure')")
        return SlabProblem(
            n=int(n), k=k, support=support,
            resonance_tolerance=float(data.get("resonance_tolerance", DEFAULT_RESONANCE_TOLERANCE)),
        )
    except KeyError as e:
        raise ConfigError(f"missing key {e} in problem config") from e
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"invalid problem config: {e}") from e


def load_problem(path: Path) -> SlabProblem:
    """Read a problem file; accepts either the bare problem or a folder config with a "problem" key."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    return problem_from_dict(data.get("problem", data))


def save_problem(problem: SlabProblem, path: Path):
    Path(path).write_text(json.dumps(problem_to_dict(problem), indent=4), encoding="utf-8")
