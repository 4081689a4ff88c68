"""
framework/calibration.py

Numerical values for the generic constants C of the per-mode lemmas.

    C ≈ 1.1 × max over randomized admissible trials of  (‖u_m‖/‖f_m‖) / shape

A trial draws a support size, a wavenumber of the right class and a random
bump ensemble f inside I, convolves with g_m and divides the observed ratio
by the lemma's shape. Deterministic for a given seed.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from framework.errors import DomainError
from framework.green_kernel import build_kernel, kernel_constant, log_derivative_constant
from framework.oracle import (
    box_grid,
    cells_inside,
    convolve,
    random_bumps,
    random_radial_bumps,
)
from framework.spectral_core import ModeClass, ModeWavenumber, ball_volume

SAFETY_FACTOR = 1.1
MAX_NODES_PER_AXIS = 97


@dataclass(frozen=True)
class Trial:
    n: int
    k_m: ModeWavenumber
    measure: float
    rho: float


def _random_mode(rng: np.random.Generator, kind: ModeClass, low: float, high: float) -> ModeWavenumber:
    modulus = float(np.exp(rng.uniform(math.log(low), math.log(high))))
    if kind == ModeClass.PROPAGATING:
        return ModeWavenumber(1, complex(modulus, 0.0), kind)
    if kind == ModeClass.EVANESCENT:
        return ModeWavenumber(1, complex(0.0, modulus), kind)
    return ModeWavenumber(1, 0j, kind)


def observed_ratio(trial: Trial, rng: np.random.Generator) -> float:
    """‖g_m * f‖_{L²(I)} / ‖f‖_{L²(I)} for one random f, with I the ball of measure |I|."""
    d = trial.n - 1
    radius = (trial.measure / ball_volume(d, 1.0)) ** (1.0 / d)
    kernel = build_kernel(trial.n, trial.k_m, rho=max(trial.rho, radius))
    if d >= 3:
        f = random_radial_bumps(d, radius, rng)
    else:
        nodes = MAX_NODES_PER_AXIS if d == 1 else 49
        h = 2.0 * radius / (nodes - 1)
        if d == 1 and trial.k_m.modulus > 0:
            h = min(h, 0.25 / trial.k_m.modulus)
        grid = box_grid(d, radius, h)
        f = random_bumps(grid, cells_inside(grid, radius), rng, zero_mean=trial.n == 2 and trial.k_m.is_resonant)
    norm_f = f.l2_on_support()
    if norm_f == 0.0:
        return 0.0
    return convolve(f, kernel).l2_on_support() / norm_f


def _log_uniform(rng: np.random.Generator, low: float, high: float) -> float:
    return float(np.exp(rng.uniform(math.log(low), math.log(high))))


def _fourier(n: int, rng):
    k_m = _random_mode(rng, ModeClass.EVANESCENT, 0.5, 6.0)
    return Trial(n, k_m, _log_uniform(rng, 0.2, 3.0), 1.0), 1.0 / k_m.modulus ** 2


def _n2_convolution(n: int, rng):
    kind = ModeClass.PROPAGATING if rng.random() < 0.5 else ModeClass.EVANESCENT
    k_m = _random_mode(rng, kind, 0.3, 6.0)
    measure = _log_uniform(rng, 0.2, 3.0)
    return Trial(2, k_m, measure, 1.0), measure / (2.0 * k_m.modulus)


def _agmon(n: int, rng):
    d = n - 1
    measure = _log_uniform(rng, 0.3, 3.0)
    rho = (measure / ball_volume(d, 1.0)) ** (1.0 / d)
    k_m = _random_mode(rng, ModeClass.PROPAGATING, 0.15 / rho, 6.0 / rho)
    return Trial(n, k_m, measure, rho), rho / k_m.modulus


def _n3_lorentz(n: int, rng):
    kind = ModeClass.PROPAGATING if rng.random() < 0.5 else ModeClass.EVANESCENT
    k_m = _random_mode(rng, kind, 0.2, 6.0)
    measure = _log_uniform(rng, 0.2, 3.0)
    return Trial(3, k_m, measure, 1.0), k_m.modulus ** -0.5 * measure ** 0.75


def _n3_small_gap(n: int, rng):
    measure = _log_uniform(rng, 0.2, 3.0)
    limit = math.sqrt(math.pi) / (4.0 * math.sqrt(measure))
    kind = ModeClass.PROPAGATING if rng.random() < 0.5 else ModeClass.EVANESCENT
    k_m = _random_mode(rng, kind, 1e-3 * limit, 0.99 * limit)
    return Trial(3, k_m, measure, 1.0), measure * (1.0 - math.log(math.sqrt(measure) * k_m.modulus))


def _n4_convolution(n: int, rng):
    kind = ModeClass.PROPAGATING if rng.random() < 0.5 else ModeClass.EVANESCENT
    k_m = _random_mode(rng, kind, 0.2, 6.0)
    measure = _log_uniform(rng, 0.2, 3.0)
    shape = measure ** (n / (2.0 * (n - 1))) * k_m.modulus ** ((n - 4) / 2.0) + measure ** (2.0 / (n - 1))
    return Trial(n, k_m, measure, 1.0), shape


def _n4_resonant(n: int, rng):
    measure = _log_uniform(rng, 0.2, 3.0)
    return Trial(n, _random_mode(rng, ModeClass.RESONANT, 1.0, 1.0), measure, 1.0), measure ** (2.0 / (n - 1))


# lemma id → (dimensions it applies to, sampler returning a trial and the bound's shape)
SAMPLERS: dict[str, tuple[Callable[[int], bool], Callable]] = {
    "fourier": (lambda n: n >= 2, _fourier),
    "n2_convolution": (lambda n: n == 2, _n2_convolution),
    "agmon": (lambda n: n >= 2, _agmon),
    "n3_lorentz": (lambda n: n == 3, _n3_lorentz),
    "n3_small_gap": (lambda n: n == 3, _n3_small_gap),
    "n4_convolution": (lambda n: n >= 4, _n4_convolution),
    "n4_resonant": (lambda n: n >= 4, _n4_resonant),
}

# lemma id → GenericConstants field it feeds
CONSTANT_FOR_LEMMA = {
    "agmon": "C_agmon",
    "n3_lorentz": "C_lorentz",
    "n3_small_gap": "C_n3S",
    "n4_convolution": "C_n4",
    "n4_resonant": "C_n4res",
}


def observed_ratios(lemma_id: str, trials: int, seed: int, n: int) -> np.ndarray:
    """ratio ÷ shape for every trial (the raw material of a calibration)."""
    if lemma_id not in SAMPLERS:
        raise DomainError(f"unknown lemma '{lemma_id}'. Available: {', '.join(SAMPLERS)}")
    applies, sampler = SAMPLERS[lemma_id]
    if not applies(n):
        raise DomainError(f"lemma '{lemma_id}' does not apply in dimension n = {n}")
    if trials < 1:
        raise DomainError("trials must be ≥ 1")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(trials):
        trial, shape = sampler(n, rng)
        out.append(observed_ratio(trial, rng) / shape)
    return np.array(out)


def calibrate_constant(lemma_id: str, trials: int, seed: int, n: int = 2) -> float:
    """
    1.1 × the largest observed ratio ÷ shape. Also accepts kernel_n{n} and
    log_derivative_n{n}, which come from dense (|k_m| r)-grid maximization.
    """
    if lemma_id.startswith("kernel_n"):
        return kernel_constant(int(lemma_id[len("kernel_n"):]))
    if lemma_id.startswith("log_derivative_n"):
        return log_derivative_constant(int(lemma_id[len("log_derivative_n"):]))
    ratios = observed_ratios(lemma_id, trials, seed, n)
    worst = float(np.max(ratios))
    if not worst > 0:
        raise DomainError(f"calibration of '{lemma_id}' observed no signal")
    return SAFETY_FACTOR * worst
