"""
framework/special.py

Special functions used by the kernels and the constructions:
    bessel(kind, x)          J0, Y0, J1, Y1 (series below the cutoff, Hankel asymptotics above)
    I_s_integral(s, z, q)    ∫_0^∞ e^{−t} t^{s−1/2} (1 + t/2z)^{s−1/2} dt by adaptive quadrature
    I_s_expansion(s, z)      the binomial expansion of the same integral (exact for half-integer s)
    hankel_half_integer      H^{(1)}_s closed forms for s = j + 1/2
    hankel_identity_check    H_s(iz) against its integral representation
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from framework.errors import DomainError, QuadratureFailure

# Ascending series are used up to this argument; the asymptotic tail is
# accurate to ~1e-11 from here on and the series loses < 4 digits to cancellation.
BESSEL_SERIES_CUTOFF = 12.0


@dataclass(frozen=True)
class SpecialConstants:
    euler_gamma: float = 0.57721566490153286061

    @staticmethod
    def gamma_half_integer(j: int) -> float:
        """Γ(j + 1/2) = (2j)! √π / (4^j j!) for j ≥ 0."""
        if j < 0:
            raise DomainError("only non-negative j supported")
        return math.factorial(2 * j) * math.sqrt(math.pi) / (4 ** j * math.factorial(j))


CONSTANTS = SpecialConstants()


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 200

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be ≥ 1")


# ─── Bessel functions of order 0 and 1 ─────────────────────────────────────

def _series_j(order: int, x: float) -> float:
    q = x * x / 4.0
    term = (x / 2.0) ** order / math.factorial(order)
    total = term
    k = 0
    while abs(term) > 1e-17 * max(1.0, abs(total)):
        k += 1
        term *= -q / (k * (k + order))
        total += term
    return total


def _series_y0(x: float) -> float:
    q = x * x / 4.0
    term, harmonic, tail = 1.0, 0.0, 0.0
    k = 0
    while True:
        k += 1
        term *= -q / (k * k)
        harmonic += 1.0 / k
        piece = -term * harmonic
        tail += piece
        if abs(piece) < 1e-17 * max(1.0, abs(tail)) and k > 2:
            break
    return (2.0 / math.pi) * ((math.log(x / 2.0) + CONSTANTS.euler_gamma) * _series_j(0, x) + tail)


def _series_y1(x: float) -> float:
    half = x / 2.0
    term = half               # (x/2)^{2k+1} / (k! (k+1)!)
    h_k, h_k1 = 0.0, 1.0      # H_k, H_{k+1}
    tail = term * (h_k + h_k1)
    k = 0
    while True:
        k += 1
        term *= -half * half / (k * (k + 1))
        h_k = h_k1
        h_k1 += 1.0 / (k + 1)
        piece = term * (h_k + h_k1)
        tail += piece
        if abs(piece) < 1e-17 * max(1.0, abs(tail)) and k > 2:
            break
    return (-2.0 / (math.pi * x)
            + (2.0 / math.pi) * (math.log(half) + CONSTANTS.euler_gamma) * _series_j(1, x)
            - tail / math.pi)


def _asymptotic(order: int, x: float) -> tuple[float, float]:
    """(J_order, Y_order) from Hankel's expansion truncated at its smallest term."""
    mu = 4.0 * order * order
    p, q = 1.0, 0.0
    a_k = 1.0
    last = math.inf
    k = 0
    while True:
        k += 1
        a_k *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(a_k) >= last or abs(a_k) < 1e-17:
            break
        last = abs(a_k)
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p += sign * a_k
        else:
            q += sign * a_k
    chi = x - (order / 2.0 + 0.25) * math.pi
    amp = math.sqrt(2.0 / (math.pi * x))
    return amp * (p * math.cos(chi) - q * math.sin(chi)), amp * (p * math.sin(chi) + q * math.cos(chi))


def bessel(kind: str, x: float) -> float:
    kind = kind.upper()
    if kind not in ("J0", "Y0", "J1", "Y1"):
        raise DomainError(f"unsupported Bessel kind {kind}")
    order = int(kind[1])
    if kind[0] == "Y" and x <= 0:
        raise DomainError(f"{kind} is defined only for x > 0, got {x}")
    if kind[0] == "J" and x < 0:
        # J0 even, J1 odd
        return _series_or_asym(kind, -x) * (1 if order == 0 else -1)
    return _series_or_asym(kind, x)


def _series_or_asym(kind: str, x: float) -> float:
    order = int(kind[1])
    if x <= BESSEL_SERIES_CUTOFF:
        if kind[0] == "J":
            return _series_j(order, x)
        return _series_y0(x) if order == 0 else _series_y1(x)
    j, y = _asymptotic(order, x)
    return j if kind[0] == "J" else y


def bessel_y0_remainder(x: float) -> float:
    """b(x) = Y0(x) − (2/π)(ln(x/2) + γ) J0(x): the analytic part of Y0."""
    return bessel("Y0", x) - (2.0 / math.pi) * (math.log(x / 2.0) + CONSTANTS.euler_gamma) * bessel("J0", x)


# ─── The Poisson-type integral I_s ──────────────────────────────────────────

def _check_is_args(s: float, z: complex):
    if s < 0:
        raise DomainError(f"I_s needs s ≥ 0, got {s}")
    z = complex(z)
    if z == 0:
        raise DomainError("I_s needs z ≠ 0")
    if z.real < 0:
        raise DomainError(f"I_s needs Re z ≥ 0, got {z}")


def I_s_integral(s: float, z: complex, q: QuadratureSpec = QuadratureSpec()) -> complex:
    """
    Adaptive quadrature of I_s(z). The substitution t = u² removes the
    t^{s−1/2} endpoint singularity:
        I_s(z) = ∫_0^∞ 2 u^{2s} e^{−u²} (1 + u²/2z)^{s−1/2} du
    """
    _check_is_args(s, z)
    z = complex(z)
    expo = s - 0.5

    def integrand(u: float) -> complex:
        return 2.0 * u ** (2 * s) * math.exp(-u * u) * (1.0 + u * u / (2.0 * z)) ** expo

    parts = []
    for take in (lambda w: w.real, lambda w: w.imag):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            out = integrate.quad(
                lambda u: take(integrand(u)), 0.0, np.inf,
                epsabs=q.abs_tol, epsrel=q.rel_tol, limit=q.max_subdivisions, full_output=1,
            )
        value, abserr = out[0], out[1]
        # roundoff warnings are accepted while the error estimate stays near the request
        if len(out) > 3 and abserr > 100.0 * max(q.abs_tol, q.rel_tol * abs(value)):
            raise QuadratureFailure(
                f"I_s(s={s}, z={z}) did not converge: {out[3].splitlines()[0]} (abserr {abserr:.2e})"
            )
        parts.append(value)
    return complex(parts[0], parts[1])


def I_s_expansion(s: float, z: complex) -> complex:
    """
    Σ_j binom(s−1/2, j) Γ(s+1/2+j) (2z)^{−j}. Terminates (exact) for
    half-integer s; otherwise summed up to its smallest term.
    """
    _check_is_args(s, z)
    z = complex(z)
    terminating = is_half_integer(s)
    term = complex(special.gamma(s + 0.5))
    total = term
    last = abs(term)
    for j in range(400):
        if terminating and j >= s - 0.5 + 1e-9:
            break
        term = term * (s - 0.5 - j) * (s + 0.5 + j) / ((j + 1) * 2.0 * z)
        if not terminating:
            if abs(term) >= last:
                break
            last = abs(term)
        total += term
        if not terminating and abs(term) < 1e-17 * abs(total):
            break
    return total


def is_half_integer(s: float) -> bool:
    return s >= 0.5 and abs((s - 0.5) - round(s - 0.5)) < 1e-12


# ─── Hankel functions ───────────────────────────────────────────────────────

def hankel_half_integer(s: float, w: complex) -> complex:
    """H^{(1)}_s(w) for s = j + 1/2, from H_{−1/2}, H_{1/2} and the recurrence."""
    if not is_half_integer(s):
        raise DomainError(f"closed form needs half-integer s, got {s}")
    w = complex(w)
    base = np.sqrt(2.0 / (math.pi * w)) * np.exp(1j * w)
    prev, cur = base, -1j * base          # H_{−1/2}, H_{1/2}
    nu = 0.5
    while nu < s - 1e-12:
        prev, cur = cur, (2.0 * nu / w) * cur - prev
        nu += 1.0
    return complex(cur)


def hankel_identity_check(s: float, z: float, q: QuadratureSpec = QuadratureSpec()) -> float:
    """
    Relative gap between H_s(iz) and
        e^{−iπs/2} / (iΓ(s+1/2)) · (2/πz)^{1/2} e^{−z} I_s(z).
    """
    if z <= 0:
        raise DomainError(f"identity check needs z > 0, got {z}")
    w = 1j * z
    lhs = hankel_half_integer(s, w) if is_half_integer(s) else complex(special.hankel1(s, w))
    rhs = (np.exp(-1j * math.pi * s / 2) / (1j * special.gamma(s + 0.5))
           * math.sqrt(2.0 / (math.pi * z)) * math.exp(-z) * I_s_integral(s, z, q))
    return abs(lhs - rhs) / abs(lhs)
