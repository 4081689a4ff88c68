"""
framework/bound_engine.py

Per-mode constants c_m with ‖u_m‖ ≤ c_m‖f_m‖ on I, the aggregate
c = sup_m c_m and the uniqueness threshold ‖V‖_∞ < 1/c.

Lemma ids (ModeBound.source):
    fourier          evanescent modes, any support         1/|k_m|²
    agmon            propagating modes, ball support       C ρ/k_m
    n2_convolution   n = 2, nonresonant                    |I|/(2|k_m|)
    n2_resonant      n = 2, resonant, ball with ρ ≥ 1      2ρ|I|
    n3_lorentz       n = 3, nonresonant                    C|k_m|^{−1/2}|I|^{3/4}
    n3_small_gap     n = 3, 4π^{−1/2}|k_m||I|^{1/2} < 1     C|I|(1 − ln(|I|^{1/2}|k_m|))
    n3_resonant      n = 3, resonant, ball                 (|I|/π)(1 + ln(πρ²/|I|))
    n4_convolution   n ≥ 4, nonresonant                    C(|I|^{n/2(n−1)}|k_m|^{(n−4)/2} + |I|^{2/(n−1)})
    n4_resonant      n ≥ 4, resonant                       C|I|^{2/(n−1)}
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Optional

import pandas as pd

from framework.errors import ConfigError, NoApplicableBound, NotApplicable, ResonantInput
from framework.spectral_core import (
    Ball,
    InK,
    ModeClass,
    ModeWavenumber,
    SlabProblem,
    SupportDescriptor,
    classify_k,
    first_evanescent_index,
    problem_to_dict,
    spectral_gaps,
)

AGMON_MIN_PRODUCT = 0.1
TAIL_SEARCH_LIMIT = 100_000


class Provenance(str, Enum):
    EXPLICIT = "explicit"
    CALIBRATED = "calibrated"
    USER_SUPPLIED = "user"


@dataclass(frozen=True)
class Constant:
    value: float
    provenance: Provenance = Provenance.CALIBRATED

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ConfigError(f"generic constants must be finite and positive, got {self.value}")


CONSTANT_NAMES = ("C_agmon", "C_lorentz", "C_n3S", "C_n4", "C_n4res")


@dataclass(frozen=True)
class GenericConstants:
    C_agmon: Constant
    C_lorentz: Constant
    C_n3S: Constant
    C_n4: Constant
    C_n4res: Constant

    @classmethod
    def user_supplied(cls, **values: float) -> "GenericConstants":
        missing = [name for name in CONSTANT_NAMES if name not in values]
        if missing:
            raise ConfigError(f"missing constants: {', '.join(missing)}")
        return cls(**{name: Constant(float(values[name]), Provenance.USER_SUPPLIED) for name in CONSTANT_NAMES})

    def to_dict(self) -> dict:
        return {name: {"value": getattr(self, name).value, "provenance": getattr(self, name).provenance.value}
                for name in CONSTANT_NAMES}

    @classmethod
    def from_dict(cls, data: dict) -> "GenericConstants":
        try:
            return cls(**{
                name: Constant(float(data[name]["value"]), Provenance(data[name].get("provenance", "calibrated")))
                for name in CONSTANT_NAMES
            })
        except KeyError as e:
            raise ConfigError(f"constants file is missing {e}") from e
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"invalid constants: {e}") from e

    def with_overrides(self, overrides: dict) -> "GenericConstants":
        unknown = set(overrides) - set(CONSTANT_NAMES)
        if unknown:
            raise ConfigError(f"unknown constants: {', '.join(sorted(unknown))}")
        return replace(self, **{name: Constant(float(v), Provenance.USER_SUPPLIED) for name, v in overrides.items()})


@dataclass(frozen=True)
class ModeBound:
    m: int
    c_m: float
    source: str
    applicability: tuple = ()
    provenance: Provenance = Provenance.EXPLICIT
    candidates: dict = field(default_factory=dict)


def _need(condition: bool, message: str):
    if not condition:
        raise NotApplicable(message)


def _mode_index(k_m: Optional[ModeWavenumber]) -> int:
    return k_m.m if k_m is not None else 0


# ─── Lemmas ─────────────────────────────────────────────────────────────────

def cm_fourier(k_m: ModeWavenumber) -> ModeBound:
    _need(k_m.kind == ModeClass.EVANESCENT, f"fourier: mode {k_m.m} is {k_m.kind.value}")
    return ModeBound(k_m.m, 1.0 / k_m.modulus ** 2, "fourier", ("m²π² > k",))


def cm_agmon(k_m: ModeWavenumber, support: SupportDescriptor, C: GenericConstants) -> ModeBound:
    _need(k_m.kind == ModeClass.PROPAGATING, f"agmon: mode {k_m.m} is {k_m.kind.value}")
    _need(isinstance(support, Ball), "agmon: needs a ball support")
    rho = support.radius
    _need(rho * k_m.modulus > AGMON_MIN_PRODUCT, f"agmon: ρ·k_m = {rho * k_m.modulus:.4g} ≤ {AGMON_MIN_PRODUCT}")
    return ModeBound(k_m.m, C.C_agmon.value * rho / k_m.modulus, "agmon",
                     ("m²π² < k", "I ⊆ B_ρ", f"ρ·k_m > {AGMON_MIN_PRODUCT}"), C.C_agmon.provenance)


def cm_n2(k_m: ModeWavenumber, measure: float, n: int = 2) -> ModeBound:
    _need(n == 2, "n2_convolution: n ≠ 2")
    _need(k_m.kind != ModeClass.RESONANT, f"n2_convolution: mode {k_m.m} is resonant")
    return ModeBound(k_m.m, measure / (2.0 * k_m.modulus), "n2_convolution", ("n = 2", "k_m ≠ 0"))


def cm_n2_resonant(measure: float, rho: Optional[float], k_m: Optional[ModeWavenumber] = None,
                   n: int = 2) -> ModeBound:
    _need(n == 2, "n2_resonant: n ≠ 2")
    _need(k_m is None or k_m.is_resonant, "n2_resonant: mode is not resonant")
    _need(rho is not None, "n2_resonant: needs a ball support")
    _need(rho >= 1.0, f"n2_resonant: needs ρ ≥ 1, got {rho}")
    return ModeBound(_mode_index(k_m), 2.0 * rho * measure, "n2_resonant", ("n = 2", "k_m = 0", "ρ ≥ 1"))


def cm_n3_lorentz(k_m: ModeWavenumber, measure: float, C: GenericConstants, n: int = 3) -> ModeBound:
    _need(n == 3, "n3_lorentz: n ≠ 3")
    _need(k_m.kind != ModeClass.RESONANT, f"n3_lorentz: mode {k_m.m} is resonant")
    value = C.C_lorentz.value * k_m.modulus ** -0.5 * measure ** 0.75
    return ModeBound(k_m.m, value, "n3_lorentz", ("n = 3", "k_m ≠ 0"), C.C_lorentz.provenance)


def small_gap_holds(modulus: float, measure: float) -> bool:
    return 0.0 < 4.0 / math.sqrt(math.pi) * modulus * math.sqrt(measure) < 1.0


def cm_n3_smallgap(k_m: ModeWavenumber, measure: float, C: GenericConstants, n: int = 3) -> ModeBound:
    _need(n == 3, "n3_small_gap: n ≠ 3")
    _need(k_m.kind != ModeClass.RESONANT, f"n3_small_gap: mode {k_m.m} is resonant")
    _need(small_gap_holds(k_m.modulus, measure),
          f"n3_small_gap: 4π^(−1/2)|k_m||I|^(1/2) = {4 / math.sqrt(math.pi) * k_m.modulus * math.sqrt(measure):.4g} ≥ 1")
    value = C.C_n3S.value * measure * (1.0 - math.log(math.sqrt(measure) * k_m.modulus))
    return ModeBound(k_m.m, value, "n3_small_gap", ("n = 3", "4π^(−1/2)|k_m||I|^(1/2) < 1"), C.C_n3S.provenance)


def cm_n3_resonant(measure: float, rho: Optional[float], k_m: Optional[ModeWavenumber] = None,
                   n: int = 3) -> ModeBound:
    _need(n == 3, "n3_resonant: n ≠ 3")
    _need(k_m is None or k_m.is_resonant, "n3_resonant: mode is not resonant")
    _need(rho is not None, "n3_resonant: needs a ball support")
    _need(measure <= math.pi * rho * rho * (1 + 1e-12), f"n3_resonant: |I| = {measure} > πρ²")
    value = measure / math.pi * (1.0 + math.log(math.pi * rho * rho / measure))
    return ModeBound(_mode_index(k_m), value, "n3_resonant", ("n = 3", "k_m = 0", "I ⊆ B_ρ"))


def cm_n4(k_m: ModeWavenumber, measure: float, n: int, C: GenericConstants) -> ModeBound:
    _need(n >= 4, f"n4_convolution: n = {n} < 4")
    _need(k_m.kind != ModeClass.RESONANT, f"n4_convolution: mode {k_m.m} is resonant")
    value = C.C_n4.value * (measure ** (n / (2.0 * (n - 1))) * k_m.modulus ** ((n - 4) / 2.0)
                            + measure ** (2.0 / (n - 1)))
    return ModeBound(k_m.m, value, "n4_convolution", ("n ≥ 4", "k_m ≠ 0"), C.C_n4.provenance)


def cm_n4_resonant(measure: float, n: int, C: GenericConstants,
                   k_m: Optional[ModeWavenumber] = None) -> ModeBound:
    _need(n >= 4, f"n4_resonant: n = {n} < 4")
    _need(k_m is None or k_m.is_resonant, "n4_resonant: mode is not resonant")
    value = C.C_n4res.value * measure ** (2.0 / (n - 1))
    return ModeBound(_mode_index(k_m), value, "n4_resonant", ("n ≥ 4", "k_m = 0"), C.C_n4res.provenance)


def _lemmas_for(problem: SlabProblem, k_m: ModeWavenumber, C: GenericConstants) -> list[Callable[[], ModeBound]]:
    n, measure, rho = problem.n, problem.measure, problem.radius
    lemmas = [
        lambda: cm_fourier(k_m),
        lambda: cm_agmon(k_m, problem.support, C),
    ]
    if n == 2:
        lemmas += [lambda: cm_n2(k_m, measure, n), lambda: cm_n2_resonant(measure, rho, k_m, n)]
    elif n == 3:
        lemmas += [lambda: cm_n3_lorentz(k_m, measure, C, n),
                   lambda: cm_n3_smallgap(k_m, measure, C, n),
                   lambda: cm_n3_resonant(measure, rho, k_m, n)]
    else:
        lemmas += [lambda: cm_n4(k_m, measure, n, C), lambda: cm_n4_resonant(measure, n, C, k_m)]
    return lemmas


def best_mode_bound(problem: SlabProblem, m: int, C: GenericConstants) -> ModeBound:
    """Minimum c_m over every lemma whose hypotheses hold for mode m."""
    k_m = problem.mode(m)
    applicable = []
    for lemma in _lemmas_for(problem, k_m, C):
        try:
            applicable.append(lemma())
        except NotApplicable:
            continue
    if not applicable:
        raise NoApplicableBound(
            f"no lemma applies to mode m = {m} ({k_m.kind.value}, n = {problem.n}, "
            f"support = {problem.support.kind}); a resonant mode needs a ball support here"
        )
    best = min(applicable, key=lambda b: b.c_m)
    return replace(best, m=m, candidates={b.source: b.c_m for b in applicable})


# ─── Theorem-level bounds ───────────────────────────────────────────────────

def theorem_bounds(problem: SlabProblem, C: GenericConstants) -> dict:
    """Every theorem-level c whose hypotheses hold for this problem, keyed by id."""
    n, D, rho = problem.n, problem.measure, problem.radius
    out = {}
    k_class = classify_k(problem.k, problem.resonance_tolerance)

    if isinstance(k_class, InK):
        if n == 2 and rho is not None and rho >= 1.0:
            out["n2_resonant"] = 2.0 * rho * D
        if n == 3 and rho is not None and D <= math.pi * rho * rho * (1 + 1e-12):
            resonant_term = D / math.pi * (1.0 + math.log(math.pi * rho * rho / D))
            out["n3_resonant"] = max(C.C_lorentz.value * D ** 0.75, resonant_term)
            if rho * math.sqrt(3.0) * math.pi > AGMON_MIN_PRODUCT:
                out["n3_resonant_refined"] = max(1.0 / (3.0 * math.pi ** 2),
                                                 C.C_agmon.value * rho / (math.sqrt(3.0) * math.pi),
                                                 resonant_term)
        if n >= 4:
            out["n4"] = _n4_theorem(problem, C)
        return out

    try:
        gaps = spectral_gaps(problem.k, problem.resonance_tolerance)
    except ResonantInput:
        return out
    dp, dm, delta = gaps.delta_plus, gaps.delta_minus, gaps.delta
    finite_minus = math.isfinite(dm)

    if problem.k < math.pi ** 2:
        out["subcritical"] = 1.0 / dp ** 2
    if isinstance(problem.support, Ball) and (not finite_minus or rho * dm > AGMON_MIN_PRODUCT):
        out["gap_agmon"] = max(1.0 / dp ** 2, C.C_agmon.value * rho / dm if finite_minus else 0.0)
    if n == 2:
        out["n2_gap"] = D / (2.0 * delta)
        out["n2_combined"] = max(D / (2.0 * dm) if finite_minus else 0.0,
                                 min(D / (2.0 * dp), 1.0 / dp ** 2))
    elif n == 3:
        out["n3_lorentz"] = C.C_lorentz.value * D ** 0.75 / delta ** 0.5
        out["n3_two_sided"] = max(1.0 / dp ** 2, C.C_lorentz.value * D ** 0.75 / dm ** 0.5 if finite_minus else 0.0)
        if small_gap_holds(delta, D):
            out["n3_log"] = max(C.C_n3S.value * D * (1.0 - math.log(math.sqrt(D) * delta)),
                                C.C_lorentz.value * (4.0 / math.sqrt(math.pi)) ** 0.5 * D)
    else:
        out["n4"] = _n4_theorem(problem, C)
    return out


def _n4_theorem(problem: SlabProblem, C: GenericConstants) -> float:
    n, D = problem.n, problem.measure
    constant = max(C.C_n4.value, C.C_n4res.value)
    spread = abs(problem.k - math.pi ** 2) ** ((n - 4) / 4.0) + 1.0
    return max(constant * spread * (D ** (n / (2.0 * (n - 1))) + D ** (2.0 / (n - 1))), 1.0)


# ─── Aggregate ──────────────────────────────────────────────────────────────

@dataclass
class BoundCertificate:
    problem: SlabProblem
    modes: list
    m_tail: int
    tail_bound: float
    aggregate_c: float
    threshold: float
    theorem_comparisons: dict
    constants: GenericConstants
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "problem": problem_to_dict(self.problem),
            "modes": [
                {"m": b.m, "c_m": b.c_m, "source": b.source, "provenance": b.provenance.value,
                 "applicability": list(b.applicability), "candidates": b.candidates}
                for b in self.modes
            ],
            "tail": {"from_m": self.m_tail + 1, "bound": self.tail_bound},
            "aggregate_c": self.aggregate_c,
            "threshold": self.threshold,
            "theorem_comparisons": self.theorem_comparisons,
            "constants": self.constants.to_dict(),
            "notes": list(self.notes),
        }

    def to_table(self) -> pd.DataFrame:
        rows = []
        for b in self.modes:
            k_m = self.problem.mode(b.m)
            rows.append({
                "m": b.m,
                "class": k_m.kind.value,
                "abs_k_m": k_m.modulus,
                "c_m": b.c_m,
                "source": b.source,
                "provenance": b.provenance.value,
            })
        return pd.DataFrame(rows, columns=["m", "class", "abs_k_m", "c_m", "source", "provenance"])


def find_tail(problem: SlabProblem, C: GenericConstants) -> tuple[list, int]:
    """
    Per-mode bounds for m = 1 .. m_tail. m_tail is the first m > m₀ with
    1/|k_m|² ≤ max_{j<m} c_j and 1/|k_{m+1}|² ≤ c_m; every later mode is then
    bounded by 1/|k_{m+1}|², which decreases.
    """
    m0 = first_evanescent_index(problem.k, problem.resonance_tolerance)
    bounds = []
    running = 0.0
    for m in range(1, TAIL_SEARCH_LIMIT):
        bound = best_mode_bound(problem, m, C)
        bounds.append(bound)
        if m > m0:
            k_m, k_next = problem.mode(m), problem.mode(m + 1)
            if 1.0 / k_m.modulus ** 2 <= running and 1.0 / k_next.modulus ** 2 <= bound.c_m:
                return bounds, m
        running = max(running, bound.c_m)
    raise NoApplicableBound(f"tail search did not settle within {TAIL_SEARCH_LIMIT} modes")


def aggregate(problem: SlabProblem, C: GenericConstants,
              active_modes: Optional[Iterable[int]] = None) -> BoundCertificate:
    """
    Certificate for the problem. With active_modes, only those modes carry
    data (e.g. a potential that couples a single mode) and no tail is needed.
    """
    notes = []
    if active_modes is None:
        modes, m_tail = find_tail(problem, C)
        tail = 1.0 / problem.mode(m_tail + 1).modulus ** 2
        notes.append(f"modes m > {m_tail} are evanescent with c_m ≤ 1/|k_m|² ≤ {tail:.6g} ≤ c_{m_tail}")
    else:
        modes = [best_mode_bound(problem, m, C) for m in sorted(set(active_modes))]
        if not modes:
            raise NoApplicableBound("active_modes is empty")
        m_tail, tail = modes[-1].m, 0.0
        notes.append(f"only modes {[b.m for b in modes]} carry data")
    c = max(b.c_m for b in modes)
    theorems = theorem_bounds(problem, C)

    if any(b.source == "agmon" for b in modes) or "gap_agmon" in theorems:
        notes.append(f"agmon applied per mode under ρ·k_m > {AGMON_MIN_PRODUCT}; "
                     f"the theorem-level form asks ρδ₋ > {AGMON_MIN_PRODUCT}")
    if problem.n == 2 and isinstance(classify_k(problem.k, problem.resonance_tolerance), InK):
        notes.append("resonant n = 2 bound requires ρ ≥ 1 as stated; smaller balls get no resonant bound")
    if any(b.provenance != Provenance.EXPLICIT for b in modes):
        notes.append("some constants are calibrated numerically; the threshold is not an interval enclosure")
    return BoundCertificate(
        problem=problem,
        modes=modes,
        m_tail=m_tail,
        tail_bound=tail,
        aggregate_c=c,
        threshold=1.0 / c,
        theorem_comparisons=theorems,
        constants=C,
        notes=notes,
    )
