"""
framework/errors.py

Exception hierarchy shared by every module, plus the CLI exit-code contract.

    0  success
    2  invalid config / invalid input
    3  no applicable bound for some mode
    4  a verification row failed beyond its numerical-error allowance
"""


class SlabError(Exception):
    """Root of every error raised by the framework."""


class ConfigError(SlabError, ValueError):
    """Problem/sweep/constants file could not be parsed or is inconsistent."""


class DomainError(SlabError, ValueError):
    """Argument outside the domain of an operation."""


class NonpositiveK(DomainError):
    pass


class ResonantInput(DomainError):
    pass


class GridTooCoarse(DomainError):
    pass


class UnsupportedDimension(DomainError):
    pass


class UnsupportedEvaluation(DomainError):
    pass


class InvalidBoundary(DomainError):
    pass


class NegativeValues(DomainError):
    pass


class InsufficientExtent(DomainError):
    pass


class SizeViolation(DomainError):
    pass


class NotApplicable(SlabError):
    """A lemma's hypotheses fail for this mode. Caught by best_mode_bound."""


class NoApplicableBound(SlabError):
    pass


class HypothesisViolated(SlabError):
    pass


class QuadratureFailure(SlabError, RuntimeError):
    pass


class SingularityError(SlabError, RuntimeError):
    pass


class ConstructionFailure(SlabError, RuntimeError):
    pass


class VerificationFailed(SlabError):
    pass


EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NO_BOUND = 3
EXIT_VERIFY_FAILED = 4


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, NoApplicableBound):
        return EXIT_NO_BOUND
    if isinstance(exc, VerificationFailed):
        return EXIT_VERIFY_FAILED
    return EXIT_INVALID
