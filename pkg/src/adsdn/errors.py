"""Exception hierarchy shared by every module.

Each exception carries the CLI exit code it maps to, so the command layer
never needs a lookup table of its own.
"""


class AdsDnError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class ConfigError(AdsDnError):
    """Malformed or schema-violating configuration."""

    exit_code = 2


class ExceptionalParameter(AdsDnError):
    """A parameter sits on an excluded set (Gamma pole, resonant mass, ...)."""

    exit_code = 4


class ExceptionalMass(ExceptionalParameter):
    """Mass parameter nu lies on the excluded set (integer or half-integer)."""


class PoleAtNonPositiveInteger(ExceptionalParameter):
    pass


class OrderOutOfRange(ExceptionalParameter):
    pass


class IntegerOrder(ExceptionalParameter):
    pass


class ResonantMass(ExceptionalParameter):
    pass


class VanishingTransfer(ExceptionalParameter):
    pass


class BranchAmbiguity(ExceptionalParameter):
    pass


class PoleTooClose(ExceptionalParameter):
    pass


class NumericalContractError(AdsDnError):
    """A numerical self-check failed (tail, fit, extrapolation, ...)."""

    exit_code = 3


class TailNotResolved(NumericalContractError):
    pass


class TailNotIntegrable(NumericalContractError):
    pass


class GridNotLogUniform(NumericalContractError):
    pass


class UnresolvedXdX(NumericalContractError):
    pass


class FitIllConditioned(NumericalContractError):
    pass


class MatchIllConditioned(NumericalContractError):
    pass


class TailNotDecaying(NumericalContractError):
    pass


class CFLViolated(NumericalContractError):
    pass


class ReflectionContamination(NumericalContractError):
    pass


class ExtrapolationUnstable(NumericalContractError):
    pass


class AliasingDetected(NumericalContractError):
    pass


class ResidualNotDecreasing(NumericalContractError):
    pass
