"""Exception types shared across the package."""


class FmregError(Exception):
    """Base class for all package-specific errors."""


class ZeroNorm(FmregError):
    pass


class DimensionMismatch(FmregError):
    pass


class InvalidTemperature(FmregError):
    pass


class MalformedTemplate(FmregError):
    pass


class TooFewClasses(FmregError):
    pass


class InvalidConfig(FmregError):
    pass


class BadMagic(FmregError):
    pass


class UnsupportedVersion(FmregError):
    pass


class CorruptStore(FmregError):
    pass


class BetaTooLarge(FmregError):
    pass


class LabelOutOfRange(FmregError):
    pass


class InconsistentSelection(FmregError):
    pass


class NegativeGamma(FmregError):
    pass


class EmptyClass(FmregError):
    pass


class NonFiniteLoss(FmregError):
    pass


class EmptyClassSet(FmregError):
    pass


class SplitMismatch(FmregError):
    pass


class NegativeInput(FmregError):
    pass
