"""Exception hierarchy. Every error is a ``ValueError`` so callers can catch broadly."""


class NoGoError(ValueError):
    pass


class CutoffTooSmall(NoGoError):
    pass


class DimensionOverflow(NoGoError):
    pass


class InvalidModeIndex(NoGoError):
    pass


class CutoffMismatch(NoGoError):
    pass


class InvalidTransmittance(NoGoError):
    pass


class InvalidNoiseVariance(NoGoError):
    pass


class CutoffHeadroomInsufficient(NoGoError):
    pass


class InvalidParameter(NoGoError):
    pass


class ArgumentOutOfReliableRange(NoGoError):
    pass


class GridTooSmall(NoGoError):
    pass


class NegativePFunction(NoGoError):
    pass


class InvalidOrdering(NoGoError):
    pass


class DegenerateDenominator(NoGoError):
    pass


class InvalidPovmElement(NoGoError):
    pass


class ConfigParseError(NoGoError):
    pass
