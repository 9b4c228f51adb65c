"""Exceptions shared across the package."""


class ConfigError(ValueError):
    """A scenario description could not be parsed or validated."""


class NumericalAbort(RuntimeError):
    """An evolution was stopped because a numerical guard tripped.

    ``diagnostic`` is a JSON-serialisable dict describing what happened.
    """

    def __init__(self, message: str, **diagnostic):
        super().__init__(message)
        self.diagnostic = {"error": type(self).__name__, "message": message, **diagnostic}


class StabilityError(NumericalAbort):
    """Time step too large for the advection/dispersion bound."""


class CausticError(NumericalAbort):
    """An action field is about to become multivalued."""


class NormalizationDrift(NumericalAbort):
    """Total probability (or norm) wandered beyond tolerance."""


class NegativeDensity(NumericalAbort):
    """A density developed a negative excursion beyond tolerance."""
