"""Exception hierarchy shared by the library and the command line front end."""


class HaarEnergyError(Exception):
    """Base class for all errors raised by :mod:`haarenergy`."""

    code = "error"


class SpectrumError(HaarEnergyError, ValueError):
    """An input spectrum is malformed or violates its invariants."""

    code = "invalid-spectrum"


class ConditionError(HaarEnergyError, ValueError):
    """A mathematical precondition of a formula does not hold."""

    code = "condition"


class UnsupportedRegimeError(ConditionError):
    """The requested (p, d) lies outside the supported regime (d < p)."""

    code = "unsupported-regime"


class ResourceCapError(HaarEnergyError):
    """The request exceeds a hard computational cap."""

    code = "resource-cap"
