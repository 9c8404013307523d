"""Exception types shared across the package."""


class OmsenseError(Exception):
    """Base class for all package errors."""


class ConfigError(OmsenseError):
    """A parameter set is unphysical or unusable (e.g. zero optical readout)."""


class ScenarioError(OmsenseError):
    """A scenario file failed schema or physics validation."""


class ConvergenceError(OmsenseError):
    """A numerical routine could not reach its requested tolerance."""
