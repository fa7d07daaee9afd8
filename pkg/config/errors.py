"""
Exception hierarchy shared by every package.

ValidationError subclasses signal bad input (CLI exit code 2); everything else
deriving from PMEError is a runtime failure (exit code 1).
"""


class PMEError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(PMEError, ValueError):
    """Input does not satisfy a documented precondition."""


class DimensionError(ValidationError):
    pass


class TopologyError(ValidationError):
    pass


class RegistrationError(ValidationError):
    """Baseline nodes fall outside the FFD lattice box."""

    def __init__(self, message, offenders=None):
        super().__init__(message)
        self.offenders = list(offenders or [])


class ProvenanceError(ValidationError):
    """Two artifacts were not produced from the same upstream data."""


class SizeCapError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class FitError(PMEError):
    """Least-squares fit residual above tolerance."""


class DegenerateSpectrumError(PMEError):
    pass


class ArchiveError(PMEError):
    pass


class SampleError(PMEError):
    """Evaluating one Monte Carlo sample failed."""

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class MissingArchiveError(ValidationError):
    """An upstream pipeline stage has not been run."""

    def __init__(self, message, stage):
        super().__init__(message)
        self.stage = stage
