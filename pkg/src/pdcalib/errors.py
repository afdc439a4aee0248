"""Exception types shared across the package."""


class PdcalibError(Exception):
    pass


class ConfigurationError(PdcalibError, ValueError):
    """Invalid parameter or run configuration (refused up front)."""


class InputError(PdcalibError, ValueError):
    """Data handed to an estimator violates its preconditions."""


class EstimationError(PdcalibError, RuntimeError):
    """An estimator cannot produce a meaningful result from valid inputs."""
