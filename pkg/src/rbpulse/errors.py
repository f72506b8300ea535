"""Exception hierarchy shared across the package."""


class RbPulseError(Exception):
    """Base class for all rbpulse errors."""


class ConfigError(RbPulseError):
    """Invalid configuration file, parameter value, or input file format."""


class GridMemoryError(RbPulseError):
    """Requested simulation grid exceeds the configured memory budget."""


class NumericalFailureError(RbPulseError):
    """Integration tolerance breach (trace loss or negative eigenvalue)."""

    def __init__(self, message, z_index=None, t_index=None):
        super().__init__(message)
        self.z_index = z_index
        self.t_index = t_index


class FitError(RbPulseError):
    """A least-squares or scalar fit failed to converge or was degenerate.

    ``last_result`` carries the final iterate / diagnostic payload so callers
    can inspect what the optimizer saw.
    """

    def __init__(self, message, last_result=None):
        super().__init__(message)
        self.last_result = last_result
