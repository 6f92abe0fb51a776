"""Exception hierarchy shared across the package.

CLI exit codes: ConfigError -> 2, NumericsError -> 3, DataMismatchError -> 4.
"""


class MssimError(Exception):
    """Base class for all package errors."""


class ConfigError(MssimError):
    """Invalid or unresolvable configuration (bad keys, bad values, unstable chain)."""


class StructuralError(ConfigError):
    """Physically inconsistent chain structure, e.g. an unstable transverse mode."""


class NumericsError(MssimError):
    """Numerical failure: singular detunings, degenerate instances, failed scans."""


class SingularityError(NumericsError):
    """Detuning coincides with a mode frequency (or is zero)."""


class DegenerateInstanceError(NumericsError):
    """All couplings vanish or C_max == C_min; no MaxCut instance can be formed."""


class CalibrationError(NumericsError):
    """Calibration scan found no interior maximum."""


class TruncationError(NumericsError):
    """Fock-space cutoff too small; retry with a larger cutoff."""


class DataMismatchError(MssimError):
    """Simulation and experiment grids or shapes do not line up."""
