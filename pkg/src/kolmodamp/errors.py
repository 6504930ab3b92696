"""Exception hierarchy shared by every module of the package."""


class KolmodampError(Exception):
    """Base class for all package errors."""


class DivergenceError(KolmodampError, ValueError):
    """Input field is not divergence-free within tolerance."""


class UnresolvedAnnulus(KolmodampError, ValueError):
    """The grid resolves fewer than three spectral shells inside the force annulus."""


class LatticeOverflow(KolmodampError, ValueError):
    """The force lattice (2*ell + theta*ell0) does not fit in the box."""


class GammaExceedsOne(KolmodampError, ValueError):
    """gamma came out larger than one, so c0 was calibrated inconsistently."""


class CflViolation(KolmodampError, RuntimeError):
    """A Runge-Kutta stage velocity exceeded the advective CFL budget."""


class NonFinite(KolmodampError, FloatingPointError):
    """A spectral coefficient became NaN or infinite."""


class InsufficientHorizon(KolmodampError, ValueError):
    """The run is shorter than burn_in + 3 * window."""


class DegenerateRun(KolmodampError, ValueError):
    """U or epsilon is below the machine floor, so derived ratios are undefined."""


class InsufficientSweep(KolmodampError, ValueError):
    """Fewer than four sweep points, or Gr spans less than two decades."""


class ConfigError(KolmodampError, ValueError):
    """Configuration failed validation; the message names the offending field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DigestMismatch(KolmodampError):
    """A run-directory file no longer matches its manifest digest."""

    def __init__(self, filename: str, expected: str, actual: str):
        self.filename = filename
        super().__init__(f"digest mismatch for {filename}: manifest {expected[:16]}..., file {actual[:16]}...")
