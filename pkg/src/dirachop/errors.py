"""Exception types raised across the package."""


class DiracHopError(Exception):
    """Base class for all package errors."""


class ConfigError(DiracHopError, ValueError):
    """Invalid experiment configuration."""


class NumericalError(DiracHopError):
    """A numerical procedure failed (non-convergence, CFL violation, ...)."""


class DegenerateMomentumError(NumericalError, ValueError):
    """Band eigenstructure requested at (or too close to) the Dirac point xi = 0."""


class ZeroGradientError(NumericalError, ValueError):
    """Landau-Zener rate requested where the potential gradient vanishes."""


class ConvergenceError(NumericalError):
    """An iterative or adaptive computation did not converge."""


class CFLError(NumericalError, ValueError):
    """Explicit transport step violates the CFL condition."""


class MissingDataError(DiracHopError, ValueError):
    """A report lacks a quantity needed by a metric."""
