"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes):
``ParameterError`` for bad inputs/configuration and ``NumericalError`` for
failures detected while computing.
"""


class AdiaphaseError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(AdiaphaseError, ValueError):
    """Invalid model parameters, grids or run configuration."""


class StabilityError(ParameterError):
    """Integrator step too large for the Hamiltonian's frequency scale."""


class RuntimeGuardError(ParameterError):
    """Requested integration would exceed the runtime budget."""


class NumericalError(AdiaphaseError):
    """A numerical precondition or invariant failed during computation."""


class HermiticityError(NumericalError, ValueError):
    pass


class UnsupportedSizeError(NumericalError, ValueError):
    pass


class InsufficientSamplesError(NumericalError, ValueError):
    pass


class DimensionError(NumericalError, ValueError):
    pass


class AlignmentError(NumericalError, ValueError):
    """Time grids of two records do not match."""


class DegeneracyError(NumericalError):
    pass


class TrackingAmbiguityError(NumericalError):
    """Eigenvector overlaps between neighbouring frames are inconclusive."""


class UnreliableDerivativeError(NumericalError):
    """Frames too far apart for a finite-difference or link derivative."""


class AccuracyError(NumericalError):
    pass


class NotAdiabaticError(NumericalError):
    """Population of the tracked level dropped below the adiabatic floor."""


class UndersampledError(NumericalError):
    pass


class GaugeError(NumericalError):
    pass


class UnsupportedModelError(AdiaphaseError, NotImplementedError):
    """Operation only defined for the rotating-field model."""
