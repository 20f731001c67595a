"""Exception types raised across the causation toolkit."""


class ConfigError(ValueError):
    """Invalid or unknown configuration entry."""


class NumericalError(ArithmeticError):
    """Base class for failures of a numerical procedure."""


class StabilityError(NumericalError):
    """Interaction matrix has an eigenvalue with non-positive real part."""


class DegeneracyError(NumericalError):
    """A covariance block or conditional variance is singular."""


class SimulationDivergenceError(NumericalError):
    """Non-finite state produced during integration."""

    def __init__(self, trajectory, step):
        self.trajectory = trajectory
        self.step = step
        super().__init__(f"trajectory {trajectory} diverged at step {step}")


class EstimatorError(NumericalError):
    """A nonparametric estimator cannot be evaluated on the given samples."""


class ProtocolError(NumericalError):
    """The epsilon ladder is outside the quadratic regime."""
