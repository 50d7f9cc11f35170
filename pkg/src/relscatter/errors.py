"""Exception types shared across the package."""


class RelScatterError(Exception):
    """Base class for all package errors."""


class DomainError(RelScatterError, ValueError):
    """Argument outside the domain where a quantity is defined."""


class BranchError(DomainError):
    """Argument lies on a branch cut."""


class SingularityError(DomainError):
    """Evaluation at a kernel singularity (for instance r = 0)."""


class EnergyDomainError(DomainError):
    """Spectral parameter on the positive half-axis where only boundary values exist."""


class ConfigurationError(RelScatterError, ValueError):
    """Invalid configuration or grid parameters."""


class ContractError(RelScatterError, ValueError):
    """Inputs that do not belong together (mismatched grids, energies)."""


class NonIntegrableError(DomainError):
    """Singularity order too strong to be integrable in three dimensions."""


class DivergenceError(RelScatterError, RuntimeError):
    """Fixed-point iteration failed to converge.

    ``history`` holds the relative update of every sweep.
    """

    def __init__(self, message, history):
        super().__init__(message)
        self.history = list(history)


class NearEigenvalueError(RelScatterError, RuntimeError):
    """Dense system numerically singular; possible embedded eigenvalue or resonance."""

    def __init__(self, message, condition):
        super().__init__(message)
        self.condition = condition
