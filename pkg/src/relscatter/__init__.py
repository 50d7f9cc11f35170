"""Scattering theory for the square-root Laplacian plus a decaying potential in three dimensions."""
from . import cli, farfield, grids, kernels, operators, solver, specfun, verify
from .errors import (BranchError, ConfigurationError, ContractError, DivergenceError, DomainError,
                     EnergyDomainError, NearEigenvalueError, NonIntegrableError, RelScatterError,
                     SingularityError)

__version__ = "0.1.0"
