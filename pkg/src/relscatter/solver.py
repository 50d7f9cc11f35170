"""Distorted plane waves from the modified Lippmann-Schwinger equation.

The eigenfunction with sign s solves

    phi(x) = e^{i k.x} - int g^{-s}_{|k|}(x - y) V(y) phi(y) dy,

so phi^+ uses the kernel g^- and phi^- uses g^+.  Every public function takes
the eigenfunction sign and flips it internally.
"""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy import linalg

from . import grids as _grids
from . import kernels as _kernels
from . import operators as _ops
from .errors import ConfigurationError, ContractError, DivergenceError, DomainError, NearEigenvalueError

PROFILES = ("power", "zero")
RCOND_FLOOR = 1e-13


@dataclass(frozen=True)
class Potential:
    """Radial potential coupling * C * p(r) with |p(r)| <= <r>^-sigma.

    The certified bound is |V(r)| <= C <r>^-sigma, which holds whenever
    |coupling| <= 1.  ``profile`` may be a name from PROFILES or a callable
    p(r); callables are checked by ``certify``.
    """
    C: float
    sigma: float
    profile: object = "power"
    coupling: float = 1.0

    def __post_init__(self):
        if not self.C >= 0:
            raise ConfigurationError("C must be nonnegative")
        if not self.sigma > 1:
            raise ConfigurationError("sigma must exceed 1")
        if isinstance(self.profile, str) and self.profile not in PROFILES:
            raise ConfigurationError(f"unknown potential profile {self.profile!r}")

    @classmethod
    def zero(cls):
        return cls(C=0.0, sigma=4.0, profile="zero")

    def shape(self, r):
        r = np.asarray(r, dtype=float)
        if callable(self.profile):
            return np.asarray(self.profile(r), dtype=float)
        if self.profile == "zero":
            return np.zeros_like(r)
        return (1.0 + r * r) ** (-self.sigma / 2.0)

    def __call__(self, r):
        return self.coupling * self.C * self.shape(r)

    @property
    def is_zero(self):
        return self.profile == "zero" or self.C == 0 or self.coupling == 0

    def certify(self, R, n=4000):
        """Check |V(r)| <= C <r>^-sigma on [0, R]; returns the worst ratio."""
        r = np.linspace(0.0, R, n)
        bound = self.C * (1 + r * r) ** (-self.sigma / 2)
        v = np.abs(self(r))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(bound > 0, v / bound, np.where(v > 0, np.inf, 0.0))
        worst = float(np.max(ratio))
        if worst > 1.0 + 1e-12:
            raise ConfigurationError(f"potential violates its certified bound (ratio {worst:.3g})")
        return worst

    def require_admissible(self):
        if not self.sigma > 2:
            raise ConfigurationError(
                f"sigma = {self.sigma} rejected: the Lippmann-Schwinger solvers require sigma > 2")


@dataclass(frozen=True, eq=False)
class ScatteredSolution:
    """Sampled phi^{+-}(x, k) with its scattered part psi = phi - e^{i k.x}."""
    k: np.ndarray
    sign: int
    grid: object
    phi: np.ndarray
    psi: np.ndarray
    residual: float
    metadata: dict = field(default_factory=dict)

    @property
    def lam(self):
        return float(np.linalg.norm(self.k))

    @property
    def omega_k(self):
        return self.k / self.lam

    @property
    def points(self):
        return grid_points(self.grid)


def grid_points(grid):
    if isinstance(grid, _grids.BallGrid):
        return grid.nodes
    if isinstance(grid, _grids.RadialGrid):
        return grid.points
    raise ContractError("expected a BallGrid or RadialGrid")


def grid_radii(grid):
    return np.linalg.norm(grid_points(grid), axis=1)


def plane_wave(k, points):
    return np.exp(1j * (points @ np.asarray(k, dtype=float)))


def _wave_vector(k):
    k = np.asarray(k, dtype=float)
    if k.shape != (3,):
        raise DomainError("k must be a 3-vector")
    if not np.linalg.norm(k) > 0:
        raise DomainError("|k| must be positive")
    return k


def _check_axis(k, grid):
    if isinstance(grid, _grids.RadialGrid) and (k[0] != 0 or k[1] != 0):
        raise ContractError("a RadialGrid solution needs k along the polar axis")


def ls_operator(grid, lam, sign):
    """Discrete G^{-sign}, the kernel that enters the equation for phi^{sign}."""
    return _ops.boundary_operator(grid, lam, -_kernels.parse_sign(sign))


def born_iterate(k, sign, V, grid, tol=1e-8, max_iter=200, relaxation=1.0, initial=None, strict=True):
    """Fixed-point sweeps phi <- (1 - w) phi + w (phi_0 - G(V phi)) until the relative update < tol.

    With strict=False an unconverged iterate is returned (metadata['converged']
    is False) instead of raising DivergenceError.
    """
    k = _wave_vector(k)
    s = _kernels.parse_sign(sign)
    V.require_admissible()
    if not 0 < relaxation <= 1:
        raise ConfigurationError("relaxation must lie in (0, 1]")
    if not tol > 0 or max_iter < 1:
        raise ConfigurationError("need tol > 0 and max_iter >= 1")
    _check_axis(k, grid)
    pts = grid_points(grid)
    phi0 = plane_wave(k, pts)
    v = V(np.linalg.norm(pts, axis=1))
    op = ls_operator(grid, np.linalg.norm(k), s)
    phi = phi0.copy() if initial is None else np.asarray(initial, dtype=complex).copy()
    history = []
    for _ in range(max_iter):
        new = phi0 - op.apply_values(v * phi)
        if relaxation != 1.0:
            new = (1.0 - relaxation) * phi + relaxation * new
        scale = np.max(np.abs(new))
        update = float(np.max(np.abs(new - phi)) / scale) if scale > 0 else 0.0
        history.append(update)
        phi = new
        if update < tol:
            break
        if not np.isfinite(update):
            break
    converged = history[-1] < tol
    if strict and not converged:
        if np.isfinite(history[-1]):
            raise DivergenceError(f"Born iteration did not reach tol {tol} in {max_iter} sweeps", history)
        raise DivergenceError("Born iteration diverged", history)
    sol = ScatteredSolution(k, s, grid, phi, phi - phi0, 0.0,
                            dict(mode="born", iterations=len(history), tol=tol, history=history,
                                 relaxation=relaxation, converged=bool(converged)))
    return _with_residual(sol, V)


def nystrom_solve_radial(lam, sign, V, grid, tol=1e-8, axis=1):
    """Dense solve of the azimuthally reduced equation for k = axis * lam * z-hat."""
    if not lam > 0:
        raise DomainError("lambda must be positive")
    if not isinstance(grid, _grids.RadialGrid):
        raise ContractError("nystrom_solve_radial needs a RadialGrid")
    if axis not in (1, -1):
        raise DomainError("axis must be +1 or -1")
    s = _kernels.parse_sign(sign)
    V.require_admissible()
    k = np.array([0.0, 0.0, axis * float(lam)])
    pts = grid.points
    phi0 = plane_wave(k, pts)
    v = V(grid.ring_r)
    op = ls_operator(grid, lam, s)
    A = op.matrix * v[None, :]
    A[np.diag_indices_from(A)] += 1.0
    anorm = np.max(np.sum(np.abs(A), axis=0))
    with warnings.catch_warnings():
        # exact singularity is reported below through the condition estimate
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(A, check_finite=True)
    rcond, info = linalg.lapack.zgecon(lu, anorm, norm="1")
    if info != 0 or rcond < RCOND_FLOOR:
        raise NearEigenvalueError(
            f"reduced system is numerically singular (rcond {rcond:.2e}); possible embedded eigenvalue or resonance",
            1.0 / rcond if rcond > 0 else math.inf)
    phi = linalg.lu_solve((lu, piv), phi0)
    sol = ScatteredSolution(k, s, grid, phi, phi - phi0, 0.0,
                            dict(mode="nystrom-radial", rcond=float(rcond), tol=tol))
    sol = _with_residual(sol, V)
    if not sol.residual <= max(tol, 1e-12):
        raise NearEigenvalueError(f"dense solve left residual {sol.residual:.2e}", 1.0 / rcond)
    return sol


def ls_residual(sol, V, grid=None):
    """Sup over nodes with |x| <= R/2 of |phi - phi_0 + G(V phi)|."""
    grid = sol.grid if grid is None else grid
    if grid.key != sol.grid.key or type(grid) is not type(sol.grid):
        raise ContractError("solution and grid do not match")
    pts = grid_points(grid)
    r = np.linalg.norm(pts, axis=1)
    phi0 = plane_wave(sol.k, pts)
    op = ls_operator(grid, sol.lam, sol.sign)
    res = sol.phi - phi0 + op.apply_values(V(r) * sol.phi)
    inner = r <= grid.radius / 2
    return float(np.max(np.abs(res[inner])))


def _with_residual(sol, V):
    res = ls_residual(sol, V)
    return ScatteredSolution(sol.k, sol.sign, sol.grid, sol.phi, sol.psi, res, sol.metadata)


def ring_values(sol):
    """Values on the (r, mu) rings: phi = 0 column of a ball solution, or the radial solution."""
    if isinstance(sol.grid, _grids.BallGrid):
        return sol.grid.ring_view(sol.phi)[:, 0]
    return sol.phi
