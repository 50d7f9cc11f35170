"""Quadrature grids on a truncated ball and singular-cell weights.

Both grid kinds use Gauss-Legendre nodes in r and in mu = cos(polar angle)
and a periodic trapezoid in the azimuth phi.  ``BallGrid`` carries every
(r, mu, phi) node; ``RadialGrid`` keeps only the (r, mu) rings and is used
for axisymmetric fields.  A ball grid and the radial grid built from the same
parameters share their (r, mu) nodes, so values at phi = 0 can be compared
directly.
"""
from dataclasses import dataclass
import math
import warnings

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from .errors import ConfigurationError, DomainError, NonIntegrableError, SingularityError

MIN_COUNT = 4


def _gauss_radial(radius, n):
    x, w = leggauss(n)
    return radius * (x + 1.0) / 2.0, w * radius / 2.0


@dataclass(frozen=True, eq=False)
class _RingNodes:
    radius: float
    r: np.ndarray
    r_weights: np.ndarray
    mu: np.ndarray
    mu_weights: np.ndarray
    n_phi: int

    @property
    def n_r(self):
        return self.r.size

    @property
    def n_mu(self):
        return self.mu.size

    @property
    def n_rings(self):
        return self.n_r * self.n_mu

    @property
    def ring_r(self):
        return np.repeat(self.r, self.n_mu)

    @property
    def ring_mu(self):
        return np.tile(self.mu, self.n_r)

    @property
    def ring_rho(self):
        """Distance of each ring from the polar axis."""
        return self.ring_r * np.sqrt(1.0 - self.ring_mu ** 2)

    @property
    def ring_z(self):
        return self.ring_r * self.ring_mu

    @property
    def ring_volume_weights(self):
        """r^2 w_r w_mu for every ring, without the azimuthal factor."""
        return (self.r[:, None] ** 2 * self.r_weights[:, None] * self.mu_weights[None, :]).ravel()

    @property
    def phi(self):
        return 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi

    @property
    def key(self):
        return (self.radius, self.n_r, self.n_mu, self.n_phi)


@dataclass(frozen=True, eq=False)
class BallGrid(_RingNodes):
    """Full 3-D product grid; nodes are ordered (r, mu, phi) in C order."""

    @property
    def n_ang(self):
        return self.n_mu

    @property
    def size(self):
        return self.n_rings * self.n_phi

    @property
    def nodes(self):
        rho = self.ring_rho[:, None]
        c, s = np.cos(self.phi)[None, :], np.sin(self.phi)[None, :]
        x = (rho * c).ravel()
        y = (rho * s).ravel()
        z = np.repeat(self.ring_z, self.n_phi)
        return np.stack([x, y, z], axis=1)

    @property
    def weights(self):
        return np.repeat(self.ring_volume_weights * (2.0 * np.pi / self.n_phi), self.n_phi)

    def radial_grid(self):
        return RadialGrid(self.radius, self.r, self.r_weights, self.mu, self.mu_weights, self.n_phi)

    def ring_view(self, values):
        """Reshape nodal values to (n_rings, n_phi)."""
        return np.asarray(values).reshape(self.n_rings, self.n_phi)


@dataclass(frozen=True, eq=False)
class RadialGrid(_RingNodes):
    """(r, mu) rings of an axisymmetric discretisation; mu is measured from +z."""

    @property
    def size(self):
        return self.n_rings

    @property
    def nodes2d(self):
        return np.stack([self.ring_r, self.ring_mu], axis=1)

    @property
    def weights(self):
        """Weights that integrate axisymmetric functions over the ball."""
        return 2.0 * np.pi * self.ring_volume_weights

    @property
    def points(self):
        """Cartesian positions of the rings in the phi = 0 half plane."""
        return np.stack([self.ring_rho, np.zeros(self.n_rings), self.ring_z], axis=1)

    def ball_grid(self):
        return BallGrid(self.radius, self.r, self.r_weights, self.mu, self.mu_weights, self.n_phi)


def _check_counts(radius, n_r, n_ang, n_phi):
    if not radius > 0:
        raise ConfigurationError("R_dom must be positive")
    for name, n in (("N_r", n_r), ("N_ang", n_ang), ("N_phi", n_phi)):
        if int(n) != n or n < MIN_COUNT:
            raise ConfigurationError(f"{name} must be an integer >= {MIN_COUNT}, got {n}")
    if n_phi % 2:
        raise ConfigurationError("N_phi must be even")


def build_ball_grid(R_dom, N_r, N_ang, N_phi=None):
    """Gauss-Legendre radial nodes times a Gauss-product sphere rule.

    The sphere rule is Gauss-Legendre in mu with N_ang nodes and a uniform
    trapezoid in phi with N_phi nodes (default 2 N_ang), exact for spherical
    harmonics of degree below min(2 N_ang, N_phi).
    """
    N_phi = 2 * N_ang if N_phi is None else N_phi
    _check_counts(R_dom, N_r, N_ang, N_phi)
    r, wr = _gauss_radial(float(R_dom), int(N_r))
    mu, wmu = leggauss(int(N_ang))
    return BallGrid(float(R_dom), r, wr, mu, wmu, int(N_phi))


def build_radial_grid(R_dom, N_r, N_mu, N_phi=None):
    return build_ball_grid(R_dom, N_r, N_mu, N_phi).radial_grid()


def ring_distances(rho, z, rho_p, z_p, phi):
    """|x - y| for x = (rho, 0, z) and y = (rho_p cos phi, rho_p sin phi, z_p), broadcast."""
    d2 = (rho - rho_p) ** 2 + (z - z_p) ** 2 + 2.0 * rho * rho_p * (1.0 - np.cos(phi))
    return np.sqrt(d2)


def azimuthal_reduce(kernel, r, mu, r_p, mu_p, N_phi=32):
    """Trapezoidal azimuthal integral int_0^{2pi} kernel(|x - y(phi)|) dphi.

    x sits at (r, mu) with phi = 0 and y runs over the ring (r_p, mu_p).
    Arguments broadcast against each other.
    """
    r, mu, r_p, mu_p = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (r, mu, r_p, mu_p)))
    if np.any(r <= 0) or np.any(r_p <= 0):
        raise DomainError("radii must be positive")
    if np.any(np.abs(mu) > 1) or np.any(np.abs(mu_p) > 1):
        raise DomainError("mu must lie in [-1, 1]")
    rho, z = r * np.sqrt(1 - mu * mu), r * mu
    rho_p, z_p = r_p * np.sqrt(1 - mu_p * mu_p), r_p * mu_p
    phi = 2.0 * np.pi * np.arange(N_phi) / N_phi
    d = ring_distances(rho[..., None], z[..., None], rho_p[..., None], z_p[..., None], phi)
    if np.any(d == 0):
        raise SingularityError("coincident nodes; use diagonal_correction for the self cell")
    total = np.sum(kernel(d), axis=-1) * (2.0 * np.pi / N_phi)
    return total.item() if total.ndim == 0 else total


# ---------------------------------------------------------------- singular cells

@dataclass(frozen=True)
class SphereCell:
    """Ball of radius h centred on the node."""
    h: float


@dataclass(frozen=True)
class BoxCell:
    """Axis-aligned box with the given half widths, centred on the node."""
    half_widths: tuple


@dataclass(frozen=True)
class OffsetBallCell:
    """Ball of radius R whose centre lies at distance rho from the node."""
    R: float
    rho: float = 0.0


def _shell_area_fraction(t, R, rho):
    """Area of {|x + t w| <= R} on the sphere of radius t about x, |x| = rho."""
    if rho == 0:
        return np.where(t <= R, 4 * np.pi * t * t, 0.0)
    c = (R * R - rho * rho - t * t) / (2 * t * rho)
    return 2 * np.pi * t * t * (1 + np.clip(c, -1.0, 1.0))


def ball_integral(kernel, R, rho, epsrel=1e-11):
    """int_{|y| <= R} kernel(|x - y|) dy for |x| = rho < R, by 1-D quadrature in t = |x - y|.

    The sphere of radius t about x lies inside the ball for t < R - rho and is
    cut by it for R - rho < t < R + rho.
    """
    if not 0 <= rho < R:
        raise DomainError("need 0 <= rho < R")

    inner = _quad_complex(lambda t: 4 * np.pi * t * t * kernel(t), 0.0, R - rho, epsrel)
    if rho > 0:
        inner += _quad_complex(lambda t: _shell_area_fraction(t, R, rho) * kernel(t), R - rho, R + rho, epsrel)
    return inner


def ball_first_moment(kernel, R, rho, epsrel=1e-11):
    """x-hat . int_{|y| <= R} kernel(|x - y|) (y - x) dy for |x| = rho < R.

    Only spheres cut by the boundary contribute; on the sphere of radius t the
    cap integral of t cos(angle) is pi t^3 (c^2 - 1) with c the cap edge cosine.
    """
    if not 0 <= rho < R:
        raise DomainError("need 0 <= rho < R")
    if rho == 0:
        return 0.0 + 0.0j

    def weight(t):
        c = (R * R - rho * rho - t * t) / (2 * t * rho)
        return np.pi * t ** 3 * (c * c - 1.0)

    return _quad_complex(lambda t: weight(t) * kernel(t), R - rho, R + rho, epsrel)


def _quad_complex(fn, a, b, epsrel):
    opts = dict(epsabs=0.0, epsrel=epsrel, limit=400)
    # a part that is tiny next to the other trips QUADPACK's roundoff flag at epsabs = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re = integrate.quad(lambda t: complex(fn(t)).real, a, b, **opts)[0]
        im = integrate.quad(lambda t: complex(fn(t)).imag, a, b, **opts)[0]
    return complex(re, im)


def _box_polar(half_widths, order):
    a = np.asarray(half_widths, dtype=float)

    def reach(theta, phi):
        w = np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
        with np.errstate(divide="ignore"):
            return float(np.min(np.where(w > 0, a / np.abs(w), np.inf)))

    p = 3 - order
    # one octant, times eight by symmetry
    val, _ = integrate.dblquad(lambda th, ph: reach(th, ph) ** p / p * math.sin(th),
                               0.0, np.pi / 2, 0.0, np.pi / 2, epsabs=0, epsrel=1e-10)
    return 8.0 * val


def diagonal_correction(cell, singularity_order):
    """int_cell |y - x_node|^{-order} dy for an integrable order 1 or 2."""
    order = singularity_order
    if order >= 3:
        raise NonIntegrableError("|y|^{-order} is not integrable near 0 in three dimensions for order >= 3")
    if order not in (1, 2):
        raise DomainError("singularity order must be 1 or 2")
    p = 3 - order
    if isinstance(cell, SphereCell):
        if not cell.h > 0:
            raise DomainError("cell radius must be positive")
        return 4 * np.pi * cell.h ** p / p
    if isinstance(cell, BoxCell):
        if len(cell.half_widths) != 3 or min(cell.half_widths) <= 0:
            raise DomainError("box needs three positive half widths")
        return _box_polar(cell.half_widths, order)
    if isinstance(cell, OffsetBallCell):
        return ball_integral(lambda t: t ** -order, cell.R, cell.rho).real
    raise DomainError(f"unknown cell type {type(cell).__name__}")
