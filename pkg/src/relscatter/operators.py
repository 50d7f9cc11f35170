"""Discretised convolution operators with the boundary kernel and its parts.

Every operator u -> int k(|x - y|) u(y) dy is applied by a Nystrom rule with
singularity subtraction:

    (Ku)(x_i) ~ sum_{j != i} k(|x_i - y_j|) w_j (u_j - u_i) + u_i int_ball k(|x_i - y|) dy.

The last integral is a 1-D quadrature (``grids.ball_integral``), so the
self cell never needs the kernel at zero distance.  Grids are symmetric under
rotation about the polar axis, which makes the 3-D operator block circulant in
the azimuthal index; it is stored as its discrete Fourier modes and applied
mode by mode.  On a ``RadialGrid`` only mode zero survives and the operator is
a dense (rings x rings) matrix.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import functools
import math
import os

import numpy as np
from scipy import integrate
from threadpoolctl import threadpool_limits

from . import grids as _grids
from . import kernels as _kernels
from .errors import ConfigurationError, ContractError, DomainError

THREADS_ENV = "RELSCATTER_THREADS"
_ROW_BLOCK = 32
_MAX_MODE_BYTES = 3_000_000_000


def thread_count():
    try:
        n = int(os.environ.get(THREADS_ENV, "1"))
    except ValueError:
        raise ConfigurationError(f"{THREADS_ENV} must be an integer")
    return max(1, n)


def _run_blocks(fn, n_items, block=_ROW_BLOCK):
    """Call fn(slice) for fixed-size blocks; the partition never depends on the thread count."""
    slices = [slice(s, min(s + block, n_items)) for s in range(0, n_items, block)]
    workers = thread_count()
    with threadpool_limits(limits=1):
        if workers == 1:
            for sl in slices:
                fn(sl)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(fn, slices))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex nodal values on a BallGrid or RadialGrid."""
    grid: object
    values: np.ndarray

    def __post_init__(self):
        if not isinstance(self.grid, (_grids.BallGrid, _grids.RadialGrid)):
            raise ContractError("GridFunction needs a BallGrid or RadialGrid")
        v = np.asarray(self.values, dtype=complex).ravel()
        if v.size != self.grid.size:
            raise ContractError(f"{v.size} values for a grid of {self.grid.size} nodes")
        if not np.all(np.isfinite(v)):
            raise ContractError("grid function has non-finite entries")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_radial(cls, grid, fn):
        """Sample a function of |y| on the grid."""
        r = grid.ring_r if isinstance(grid, _grids.RadialGrid) else np.repeat(grid.ring_r, grid.n_phi)
        return cls(grid, fn(r))

    def with_values(self, values):
        return GridFunction(self.grid, values)


def same_grid(a, b):
    if a.grid is b.grid:
        return True
    return type(a.grid) is type(b.grid) and a.grid.key == b.grid.key


# ---------------------------------------------------------------- kernels

@dataclass(frozen=True)
class RadialKernel:
    """A radial convolution kernel with the ingredients the Nystrom rule needs."""
    key: tuple

    def __call__(self, d):
        kind = self.key[0]
        if kind == "riesz":
            return 1.0 / (_kernels.TWO_PI2 * d * d)
        if kind == "wave":
            _, lam, sign = self.key
            return lam / (2 * np.pi) * np.exp(1j * sign * lam * d) / d
        if kind == "correction":
            return _kernels.m_tabulated(self.key[1], d)
        if kind == "boundary":
            _, lam, sign = self.key
            return (RadialKernel(("riesz",))(d) + RadialKernel(("wave", lam, sign))(d)
                    + RadialKernel(("correction", lam))(d))
        raise DomainError(f"unknown kernel {kind}")

    @property
    def is_real(self):
        return self.key[0] in ("riesz", "correction")

    def ball(self, R, rho):
        """int over the ball of radius R of k(|x - y|) dy for each |x| in rho."""
        return np.array([_ball_cached(self.key, float(R), float(p)) for p in np.atleast_1d(rho)])

    def moment(self, R, rho):
        """Radial component of int over the ball of k(|x - y|) (y - x) dy."""
        return np.array([_moment_cached(self.key, float(R), float(p)) for p in np.atleast_1d(rho)])


def riesz_kernel():
    return RadialKernel(("riesz",))


def wave_kernel(lam, sign):
    return RadialKernel(("wave", _positive(lam), _kernels.parse_sign(sign)))


def correction_kernel(lam):
    return RadialKernel(("correction", _positive(lam)))


def boundary_kernel(lam, sign):
    return RadialKernel(("boundary", _positive(lam), _kernels.parse_sign(sign)))


def _positive(lam):
    if not lam > 0:
        raise DomainError("lambda must be positive")
    return float(lam)


def _riesz_ball(R, rho):
    if rho == 0:
        return 2.0 * R / np.pi
    return (2 * np.pi * R + np.pi * (R * R - rho * rho) / rho * math.log((R + rho) / (R - rho))) / _kernels.TWO_PI2


@functools.lru_cache(maxsize=100_000)
def _ball_cached(key, R, rho):
    kind = key[0]
    if kind == "riesz":
        return complex(_riesz_ball(R, rho))
    if kind == "boundary":
        _, lam, sign = key
        return sum(_ball_cached(k, R, rho) for k in (("riesz",), ("wave", lam, sign), ("correction", lam)))
    kern = RadialKernel(key)
    return _grids.ball_integral(lambda t: kern(np.asarray(t)).item(), R, rho)


@functools.lru_cache(maxsize=100_000)
def _moment_cached(key, R, rho):
    if key[0] == "boundary":
        _, lam, sign = key
        return sum(_moment_cached(k, R, rho) for k in (("riesz",), ("wave", lam, sign), ("correction", lam)))
    kern = RadialKernel(key)
    return _grids.ball_first_moment(lambda t: kern(np.asarray(t)).item(), R, rho)


# ---------------------------------------------------------------- discrete operators

def _lagrange_diff(x):
    """Differentiation matrix of the interpolating polynomial through nodes x."""
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    b = 1.0 / np.prod(diff, axis=1)
    D = (b[None, :] / b[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def _ring_block(grid, kernel, rows):
    """Weighted kernel values k(|x_i - y_jl|) w_j for target rings i in rows (azimuth 0).

    Returns the block (rows, rings, n_phi) with the self node zeroed, and the
    discrete first moments sum k w (y - x) projected on r-hat and theta-hat
    of each target.
    """
    rho, z, r = grid.ring_rho, grid.ring_z, grid.ring_r
    w = grid.ring_volume_weights * (2.0 * np.pi / grid.n_phi)
    phi = grid.phi
    rows = np.asarray(rows)
    d = _grids.ring_distances(rho[rows, None, None], z[rows, None, None],
                              rho[None, :, None], z[None, :, None], phi[None, None, :])
    local = np.arange(rows.size)
    d[local, rows, 0] = 1.0     # self node; replaced by the ball integral
    block = kernel(d) * w[None, :, None]
    block[local, rows, 0] = 0.0
    dx = rho[None, :, None] * np.cos(phi)[None, None, :] - rho[rows, None, None]
    dz = z[None, :, None] - z[rows, None, None]
    mx = np.sum(np.sum(block * dx, axis=2), axis=1)
    mz = np.sum(np.sum(block * dz, axis=2), axis=1)
    sin_t, cos_t = rho[rows] / r[rows], z[rows] / r[rows]
    return block, mx * sin_t + mz * cos_t, mx * cos_t - mz * sin_t


class DiscreteOperator:
    """Nystrom discretisation of one radial kernel on one grid (immutable after build).

    Besides subtracting u(x_i), the rule subtracts the linear Taylor term
    grad u(x_i).(y - x_i); its exact ball integral is radial and comes from a
    1-D quadrature, while the gradient is taken by polynomial differentiation
    in r and mu on the grid's own nodes.
    """

    def __init__(self, grid, kernel):
        if not isinstance(grid, (_grids.BallGrid, _grids.RadialGrid)):
            raise ContractError("operators need a BallGrid or RadialGrid")
        self.grid = grid
        self.kernel = kernel
        n, nphi = grid.n_rings, grid.n_phi
        n_modes = nphi // 2 + 1
        full = isinstance(grid, _grids.BallGrid)
        if full and n_modes * n * n * 16 > _MAX_MODE_BYTES:
            raise ConfigurationError("grid too large for the stored Fourier-mode operator")
        modes = np.empty((n_modes if full else 1, n, n), dtype=complex)
        moment_r = np.empty(n, dtype=complex)
        moment_t = np.empty(n, dtype=complex)

        def build(sl):
            rows = np.arange(sl.start, sl.stop)
            block, moment_r[sl], moment_t[sl] = _ring_block(grid, kernel, rows)
            if full:
                modes[:, sl, :] = np.moveaxis(np.fft.fft(block, axis=2)[:, :, :n_modes], 2, 0)
            else:
                modes[0, sl, :] = np.sum(block, axis=2)

        _run_blocks(build, n)
        self.modes = modes
        self.ball_values = np.repeat(kernel.ball(grid.radius, grid.r), grid.n_mu)
        self.row_sums = np.sum(modes[0], axis=1)
        self.diagonal = self.ball_values - self.row_sums
        radial_moment = np.repeat(kernel.moment(grid.radius, grid.r), grid.n_mu)
        self.grad_r = radial_moment - moment_r
        self.grad_mu = moment_t * np.sqrt(1.0 - grid.ring_mu ** 2) / grid.ring_r
        self.diff_r = _lagrange_diff(grid.r)
        self.diff_mu = _lagrange_diff(grid.mu)

    def _gradient_term(self, u):
        """c_r du/dr + c_theta (1/r) du/dtheta for u shaped (rings, ...)."""
        g = self.grid
        shape = u.shape
        cube = u.reshape((g.n_r, g.n_mu) + shape[1:])
        du_r = np.tensordot(self.diff_r, cube, axes=(1, 0)).reshape(shape)
        du_mu = np.moveaxis(np.tensordot(self.diff_mu, cube, axes=(1, 1)), 0, 1).reshape(shape)
        extra = (1,) * (len(shape) - 1)
        return self.grad_r.reshape((-1,) + extra) * du_r + self.grad_mu.reshape((-1,) + extra) * du_mu

    @property
    def matrix(self):
        """Dense reduced matrix acting on axisymmetric ring values."""
        g = self.grid
        eye_r, eye_mu = np.eye(g.n_r), np.eye(g.n_mu)
        dr = np.kron(self.diff_r, eye_mu)
        dmu = np.kron(eye_r, self.diff_mu)
        return (self.modes[0] + np.diag(self.diagonal)
                + self.grad_r[:, None] * dr + self.grad_mu[:, None] * dmu)

    def apply_values(self, values):
        values = np.asarray(values, dtype=complex)
        if isinstance(self.grid, _grids.RadialGrid):
            out = np.empty_like(values)

            def rows(sl):
                out[sl] = self.modes[0][sl] @ values
            _run_blocks(rows, values.size, block=256)
            return out + self.diagonal * values + self._gradient_term(values)
        nphi = self.grid.n_phi
        u = values.reshape(self.grid.n_rings, nphi)
        u_hat = np.fft.fft(u, axis=1)
        out_hat = np.empty_like(u_hat)

        def modes(sl):
            for m in range(sl.start, sl.stop):
                out_hat[:, m] = self.modes[min(m, nphi - m)] @ u_hat[:, m]
        _run_blocks(modes, nphi, block=1)
        out = np.fft.ifft(out_hat, axis=1) + self.diagonal[:, None] * u + self._gradient_term(u)
        return out.ravel()

    def __call__(self, u):
        if not isinstance(u, GridFunction):
            raise ContractError("expected a GridFunction")
        if not (u.grid is self.grid or (type(u.grid) is type(self.grid) and u.grid.key == self.grid.key)):
            raise ContractError("grid function lives on a different grid")
        return GridFunction(u.grid, self.apply_values(u.values))


def apply_on_rings(kernel, u, rings):
    """The Nystrom rule evaluated only at selected rings of an axisymmetric u.

    Gives the same numbers as the full operator without assembling it, which
    makes fine-grid spot checks affordable.
    """
    grid = _grid_of(u)
    if not isinstance(grid, _grids.RadialGrid):
        raise ContractError("apply_on_rings needs a RadialGrid")
    rings = np.asarray(rings)
    block, m_r, m_t = _ring_block(grid, kernel, rings)
    vals = u.values
    out = np.sum(block, axis=2) @ vals
    row = np.sum(np.sum(block, axis=2), axis=1)
    r = grid.ring_r[rings]
    ball = kernel.ball(grid.radius, r)
    grad_r = kernel.moment(grid.radius, r) - m_r
    grad_mu = m_t * np.sqrt(1.0 - grid.ring_mu[rings] ** 2) / r
    cube = vals.reshape(grid.n_r, grid.n_mu)
    du_r = (_lagrange_diff(grid.r) @ cube).ravel()[rings]
    du_mu = (cube @ _lagrange_diff(grid.mu).T).ravel()[rings]
    return out + (ball - row) * vals[rings] + grad_r * du_r + grad_mu * du_mu


@functools.lru_cache(maxsize=12)
def _operator_cached(kind, grid_key, kernel_key):
    cls = _grids.BallGrid if kind == "ball" else _grids.RadialGrid
    grid = _grids.build_ball_grid(grid_key[0], grid_key[1], grid_key[2], grid_key[3])
    if cls is _grids.RadialGrid:
        grid = grid.radial_grid()
    return DiscreteOperator(grid, RadialKernel(kernel_key))


def discrete_operator(grid, kernel):
    """Cached operator for grids built by ``build_ball_grid``/``build_radial_grid``."""
    kind = "ball" if isinstance(grid, _grids.BallGrid) else "radial"
    ref = _grids.build_ball_grid(*grid.key)
    if not (np.array_equal(ref.r, grid.r) and np.array_equal(ref.mu, grid.mu)):
        return DiscreteOperator(grid, kernel)
    return _operator_cached(kind, grid.key, kernel.key)


def _grid_of(u):
    if not isinstance(u, GridFunction):
        raise ContractError("expected a GridFunction")
    return u.grid


def apply_G0(u):
    """(1/2pi^2) int |x - y|^-2 u(y) dy."""
    return discrete_operator(_grid_of(u), riesz_kernel())(u)


def apply_K(lam, sign, u):
    """(lam/2pi) int e^{+-i lam |x-y|} / |x - y| u(y) dy."""
    return discrete_operator(_grid_of(u), wave_kernel(lam, sign))(u)


def apply_M(lam, u):
    """int m_lam(x - y) u(y) dy."""
    return discrete_operator(_grid_of(u), correction_kernel(lam))(u)


def apply_G_boundary(lam, sign, u):
    """int g_lam^{+-}(x - y) u(y) dy, discretised with the summed kernel in one pass.

    Agrees with apply_G0 + apply_K + apply_M up to rounding, since every step
    of the rule is linear in the kernel.
    """
    return boundary_operator(_grid_of(u), lam, sign)(u)


def boundary_operator(grid, lam, sign):
    """Single operator with the summed kernel g_lam^{+-}; used by the solvers."""
    return discrete_operator(grid, boundary_kernel(lam, sign))


def apply_at_points(kernel, u, points, n_phi=None):
    """int k(|x - y|) u(y) dy at points x away from every node (no singular correction).

    On a RadialGrid u is taken axisymmetric and the azimuth is integrated by a
    trapezoid with n_phi nodes (default four times the grid's).
    """
    grid = _grid_of(u)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(len(pts), dtype=complex)
    if isinstance(grid, _grids.RadialGrid):
        nphi = 4 * grid.n_phi if n_phi is None else int(n_phi)
        phi = 2 * np.pi * np.arange(nphi) / nphi
        wv = grid.ring_volume_weights * (2 * np.pi / nphi) * u.values
        rho_t = np.hypot(pts[:, 0], pts[:, 1])
        for i in range(len(pts)):
            d = _grids.ring_distances(rho_t[i], pts[i, 2], grid.ring_rho[:, None], grid.ring_z[:, None], phi[None, :])
            out[i] = np.sum(np.sum(kernel(d), axis=1) * wv)
        return out
    nodes, wv = grid.nodes, grid.weights * u.values
    for i in range(len(pts)):
        d = np.linalg.norm(nodes - pts[i], axis=1)
        out[i] = np.sum(kernel(d) * wv)
    return out


# ---------------------------------------------------------------- envelopes and the convolution oracle

REGIMES = ("power", "power-log", "saturated")


@dataclass(frozen=True)
class Envelope:
    """Decay envelope constant * <x>^-exponent, times log(1 + <x>) in the power-log regime."""
    regime: str
    exponent: float
    constant: float = 1.0

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise DomainError(f"regime must be one of {REGIMES}")
        if not self.exponent > 0:
            raise DomainError("envelope exponent must be positive")

    def __call__(self, x):
        jx = np.sqrt(1.0 + np.asarray(x, dtype=float) ** 2)
        val = self.constant * jx ** -self.exponent
        if self.regime == "power-log":
            val = val * np.log(1.0 + jx)
        return val


def envelope_for(beta, gamma, n=3):
    """Decay of int |x - y|^-beta <y>^-gamma dy by the three-way split on gamma vs n."""
    if n != 3:
        raise DomainError("only n = 3 is supported")
    if not (0 < beta < n and gamma > 0 and beta + gamma > n):
        raise DomainError("need 0 < beta < n, gamma > 0 and beta + gamma > n")
    if gamma < n:
        return Envelope("power", beta + gamma - n)
    if gamma == n:
        return Envelope("power-log", beta)
    return Envelope("saturated", beta)


def envelope_G0(ell):
    """Decay of G0 <y>^-ell: <x>^-(ell-1), <x>^-2 log, or <x>^-2."""
    if not ell > 1:
        raise DomainError("ell must exceed 1")
    return envelope_for(2.0, ell, 3)


def _sphere_mean(beta, rho, s):
    """int over the unit sphere of |x - s w|^-beta dw with |x| = rho."""
    if beta == 2:
        return 2 * np.pi / (rho * s) * math.log((rho + s) / abs(rho - s))
    p = 2.0 - beta
    return 2 * np.pi / (rho * s * p) * ((rho + s) ** p - abs(rho - s) ** p)


def _sphere_mean_far(beta, q):
    """s^beta times the sphere mean for q = rho / s < 1."""
    if q < 1e-6:
        return 4 * np.pi * (1.0 + beta * (beta - 1) / 6 * q * q)
    if beta == 2:
        return 2 * np.pi / q * math.log1p(2 * q / (1 - q))
    p = 2.0 - beta
    return 2 * np.pi / (q * p) * ((1 + q) ** p - (1 - q) ** p)


def _radial_weight(s, gamma):
    return s * s * (1 + s * s) ** (-gamma / 2)


def phi_convolution(beta, gamma, x, n=3):
    """Adaptive-quadrature value of int |x - y|^-beta <y>^-gamma dy.

    The radial integral is split at |x|/2, |x| and 2|x| so each piece has at
    most an endpoint singularity; the tail runs in log s.
    """
    envelope_for(beta, gamma, n)
    rho = float(np.linalg.norm(x)) if np.ndim(x) else abs(float(x))
    opts = dict(epsabs=0.0, epsrel=1e-12, limit=500)
    # |rho - s|^(2 - beta) singularities are graded away with s = rho -+ h u^k
    k = max(2, math.ceil(2.0 / (3.0 - beta)))
    if rho == 0:
        g = lambda u: k * u ** (k * (3 - beta) - 1) * (1 + u ** (2 * k)) ** (-gamma / 2)
        return 4 * np.pi * integrate.quad(g, 0, 1, **opts)[0] + _log_tail(beta, gamma, 0.0, 1.0, opts)
    f = lambda s: _radial_weight(s, gamma) * _sphere_mean(beta, rho, s)
    def near(u, side):
        # s runs over [rho/2, rho] (side -1) or [rho, 2 rho] (side +1); the singular
        # factor |rho - s|^p u^(k-1) = h^p u^(kp + k - 1) is formed analytically
        h = rho / 2 if side < 0 else rho
        s = rho + side * h * u ** k
        jac = h * k * u ** (k - 1)
        if beta == 2:
            mean = 2 * np.pi / (rho * s) * ((math.log(rho + s) - math.log(h)) * jac - k * math.log(u) * jac)
        else:
            p = 2.0 - beta
            mean = 2 * np.pi / (rho * s * p) * ((rho + s) ** p * jac - h ** (p + 1) * k * u ** (k * p + k - 1))
        return _radial_weight(s, gamma) * mean

    total = integrate.quad(f, 0.0, rho / 2, **opts)[0]
    total += sum(integrate.quad(near, 0.0, 1.0, args=(side,), **opts)[0] for side in (-1, 1))
    return total + _log_tail(beta, gamma, rho, 2 * rho, opts)


def _log_tail(beta, gamma, rho, start, opts):
    """Radial integral over s > start with s = start e^t, kept in logarithms so huge s never overflows."""
    excess = beta + gamma - 3.0
    log0 = math.log(start)

    def f(t):
        log_s = log0 + t
        damp = (1 + math.exp(-2 * log_s)) ** (-gamma / 2)
        return math.exp(-excess * log_s) * damp * _sphere_mean_far(beta, rho * math.exp(-log_s))

    t_max = (745.0 + max(0.0, -excess * log0)) / excess
    return integrate.quad(f, 0, t_max, **opts)[0]
