"""Independent checks: FFT square-root Laplacian, eigen-residuals, radiation functionals, symbol identity."""
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import BarycentricInterpolator

from . import grids as _grids
from . import kernels as _kernels
from .errors import ContractError, DomainError, EnergyDomainError
from .farfield import fit_decay_exponent


# ---------------------------------------------------------------- periodic box and the FFT multiplier

@dataclass(frozen=True)
class PeriodicBox:
    """Cube [-L, L)^3 with N points per axis; lattice wave numbers pi m / L."""
    L: float
    N: int

    def __post_init__(self):
        if not self.L > 0:
            raise DomainError("half-width must be positive")
        if self.N < 2 or self.N & (self.N - 1):
            raise DomainError("N must be a power of two")

    @property
    def spacing(self):
        return 2 * self.L / self.N

    @property
    def axis(self):
        return -self.L + self.spacing * np.arange(self.N)

    @property
    def wavenumbers(self):
        return np.pi / self.L * np.fft.fftfreq(self.N, 1.0 / self.N)

    def mesh(self):
        return np.meshgrid(self.axis, self.axis, self.axis, indexing="ij")

    def radius(self):
        X, Y, Z = self.mesh()
        return np.sqrt(X * X + Y * Y + Z * Z)

    def symbol_abs(self):
        kx = self.wavenumbers
        KX, KY, KZ = np.meshgrid(kx, kx, kx, indexing="ij")
        return np.sqrt(KX * KX + KY * KY + KZ * KZ)

    def lattice_vector(self, m):
        """Wave vector pi m / L for an integer triple m."""
        m = np.asarray(m)
        if m.shape != (3,) or np.any(m != np.round(m)):
            raise DomainError("lattice index must be an integer triple")
        return np.pi / self.L * m.astype(float)

    def plane_wave(self, k):
        X, Y, Z = self.mesh()
        return np.exp(1j * (k[0] * X + k[1] * Y + k[2] * Z))

    def inner(self, u, v):
        return np.vdot(u, v) * self.spacing ** 3


def _box_values(box, u):
    u = np.asarray(u)
    if u.shape != (box.N,) * 3:
        raise ContractError(f"values must have shape {(box.N,) * 3}")
    return u


def sqrt_laplacian_apply(box, u):
    """Inverse FFT of |xi| u-hat on the lattice."""
    u = _box_values(box, u)
    return np.fft.ifftn(box.symbol_abs() * np.fft.fftn(u))


def laplacian_multiplier_apply(box, u):
    """-Delta on the lattice: the multiplier |xi|^2."""
    u = _box_values(box, u)
    return np.fft.ifftn(box.symbol_abs() ** 2 * np.fft.fftn(u))


# ---------------------------------------------------------------- windowed eigen-residual

@dataclass(frozen=True)
class RaisedCosineWindow:
    """Radial window equal to 1 for |x| <= inner L and 0 for |x| >= outer L."""
    inner: float = 0.5
    outer: float = 0.8

    def __post_init__(self):
        if not 0 < self.inner < self.outer:
            raise ContractError("window needs 0 < inner < outer")

    def check_support(self):
        if self.inner < 0.5 or self.outer > 0.8:
            raise ContractError("window must equal 1 on |x| <= 0.5 L and vanish beyond 0.8 L")

    def __call__(self, r, L):
        t = np.clip((np.asarray(r) / L - self.inner) / (self.outer - self.inner), 0.0, 1.0)
        return 0.5 * (1 + np.cos(np.pi * t))


def _interp_matrix(nodes, x):
    return BarycentricInterpolator(nodes, np.eye(nodes.size))(x)


def interpolate_solution(sol, points, part="psi"):
    """Lagrange interpolation of an axisymmetric solution (k along the z axis) to points inside its ball."""
    grid = sol.grid
    if sol.k[0] != 0 or sol.k[1] != 0:
        raise ContractError("interpolation needs k along the polar axis")
    if isinstance(grid, _grids.BallGrid):
        grid = grid.radial_grid()
    values = getattr(sol, part)
    if isinstance(sol.grid, _grids.BallGrid):
        values = sol.grid.ring_view(values)[:, 0]
    pts = np.atleast_2d(points)
    r = np.linalg.norm(pts, axis=1)
    if np.any(r > grid.radius):
        raise DomainError("points lie outside the solution's ball")
    with np.errstate(invalid="ignore", divide="ignore"):
        mu = np.where(r > 0, pts[:, 2] / r, 1.0)
    table = values.reshape(grid.n_r, grid.n_mu)
    A = _interp_matrix(grid.r, r)
    B = _interp_matrix(grid.mu, np.clip(mu, -1.0, 1.0))
    return np.einsum("pi,ij,pj->p", A, table, B)


def eigen_residual(sol, V, box, window=None):
    """Sup over |x| <= 0.4 L of |(sqrt(-Delta) + V - |k|)(w psi) + w V phi_0|."""
    window = RaisedCosineWindow() if window is None else window
    window.check_support()
    R = box.radius()
    w = window(R, box.L)
    inside = w > 0
    if np.any(R[inside] > sol.grid.radius):
        raise ContractError("window support exceeds the solution's ball")
    X, Y, Z = box.mesh()
    pts = np.stack([X[inside], Y[inside], Z[inside]], axis=1)
    psi = np.zeros(R.shape, dtype=complex)
    psi[inside] = interpolate_solution(sol, pts, "psi")
    v = V(R)
    wpsi = w * psi
    phi0 = box.plane_wave(sol.k)
    res = sqrt_laplacian_apply(box, wpsi) + (v - sol.lam) * wpsi + w * v * phi0
    core = R <= 0.4 * box.L
    return float(np.max(np.abs(res[core])))


# ---------------------------------------------------------------- radiation functional

@dataclass(frozen=True)
class AnnulusNorms:
    """Per-annulus weighted integrals of |(d_r -+ i lam)u|^2 (condition) and |u|^2 (field)."""
    radii: np.ndarray
    condition: np.ndarray
    field: np.ndarray
    s: float

    def __post_init__(self):
        if np.any(np.diff(self.radii) <= 0):
            raise DomainError("annulus radii must increase")
        if np.any(self.condition < 0) or np.any(self.field < 0):
            raise DomainError("annulus values must be nonnegative")

    @property
    def centres(self):
        return np.sqrt(self.radii[:-1] * self.radii[1:])

    def cumulative(self, which="condition"):
        return np.cumsum(getattr(self, which))

    def decay_gain(self):
        """Fitted per-annulus decay exponent of the condition minus that of the field."""
        r = self.centres
        return fit_decay_exponent(r, self.condition).exponent - fit_decay_exponent(r, self.field).exponent


def radiation_functional(field, lam, sign, s, radii, nodes_per_annulus=24):
    """Annulus integrals of the radiation condition for a radial field.

    ``field(r)`` returns (u, du/dr).  For radial u the j-th component of
    (d_j - i sign lam w_j) u is w_j (u' - i sign lam u), so the pointwise norm
    is |u' - i sign lam u| and each annulus integral reduces to 4 pi r^2 dr.
    """
    if not 0.5 < s < 1:
        raise DomainError("s must lie in (1/2, 1)")
    if not lam > 0:
        raise DomainError("lambda must be positive")
    sg = _kernels.parse_sign(sign)
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size < 2 or radii[0] <= 0:
        raise DomainError("need at least two positive annulus radii")
    x, wx = leggauss(nodes_per_annulus)
    cond, fld = [], []
    for a, b in zip(radii[:-1], radii[1:]):
        r = a + (b - a) * (x + 1) / 2
        w = wx * (b - a) / 2 * 4 * np.pi * r * r * (1 + r * r) ** (s - 1)
        u, du = field(r)
        cond.append(float(np.sum(w * np.abs(du - 1j * sg * lam * u) ** 2)))
        fld.append(float(np.sum(w * np.abs(u) ** 2)))
    return AnnulusNorms(radii, np.array(cond), np.array(fld), float(s))


def kernel_field(lam, sign):
    """g_lam^{sign} with its analytic radial derivative, as a field for radiation_functional."""
    def field(r):
        return _kernels.g_boundary(lam, sign, r).total, _kernels.g_boundary_dr(lam, sign, r)
    return field


# ---------------------------------------------------------------- resolvent symbol identity

def _smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def cutoff(q, a, b):
    """Smooth gamma(xi) as a function of q = |xi|^2.

    gamma = 1 on [a^2/2, 3b^2/2] and gamma = 0 for q <= a^2/4 or q >= 2 b^2.
    """
    q = np.asarray(q, dtype=float)
    up = _smooth_step((q - a * a / 4) / (a * a / 4))
    down = 1.0 - _smooth_step((q - 1.5 * b * b) / (0.5 * b * b))
    return up * down


def in_strip(z, a, b):
    """z in D_ab = {a <= Re z <= b, |Im z| <= a/2}."""
    z = np.asarray(z, dtype=complex)
    return (z.real >= a) & (z.real <= b) & (np.abs(z.imag) <= a / 2)


@dataclass(frozen=True)
class SymbolCheck:
    identity_error: float
    inner_margin: float
    outer_margin: float
    n_inner: int
    n_outer: int

    @property
    def ok(self):
        return self.identity_error <= 1e-12 and self.inner_margin >= 0 and self.outer_margin >= 0


def symbol_identity_check(z, xi_samples, a, b):
    """Resolvent symbol split and the cutoff lower bounds on supp(1 - gamma).

    z may be a scalar or one value per sample.  Margins are
    ||xi|^2 - z^2| - a^2/4 on {q <= a^2/2} and ||xi|^2 - z^2| - |xi|^2/3 on
    {q >= 3b^2/2}, both only over z in D_ab (inf when no sample qualifies).
    """
    if not 0 < a < b:
        raise DomainError("need 0 < a < b")
    xi = np.asarray(xi_samples, dtype=float)
    q = np.sum(xi * xi, axis=-1) if xi.ndim == 2 else xi * xi
    z = np.broadcast_to(np.asarray(z, dtype=complex), q.shape)
    if np.any((z.imag == 0) & (z.real >= 0)):
        raise EnergyDomainError("z must avoid [0, inf)")
    n = np.sqrt(q)
    gam = cutoff(q, a, b)
    den = q - z * z
    lhs = (n + z) / den
    rhs = (z + gam * n) / den + (1 - gam) * n / den
    err = float(np.max(np.abs(lhs - rhs) / np.abs(lhs)))
    dz = in_strip(z, a, b)
    inner = dz & (q <= a * a / 2)
    outer = dz & (q >= 1.5 * b * b)
    m_in = float(np.min(np.abs(den[inner]) - a * a / 4)) if inner.any() else np.inf
    m_out = float(np.min(np.abs(den[outer]) - q[outer] / 3)) if outer.any() else np.inf
    return SymbolCheck(err, m_in, m_out, int(inner.sum()), int(outer.sum()))

