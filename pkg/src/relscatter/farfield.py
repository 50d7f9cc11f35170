"""Scattering amplitudes and decay-rate fits along rays.

Far from the solved region the scattered wave is assembled from two zones.
The core |y| <= R_core uses the computed phi on its RadialGrid.  The tail
R_core < |y| < R_dom replaces phi by the plane wave (first Born term), which
is where a slowly decaying potential still matters.  For the tail, the angle
of y about the ray is integrated analytically (a Bessel J0 factor) and the
polar angle is traded for the distance d = |x - y|, so the 1/d^2 singularity
at y = x sits on a panel end where geometric grading resolves it.
"""
from dataclasses import dataclass
import functools

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate
from scipy.special import j0

from . import grids as _grids
from . import kernels as _kernels
from . import operators as _ops
from .errors import ContractError, DomainError

FIT_MIN_SAMPLES = 8
SAMPLE_RATIO = 1.2
_PANEL_NODES = 10
_PANEL_WIDTH = 2.0


@dataclass(frozen=True)
class DecayFit:
    """Power law value ~ r^-exponent fitted on [r_min, r_max]."""
    exponent: float
    stderr: float
    r_min: float
    r_max: float
    ray: tuple = None
    n_samples: int = 0
    saturated: bool = False

    def within(self, target, tol):
        return abs(self.exponent - target) <= tol


def fit_decay_exponent(radii, values, ray=None):
    """Least-squares slope of log(value) against log(r), with its standard error."""
    r = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    if r.shape != v.shape or r.ndim != 1:
        raise DomainError("radii and values must be 1-D arrays of equal length")
    if r.size < FIT_MIN_SAMPLES:
        raise DomainError(f"need at least {FIT_MIN_SAMPLES} samples")
    if np.any(r < 1):
        raise DomainError("decay fits start at r >= 1")
    if r.max() / r.min() < 10 * (1 - 1e-12):
        raise DomainError("samples must span at least one decade")
    if np.any(~(v > 0)):
        raise DomainError("values must be positive")
    x, y = np.log(r), np.log(v)
    A = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = r.size - 2
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(A.T @ A)
    ray = None if ray is None else tuple(float(c) for c in ray)
    return DecayFit(float(-coef[1]), float(np.sqrt(cov[1, 1])), float(r.min()), float(r.max()), ray, int(r.size))


def sample_radii(r_max, r_min=10.0, ratio=SAMPLE_RATIO):
    """Geometric samples from r_min to r_max inclusive, consecutive ratio at most ``ratio``."""
    if not r_max > r_min > 0 or not ratio > 1:
        raise DomainError("need 0 < r_min < r_max and ratio > 1")
    n = int(np.ceil(np.log(r_max / r_min) / np.log(ratio) - 1e-9)) + 1
    return np.geomspace(r_min, r_max, n)


def _unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not abs(n - 1.0) < 1e-9:
        raise DomainError("direction must be a unit vector")
    return v / n


def default_rays(omega_k):
    """omega_k, -omega_k and four directions orthogonal to it."""
    w = _unit(omega_k)
    helper = np.array([1.0, 0.0, 0.0]) if abs(w[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = helper - (helper @ w) * w
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(w, e1)
    return [w, -w, e1, -e1, e2, -e2]


# ---------------------------------------------------------------- composite rules

def _gauss_panels(edges, n=_PANEL_NODES):
    x, w = leggauss(n)
    a, b = np.asarray(edges[:-1]), np.asarray(edges[1:])
    half = (b - a) / 2
    nodes = (a[:, None] + half[:, None] * (x[None, :] + 1)).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _uniform_edges(a, b, width):
    n = max(1, int(np.ceil((b - a) / width)))
    return np.linspace(a, b, n + 1)


def _graded_edges(a, b, width, start_gap, toward="a"):
    """Panels on [a, b] refined geometrically toward one end, down to start_gap."""
    length = b - a
    if length <= 0:
        return np.array([a, b])
    g = min(1.0, length / 2)
    gaps = [g]
    while gaps[-1] > start_gap:
        gaps.append(gaps[-1] / 2)
    near = np.array(sorted(gaps))
    if toward == "a":
        edges = np.concatenate([[a], a + near, _uniform_edges(a + g, b, width)[1:]])
    else:
        far = _uniform_edges(a, b - g, width)
        edges = np.concatenate([far, (b - near)[::-1][1:], [b]])
    return np.unique(edges)


# ---------------------------------------------------------------- the two-zone field

class TwoZoneField:
    """Scattered wave psi(x) of a radial-grid solution continued to |x| up to R_dom."""

    def __init__(self, sol, V, outer_radius):
        if not isinstance(sol.grid, _grids.RadialGrid):
            raise ContractError("the far field is built from a RadialGrid solution")
        if not outer_radius > sol.grid.radius:
            raise DomainError("outer radius must exceed the core radius")
        self.sol = sol
        self.V = V
        self.core_radius = sol.grid.radius
        self.outer_radius = float(outer_radius)
        self.k = sol.k
        self.sign = sol.sign
        self.lam = sol.lam
        self.omega_k = sol.omega_k
        self._density = _ops.GridFunction(sol.grid, V(sol.grid.ring_r) * sol.phi)
        self._kernel = _ops.boundary_kernel(self.lam, -self.sign)

    def scattered(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty(len(pts), dtype=complex)
        for i, x in enumerate(pts):
            rho = float(np.linalg.norm(x))
            c = float(np.clip(x @ self.omega_k / rho, -1.0, 1.0))
            out[i] = self._psi(rho, c)
        return out

    def plane_wave(self, points):
        return np.exp(1j * (np.atleast_2d(points) @ self.k))

    @functools.lru_cache(maxsize=4096)
    def _psi(self, rho, c):
        if rho <= self.core_radius:
            raise DomainError("far-field evaluation needs |x| beyond the core radius")
        # rotate x into the phi = 0 half plane about omega_k (the grid's polar axis)
        axis = self.omega_k[2]
        x = np.array([[rho * np.sqrt(1 - c * c), 0.0, rho * c * axis]])
        core = _ops.apply_at_points(self._kernel, self._density, x)[0]
        return -(core + self._tail(rho, c))

    def _tail(self, rho, c):
        lam, ks = self.lam, -self.sign
        Rc, Rd = self.core_radius, self.outer_radius
        gap = 1e-7 * rho
        if Rc < rho < Rd:
            edges = np.concatenate([_graded_edges(Rc, rho, _PANEL_WIDTH, gap, toward="b"),
                                    _graded_edges(rho, Rd, _PANEL_WIDTH, gap, toward="a")[1:]])
        else:
            edges = _uniform_edges(Rc, Rd, _PANEL_WIDTH)
        s_nodes, s_w = _gauss_panels(edges)
        sin_c = np.sqrt(max(0.0, 1 - c * c))
        total = 0.0 + 0.0j
        for s, ws in zip(s_nodes, s_w):
            lo, hi = abs(rho - s), rho + s
            d_edges = _graded_edges(lo, hi, _PANEL_WIDTH, max(lo, 1e-12), toward="a") if lo < 1 \
                else _uniform_edges(lo, hi, _PANEL_WIDTH)
            d, wd = _gauss_panels(d_edges)
            t = np.clip((rho * rho + s * s - d * d) / (2 * rho * s), -1.0, 1.0)
            phase = np.exp(1j * lam * c * s * t)
            if sin_c > 0:
                phase = phase * j0(lam * sin_c * s * np.sqrt(1 - t * t))
            dg = (1.0 / (_kernels.TWO_PI2 * d) + lam / (2 * np.pi) * np.exp(1j * ks * lam * d)
                  + d * _kernels.m_tabulated(lam, d))
            total += ws * s * self.V(s) * np.sum(wd * dg * phase)
        return 2 * np.pi / rho * total

    def amplitude(self, omega_x):
        return scattering_amplitude(self.lam, omega_x, self.omega_k, self.sol, self.V,
                                    tail_radius=self.outer_radius)


def scattering_amplitude(lam, omega_x, omega_k, sol, V, grid=None, tail_radius=None):
    """-(lam/2pi) int e^{+-i lam omega_x.y} V(y) phi^{+-}(y, lam omega_k) dy.

    The core integral uses the solution's grid; with tail_radius the plane-wave
    tail out to that radius is added.
    """
    omega_x, omega_k = _unit(omega_x), _unit(omega_k)
    if abs(lam - sol.lam) > 1e-12 * lam or np.linalg.norm(sol.omega_k - omega_k) > 1e-12:
        raise ContractError("solution was computed at a different wave vector")
    grid = sol.grid if grid is None else grid
    if type(grid) is not type(sol.grid) or grid.key != sol.grid.key:
        raise ContractError("solution and grid do not match")
    s = sol.sign
    if isinstance(grid, _grids.RadialGrid):
        axis = np.array([0.0, 0.0, 1.0])
        cos_x = float(omega_x @ axis)
        sin_x = np.sqrt(max(0.0, 1 - cos_x * cos_x))
        r, mu = grid.ring_r, grid.ring_mu
        azim = 2 * np.pi * j0(lam * r * np.sqrt(1 - mu * mu) * sin_x)
        phase = np.exp(1j * s * lam * r * mu * cos_x) * azim
        core = np.sum(grid.ring_volume_weights * phase * V(r) * sol.phi)
    else:
        pts = grid.nodes
        phase = np.exp(1j * s * lam * (pts @ omega_x))
        core = np.sum(grid.weights * phase * V(np.linalg.norm(pts, axis=1)) * sol.phi)
    total = core
    if tail_radius is not None:
        total += _tail_amplitude_integral(lam * omega_k + s * lam * omega_x, V, grid.radius, tail_radius)
    return complex(-lam / (2 * np.pi) * total)


def _tail_amplitude_integral(Q, V, r0, r1):
    """int_{r0 < |y| < r1} e^{i Q.y} V(|y|) dy for radial V."""
    q = float(np.linalg.norm(Q))
    nodes, w = _gauss_panels(_uniform_edges(r0, r1, _PANEL_WIDTH))
    return 4 * np.pi * np.sum(w * nodes * nodes * V(nodes) * np.sinc(q * nodes / np.pi))


def born_amplitude(lam, omega_x, omega_k, sign, V):
    """First-Born amplitude -(lam/2pi) int e^{i Q.y} V dy by adaptive quadrature."""
    Q = lam * _unit(omega_k) + sign * lam * _unit(omega_x)
    q = float(np.linalg.norm(Q))
    opts = dict(epsabs=0, epsrel=1e-11, limit=500)
    if q == 0:
        val = integrate.quad(lambda s: 4 * np.pi * s * s * float(V(s)), 0, np.inf, **opts)[0]
    else:
        head = integrate.quad(lambda s: 4 * np.pi * s * float(V(s)) * np.sin(q * s) / q, 0, 50.0, **opts)[0]
        tail = integrate.quad(lambda s: 4 * np.pi * s * float(V(s)) / q, 50.0, np.inf, weight="sin", wvar=q)[0]
        val = head + tail
    return -lam / (2 * np.pi) * val


# ---------------------------------------------------------------- decay fits

def _ray_points(ray, radii):
    return np.asarray(radii)[:, None] * _unit(ray)[None, :]


def default_samples(field):
    return sample_radii(field.outer_radius / 2)


def planewave_diff_decay(field, ray, samples=None):
    """Fit |phi - e^{i k.x}| = |psi| along a ray."""
    radii = default_samples(field) if samples is None else np.asarray(samples, dtype=float)
    vals = np.abs(field.scattered(_ray_points(ray, radii)))
    return _fit_or_saturate(radii, vals, ray)


def farfield_error_decay(field, f_value, ray, samples=None, outgoing=True):
    """Fit |phi - (e^{i k.x} + f e^{-+i lam |x|} / |x|)| along a ray.

    outgoing=False subtracts the spherical wave of the opposite sign instead,
    a control that should leave the plane-wave rate unchanged.
    """
    radii = default_samples(field) if samples is None else np.asarray(samples, dtype=float)
    psi = field.scattered(_ray_points(ray, radii))
    wave_sign = field.sign if outgoing else -field.sign
    sw = f_value * np.exp(-1j * wave_sign * field.lam * radii) / radii
    return _fit_or_saturate(radii, np.abs(psi - sw), ray)


def _fit_or_saturate(radii, vals, ray):
    if np.all(vals == 0):
        return DecayFit(float("inf"), 0.0, float(radii.min()), float(radii.max()),
                        tuple(float(c) for c in _unit(ray)), int(radii.size), saturated=True)
    return fit_decay_exponent(radii, vals, ray)


def envelope_decay(field, rays, samples=None, amplitudes=None):
    """Fit the sup over rays of |psi| (or of the far-field error when amplitudes are given)."""
    radii = default_samples(field) if samples is None else np.asarray(samples, dtype=float)
    env = np.zeros(radii.size)
    for i, ray in enumerate(rays):
        psi = field.scattered(_ray_points(ray, radii))
        if amplitudes is not None:
            psi = psi - amplitudes[i] * np.exp(-1j * field.sign * field.lam * radii) / radii
        env = np.maximum(env, np.abs(psi))
    return _fit_or_saturate(radii, env, rays[0])


def amplitude_from_ray(field, ray, radius):
    """|x| e^{+-i lam |x|} psi(x) at one radius: the ray-wise far-field estimate of f."""
    x = _ray_points(ray, [radius])
    return complex(field.scattered(x)[0] * radius * np.exp(1j * field.sign * field.lam * radius))


def amplitude_fit(field, ray, sigma, samples=None):
    """Extrapolated far-field amplitude along a ray.

    |x| e^{+-i lam |x|} psi(x) approaches f with corrections in |x|^-(sigma-3)/2
    and |x|^-1; a least-squares fit of those three terms over the samples
    returns the constant term.
    """
    if not sigma > 3:
        raise DomainError("amplitude extrapolation assumes sigma > 3")
    radii = default_samples(field) if samples is None else np.asarray(samples, dtype=float)
    powers = sorted({0.0, min((sigma - 3) / 2, 1.0), 1.0})
    est = field.scattered(_ray_points(ray, radii)) * radii * np.exp(1j * field.sign * field.lam * radii)
    A = np.stack([radii ** -p for p in powers], axis=1)
    coef, *_ = np.linalg.lstsq(A, est, rcond=None)
    return complex(coef[0])


# ---------------------------------------------------------------- splitting integrals

def _radial_weight(sigma):
    return lambda s: (1.0 + s * s) ** (-sigma / 2)


def splitting_integrals(a, rho, sigma):
    """The four pieces of psi_K - f e^{..}/|x| for u = <y>^-sigma at |x| = rho.

    far_phase:  int_{|y| >= sqrt rho} e^{ia(rho - w.y)} u dy
    far_wave:   int_{|y| >= sqrt rho} e^{ia|x-y|} / |x-y| u dy
    near_phase: (1/rho) int_{|y| <= sqrt rho} (e^{ia(rho - w.y)} - e^{ia|x-y|}) u dy
    near_amp:   int_{|y| <= sqrt rho} (1/rho - 1/|x-y|) e^{ia|x-y|} u dy
    """
    if not rho > 1:
        raise DomainError("splitting integrals need |x| > 1")
    if a == 0:
        raise DomainError("a must be nonzero")
    u = _radial_weight(sigma)
    R = np.sqrt(rho)
    opts = dict(epsabs=0, epsrel=1e-10, limit=800)

    def fourier_tail(fn, start, kind):
        # int_start^inf fn(s) cos/sin(|a| s) ds through QUADPACK's Fourier rule
        return integrate.quad(fn, start, np.inf, weight=kind, wvar=abs(a))[0]

    # far_phase: radial u gives 4 pi int s^2 u sinc(a s) ds
    far_phase = 4 * np.pi / abs(a) * fourier_tail(lambda s: s * u(s), R, "sin")

    # far_wave: inner distance integral is exact, int e^{iad} dd over [|rho - s|, rho + s]
    def wave_part(sgn_in, lo, hi):
        # int s u(s) e^{ia(rho + sgn_in*s)} ds, as cos/sin pieces
        ph = np.exp(1j * a * rho)
        fc = lambda s: s * u(s)
        if np.isinf(hi):
            cpart = fourier_tail(fc, lo, "cos")
            spart = fourier_tail(fc, lo, "sin")
        else:
            cpart = integrate.quad(fc, lo, hi, weight="cos", wvar=abs(a), **opts)[0]
            spart = integrate.quad(fc, lo, hi, weight="sin", wvar=abs(a), **opts)[0]
        return ph * (cpart + 1j * np.sign(a) * sgn_in * spart)

    plus = wave_part(+1, R, np.inf)
    # |rho - s| = rho - s on [R, rho] and s - rho beyond
    minus_in = wave_part(-1, R, rho)
    fc = lambda s: s * u(s)
    ph = np.exp(-1j * a * rho)
    cpart = fourier_tail(fc, rho, "cos")
    spart = fourier_tail(fc, rho, "sin")
    minus_out = ph * (cpart + 1j * np.sign(a) * spart)
    far_wave = 2 * np.pi / rho * (plus - minus_in - minus_out) / (1j * a)

    # near pieces: product Gauss rule in (s, t), t = cos angle to the ray
    s_nodes, s_w = _gauss_panels(_uniform_edges(0.0, R, 1.0), 16)
    n_t = int(max(64, 8 * abs(a) * R))
    t, wt = leggauss(n_t)
    S, T = s_nodes[:, None], t[None, :]
    d = np.sqrt(np.maximum(rho * rho + S * S - 2 * rho * S * T, 0.0))
    ring = 2 * np.pi * S * S * u(S) * s_w[:, None] * wt[None, :]
    near_phase = np.sum(ring * (np.exp(1j * a * (rho - S * T)) - np.exp(1j * a * d))) / rho
    near_amp = np.sum(ring * (1 / rho - 1 / d) * np.exp(1j * a * d))
    return dict(far_phase=complex(far_phase), far_wave=complex(far_wave),
                near_phase=complex(near_phase), near_amp=complex(near_amp))


def splitting_envelopes(sigma):
    """Envelope of each splitting piece for sigma > 3 (the near_phase bound carries a factor |a|)."""
    if not sigma > 3:
        raise DomainError("the splitting bounds assume sigma > 3")
    if sigma < 5:
        near_phase = _ops.Envelope("power", (sigma - 1) / 2)
    elif sigma == 5:
        near_phase = _ops.Envelope("power-log", 2.0)
    else:
        near_phase = _ops.Envelope("saturated", 2.0)
    if sigma < 4:
        near_amp = _ops.Envelope("power", sigma / 2)
    elif sigma == 4:
        near_amp = _ops.Envelope("power-log", 2.0)
    else:
        near_amp = _ops.Envelope("saturated", 2.0)
    return dict(far_phase=_ops.Envelope("power", (sigma - 3) / 2),
                far_wave=_ops.Envelope("power", (sigma - 1) / 2),
                near_phase=near_phase, near_amp=near_amp)
