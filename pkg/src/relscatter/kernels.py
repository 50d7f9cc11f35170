"""Resolvent kernels of the square-root Laplacian on R^3.

For z off [0, inf) the kernel is g_z(r) = 1/(2 pi^2 r^2) + ell_z(r) with

    ell_z(r) = z/(2 pi^2 r) [sin(zr) ci(-zr) - cos(zr) si(-zr)] = z/(2 pi^2 r) f(-zr),

f being the analytically continued auxiliary function of ``specfun``.  The
boundary values on the positive axis are

    g_lam^+-(r) = 1/(2 pi^2 r^2) + (lam/2pi) e^{+-i lam r}/r + m_lam(r),
    m_lam(r)    = -lam/(2 pi^2 r) f(lam r).
"""
from dataclasses import dataclass
import functools
import math

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from . import specfun
from .errors import DomainError, EnergyDomainError, SingularityError

TWO_PI2 = 2.0 * np.pi ** 2


def parse_sign(sign):
    """Map '+', '-', +1, -1 to +1 or -1."""
    if sign in ("+", 1, +1.0, "plus"):
        return 1
    if sign in ("-", -1, -1.0, "minus"):
        return -1
    raise DomainError(f"sign must be '+' or '-', got {sign!r}")


@dataclass(frozen=True)
class ComplexEnergy:
    """Either an interior point z of C minus [0, inf) or a boundary value (lam, sign)."""

    z: complex = None
    lam: float = None
    sign: int = None

    def __post_init__(self):
        if self.z is not None:
            z = complex(self.z)
            if z.imag == 0 and z.real >= 0:
                raise EnergyDomainError("interior energy must avoid [0, inf); use a boundary energy")
            object.__setattr__(self, "z", z)
        else:
            if self.lam is None or not self.lam > 0:
                raise EnergyDomainError("boundary energy needs lam > 0")
            object.__setattr__(self, "lam", float(self.lam))
            object.__setattr__(self, "sign", parse_sign(self.sign))

    @classmethod
    def interior(cls, z):
        return cls(z=z)

    @classmethod
    def boundary(cls, lam, sign):
        return cls(lam=lam, sign=sign)

    @property
    def is_boundary(self):
        return self.z is None


@dataclass(frozen=True)
class KernelValue:
    riesz: object
    wave: object
    correction: object
    total: object


def _as_interior(energy):
    if isinstance(energy, ComplexEnergy):
        if energy.is_boundary:
            raise EnergyDomainError("expected an interior energy")
        return energy.z
    return ComplexEnergy.interior(energy).z


def _radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(r == 0):
        raise SingularityError("kernels are singular at r = 0")
    if np.any(~(r > 0)):
        raise DomainError("r must be positive")
    return r


def _out(x, like):
    return x.item() if np.ndim(like) == 0 else x


def poisson_kernel(t, r):
    """t / (pi^2 (t^2 + r^2)^2)."""
    if not t > 0:
        raise DomainError("t must be positive")
    rr = np.asarray(r, dtype=float)
    if np.any(rr < 0):
        raise DomainError("r must be nonnegative")
    return _out(t / (np.pi ** 2 * (t * t + rr * rr) ** 2), r)


def ell_z(energy, r):
    z = _as_interior(energy)
    rr = _radius(r)
    val = z / (TWO_PI2 * rr) * specfun.aux_f_complex(-z * rr)
    return _out(val, r)


def g_z(energy, r):
    z = _as_interior(energy)
    rr = _radius(r)
    val = 1.0 / (TWO_PI2 * rr * rr) + z / (TWO_PI2 * rr) * specfun.aux_f_complex(-z * rr)
    return _out(val, r)


def _m_cisi(lam, r):
    rho = lam * r
    ci, si = specfun._real_ci_si(rho)
    return lam / (TWO_PI2 * r) * (np.sin(rho) * ci + np.cos(rho) * si)


def _m_aux(lam, r, chunk=20000):
    rho = (lam * r).ravel()
    f = np.empty_like(rho)
    for s in range(0, rho.size, chunk):
        f[s:s + chunk] = specfun.aux_f(rho[s:s + chunk])
    return -lam / (TWO_PI2 * r) * f.reshape(r.shape)


def m_lambda(lam, r, method="auto"):
    """Correction term m_lam(r).

    method: 'aux' (Gauss-Laguerre auxiliary function), 'cisi' (direct formula)
    or 'auto' (aux for lam r >= 1, cisi below).
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    rr = np.atleast_1d(_radius(r))
    if method == "aux":
        val = _m_aux(lam, rr)
    elif method == "cisi":
        val = _m_cisi(lam, rr)
    elif method == "auto":
        val = np.empty_like(rr)
        big = lam * rr >= 1.0
        if np.any(big):
            val[big] = _m_aux(lam, rr[big])
        if np.any(~big):
            val[~big] = _m_cisi(lam, rr[~big])
    else:
        raise DomainError(f"unknown method {method!r}")
    return _out(val.reshape(np.shape(r)) if np.ndim(r) else val, r)


def m_fast(lam, r):
    """Vectorised m_lam through the ci/si + continued-fraction route."""
    f, _ = specfun.aux_fg(lam * r)
    return -lam / (TWO_PI2 * r) * f


# Spline table of f over log(rho); relative error about 1e-12 on the table range.
_TABLE_RANGE = (1e-7, 1e5)
_TABLE_SIZE = 8000


@functools.lru_cache(maxsize=None)
def _aux_table():
    s = np.linspace(math.log(_TABLE_RANGE[0]), math.log(_TABLE_RANGE[1]), _TABLE_SIZE)
    f, g = specfun.aux_fg(np.exp(s))
    return CubicSpline(s, f), CubicSpline(s, g)


def aux_fg_tabulated(rho):
    """(f, g) on the positive axis from the spline table; exact route off the table."""
    rho = np.asarray(rho, dtype=float)
    f = np.empty_like(rho)
    g = np.empty_like(rho)
    inside = (rho >= _TABLE_RANGE[0]) & (rho <= _TABLE_RANGE[1])
    if np.any(inside):
        sf, sg = _aux_table()
        s = np.log(rho[inside])
        f[inside] = sf(s)
        g[inside] = sg(s)
    if np.any(~inside):
        f[~inside], g[~inside] = specfun.aux_fg(rho[~inside])
    return f, g


def m_tabulated(lam, r):
    """m_lam(r) through the spline table; the fast path for quadrature sweeps."""
    r = np.asarray(r, dtype=float)
    return -lam / (TWO_PI2 * r) * aux_fg_tabulated(lam * r)[0]


def g_boundary(lam, sign, r):
    if not lam > 0:
        raise DomainError("lambda must be positive")
    s = parse_sign(sign)
    rr = _radius(r)
    riesz = 1.0 / (TWO_PI2 * rr * rr)
    wave = lam / (2 * np.pi) * np.exp(1j * s * lam * rr) / rr
    corr = m_fast(lam, np.atleast_1d(rr)).reshape(rr.shape)
    return KernelValue(_out(riesz, r), _out(wave, r), _out(corr, r), _out(riesz + wave + corr, r))


def g_boundary_dr(lam, sign, r):
    """Radial derivative of g_lam^+-(r), by differentiating each term."""
    s = parse_sign(sign)
    rr = np.atleast_1d(_radius(r))
    f, g = specfun.aux_fg(lam * rr)
    d_riesz = -1.0 / (np.pi ** 2 * rr ** 3)
    d_wave = lam / (2 * np.pi) * np.exp(1j * s * lam * rr) * (1j * s * lam / rr - 1.0 / rr ** 2)
    d_corr = lam * f / (TWO_PI2 * rr ** 2) + lam ** 2 * g / (TWO_PI2 * rr)
    return _out((d_riesz + d_wave + d_corr).reshape(np.shape(r)), r)


def energy_kernel(energy, r):
    """Total kernel value for either kind of energy."""
    if energy.is_boundary:
        return g_boundary(energy.lam, energy.sign, r).total
    return g_z(energy, r)


def laplace_oracle(z, a):
    """Quadrature of int_0^inf e^{tz} t / (pi^2 (t^2 + a^2)^2) dt.

    The integrand peaks near t = a, so [0, a] and [a, inf) are integrated
    separately.
    """
    z = complex(z)
    if not z.real < 0:
        raise DomainError("Re z must be negative")
    if not a > 0:
        raise DomainError("a must be positive")

    def part(fn):
        opts = dict(epsabs=1e-14, epsrel=1e-13, limit=400)
        head = integrate.quad(fn, 0.0, a, **opts)[0]
        tail = integrate.quad(fn, a, np.inf, **opts)[0]
        return head + tail

    def weight(t):
        return t / (np.pi ** 2 * (t * t + a * a) ** 2) * math.exp(z.real * t)

    re = part(lambda t: weight(t) * math.cos(z.imag * t))
    im = part(lambda t: weight(t) * math.sin(z.imag * t))
    return complex(re, im)
