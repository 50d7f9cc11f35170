"""Sine and cosine integrals in the sign convention used throughout the package.

    ci(z) = -gamma - Log z - h_e(z),      ci(rho) = int_rho^inf cos t / t dt
    si(z) = -pi/2 + sum_m (-1)^m z^(2m+1) / ((2m+1)! (2m+1)),
                                          si(rho) = -int_rho^inf sin t / t dt

with h_e(z) = sum_{m>=1} (-1)^m z^(2m) / ((2m)! 2m) the even entire part.  So
ci = -Ci and si = Si - pi/2 in the usual notation.

Small arguments (|z| <= SERIES_RADIUS) use the power series with compensated
summation.  Larger arguments go through the scaled exponential integral
S(u) = e^u E1(u), using ci(z) + i si(z) = E1(iz) on the right half plane and the
reflection rules on the left.  S itself is a continued fraction, except close
to its cut where the E1 power series has no cancellation and is used instead.

The auxiliary functions

    f(w) = int_0^inf e^(-w t) / (1 + t^2) dt,   g(w) = int_0^inf t e^(-w t) / (1 + t^2) dt

satisfy sin w ci(w) + cos w si(w) = -f(w) and cos w ci(w) - sin w si(w) = g(w),
and give the boundary kernels without the cancellation of the direct formula.
"""

import numpy as np
from scipy.special import roots_laguerre

from .errors import BranchError, DomainError

EULER = float(np.euler_gamma)
SERIES_RADIUS = 4.0
# |z| above which the E1 exponent would overflow double precision.
MAX_COMPLEX_ABS = 700.0

_SERIES_TERMS = 64
_CF_MAX_ITER = 4000
_LAGUERRE_ORDER = 160
_laguerre_cache = {}


def _laguerre(n=_LAGUERRE_ORDER):
    if n not in _laguerre_cache:
        _laguerre_cache[n] = roots_laguerre(n)
    return _laguerre_cache[n]


def _series(z):
    """Compensated sums of h_e(z) and of the odd series of si (without -pi/2)."""
    z = np.asarray(z, dtype=complex)
    term = np.ones_like(z)
    even = np.zeros_like(z)
    even_c = np.zeros_like(z)
    odd = np.zeros_like(z)
    odd_c = np.zeros_like(z)
    for n in range(1, _SERIES_TERMS + 1):
        term = term * z / n
        sign = -1.0 if (n // 2) % 2 else 1.0
        if n % 2:
            y = sign * term / n - odd_c
            t = odd + y
            odd_c = (t - odd) - y
            odd = t
        else:
            y = sign * term / n - even_c
            t = even + y
            even_c = (t - even) - y
            even = t
    return even, odd


def _e1_series_scaled(u):
    # e^u E1(u) from E1(u) = -gamma - Log u - sum (-u)^n / (n n!)
    term = np.ones_like(u)
    s = np.zeros_like(u)
    c = np.zeros_like(u)
    for n in range(1, 200):
        term = term * (-u) / n
        y = term / n - c
        t = s + y
        c = (t - s) - y
        s = t
    return np.exp(u) * (-EULER - np.log(u) - s)


def _e1_cf_scaled(u):
    # modified Lentz on e^u E1(u) = 1/(u+1- 1/(u+3- 4/(u+5- ...)))
    tiny = 1e-300
    b = u + 1.0
    c = np.full_like(u, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, _CF_MAX_ITER):
        a = -float(i * i)
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h = h * delta
        if i % 8 == 0 and np.all(np.abs(delta - 1.0) < 4e-16):
            break
    return h


def e1_scaled(u):
    """e^u E1(u) for u off the negative real axis (a signed zero imaginary part picks the side)."""
    u = np.asarray(u, dtype=complex)
    out = np.empty_like(u)
    absu = np.abs(u)
    near_cut = (np.abs(np.angle(u)) > 0.88 * np.pi) & (absu <= 45.0)
    use_series = near_cut | (absu <= 2.0)
    if np.any(use_series):
        out[use_series] = _e1_series_scaled(u[use_series])
    rest = ~use_series
    if np.any(rest):
        out[rest] = _e1_cf_scaled(u[rest])
    return out


def _rotated_pair(z):
    """(iz, -iz) for Re z >= 0, with signed zeros placing points of the
    imaginary axis on the side reached from Re z > 0."""
    u1 = 1j * z
    u2 = -1j * z
    on_axis = z.real == 0.0
    u1.imag[on_axis] = 0.0
    u2.imag[on_axis] = -0.0
    return u1, u2


def _ci_si_right(z):
    """ci and si for Re z >= 0, |z| > SERIES_RADIUS, via E1(+-iz)."""
    u1, u2 = _rotated_pair(z)
    e_a = np.exp(-u1) * e1_scaled(u1)
    e_b = np.exp(-u2) * e1_scaled(u2)
    return 0.5 * (e_a + e_b), (e_a - e_b) / 2j


def _ci_si_e1(z):
    """Large-argument route for complex z off the cut."""
    z = np.asarray(z, dtype=complex)
    ci = np.empty_like(z)
    si = np.empty_like(z)
    right = z.real >= 0.0
    if np.any(right):
        ci[right], si[right] = _ci_si_right(z[right])
    left = ~right
    if np.any(left):
        w = -z[left]
        ci_w, si_w = _ci_si_right(w)
        ci[left] = ci_w - 1j * np.pi * np.sign(z[left].imag)
        si[left] = -np.pi - si_w
    return ci, si


def _ci_si_small(z):
    even, odd = _series(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        ci = -EULER - np.log(z) - even
    return ci, -np.pi / 2 + odd


def _ci_si(z):
    z = np.asarray(z, dtype=complex)
    ci = np.empty_like(z)
    si = np.empty_like(z)
    small = np.abs(z) <= SERIES_RADIUS
    if np.any(small):
        ci[small], si[small] = _ci_si_small(z[small])
    if np.any(~small):
        ci[~small], si[~small] = _ci_si_e1(z[~small])
    return ci, si


def _real_ci_si(rho):
    rho = np.asarray(rho, dtype=float)
    ci = np.empty_like(rho)
    si = np.empty_like(rho)
    small = rho <= SERIES_RADIUS
    if np.any(small):
        c, s = _ci_si_small(rho[small].astype(complex))
        ci[small], si[small] = c.real, s.real
    big = ~small
    if np.any(big):
        r = rho[big]
        e = np.exp(-1j * r) * e1_scaled(1j * r)
        ci[big], si[big] = e.real, e.imag
    return ci, si


def _check_positive(rho, name="rho"):
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0)):
        raise DomainError(f"{name} must be positive")
    return rho


def _scalar(x, like):
    return x.item() if np.ndim(like) == 0 else x


def ci_real(rho):
    """ci(rho) = int_rho^inf cos t / t dt for rho > 0."""
    r = _check_positive(rho)
    return _scalar(_real_ci_si(r)[0], rho)


def si_real(rho):
    """si(rho) = -int_rho^inf sin t / t dt for rho > 0."""
    r = _check_positive(rho)
    return _scalar(_real_ci_si(r)[1], rho)


def _check_complex(z):
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > MAX_COMPLEX_ABS):
        raise DomainError(f"|z| > {MAX_COMPLEX_ABS} not supported")
    return z


def ci_complex(z):
    """Principal branch of ci on C minus (-inf, 0]."""
    zz = _check_complex(z)
    if np.any((zz.imag == 0) & (zz.real <= 0)):
        raise BranchError("ci is cut along (-inf, 0]")
    return _scalar(_ci_si(zz)[0], z)


def si_complex(z):
    """Entire continuation of si."""
    zz = _check_complex(z)
    small = np.abs(zz) <= SERIES_RADIUS
    out = np.empty_like(zz)
    if np.any(small):
        out[small] = -np.pi / 2 + _series(zz[small])[1]
    if np.any(~small):
        out[~small] = _ci_si_e1(zz[~small])[1]
    return _scalar(out, z)


def h_e(z):
    """Even entire part h_e(z) = sum_{m>=1} (-1)^m z^(2m) / ((2m)! 2m)."""
    zz = _check_complex(z)
    out = np.empty_like(zz)
    small = np.abs(zz) <= SERIES_RADIUS
    if np.any(small):
        out[small] = _series(zz[small])[0]
    big = ~small
    if np.any(big):
        # h_e is even, so evaluate where Log is smooth and ci is defined
        w = np.where(zz[big].real >= 0, zz[big], -zz[big])
        w = np.where((w.real == 0) & (w.imag < 0), -w, w)
        out[big] = -EULER - np.log(w) - _ci_si_e1(w)[0]
    return _scalar(out, z)


def aux_f(rho):
    """f(rho) = int_0^inf e^(-rho t) / (1 + t^2) dt.

    Gauss-Laguerre for rho >= 1.  Below that the poles at t = +-i sit too
    close to the Laguerre weight's origin, and f = -(sin rho ci + cos rho si)
    through the power series has no cancellation.
    """
    r = _check_positive(rho)
    flat = np.atleast_1d(r).ravel()
    out = np.empty_like(flat)
    big = flat >= 1.0
    if np.any(big):
        x, w = _laguerre()
        rb = flat[big][:, None]
        out[big] = np.sum(w / (rb + x * x / rb), axis=1)
    if np.any(~big):
        rs = flat[~big]
        ci, si = _real_ci_si(rs)
        out[~big] = -(np.sin(rs) * ci + np.cos(rs) * si)
    return _scalar(out.reshape(np.shape(r)), rho)


def aux_fg(rho):
    """Fast vectorised (f, g) on the positive axis through the ci/si route."""
    rho = _check_positive(rho)
    f = np.empty_like(rho)
    g = np.empty_like(rho)
    small = rho <= SERIES_RADIUS
    if np.any(small):
        r = rho[small]
        ci, si = _ci_si_small(r.astype(complex))
        ci, si = ci.real, si.real
        f[small] = -(np.sin(r) * ci + np.cos(r) * si)
        g[small] = np.cos(r) * ci - np.sin(r) * si
    big = ~small
    if np.any(big):
        s = e1_scaled(1j * rho[big])
        f[big] = -s.imag
        g[big] = s.real
    return f, g


def aux_f_complex(w):
    """Analytic continuation of f to C minus (-inf, 0].

    On Re w >= 0 this is the Laplace integral; on the left half plane
    f(w) = pi exp(i sgn(Im w) w) - f(-w).
    """
    w = np.asarray(w, dtype=complex)
    if np.any((w.imag == 0) & (w.real <= 0)):
        raise BranchError("f is cut along (-inf, 0]")
    out = np.empty_like(w)
    right = w.real >= 0
    if np.any(right):
        out[right] = _f_right(w[right])
    left = ~right
    if np.any(left):
        wl = w[left]
        out[left] = np.pi * np.exp(1j * np.sign(wl.imag) * wl) - _f_right(-wl)
    return out


def _f_right(w):
    out = np.empty_like(w)
    small = np.abs(w) <= SERIES_RADIUS
    if np.any(small):
        ci, si = _ci_si_small(w[small])
        out[small] = -(np.sin(w[small]) * ci + np.cos(w[small]) * si)
    big = ~small
    if np.any(big):
        u1, u2 = _rotated_pair(w[big])
        out[big] = 0.5j * (e1_scaled(u1) - e1_scaled(u2))
    return out
