"""Regenerate tests/oracles.py from high-precision mpmath evaluations.

Only mpmath is used for the reference values; the package is imported solely
to read grid node coordinates for the Born first-iterate check.

    python3 scripts/freeze_oracles.py > tests/oracles.py
"""
import mpmath as mp
import numpy as np

from relscatter import grids

mp.mp.dps = 30

BORN_GRID = (10.0, 24, 12, 16)
BORN_NODES = [(3, 5, 0), (9, 2, 3), (12, 7, 8), (15, 10, 13), (18, 0, 5)]  # (radial, polar, azimuthal) indices
BORN_C, BORN_SIGMA, BORN_K = 0.05, 4, (0.0, 0.0, 1.0)


def aux_f(w):
    return mp.quad(lambda t: mp.exp(-w * t) / (1 + t * t), [0, 1, 10, mp.inf])


def aux_f_fast(w):
    # f(w) = sin w Ci(w) - cos w (Si(w) - pi/2)
    return mp.sin(w) * mp.ci(w) - mp.cos(w) * (mp.si(w) - mp.pi / 2)


def g_z(z, r):
    return 1 / (2 * mp.pi ** 2 * r * r) + z / (2 * mp.pi ** 2 * r) * aux_f(-z * r)


def g_minus(lam, d):
    return (1 / (2 * mp.pi ** 2 * d * d) + lam / (2 * mp.pi) * mp.expj(-lam * d) / d
            - lam / (2 * mp.pi ** 2 * d) * aux_f_fast(lam * d))


def born_first_iterate(x, R):
    """e^{ik.x} - int_{|y|<R} g^-(x - y) V(y) e^{ik.y} dy around x, the sphere integral reduced by a J0 factor."""
    k = np.array(BORN_K)
    lam = mp.mpf(np.linalg.norm(k))
    x = np.asarray(x, dtype=float)
    rho = mp.mpf(float(np.linalg.norm(x)))
    xh = x / float(rho)
    kap = mp.mpf(float(k @ xh))
    kperp = mp.mpf(float(np.linalg.norm(k - float(kap) * xh)))
    V = lambda s2: BORN_C * (1 + s2) ** (-mp.mpf(BORN_SIGMA) / 2)

    def shell(d):
        cmax = 1 if d <= R - rho else (R * R - rho * rho - d * d) / (2 * rho * d)
        f = lambda c: V(rho * rho + d * d + 2 * rho * d * c) * mp.expj(d * kap * c) * mp.besselj(0, d * kperp * mp.sqrt(1 - c * c))
        return 2 * mp.pi * d * d * g_minus(lam, d) * mp.quad(f, [-1, cmax])

    edges = sorted({mp.mpf(0), min(rho, R - rho), R - rho, R + rho})
    phase = mp.expj(float(k @ x))
    return phase * (1 - mp.quad(shell, edges))


def main():
    out = ['"""Reference values frozen from high-precision mpmath evaluations.',
           '',
           'ci and si follow the package convention ci = -Ci, si = Si - pi/2.  aux_f and',
           'the kernel values come from mpmath quadrature of the defining integrals.',
           'Regenerate with scripts/freeze_oracles.py.',
           '"""', '']
    out.append("CI_SI = {")
    for r in ["1e-6", "1e-3", "0.5", "1", "3", "10", "100", "1e4", "1e6"]:
        x = mp.mpf(r)
        out.append(f"    {float(x)!r}: ({float(-mp.ci(x))!r}, {float(mp.si(x) - mp.pi / 2)!r}),")
    out += ["}", "", "# (z, ci(z), si(z)) on the principal branch", "CI_SI_COMPLEX = ["]
    for z in [mp.mpc(1, 0.5), mp.mpc(-2, 1), mp.mpc(0.3, -4), mp.mpc(5, 5), mp.mpc(-10, -0.1), mp.mpc(20, 3)]:
        out.append(f"    ({complex(z)!r}, {complex(-mp.ci(z))!r}, {complex(mp.si(z) - mp.pi / 2)!r}),")
    out += ["]", "", "AUX_F = {"]
    for r in ["0.01", "0.1", "1", "3", "10", "1e4"]:
        out.append(f"    {float(mp.mpf(r))!r}: {float(aux_f(mp.mpf(r)))!r},")
    out += ["}", "", "# (z, r, g_z(r))", "G_Z = ["]
    for z, r in [(-1, 1), (-2, 5), (mp.mpc(-3, 1), 2), (mp.mpc(-0.5, -2), 0.1), (mp.mpc(-1, 2), 20)]:
        out.append(f"    ({complex(z)!r}, {float(r)!r}, {complex(g_z(mp.mpc(z), mp.mpf(r)))!r}),")
    out += ["]", "", "# m_1(r)", "M_ONE = {"]
    for r in ["0.01", "0.5", "2", "50", "1e4"]:
        x = mp.mpf(r)
        out.append(f"    {float(x)!r}: {float(-1 / (2 * mp.pi ** 2 * x) * aux_f(x))!r},")
    out += ["}", ""]

    mp.mp.dps = 15
    grid = grids.build_ball_grid(*BORN_GRID)
    out += [f"# first Born iterate for V = {BORN_C} <y>^-{BORN_SIGMA}, k = {BORN_K}, truncated to |y| < {BORN_GRID[0]}",
            f"BORN_GRID = {BORN_GRID!r}", "BORN_FIRST = ["]
    for ir, imu, iphi in BORN_NODES:
        node = (ir * grid.n_mu + imu) * grid.n_phi + iphi
        x = grid.nodes[node]
        val = complex(born_first_iterate(x, mp.mpf(BORN_GRID[0])))
        out.append(f"    ({node}, {val!r}),")
    out += ["]", ""]
    print("\n".join(out))


if __name__ == "__main__":
    main()
