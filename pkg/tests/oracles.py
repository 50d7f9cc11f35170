"""Reference values frozen from high-precision mpmath evaluations.

ci and si follow the package convention ci = -Ci, si = Si - pi/2.  aux_f and
the kernel values come from mpmath quadrature of the defining integrals.
Regenerate with scripts/freeze_oracles.py.
"""

CI_SI = {
    1e-06: (13.23829489306299, -1.5707953267948966),
    0.001: (6.330539864080594, -1.5697963268504522),
    0.5: (0.1777840788066129, -1.07768890875183),
    1.0: (-0.33740392290096816, -0.6247132564277136),
    3.0: (-0.11962978600800032, 0.27785620120457166),
    10.0: (0.04545643300445537, 0.08755126742397742),
    100.0: (0.005148825142610492, -0.008570859905840326),
    10000.0: (3.0551916724485215e-05, 9.521859106529649e-05),
    1000000.0: (3.499944389227205e-07, -9.367517775377691e-07),
}

# (z, ci(z), si(z)) on the principal branch
CI_SI_COMPLEX = [
    ((1+0.5j), (-0.4971469507996208-0.22910947988983094j), (-0.5866032535419936+0.425752239757168j)),
    ((-2+1j), (-0.5844759968782477-3.439087831227927j), (-3.40400624829974+0.457691711286688j)),
    ((0.3-4j), (-9.584559494628737-0.4581745504223713j), (0.4568340640188956-9.588084689011891j)),
    ((5+5j), (6.735831361070641-9.23227803856133j), (-9.231807010759695-6.735104710404605j)),
    ((-10-0.1j), (0.045770713110340824+3.149995264777901j), (-3.2295365177778264+0.005451900323199485j)),
    ((20+3j), (-0.4739698984722094-0.15652344187311215j), (-0.15793221479762204+0.47198259789256075j)),
]

AUX_F = {
    0.01: 1.5204392192982372,
    0.1: 1.2910047283091013,
    1.0: 0.6214496242358134,
    3.0: 0.29195771069207876,
    10.0: 0.09819103501017017,
    10000.0: 9.999999800000024e-05,
}

# (z, r, g_z(r))
G_Z = [
    ((-1+0j), 1.0, (0.01917758607033956+0j)),
    ((-2+0j), 5.0, (3.66572947874216e-05+0j)),
    ((-3+1j), 2.0, (0.0004485211243318343+0.000269339661539757j)),
    ((-0.5-2j), 0.1, (4.3979692446914465-1.1580145535373614j)),
    ((-1+2j), 20.0, (-7.576717471975847e-08+1.0205452198511579e-07j)),
]

# m_1(r)
M_ONE = {
    0.01: -7.702635067776469,
    0.5: -0.08718959045928708,
    2.0: -0.010107319715624617,
    50.0: -2.0248102240178488e-05,
    10000.0: -5.066059080795717e-10,
}

# first Born iterate for V = 0.05 <y>^-4, k = (0.0, 0.0, 1.0), truncated to |y| < 10.0
BORN_GRID = (10.0, 24, 12, 16)
BORN_FIRST = [
    (656, (0.9726413412643455-0.04742241307386797j)),
    (1763, (-0.8644353887049817-0.48919744552032607j)),
    (2424, (-0.378192484260841+0.9238646617777605j)),
    (3053, (0.9793090708692537+0.1982586111923784j)),
    (3461, (-0.627803002606819-0.7706543149817542j)),
]

