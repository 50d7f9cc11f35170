"""Decay rates of psi and of the far-field error along the default rays.

Solves the radial Nystrom system, attaches the Born tail out to the outer
radius, and fits power laws for several potential decay rates.  Writes one CSV
row per (sigma, ray).

    python3 scripts/farfield_rates.py --sigma 4 --sigma 2.5 --out rates.csv
"""
import argparse
from dataclasses import dataclass, field
import sys

import numpy as np

from relscatter import farfield as ff, grids, solver
from relscatter.cli import csv_text, write_text


@dataclass(frozen=True)
class RateStudy:
    sigmas: tuple = (4.0, 3.5, 2.5)
    C: float = 0.05
    lam: float = 1.0
    core_radius: float = 8.0
    n_r: int = 32
    n_ang: int = 16
    outer_radius: float = 200.0
    rays: tuple = field(default=(0, 1, 2))


def run(study):
    grid = grids.build_radial_grid(study.core_radius, study.n_r, study.n_ang)
    omega_k = np.array([0.0, 0.0, 1.0])
    rays = ff.default_rays(omega_k)
    rows = []
    for sigma in study.sigmas:
        V = solver.Potential(study.C, sigma)
        sol = solver.nystrom_solve_radial(study.lam, "+", V, grid)
        fld = ff.TwoZoneField(sol, V, study.outer_radius)
        for i in study.rays:
            ray = rays[i]
            f = fld.amplitude(ray)
            plane = ff.planewave_diff_decay(fld, ray)
            far = ff.farfield_error_decay(fld, f, ray)
            wrong = ff.farfield_error_decay(fld, f, ray, outgoing=False)
            fit = ff.amplitude_fit(fld, ray, sigma) if sigma > 3 else complex("nan")
            rows.append((sigma, float(i), plane.exponent, far.exponent, wrong.exponent,
                         abs(f), abs(fit - f) / abs(f)))
        env = ff.envelope_decay(fld, rays)
        print(f"sigma={sigma:g}: envelope exponent {env.exponent:.4f}", file=sys.stderr)
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sigma", type=float, action="append")
    p.add_argument("--C", type=float, default=RateStudy.C)
    p.add_argument("--out")
    args = p.parse_args(argv)
    study = RateStudy(sigmas=tuple(args.sigma) if args.sigma else RateStudy.sigmas, C=args.C)
    header = ["sigma", "ray", "planewave_exponent", "farfield_exponent", "incoming_control_exponent",
              "abs_amplitude", "amplitude_fit_rel_dev"]
    text = csv_text(header, run(study))
    if args.out:
        write_text(args.out, text)
    sys.stdout.write(text)


if __name__ == "__main__":
    main()
