"""Windowed eigen-residual of converged solutions under box refinement.

For each grid the solution is interpolated onto periodic boxes of increasing
size and resolution; the residual of (sqrt(-Delta) + V - lambda) on the window
should fall as the box grows.

    python3 scripts/eigen_residual_study.py
"""
import argparse
from dataclasses import dataclass
import math
import sys

from relscatter import grids, solver
from relscatter import verify as vf
from relscatter.cli import csv_text


@dataclass(frozen=True)
class ResidualStudy:
    lam: float = 0.3 * math.pi
    C: float = 0.05
    sigma: float = 4.0
    grids: tuple = ((16.0, 24, 12), (16.0, 48, 24))
    boxes: tuple = ((10.0, 32), (10.0, 64), (20.0, 128))


def run(study):
    V = solver.Potential(study.C, study.sigma)
    rows = []
    for R, n_r, n_ang in study.grids:
        sol = solver.nystrom_solve_radial(study.lam, "+", V, grids.build_radial_grid(R, n_r, n_ang))
        for half, n in study.boxes:
            res = vf.eigen_residual(sol, V, vf.PeriodicBox(half, n))
            rows.append((R, float(n_r), float(n_ang), half, float(n), res))
            print(f"grid ({R:g},{n_r},{n_ang}) box ({half:g},{n}): {res:.3e}", file=sys.stderr)
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--lambda", dest="lam", type=float, default=ResidualStudy.lam)
    args = p.parse_args(argv)
    rows = run(ResidualStudy(lam=args.lam))
    sys.stdout.write(csv_text(["R_dom", "N_r", "N_ang", "box_half_width", "box_n", "residual"], rows))


if __name__ == "__main__":
    main()
