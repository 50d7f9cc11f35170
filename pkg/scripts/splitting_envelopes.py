"""Ratio of each far-field splitting piece to its envelope over |x|.

Bounded ratios across three decades of |x| confirm the envelope exponents; the
near-phase piece is divided by |a| to expose its linear dependence on a.

    python3 scripts/splitting_envelopes.py --sigma 3.5
"""
import argparse
from dataclasses import dataclass
import sys

import numpy as np

from relscatter import farfield as ff
from relscatter.cli import csv_text


@dataclass(frozen=True)
class SplittingStudy:
    sigma: float = 4.0
    a_values: tuple = (0.5, 1.0, 2.0)
    rho_min: float = 10.0
    rho_max: float = 1e4
    n_rho: int = 13


def run(study):
    env = ff.splitting_envelopes(study.sigma)
    rows = []
    for a in study.a_values:
        for rho in np.geomspace(study.rho_min, study.rho_max, study.n_rho):
            parts = ff.splitting_integrals(a, rho, study.sigma)
            ratios = {k: abs(v) / env[k](rho) for k, v in parts.items()}
            ratios["near_phase"] /= abs(a)
            rows.append((a, rho) + tuple(ratios[k] for k in sorted(ratios)))
    return sorted(env), rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sigma", type=float, default=SplittingStudy.sigma)
    args = p.parse_args(argv)
    names, rows = run(SplittingStudy(sigma=args.sigma))
    sys.stdout.write(csv_text(["a", "rho"] + [n + "_ratio" for n in names], rows))
    worst = max(max(r[2:]) for r in rows)
    print(f"largest envelope ratio {worst:.3f}", file=sys.stderr)


if __name__ == "__main__":
    main()
