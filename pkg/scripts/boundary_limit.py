"""Approach of the interior kernel g_{lam + i mu} to the boundary kernel as mu -> 0.

Prints the relative gap for each (lam, r) and mu decade.  The gap is first
order in mu with a slope near r, so at mu = 1e-5 it sits around r * 1e-5.

    python3 scripts/boundary_limit.py
"""
import sys

import numpy as np

from relscatter import kernels
from relscatter.cli import csv_text


def main():
    mus = 10.0 ** -np.arange(1, 7)
    rows = []
    for lam in (0.5, 1.0, 2.0):
        for r in (0.5, 2.0, 10.0):
            ref = kernels.g_boundary(lam, "+", r).total
            for mu in mus:
                gap = abs(kernels.g_z(complex(lam, mu), r) - ref) / abs(ref)
                rows.append((lam, r, mu, gap, gap / mu))
    sys.stdout.write(csv_text(["lambda", "r", "mu", "rel_gap", "rel_gap_over_mu"], rows))


if __name__ == "__main__":
    main()
