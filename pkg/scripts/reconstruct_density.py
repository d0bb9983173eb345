"""Density reconstruction ``mass_i / width_i`` at the codes of an optimal quantizer.

    python scripts/reconstruct_density.py [--n 100] [--a 1.0] [--out DIR]
"""

import argparse
import csv
from pathlib import Path

import numpy as np
from scipy import stats

from bregquant import distribution as ds
from bregquant import divergence as dv
from bregquant.distortion import distortion
from bregquant.solver import SolverConfig, lloyd


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--out", type=Path, default=Path("out/reconstruction"))
    args = p.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    d = ds.truncate_support(ds.gaussian(), 1e-12)
    fn = dv.softplus(args.a)
    cb, cl, _ = lloyd(fn, d, args.n, cfg=SolverConfig(residual_tol=1e-8))
    mass = distortion(fn, d, cb).mass
    est = mass / cl.widths
    exact = stats.norm.pdf(cb.codes)
    print(f"n={args.n}, a={args.a:g}: max |estimate - density| {np.max(np.abs(est - exact)):.3e}")
    with open(args.out / f"reconstruction_n{args.n}_a{args.a:g}.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "code", "density_estimate", "density"])
        w.writerows([(i + 1, "%.12g" % c, "%.12g" % e, "%.12g" % x)
                     for i, (c, e, x) in enumerate(zip(cb.codes, est, exact))])


if __name__ == "__main__":
    main()
