"""Sign of ``Phi = F''(u) phi_F(u,v) + F''(v) phi_F(v,u) - (F'(v) - F'(u))^2`` by generator.

``psi = 1 + Phi / (F'(v) - F'(u))^2``, so ``psi <= 1`` exactly when
``Phi <= 0``.  The scan shows ``Phi <= 0`` for log-concave ``F''`` and
``Phi >= 0`` for log-convex ``F''``; one point is cross-checked in 40-digit
arithmetic.

    python scripts/psi_log_convex.py
"""

import mpmath as mp
import numpy as np

from bregquant import divergence as dv
from bregquant.geometry1d import psi_phi

mp.mp.dps = 40

CASES = [
    ("SquaredNorm", dv.squared_norm(), (-5, 5)),
    ("SoftPlus a=1", dv.softplus(1.0), (-5, 5)),
    ("SoftButterfly a=1", dv.soft_butterfly(1.0), (-5, 5)),
    ("Exponential a=1", dv.exponential(1.0), (-3, 3)),
    ("NormLike lam=3", dv.norm_like(3.0), (0.05, 5)),
    ("NormLike lam=1.5", dv.norm_like(1.5), (0.05, 5)),
    ("ItakuraSaito", dv.itakura_saito(), (0.05, 5)),
    ("KullbackLeibler", dv.kullback_leibler(), (0.05, 5)),
    ("Logistic", dv.logistic(), (0.02, 0.98)),
]


def main():
    for name, fn, (a, b) in CASES:
        x = a + (b - a) * (np.arange(60) + 0.5) / 60
        i, j = np.triu_indices(60, k=1)
        psi, big = psi_phi(fn, x[i], x[j])
        print(f"{name:18s} {fn.log_curvature.value:10s} psi in [{psi.min():.4f}, {psi.max():.4f}]  "
              f"Phi in [{big.min():.3e}, {big.max():.3e}]")
    u, v = mp.mpf("0.3"), mp.mpf(2)

    def F(t):
        return -mp.log(t)

    def phi(s, t):
        return F(s) - F(t) - mp.diff(F, t) * (s - t)

    d1 = mp.diff(F, v) - mp.diff(F, u)
    big = mp.diff(F, u, 2) * phi(u, v) + mp.diff(F, v, 2) * phi(v, u) - d1**2
    print(f"ItakuraSaito at (0.3, 2): Phi = {mp.nstr(big, 12)}, psi = {mp.nstr(1 + big / d1**2, 12)} "
          f"(40-digit evaluation)")


if __name__ == "__main__":
    main()
