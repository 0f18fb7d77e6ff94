"""Schwarz symmetrization of an anisotropic test function.

An anisotropic Gaussian profile on the flat chart is rearranged into a
radial function with the same superlevel-set volumes.  Mass and entropy
depend only on the distribution function, so they must survive the
rearrangement unchanged; the Dirichlet energy may only decrease.  The
script prints the bookkeeping and the per-level Hoelder margin that
drives the inequality.
"""

import numpy as np

from curvex import (
    ModelSpec,
    build_normal_chart,
    build_test_function,
    make_chart,
    symmetrize,
)

ch = make_chart(ModelSpec("flat", 3, halfwidth=2.0))
nc = build_normal_chart(ch, np.zeros(3), 1.6)
tf = build_test_function(
    nc, mode=np.diag([0.3, -0.1, 0.05]), alpha=0.0, r_s=1.6
)
res = symmetrize(tf, t=0.01, K=0.0, levels=512, order=32)

print("anisotropic profile a = diag(0.3, -0.1, 0.05), t = 0.01, 512 levels\n")
print(f"  mass       original {res.mass_original:.12f}")
print(f"             rearranged {res.mass_symmetrized:.12f}")
print(f"             drift {res.mass_symmetrized - res.mass_original:+.2e}")
print(f"  entropy    original {res.entropy_original:.12f}")
print(f"             rearranged {res.entropy_symmetrized:.12f}")
print(f"             drift {res.entropy_symmetrized - res.entropy_original:+.2e}")
print(f"  Dirichlet  original {res.dirichlet_original:.9f}")
print(f"             rearranged {res.dirichlet_symmetrized:.9f}")
gap = res.dirichlet_original - res.dirichlet_symmetrized
print(f"             gap {gap:+.3e} (must be >= 0)")

margins = res.holder_margin()
print("\nper-level Hoelder margin (coarea x gradient integral - area^2):")
print(f"  min {margins.min():+.3e}, median {np.median(margins):+.3e}")
print(
    "\nlevel-set profile, every 64th level shown"
    f" ({res.levels.size} total):"
)
print(f"  {'level u':>12s} {'volume':>12s} {'ball radius':>12s}")
for i in range(0, res.levels.size, 64):
    print(
        f"  {res.levels[i]:12.5f} {res.volumes[i]:12.6f} {res.r_bar[i]:12.6f}"
    )
