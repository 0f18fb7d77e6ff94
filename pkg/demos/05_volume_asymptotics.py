"""Geodesic-ball volumes: small-radius series and model-space ratios.

Vol(B(p, r)) / (omega_n r^n) expands as 1 + A r^2 + B r^4 with A and B
determined by the curvature at p.  The script fits both coefficients on
the unit 3-sphere from quadrature volumes, compares them with the
prediction, and then tabulates the ratio of ball volumes to model-space
ball volumes, which is constant when the model matches and strictly
decreasing when the reference curvature is too low.
"""

import numpy as np

from curvex import (
    ModelSpec,
    ball_volume,
    bishop_gromov_ratio,
    build_normal_chart,
    fit_volume_series,
    make_chart,
    predict_volume,
    space_form_curvature,
)

ch = make_chart(ModelSpec("space_form", 3, K=1.0))
nc = build_normal_chart(ch, np.zeros(3), 1.0)
radii = np.linspace(0.15, 0.95, 12)
vols = [ball_volume(nc, float(r)) for r in radii]
fit = fit_volume_series(radii, vols, 3)
r2_pred, r4_pred = predict_volume(space_form_curvature(3, 1.0))

print("unit 3-sphere volume series, Vol/(omega_3 r^3) = 1 + A r^2 + B r^4")
print(f"  A fitted {fit.c1:+.6f}   predicted {r2_pred:+.6f} (= -1/5)")
print(f"  B fitted {fit.c2:+.7f}  predicted {r4_pred:+.7f} (= 2/105)")

print("\nball-volume ratios against model spaces:")
print(f"  {'r':>6s} {'S^3 vs K=1':>14s} {'flat vs K=-1':>14s}")
nc_flat = build_normal_chart(
    make_chart(ModelSpec("flat", 3, halfwidth=2.0)), np.zeros(3), 1.3
)
rr = np.linspace(0.15, 1.2, 8)
same = bishop_gromov_ratio(nc, np.minimum(rr, 1.0), 1.0)
lower = bishop_gromov_ratio(nc_flat, rr, -1.0)
for r, a, b in zip(rr, same, lower):
    print(f"  {r:6.3f} {a:14.10f} {b:14.10f}")
print(
    "\nLeft column: matching model, the ratio is 1 to quadrature"
    "\nprecision.  Right column: flat space measured against the"
    "\nhyperbolic model, monotonically decreasing as the comparison"
    "\ninequality demands."
)
