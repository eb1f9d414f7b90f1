"""
Ball volumes and polynomial growth
==================================
"""

import math

import numpy as np

from radialcomp import DensityBounds, build_model, make_grid
from radialcomp import volume as vol

flat = build_model({"warp": "identity", "n": 3})
print("vol B_2 in R^3:", vol.ball_volume(flat, 2.0).value, " 32 pi / 3 =", 32 * math.pi / 3)

R = np.geomspace(0.5, 8.0, 9)
for K, n in ((1.0, 3), (2.0, 3), (0.5, 2)):
    m = build_model({"warp": {"kind": "power", "params": {"K": K}}, "n": n})
    print(f"cone K={K}, n={n}: fitted exponent {vol.fit_growth_exponent(m, R):.4f}, expected {(n - 1) * K + 1}")

# weighted volume is sandwiched between vol and e^{-a} vol
b = build_model({"warp": "identity", "density": {"kind": "bounded", "params": {"b": 1.0}}, "n": 3})
rows, slope = vol.growth_table(b, R)
for row in rows[::4]:
    print(f"R={row['R']:<6.3f} vol={row['vol']:<12.5g} wvol={row['wvol']:<12.5g} "
          f"ratio={row['wvol'] / row['vol']:.4f}")

# the normalized density is non-increasing; constant in the equality case
K = DensityBounds(-0.1, 0.1).K
rep = vol.check_normalized_monotonicity(flat, K, make_grid(0.1, 10.0, 200))
print("normalized density range:", rep.extra["norm_density_range"], "monotone:", rep.passed)
print("A~(2) at K = 1.3435:", float(vol.normalized_density(flat, K, 2.0)))
