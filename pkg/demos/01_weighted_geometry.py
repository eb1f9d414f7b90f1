"""
Weighted curvature on warped products
=====================================

The modified Hessian of ``u = r^2/2`` computed two ways, and the weighted
sectional curvature that enters the hypotheses.
"""

import numpy as np

from radialcomp import build_model, make_grid
from radialcomp.weighted import mchess_u_via_conformal, mhess_u, min_weighted_sec

# flat R^3 with the bounded density phi = -1/(1+r)
m = build_model({"warp": "identity", "density": {"kind": "bounded", "params": {"b": 1.0}}, "n": 3})
r = np.array([0.5, 1.0, 2.0, 4.0])

direct = mhess_u(m, r)
conformal = mchess_u_via_conformal(m, r)
print("r          radial     tangential")
for ri, a, b in zip(r, direct.radial, direct.tangential):
    print(f"{ri:<10} {a:<10.6f} {b:.6f}")
print("max disagreement of the two routes:",
      float(np.max(np.abs(direct.radial - conformal.radial))))

# the density makes the flat base fail sec_phi >= 0 near the pole
value, where = min_weighted_sec(m, make_grid(0.1, 10.0, 1000))
print(f"min weighted sec = {value:.6f} at r = {where['r']}, psi = {where['psi']}")

for warp, dom in (("sin", [0, 3]), ("sinh", None)):
    model = build_model({"warp": warp, "n": 3, "r_domain": dom})
    print(warp, "min weighted sec:", round(min_weighted_sec(model, make_grid(0.1, 2.9, 100))[0], 12))
