"""
Equality cases and conical rigidity
===================================

With density ``(1 - K) log r + F(theta)`` on the flat plane the modified
Hessian equals ``K g`` exactly, and the reconstructed sphere metric is the
same flat cone for every ``K``.
"""

from radialcomp import build_model, make_grid
from radialcomp.rigidity import conical_check, umbilicity_gap

grid = make_grid(0.1, 10.0, 400, theta_samples=16)
for K in (0.5, 1.0, 2.0):
    m = build_model({"warp": "identity", "n": 2, "r_domain": [0.05, 20],
                     "density": {"kind": "cone_log", "params": {"K": K, "F": {"sin": 0.1}}}})
    v = conical_check(m, K, grid)
    print(f"K={K}: {v.kind:<14} worst residual {v.max_deviation:.1e}  g_r / r^2 = {v.extra['cone_scale']:.9f}")

# f = r^2 with K = 2 reaches the umbilic equality but is not a flat cone
cone = build_model({"warp": {"kind": "power", "params": {"K": 2.0}}, "n": 3})
print("r^2 warp:", conical_check(cone, 2.0, make_grid(0.25, 10, 40)).kind,
      "umbilicity gap", float(umbilicity_gap(cone, 2.0, make_grid(0.25, 10, 40)).values.max()))

# a one percent bend of the warp is detected
bent = build_model({"warp": {"kind": "perturbed_cone", "params": {"eps": 0.01}}, "n": 3})
v = conical_check(bent, 1.0, make_grid(0.5, 2.0, 50))
print("perturbed cone:", v.kind, "cone residual", round(v.residuals["cone"], 6))
