"""
Comparison inequalities and their slack
=======================================

Slack is always RHS - LHS; a check passes when the minimum slack is above
``-tol``. The hypothesis status travels with every report.
"""

from radialcomp import DensityBounds, build_model, make_grid
from radialcomp import comparison as cmp

m = build_model({"warp": "identity", "density": {"kind": "bounded", "params": {"b": 1.0}}, "n": 3})
bounds = DensityBounds(a=-1.0, c=0.25)
grid = make_grid(0.1, 10.0, 1000)
print(f"K = e^(-2a)(1+c) = {bounds.K:.5f}")

for check in (cmp.check_mhess_bound, cmp.check_hessian_comparison, cmp.check_shape_comparison,
              cmp.check_laplacian_comparison, cmp.check_weighted_laplacian_comparison,
              cmp.check_implication_chain):
    rep = check(m, bounds, grid)
    print(f"{rep.name:<32} pass={rep.passed!s:<5} min slack {rep.min_slack:10.4f} at r={rep.argmin['r']:.3f}")

status = cmp.check_hypotheses(m, bounds, grid)
print("hypotheses:", {k: status[k] for k in ("a_le_phi", "grad_bound", "sec_nonneg", "all_hold")})

# equality on the cone f = r^K with the comparison constant set to K
cone = build_model({"warp": {"kind": "power", "params": {"K": 2.0}}, "n": 3})
print("cone Hessian slack range:", cmp.hessian_slack(cone, 2.0, grid).min(),
      cmp.hessian_slack(cone, 2.0, grid).max())

# hyperbolic space: the warp grows too fast and the comparison genuinely fails
hyp = build_model({"warp": "sinh", "n": 3})
print("sinh warp Hessian comparison passes:", cmp.check_hessian_comparison(hyp, 1.0, make_grid(0.1, 5, 200)).passed)
