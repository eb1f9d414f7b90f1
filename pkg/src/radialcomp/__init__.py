"""
Radial comparison geometry on rotationally symmetric manifolds with density.

The library evaluates both sides of the modified-Hessian, shape-operator,
Laplacian and volume comparison estimates on warped-product models, integrates
the radial Riccati, Jacobi and metric-evolution equations, and detects the
equality (rigidity) cases.
"""

from .models import (
    DensityBounds,
    ManifoldModel,
    ModelError,
    ModelSpec,
    RadialGrid,
    build_model,
    comparison_constant,
    make_density,
    make_grid,
    make_warp,
    reparam_distance,
)
from .radial import (
    IntegrationError,
    IntegratorConfig,
    RadialSeries,
    consistency_riccati_vs_jacobi,
    integrate_jacobi,
    integrate_metric_evolution,
    integrate_riccati,
)
from .reports import GapReport
from .rigidity import RigidityVerdict, conical_check, cone_density_profile, umbilicity_gap, verify_conformal_rigidity
from .volume import VolumeResult, ball_volume, radial_density, weighted_ball_volume

__version__ = "0.1.0"
