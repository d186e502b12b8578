"""Eigenvalue statistics of products of induced quaternion Ginibre matrices."""

__version__ = "0.1.0"

from qginibre.ensemble import EnsembleParams, build_basis, eval_poly, log_h  # noqa: E402
from qginibre.correlations import (  # noqa: E402
    PrekernelEvaluator,
    correlation_Rk,
    density_R1,
    jpdf,
    pfaffian,
    weight,
)
from qginibre.radial import ScaledParams, radial_density, radial_density_scaled  # noqa: E402
from qginibre.specfun import MellinBarnesConfig, meijer_g  # noqa: E402
