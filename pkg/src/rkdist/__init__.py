"""Distances between finite subsets of the unit ball of C^d and between the
Drury-Arveson spaces and multiplier algebras they carry."""

from .ball import BallAutomorphism, PointSet, pseudohyperbolic
from .config import OptimizerConfig
from .errors import RKDistError, ValidationError
from .mult_bm import min_multiplier_norm, mult_bm_bracket, mult_discrepancy, PickInstance
from .rkhs_bm import rk_bm_distance
from .set_metrics import hausdorff, invariant_hausdorff, invariant_symmetric, symmetric

__version__ = "0.1.0"

__all__ = [
    "BallAutomorphism",
    "OptimizerConfig",
    "PickInstance",
    "PointSet",
    "RKDistError",
    "ValidationError",
    "hausdorff",
    "invariant_hausdorff",
    "invariant_symmetric",
    "min_multiplier_norm",
    "mult_bm_bracket",
    "mult_discrepancy",
    "pseudohyperbolic",
    "rk_bm_distance",
    "symmetric",
]
