"""Lie-group constrained EKF for lower-body inertial pose estimation."""

from .biomech import LEFT, RIGHT, BodyParams, ImuFrame, NoiseParams
from .errors import (
    DegenerateProjection,
    InfeasibleGait,
    LengthMismatch,
    LgposeError,
    MalformedAlgebra,
    NearPiRotation,
    NonFiniteState,
    NonSkewInput,
    SchemaError,
    SingularConstraintGram,
    SingularInnovation,
    ZeroReferenceDistance,
)
from .filter import FilterConfig, FilterTrace, constraint_update, measurement_update, predict, run_filter
from .gaitsim import GaitParams, GroundTruth, corrupt, generate, standing_state
from .metrics import pearson_cc, rmse_bias_removed, ttd_deviation
from .state import Belief, PoseState

__all__ = [
    "LEFT",
    "RIGHT",
    "Belief",
    "BodyParams",
    "DegenerateProjection",
    "FilterConfig",
    "FilterTrace",
    "GaitParams",
    "GroundTruth",
    "ImuFrame",
    "InfeasibleGait",
    "LengthMismatch",
    "LgposeError",
    "MalformedAlgebra",
    "NearPiRotation",
    "NoiseParams",
    "NonFiniteState",
    "NonSkewInput",
    "PoseState",
    "SchemaError",
    "SingularConstraintGram",
    "SingularInnovation",
    "ZeroReferenceDistance",
    "constraint_update",
    "corrupt",
    "generate",
    "measurement_update",
    "pearson_cc",
    "predict",
    "rmse_bias_removed",
    "run_filter",
    "standing_state",
    "ttd_deviation",
]

__version__ = "0.1.0"
