"""Exception types shared across the package."""


class LgposeError(Exception):
    """Base class for all lgpose errors."""


class NonSkewInput(LgposeError):
    """Matrix handed to a vee map is not skew-symmetric within tolerance."""


class MalformedAlgebra(LgposeError):
    """Matrix does not have the structural zero pattern of its algebra."""


class NearPiRotation(LgposeError):
    """Rotation angle too close to pi; the log formula is singular there."""


class DegenerateProjection(LgposeError):
    """Thigh vector has no usable projection onto the shank sagittal plane."""


class NonFiniteState(LgposeError):
    """Filter state or covariance contains NaN/Inf entries."""


class SingularInnovation(LgposeError):
    """Innovation covariance is numerically singular."""


class SingularConstraintGram(LgposeError):
    """Constraint Gram matrix stayed singular even after jitter."""


class InfeasibleGait(LgposeError):
    """Requested gait geometry exceeds what the leg segments can reach."""


class LengthMismatch(LgposeError):
    """Paired series have different lengths."""


class ZeroReferenceDistance(LgposeError):
    """Reference trajectory has zero path length."""


class SchemaError(LgposeError):
    """Configuration or CSV input does not match the expected schema."""
