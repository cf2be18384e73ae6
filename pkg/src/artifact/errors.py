"""Exception hierarchy shared by all modules.

Every error carries a short machine-readable ``code`` so the command-line
front end can report it without string matching.
"""


class ArtifactError(Exception):
    code = "error"
    exit_status = 4


# arith
class AllZero(ArtifactError):
    code = "all_zero"


class BoundaryPoint(ArtifactError):
    code = "boundary_point"


class UndecidableAtPrecision(ArtifactError):
    code = "undecidable_at_precision"
    exit_status = 3


class NotBig(ArtifactError):
    code = "not_big"


# enumerate
class RadiusOverflow(ArtifactError):
    code = "radius_overflow"
    exit_status = 3


class TieBufferOverflow(ArtifactError):
    code = "tie_buffer_overflow"
    exit_status = 3


# specfun
class PoleAt(ArtifactError):
    code = "pole"

    def __init__(self, point, message=None):
        self.point = point
        super().__init__(message or f"pole at {point}")


class OutOfValidatedRange(ArtifactError):
    code = "out_of_validated_range"


# eisenstein
class NotConvergent(ArtifactError):
    code = "not_convergent"


class ZetaDenominatorNearZero(ArtifactError):
    code = "zeta_denominator_near_zero"


class NoConvergence(ArtifactError):
    code = "no_convergence"
    exit_status = 3


# localint
class PoleProximity(ArtifactError):
    code = "pole_proximity"


class TruncationNotProvablyComplete(ArtifactError):
    code = "truncation_not_provably_complete"


class QuadratureBudgetExceeded(ArtifactError):
    code = "quadrature_budget_exceeded"
    exit_status = 3


class InvalidSatake(ArtifactError):
    code = "invalid_satake"
