"""Exception taxonomy shared across modules.

The base classes carry the CLI exit code: plain ShotlocError means bad
input (exit 1), InfeasibleResult means the computation is valid but the
data admits no solution (exit 2), DataError means broken files or I/O
(exit 3).
"""


class ShotlocError(Exception):
    exit_code = 1


class InfeasibleResult(ShotlocError):
    exit_code = 2


class DataError(ShotlocError):
    exit_code = 3


# geo
class InvalidCoordinate(ShotlocError):
    pass


class OutOfFrame(ShotlocError):
    pass


class DegenerateAnnulus(ShotlocError):
    pass


class InfeasibleSeparation(InfeasibleResult):
    pass


# ballistics
class Subsonic(ShotlocError):
    pass


class SingularSystem(InfeasibleResult):
    pass


class InfeasibleGeometry(InfeasibleResult):
    pass


class ElevationExceedsDistance(InfeasibleResult):
    pass


class NoFeasibleSamples(InfeasibleResult):
    pass


# tdoa
class CoincidentCameras(ShotlocError):
    pass


class FullyInfeasible(InfeasibleResult):
    pass


# fusion
class EmptyEstimate(ShotlocError):
    pass


class GridMismatch(ShotlocError):
    pass


class AllZero(InfeasibleResult):
    pass


# audio
class UnsupportedFormat(DataError):
    pass


class CorruptFile(DataError):
    pass


class ClipTooShort(ShotlocError):
    pass


# sync
class AnchorMissing(ShotlocError):
    pass


class FrameOutOfRange(ShotlocError):
    pass


# oracle
class ConstraintUnsatisfiable(InfeasibleResult):
    pass


# store
class NotFound(ShotlocError):
    pass


class Conflict(ShotlocError):
    pass


class IntegrityViolation(ShotlocError):
    pass
