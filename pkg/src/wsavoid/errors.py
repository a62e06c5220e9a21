"""Exception types shared across the package."""


class AvoidanceError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(AvoidanceError):
    """An argument contained non-finite or otherwise unusable values."""


class ZeroNormal(AvoidanceError):
    """The surface gradient vanished (query at a body center)."""


class ParallelNormals(AvoidanceError):
    """Workspace and obstacle normals are (anti)parallel at the query point."""


class SingularBasis(AvoidanceError):
    """A modulation basis matrix is numerically singular."""


class NearIntersectionSingularity(AvoidanceError):
    """Both surface distances are ~1 at once; combined-mode weights are undefined
    there and the intersection-line band must take over."""


class RankDeficient(AvoidanceError):
    """Pseudo-inverse requested for a rank-deficient matrix."""


class OutOfDomain(AvoidanceError):
    """Query point violates the workspace/obstacle domain preconditions."""


class GuardConflict(AvoidanceError):
    """Containment guard could not satisfy both surface constraints."""


class InvalidStart(AvoidanceError):
    """Simulation start point violates the containment preconditions."""


class ParseError(AvoidanceError):
    """Scenario text could not be parsed."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class ValidationError(AvoidanceError):
    """A parsed scenario value violates its constraints."""

    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


class ScenarioWarning(UserWarning):
    """Non-fatal scenario issue, e.g. a target the trajectory cannot reach."""
