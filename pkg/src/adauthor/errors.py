"""Exception types shared across the engine."""


class AdAuthorError(Exception):
    """Base class for all engine errors."""


class AssetMismatch(AdAuthorError):
    """Track references a different asset than the one supplied."""


class ValidationFailed(AdAuthorError):
    """Operation requires a valid track but validation reported errors."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(f"{len(self.violations)} violation(s): "
                         + "; ".join(v.rule for v in self.violations))


class ParseError(AdAuthorError):
    """Malformed track document."""

    def __init__(self, message, offset=0):
        self.offset = offset
        super().__init__(f"{message} (byte offset {offset})")


class VersionError(AdAuthorError):
    """Track document declares an unsupported schema version."""


class DegenerateVector(AdAuthorError):
    """Cosine similarity is undefined for a zero vector."""


class InsufficientInput(AdAuthorError):
    """Boundary detection needs at least two frames."""


class RangeError(AdAuthorError):
    """A boundary timestamp falls outside the open interval (0, duration)."""


class GuidelinesNotAcknowledged(AdAuthorError):
    """Provider did not confirm the description guidelines."""


class ProviderFormatError(AdAuthorError):
    """Provider response did not contain the expected structured output."""


class ProviderFailure(AdAuthorError):
    """Provider transport failed or returned an unusable reply."""


class PlanConflict(AdAuthorError):
    """Two extended clips demand the main timeline pause at the same instant."""


class Conflict(AdAuthorError):
    """Optimistic concurrency check failed; caller must refetch."""


class Forbidden(AdAuthorError):
    """Author is not permitted to modify this draft."""


class NotFound(AdAuthorError):
    """Referenced draft, event, or asset does not exist."""


class RejectedWithViolations(AdAuthorError):
    """Revision would produce an invalid track; no state was changed."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("revision rejected: "
                         + "; ".join(v.rule for v in self.violations))


class CardinalityError(AdAuthorError):
    """Assignment plans require exactly three models."""


class NoFrames(AdAuthorError):
    """No frames are registered for the asset."""


class Unavailable(AdAuthorError):
    """On-demand description could not be produced."""
