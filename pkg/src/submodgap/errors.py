"""Exception types shared across the package."""


class SubmodGapError(Exception):
    pass


class SizeLimitError(SubmodGapError, ValueError):
    """Instance or ground set is beyond the desk-scale limits."""


class PreconditionError(SubmodGapError, ValueError):
    pass


class GroundMismatchError(PreconditionError):
    pass


class InvariantViolation(SubmodGapError, AssertionError):
    """A checked mathematical invariant failed at runtime."""


class SchemaError(SubmodGapError, ValueError):
    pass
