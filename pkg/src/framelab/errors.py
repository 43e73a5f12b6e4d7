"""Exception hierarchy.

Everything raised deliberately by framelab derives from :class:`FrameLabError`.
Input/format problems are :class:`FormatError`; violated numerical
preconditions are :class:`NumericalError`. The CLI maps these to exit codes
1 and 2 respectively.
"""


class FrameLabError(ValueError):
    pass


class FormatError(FrameLabError):
    """Malformed CSV/JSON input."""


class NumericalError(FrameLabError):
    """A numerical precondition does not hold."""


class DimensionMismatchError(NumericalError):
    pass


class SingularFrameError(NumericalError):
    """Frame operator is (numerically) singular: the vectors do not span."""


class NotParsevalError(NumericalError):
    pass


class NotTightError(NumericalError):
    pass


class InvalidSpecError(NumericalError):
    pass


class SamplingError(NumericalError):
    """Rejection sampler exceeded its iteration cap."""


class GroupClosureError(NumericalError):
    """Generators are not orthogonal or generate a group larger than the cap."""


class DegenerateMeasureError(NumericalError):
    pass


class NonSphericalSupportError(NumericalError):
    pass


class MissingBudgetError(NumericalError):
    """Moments are not known in closed form and no Monte-Carlo budget was given."""
