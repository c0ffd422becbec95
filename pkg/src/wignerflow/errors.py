"""Exception and warning types shared across the package."""


class GridError(ValueError):
    """Invalid grid construction or mismatched grids."""


class DecayError(ValueError):
    """A state or field does not decay at the edges of its grid."""


class RealnessError(RuntimeError):
    """A transform that should be real produced a significant imaginary part."""


class DiscretizationError(RuntimeError):
    """The finite-difference eigenproblem is under-resolved or degenerate."""


class BoundStateError(ValueError):
    """Requested a bound state beyond the bound spectrum."""


class EdgeDecayWarning(UserWarning):
    """A field is not negligible at the grid edge; spectral results may alias."""


class TruncationWarning(UserWarning):
    """A non-terminating series was truncated."""
