"""Exception and warning types shared across the package."""


class OverlapZero(ValueError):
    """Pre- and post-selection states are (numerically) orthogonal, so the
    weak value is undefined."""


class UnsupportedAxis(ValueError):
    """The exact-evolution routines only handle the position and momentum
    axes; oblique quadratures of the entangled state are not implemented."""


class SaturatedDetector(RuntimeError):
    """The arrival probability exceeds the detector's saturation ceiling;
    no usable data can be collected."""


class EmptyBatch(ValueError):
    """A trial batch survived postselection zero times; the mean estimator
    is undefined."""


class NullCoefficient(ValueError):
    """The coupling enters the distribution mean with coefficient zero, so
    the mean estimator cannot be inverted."""


class NumericalUnderflow(ArithmeticError):
    """A density evaluated below representable magnitude everywhere on the
    requested grid."""


class DegenerateMax(UserWarning):
    """Two eigenvalues tie in magnitude with distinct eigenspaces; the tie
    is broken towards the largest signed eigenvalue."""
