"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the CLI and the JSON
reports can distinguish rejection reasons without parsing messages.
"""


class GFFLabError(Exception):
    code = "gfflab_error"


class InvalidConfigError(GFFLabError, ValueError):
    code = "invalid_config"


class DomainError(GFFLabError, ValueError):
    """A point or region lies outside the domain an operation is defined on."""

    code = "outside_domain"


class NonPositiveRadiusError(GFFLabError, ValueError):
    code = "nonpositive_radius"


class GammaRangeError(GFFLabError, ValueError):
    code = "gamma_out_of_range"


class RadiusTooLargeError(GFFLabError, ValueError):
    """The cutoff rule ``g(r) = 1 / (r log log 1/r)`` needs ``r < exp(-e)``."""

    code = "radius_too_large"


class InsufficientDataError(GFFLabError, ValueError):
    code = "insufficient_data"


class NumericalError(GFFLabError, RuntimeError):
    code = "numerical_failure"


class ConvergenceError(NumericalError):
    code = "no_convergence"


class ClippingError(NumericalError):
    code = "degenerate_geometry"
