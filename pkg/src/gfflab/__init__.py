"""Simulation laboratory for the two-dimensional Gaussian free field.

Exact sampling of the truncated sine-series field on the unit square and of
the zero-boundary discrete field, closed-form circle and disk functionals,
thick/high point statistics, conformal-map checks and Monte Carlo
verification of Gaussian and Brownian estimates.
"""

from .config import RunConfig
from .conformal import (
    AffineMap,
    MoebiusMap,
    RegionApprox,
    SquarePolyMap,
    conformal_error,
    image_disk,
    parse_map,
    pullback_disk_integral,
    symmdiff_area,
)
from .estimates import (
    BoundReport,
    bm_corridor_prob,
    check_estimates,
    exp_norm_bound,
    gauss_tail_ratio,
    sine_square_sum,
)
from .estimators import AlphaEnergy, BoxCountingDimension, CircleAverageTransformer, HighPointExponent
from .exceptions import (
    ClippingError,
    ConvergenceError,
    DomainError,
    GammaRangeError,
    GFFLabError,
    InsufficientDataError,
    InvalidConfigError,
    NonPositiveRadiusError,
    NumericalError,
    RadiusTooLargeError,
)
from .io import read_gffb, write_gffb
from .lattice import (
    HighPointReport,
    LatticeField,
    LatticeGreens,
    high_points,
    lattice_greens,
    markov_residual,
    sample_dgff,
)
from .parallel import parallel_mc
from .spectral import (
    DiskSpec,
    ModeIndex,
    SpectralField,
    SquareSpec,
    circle_average,
    circle_covariance,
    disk_integral,
    eval_point,
    liouville_mass,
    mode_disk_coefficient,
    nu_residual,
    sample_spectral,
    square_integral,
    variance_disk_integral,
    variance_square_integral,
)
from .thick import (
    EmpiricalMeasure,
    MultiscaleEventSpec,
    alpha_energy,
    box_dimension,
    exponent_fit,
    f_event_prob,
    holder_scan,
    perfect_event_prob,
)

__version__ = "0.1.0"
