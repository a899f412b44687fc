"""Stray-field energy of magnetized bodies via rational orthogonal bases on R^3."""
__version__ = "0.1.0"

from .s3harm import MultiIndex, S3Point, indices_up_to, count_up_to  # noqa: E402
from .abbasis import w_alpha, grad_w_alpha, stereo_inverse, stereo_forward, NorthPoleError  # noqa: E402
from .quadrature import (  # noqa: E402
    SampleDomain,
    QuadratureRule,
    MagnetizationField,
    ResolutionPolicy,
    build_ball_rule,
    build_box_rule,
    coefficient,
    coefficient_vector,
)
from .solver import (  # noqa: E402
    CoefficientTable,
    EnergyBreakdown,
    compute_table,
    energy,
    energy_breakdown,
    energy_error_split,
    potential_eval,
    strayfield_eval,
)
from .kernel import BACKEND  # noqa: E402
