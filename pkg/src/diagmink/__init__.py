"""Diagonal Minkowski classes of convex bodies, zonoid equivalence of random
vectors, and the D_p-ball description of one-sided stable and max-stable laws."""

from .bodies import (
    ConvexBody,
    DiagScaled,
    DimensionError,
    GeneralizedZonoid,
    LpBall,
    MinkSum,
    Polygon2D,
    Scaled,
    UnsupportedBodyError,
    Zonotope,
    canonical_zonotope,
    diag_body,
    hadamard,
    project,
    support,
    support_set_singleton,
    unit_segment,
)
from .measures import DiscreteRandomVector, SphereMeasure, expected_support, moment_f
from .nnls import nnls
from .stable import (
    DpBall,
    StableSpec,
    dp_to_stable,
    kanter_sample,
    minkowski_functional,
    polar_zonoid_check,
    rerepresent,
    sample_max_stable,
    sample_one_sided_stable,
    signed_power_functional,
    stable_to_dp,
    support_singleton_expectation,
)
from .transforms import (
    DirectionGrid,
    cosine_transform,
    injectivity_probe,
    k_transform,
    mixed_volume_transform,
    surface_measure_2d,
)
from .universality import (
    as_condition,
    d_universal,
    is_unconditional,
    moment_equivalence_oracle,
    segment_summand_identity,
    unconditionally_d_universal,
    zonoid_equivalent,
)

__version__ = "0.1.0"
