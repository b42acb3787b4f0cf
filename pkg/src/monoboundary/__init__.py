"""Finite-depth boundary theory for commutation monoids.

Normal forms and left divisibility, bounded-horizon boundary orders with
certificates, exact cylinder measures, truncated isometry models with
verified generator relations, coconnected graph decomposition, and
contracting affine actions with interval contact measures.
"""

from .boundary import (
    BoundaryWord,
    Character,
    GradedGeneratorMap,
    TriState,
    approx_equiv,
    char_eval,
    char_pullback,
    char_valid,
    divides_boundary,
    leq_bounded,
    prefix_element,
    tilde_related,
)
from .core import (
    IDENTITY,
    FreeWord,
    MonoidPresentation,
    TraceElement,
    canonical_hom,
    cocone,
    interval,
    left_divides,
    left_quotient,
    multiply,
    normal_form,
    sphere,
)
from .errors import CapacityError, InputFormatError
from .fractal import (
    ActionReport,
    AffineMap,
    DensityGrid,
    GridSpec,
    IfsAction,
    PointCloud,
    attractor_points,
    box_counting_dimension,
    contact_measure,
    gamma_norm_check,
    hausdorff_distance,
    kappa,
    kappa_basepoint_independence,
    load_ifs,
    parse_ifs_text,
    validate_action,
)
from .graphs import (
    UGraph,
    coconnected_components,
    crisp_laca_applicable,
    opposite,
    product_growth_check,
)
from .measure import (
    CylinderMeasure,
    fiber_counts,
    free_cylinder_measure,
    monoid_cylinder_measure,
    sphere_weights,
)
from .operators import (
    BetaAction,
    ChainOperator,
    DefectReport,
    WeightedSphereSpace,
    adjoint_S,
    adjoint_T,
    beta_action,
    iso_S,
    op_T,
    operator_norm,
    range_projection,
    relation_defects,
)

__version__ = "0.1.0"
