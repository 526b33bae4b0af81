"""qwmetric: finite-dimensional quantum metric spaces.

Step filtrations of matrix algebras, projection distance functions,
spectral and commutation Lipschitz gauges, metric constructions, and
quantum error-correction geometry (Hamming filtrations, code distance,
volume bound).
"""

from .numerics import (
    DEFAULT_CONFIG,
    NumericConfig,
    hermitian_eig,
    op_norm,
    range_projection,
    spectral_projection,
)
from .opspace import (
    OperatorSubspace,
    VNAlgebra,
    adjoint,
    commutant,
    full_space,
    generated_vn_algebra,
    intersect,
    product_span,
    scalar_space,
    span,
    sum_spaces,
    tensor,
)
from .filtration import (
    MetricContext,
    StepFiltration,
    descriptors,
    from_classical,
    to_classical,
    validate,
)
from .geometry import (
    AmplifiedProjection,
    closure,
    hausdorff_distance,
    is_closed,
    linkable,
    neighborhood,
    probes_for_level,
    rebuild_level,
    rho,
    separating_projections,
)
from .lipschitz import (
    AscentBudget,
    LipschitzReport,
    commutation_lipschitz_lower,
    distance_operator,
    lipschitz_witness,
    rho_from_gauge,
    spectral_join,
    spectral_lipschitz,
)
from .constructions import (
    PiecewiseLinear,
    TimedGenerators,
    canonicalize_m2,
    co_lipschitz_number,
    direct_sum,
    f_transform,
    generated_filtration,
    hoelder,
    lp_product,
    m2_metric,
    meet,
    metric_product,
    operator_system_metric,
    quotient,
    stabilize,
    subobject,
    truncate,
)
from .codes import (
    QuantumCode,
    block_filtration,
    hamming_filtration,
    induced_metric,
    kl_check,
    min_distance,
    volume_bound,
)

__version__ = "0.1.0"
