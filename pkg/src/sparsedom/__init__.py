"""sparsedom: sparse domination of single-scale operator families on
finite discretizations of spaces of homogeneous type.

Construction toolkit (Whitney covers, stopping-time ladders, sparse
collections) plus an empirical verification harness for sparse-domination
inequalities, L^p-improving estimates, and Fourier-decay diagnostics.
"""

from .space import (
    Ball,
    DilationGroup,
    HomogeneousSpace,
    ball,
    ball_r,
    build_cloud_space,
    build_grid_space,
    doubling_diagnostics,
)
from .functions import GridFunction, avg, dual_exponent, pairing
from .covering import (
    PartitionOfUnity,
    WhitneyCover,
    whitney_cover,
    whitney_partition,
    five_r_cover,
    fixed_scale_cover,
    partition_of_unity,
    verify_whitney,
)
from .stopping import (
    SparseCollection,
    StoppingConfig,
    StoppingLadder,
    build_stopping_ladder,
    certify_sparse,
    local_maximal_fn,
    maximal_fn,
    sparse_form,
)
from .operators import (
    CZKernel,
    DiscreteMeasure,
    SingleScaleFamily,
    TruncatedOperator,
    adjoint,
    circle_measure,
    cz_family,
    fourier_transform,
    geometric_smoothing_family,
    hilbert_kernel,
    maximal,
    measure_family,
    point_mass_measure,
    radon_curve_measure,
    truncate,
)
from .improving import (
    Modulus,
    check_improving_a,
    check_improving_b,
    continuity_fit,
    converse_extract,
    converse_record,
    dini_norm,
    fourier_decay_fit,
    make_atom,
)
from .verify import (
    SparseScenario,
    cz_decompose,
    ratio_trend,
    sharpness_sweep,
    sparse_batch,
    stopping_form,
    stopping_form_max,
    stopping_norm,
    telescoping_check,
    verify_sparse_linear,
    verify_sparse_maximal,
    weight_constants,
)

__version__ = "0.1.0"
