"""McShane-Whitney extension of fuzzy Lipschitz maps between fuzzy metric spaces."""

from .errors import (
    ConfigError,
    ConstructionError,
    DomainError,
    ExtensionUndefinedError,
    FuzzyLipError,
    HypothesisError,
    InvalidMetricError,
    NonLipschitzError,
    NumericError,
)
from .extended import INF
from .extension import (
    Dilation,
    ExtensionResult,
    SampledMap,
    blend,
    chain_pseudometric,
    check_hypothesis,
    estimate_dilation,
    example1_closed_form,
    example2_closed_form,
    extend,
    mcshane_extend,
    rho_matrix,
    rho_t,
    shortest_chains,
    verify_fuzzy_lipschitz,
    whitney_extend,
)
from .fuzzy_metric import (
    EuclideanFuzzyMetric,
    HFunction,
    TimeScaling,
    efm_eval,
    make_exp_space,
    make_mk_space,
    n_e,
    validate_fuzzy_metric,
    validate_remark1,
)
from .monotone import (
    Clamp,
    Linear,
    MonotoneCallable,
    PiecewiseLinear,
    RationalSaturating,
    check_galois,
    left_continuous_envelope,
    right_adjoint_eval,
)
from .tnorms import TNorm, tnorm_apply, tnorm_dominates

__version__ = "0.1.0"
