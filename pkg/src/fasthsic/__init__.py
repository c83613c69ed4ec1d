"""Fast kernel independence tests based on HSIC.

The main entry point is :func:`hsic_test`; the building blocks (Gram
matrices, centering, statistics, cumulant estimators and null
approximations) are exposed for direct use.
"""
from .centering import CenteredGram, center_biased, center_unbiased
from .core import CumulantEstimates, StatisticValue, cumulants, hsic_estimate, statistic
from .errors import (
    DegeneracyError,
    DegenerateNullError,
    DegenerateSampleError,
    HSICError,
    InputError,
    NumericalError,
)
from .kernel import (
    GramMatrix,
    KernelConfig,
    Sample,
    functional_sq_norm,
    gram,
    pairwise_sq_dist,
    select_width,
)
from .nulldist import (
    ChiSqMatch,
    TestResult,
    chi_sq_sf,
    gamma_sf,
    match_three_cumulants,
    match_two_cumulants,
    p_value_gamma,
    p_value_new,
    p_value_permutation,
    permutation_p_value,
    permutation_statistics,
    regularized_gamma_q,
)
from .pipeline import hsic_test, test_grams
from .simulate import (
    Sim2AltSpec,
    Sim2NullSpec,
    Sim3Spec,
    StudyReport,
    gen_sim2_alt,
    gen_sim2_null,
    gen_sim3,
    run_study,
)

__version__ = "0.1.0"
