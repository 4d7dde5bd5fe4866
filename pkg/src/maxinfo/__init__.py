"""Max-information bounds, exact estimators, DP verification and adaptive-analysis experiments."""

from .attack import AttackParams, AttackReport, derive_params, demo_params, mechanism_B
from .bounds import (
    MaxInfoBound,
    PrivacyParams,
    approx_dp_product_bound,
    compose,
    description_length_bound,
    dp_to_mi_bound,
    generalization_tail,
    maxinfo_to_mi,
    mi_pvalue_correction,
    mi_to_maxinfo,
    pure_dp_bound,
    pure_dp_product_bound,
    pvalue_correction,
    pvalue_sensitivity_floor,
    rz_pvalue_correction,
)
from .codes import BitString, ParityCheckCode, hamming_ball_volume, min_distance, nearest_codeword, syndrome
from .estimator import approx_max_info, beta_at_k, check_bound, exact_max_info, oracle_subset_enum
from .fdr import SimConfig, binomial_pvalue, run_fdr_experiment, statistic_sensitivity
from .mechanisms import geometric_count_kernel, laplace_cdf, laplace_sample, rr_kernel, verify_dp
from .prob import PMF, DatasetDomain, Domain, JointPMF, MechanismKernel, enumerate_datasets

__version__ = "0.1.0"
