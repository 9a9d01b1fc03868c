"""Exact numerical laboratory for Gibbs-posterior generalization error.

The package enumerates small learning problems exactly, computes the
expected generalization error of the Gibbs algorithm through several
information-theoretic routes that must agree to machine precision, and
evaluates the surrounding bound suite, Gaussian closed forms, asymptotic
approximations, and sampling-based estimators against those exact
values.
"""

__version__ = "0.1.0"

from .asymptotics import (
    MleSpec,
    WellSample,
    bayes_location_regime_exact,
    bayes_location_regime_gen,
    mle_asymptotic_gen,
    multi_well_bound,
    single_well_gen,
)
from .bounds import (
    BoundEntry,
    BoundRow,
    RatioConstants,
    SubExponential,
    SubGamma,
    SubGaussian,
    bound_suite,
    bounds_table,
    fixed_point_kappa,
    kl_based_bound,
    psi_star_inverse,
    ratio_constants,
    renyi_upper_bound,
    sandwich_violations,
    tv_lower_bound,
)
from .errors import (
    AbsoluteContinuityViolation,
    AlphabetMismatch,
    AlphaOutOfRange,
    ConfigInvalid,
    DeltaOutOfRange,
    Diverged,
    EnumerationTooLarge,
    EpsilonOutOfRange,
    GammaNonPositive,
    GibbsLabError,
    IdentityMismatch,
    InvalidDistribution,
    InvalidInput,
    NTooSmall,
    NoPositiveRoot,
    NotIID,
    NotPositiveDefinite,
    SingularHessian,
)
from .gaussian import (
    CoverageReport,
    GaussianChannel,
    GaussianMeanConfig,
    IsmiBoundReport,
    MeanClosedForms,
    gaussian_channel_info,
    ismi_bound,
    mc_mean_gen,
    mean_closed_forms,
    pac_bayes_bound,
    pac_bayes_coverage,
)
from .gibbs import (
    ChainRuleReport,
    GenReport,
    GibbsPosterior,
    IIDData,
    JointData,
    LearningProblem,
    InfoDivergenceReport,
    RegularizedGenReport,
    chain_rule_example,
    concavity_probe,
    empirical_risk_curve,
    expected_empirical_risk,
    gen_characterizations,
    gen_error_direct,
    gen_via_cmi,
    gen_via_replace_one,
    gibbs_posterior,
    joint_distribution,
    log_ratio_means,
    population_gibbs,
    info_divergence_compare,
    regularized_gen,
    replace_one_divergences,
    supersample_conditional_info,
)
from .probability import (
    CondTable,
    InfoReport,
    JointTable,
    ProbVec,
    conditional_info_triple,
    info_triple,
    kl_divergence,
    renyi_divergence,
    symmetrized_kl,
    total_variation,
)
from .problems import instance_rng, instance_sweep, random_mixture_components, random_problem
from .samplers import SgldConfig, mc_gen_error, sgld_run
from .serialize import (
    dumps_csv,
    dumps_json,
    format_float,
    load_json,
    probvec_from_obj,
    probvec_to_obj,
    problem_from_obj,
    problem_to_obj,
    wells_from_obj,
    write_csv,
    write_json,
)

__all__ = [name for name in dir() if not name.startswith("_")]
