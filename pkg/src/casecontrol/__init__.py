"""Prospective and retrospective logistic inference for case-control data."""

from .errors import (AllDegenerate, AllRejected, BoundaryError, CaseControlError, DataFormatError, EmptyArm,
                     MassEscape, NonConvergence, NotIdentifiable, SeparationDetected, SingularInformation)
from .model import (CovariateSpace, IdentifiabilityReport, JointTable, LogisticParams, MarginalX, RetroParams,
                    check_identifiability, logistic_prob, marginal_gamma, reference_points,
                    shift_case_probability, tilt_case_distribution, to_prospective, to_retrospective)
from .likelihoods import (CountData, FitResult, PenaltySpec, RetroFit, fit_logistic_irls, fit_penalized_value,
                          fit_retrospective_mle, joint_loglik, profile_prospective, profile_retrospective,
                          prospective_loglik, retrospective_loglik)
from .priors import (ConditionedLogisticPrior, GFunction, LogisticJointLaw, PseudoCounts, SaturatedHFormLaw,
                     conditioned_prior_logdens_pro, conditioned_prior_logdens_retro, dirichlet_alphabeta_logdens,
                     dirichlet_law, dirichlet_logdens, hform_logdens, independent_gaussian_law,
                     jacobian_logdet_pro, jacobian_logdet_retro, properness_probe,
                     pseudo_count_construction_logdens, shm_factorization_check, tilted_x_law)
from .inference import (EquivalenceReport, GridSpec, PosteriorGrid, bayes_factor, equivalence_report,
                        log_bayes_factor, log_posterior_pro, log_posterior_retro, marginal_beta_quadrature)
from .mcmc import McmcConfig, McmcResult, effective_sample_size, mcmc_sample, split_rhat
from .stratified import (StratifiedData, StratifiedJointLaw, StratifiedParams, StratifiedPrior,
                         augment_to_unstratified, conditional_loglik, fit_conditional_mle,
                         stratified_equivalence_report, stratified_gaussian_law, stratified_marginal_beta,
                         stratified_mcmc_sample, stratified_prior_logdens, stratified_prospective_loglik,
                         stratified_retrospective_loglik)
from .simulate import DesignSpec, sample_case_control, sample_prospective, sample_stratified_matched

__version__ = "0.1.0"

__all__ = [
    "AllDegenerate", "AllRejected", "BoundaryError", "CaseControlError", "DataFormatError", "EmptyArm",
    "MassEscape", "NonConvergence", "NotIdentifiable", "SeparationDetected", "SingularInformation",
    "CovariateSpace", "IdentifiabilityReport", "JointTable", "LogisticParams", "MarginalX", "RetroParams",
    "check_identifiability", "logistic_prob", "marginal_gamma", "reference_points", "shift_case_probability",
    "tilt_case_distribution", "to_prospective", "to_retrospective", "CountData", "FitResult", "PenaltySpec",
    "RetroFit", "fit_logistic_irls", "fit_penalized_value", "fit_retrospective_mle", "joint_loglik",
    "profile_prospective", "profile_retrospective", "prospective_loglik", "retrospective_loglik",
    "ConditionedLogisticPrior", "GFunction", "LogisticJointLaw", "PseudoCounts", "SaturatedHFormLaw",
    "conditioned_prior_logdens_pro", "conditioned_prior_logdens_retro", "dirichlet_alphabeta_logdens",
    "dirichlet_law", "dirichlet_logdens", "hform_logdens", "independent_gaussian_law", "jacobian_logdet_pro",
    "jacobian_logdet_retro", "properness_probe", "pseudo_count_construction_logdens", "shm_factorization_check",
    "tilted_x_law", "EquivalenceReport", "GridSpec", "PosteriorGrid", "bayes_factor", "equivalence_report",
    "log_bayes_factor", "log_posterior_pro", "log_posterior_retro", "marginal_beta_quadrature", "McmcConfig",
    "McmcResult", "effective_sample_size", "mcmc_sample", "split_rhat", "StratifiedData", "StratifiedJointLaw",
    "StratifiedParams", "StratifiedPrior", "augment_to_unstratified", "conditional_loglik",
    "fit_conditional_mle", "stratified_equivalence_report", "stratified_gaussian_law",
    "stratified_marginal_beta", "stratified_mcmc_sample", "stratified_prior_logdens",
    "stratified_prospective_loglik", "stratified_retrospective_loglik", "DesignSpec", "sample_case_control",
    "sample_prospective", "sample_stratified_matched",
]
