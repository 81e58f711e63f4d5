"""Partition-free parameter estimation and scale-space divergence diagnostics."""

from .grids import GridDensity, gaussian_1d, grid_density, mixture_1d, uniform_axis
from .models import (
    Dataset,
    Model,
    ModelKind,
    continuous_dataset,
    discrete_dataset,
    exact_normalize,
    gaussian_model,
    gen_gauss_model,
    grad_x_log,
    ising_model,
    laplacian_x_log,
    log_unnorm,
    model_from_json,
    model_to_json,
    potts_model,
    read_dataset_csv,
    sample,
    singleton_conditional,
    write_dataset_csv,
)
from .objectives import (
    ObjectiveKind,
    ObjectiveValue,
    exact_mle_objective,
    fisher_exact,
    gsm_discrete_objective,
    gsm_discrete_population,
    kl_exact,
    pseudo_likelihood_objective,
    ratio_matching_objective,
    ratio_matching_population,
    sm_objective,
)
from .operators import (
    DiscreteJoint,
    LinearOperatorKind,
    adjoint_identity_residual,
    brook_ratio,
    discrete_joint,
    gradient_completeness_check,
    joint_conditionals,
    reconstruct_joint,
)
from .scalespace import (
    DivergenceCurve,
    debruijn_residual,
    divergence_curve,
    entropy,
    fisher_information,
    heat_pde_residual,
    lemma1_residual,
    smooth,
    theorem1_residual,
)
from .estimation import (
    FitResult,
    OptimizerConfig,
    closed_form_gaussian_sm,
    compare_estimators,
    fd_gradient,
    fit,
)

__all__ = [name for name in dir() if not name.startswith("_")]
