"""Numerical laboratory for Markov transition semigroups on R^d.

Weighted function spaces and their compact-open seminorms, kernel
representation checks, SDE and Fourier-side (Mehler) semigroup
evaluators, generator / resolvent / implicit-step reconstructions,
forward-equation residuals, a convex control semigroup with a
viscosity-solution harness, and a registry of reproducible experiments
behind a JSON-config CLI.
"""

from .statespace import (
    CompactExhaustion,
    CompactSet,
    Grid,
    RngPolicy,
    ScalarField,
    TailEnvelope,
    Weight,
    abs_field,
    ball_probe_points,
    constant_field,
    cos_field,
    derive_seed,
    field_eval,
    gaussian_field,
    identity_field,
    make_exhaustion,
    monomial_field,
    sin_field,
    weight_eval,
)
from .mixedtop import (
    ConvergenceVerdict,
    MixedSeminorm,
    classify_convergence,
    compact_seminorm,
    mixed_seminorm,
    weightclass_seminorm,
    weighted_norm,
)
from .kernels import (
    EmpiricalMeasure,
    GaussianKernelSpec,
    KernelFamily,
    KernelReport,
    apply_kernel,
    check_kernel_conditions,
    gauss_hermite_nodes,
    local_test_fields,
    tightness_radius,
)
from .sde import (
    PathEnsemble,
    SdeModel,
    check_coefficients,
    double_well_model,
    mc_semigroup,
    moment_check,
    named_model,
    ou_model,
    path_functionals,
    simulate_paths,
)
from .mehler import (
    AnnulusDensity,
    JumpAtoms,
    LevyTriplet,
    MehlerModel,
    SpectralMeasure,
    gaussian_ou_mehler,
    lescot_generator,
    levy_exponent,
    mehler_eval,
    mu_charfn,
    mu_density_fft,
    sample_mu,
    truncate_triplet,
    truncated_exponent,
    truncation_convergence_study,
)
from .generator import (
    GeneratorEstimate,
    SemigroupEvaluator,
    domain_check,
    euler_reconstruct,
    fd_generator,
    fpk_residual,
    kernel_evaluator,
    kolmogorov_apply,
    kolmogorov_apply_many,
    kolmogorov_field,
    mc_evaluator,
    mehler_evaluator,
    ou_evaluator,
    resolvent_identity_check,
    resolvent_quadrature,
)
from .control import (
    ControlProblem,
    ValueField,
    convexity_monotonicity_check,
    dp_semigroup,
    dynamic_programming_check,
    frozen_value_field,
    heat_oracle,
    heat_problem,
    hjb_generator,
    hopf_cole_oracle,
    quadratic_control_problem,
    viscosity_test,
)
from .fpkstudy import (
    EXPERIMENTS,
    ExperimentResult,
    ExperimentSuite,
    dichotomy_study,
    list_experiments,
    resolve_params,
    run_experiment,
    run_suite,
)
from .tables import read_csv, write_csv, write_json

__version__ = "0.1.0"
