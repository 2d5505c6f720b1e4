"""Epsilon-strong simulation of Brownian and Bessel paths by spheroid exits."""
from .core import (
    BesselSpec,
    DomainError,
    FlagMismatch,
    HeatBallParams,
    HorizonError,
    MonotonicityError,
    PathSkeleton,
    Precision,
    SkeletonPoint,
    WeightPair,
    make_bessel_spec,
    make_weights,
)
from .sampling import (
    CdSample,
    RngStream,
    cd_sample,
    conditioned_bessel_position,
    gamma_sample,
    rademacher,
    sphere_first_coord,
)
from .skeletons import (
    Envelope,
    StepRecord,
    StepRecords,
    bessel_skeleton_integer,
    bessel_skeleton_noninteger,
    bessel_skeletons,
    brownian_skeleton,
    count_points,
    default_weights,
    envelope,
    evaluate,
)
from .special import (
    Quadrature,
    cost_F,
    eta,
    expected_trials,
    kappa,
    lower_incomplete_gamma,
    mean_abs_first_coord,
    phi,
    rho,
    u_alpha_beta,
)
from .stats import (
    CostModel,
    ExperimentConfig,
    RenewalStats,
    SweepConfig,
    corollary_bound,
    optimal_wi,
    run_cost_experiment,
    sweep,
    theorem1_limit,
    theorem1_sigma2,
    theorem2_limit,
)
from .transforms import (
    CirParams,
    TransformSpec,
    cev_transform,
    cir_transform,
    inhomogeneous_cir_transform,
    precision_variable,
    precision_variable_explicit,
    transported_bounds,
)

__version__ = "0.1.0"
