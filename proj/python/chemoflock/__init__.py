"""Leader-follower flocking with a chemotactic signal."""

from ._core import (
    DomainSpec,
    ExperimentConfig,
    InvalidParameter,
    ModelParams,
    QuadratureError,
    StepConfig,
    cbar,
    g_infinity,
    g_of_t,
    init_particles,
    integrate_cm,
    integrate_planar,
    kernel_first_moment,
    load_config,
    lyapunov_constants,
    oracle_f,
    oracle_grad_f,
    parse_config,
    preset,
    run,
    scaled,
    serialize_config,
)

__all__ = [
    "DomainSpec",
    "ExperimentConfig",
    "InvalidParameter",
    "ModelParams",
    "QuadratureError",
    "StepConfig",
    "cbar",
    "g_infinity",
    "g_of_t",
    "init_particles",
    "integrate_cm",
    "integrate_planar",
    "kernel_first_moment",
    "load_config",
    "lyapunov_constants",
    "oracle_f",
    "oracle_grad_f",
    "parse_config",
    "preset",
    "run",
    "scaled",
    "serialize_config",
]
