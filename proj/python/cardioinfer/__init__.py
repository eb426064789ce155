"""cardioinfer: simulation-based inference for a 12-lead ECG forward model.

The heavy lifting lives in the compiled extension; this package re-exports
the pieces a notebook typically needs.
"""

from cardioinfer._core import (
    ConfigError,
    EcgTrace,
    HeartMesh,
    LeadConfig,
    ManifoldEmbedding,
    NumericalError,
    ParameterSpace,
    ParseError,
    ValidationError,
    bo_minimize,
    ecg_mse,
    generate_ellipsoid_shell,
    isomap_embed,
    kl_diag_gaussians,
    latin_hypercube,
    load_mesh,
    ordered_encode,
    ordered_transform,
    parameter_space,
    run_recovery,
    serialize_mesh,
    simulate,
)

__all__ = [
    "ConfigError",
    "EcgTrace",
    "HeartMesh",
    "LeadConfig",
    "ManifoldEmbedding",
    "NumericalError",
    "ParameterSpace",
    "ParseError",
    "ValidationError",
    "bo_minimize",
    "ecg_mse",
    "generate_ellipsoid_shell",
    "isomap_embed",
    "kl_diag_gaussians",
    "latin_hypercube",
    "load_mesh",
    "ordered_encode",
    "ordered_transform",
    "parameter_space",
    "run_recovery",
    "serialize_mesh",
    "simulate",
]

__version__ = "0.1.0"
