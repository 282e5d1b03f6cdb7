"""Desk-scale laboratory for manifold-based compressive sensing.

The package bundles parametrized signal manifolds, reproducible
Gaussian measurement operators, geometric estimators (reach, nets,
secants), embedding and chaining certificates, nearest-point recovery
solvers with theorem-style bound checks, and a config-driven experiment
front end.
"""

from .errors import (
    AssumptionViolatedError,
    ConfigError,
    DegenerateSpectrumError,
    GraphDisconnectedError,
    InsufficientSampleError,
    InvalidArgumentError,
    McslabError,
    NoApplicablePairsError,
    NumericalDisagreementError,
    OutOfRangeError,
    PreconditionViolatedError,
    UnsupportedShapeError,
)
from .experiments import (
    KINDS,
    ExperimentConfig,
    RunResult,
    build_manifold,
    default_config,
    run,
    validate_config,
    validate_config_data,
)
from .geometry import (
    PROPERTY_IDS,
    PropertyReport,
    ReachEstimate,
    check_toolbox_property,
    dirichlet_kernel,
    estimate_reach,
    principal_angle,
    run_toolbox_suite,
    unit_ball_volume,
)
from .ioutils import (
    dump_operator,
    fmt,
    load_operator,
    sha256_of,
    write_csv,
    write_json,
)
from .manifolds import (
    ManifoldModel,
    ManifoldSample,
    ParameterDomain,
    connectivity_radius,
    geodesic_between,
    geodesic_distance,
    geodesic_distances,
    make_circle,
    make_complex_exponential,
    make_gaussian_pulse,
    make_line_segment,
    sample_manifold,
)
from .measurement import (
    BoundReport,
    ChainCertificate,
    DistortionReport,
    MeasurementOperator,
    SingularValueReport,
    TailReport,
    apply_operator,
    chaining_failure_bound,
    draw_gaussian_operator,
    embedding_distortion,
    empirical_tail_check,
    required_measurements,
    singular_value_range,
    volume_reach_assumption_ok,
)
from .nets import (
    Net,
    NetHierarchy,
    SecantSample,
    build_net_hierarchy,
    greedy_net,
    hierarchy_cardinality_bound,
    packing_bound,
    sample_secants,
)
from .recovery import (
    AdversarialInstance,
    BoundCheckRecord,
    OracleResult,
    RecoveryResult,
    check_deterministic_bound,
    check_geodesic_bound,
    check_probabilistic_bound,
    construct_adversarial_instance,
    estimate_parameter,
    nearest_point_on_manifold,
    recover_signal,
)
from .rng import philox_generator, standard_normals, uniform_open

__version__ = "0.1.0"

__all__ = [
    "AdversarialInstance",
    "AssumptionViolatedError",
    "BoundCheckRecord",
    "BoundReport",
    "ChainCertificate",
    "ConfigError",
    "DegenerateSpectrumError",
    "DistortionReport",
    "ExperimentConfig",
    "GraphDisconnectedError",
    "InsufficientSampleError",
    "InvalidArgumentError",
    "KINDS",
    "ManifoldModel",
    "ManifoldSample",
    "McslabError",
    "MeasurementOperator",
    "Net",
    "NetHierarchy",
    "NoApplicablePairsError",
    "NumericalDisagreementError",
    "OracleResult",
    "OutOfRangeError",
    "PROPERTY_IDS",
    "ParameterDomain",
    "PreconditionViolatedError",
    "PropertyReport",
    "ReachEstimate",
    "RecoveryResult",
    "RunResult",
    "SecantSample",
    "SingularValueReport",
    "TailReport",
    "UnsupportedShapeError",
    "apply_operator",
    "build_manifold",
    "build_net_hierarchy",
    "chaining_failure_bound",
    "check_deterministic_bound",
    "check_geodesic_bound",
    "check_probabilistic_bound",
    "check_toolbox_property",
    "connectivity_radius",
    "construct_adversarial_instance",
    "default_config",
    "dirichlet_kernel",
    "draw_gaussian_operator",
    "dump_operator",
    "embedding_distortion",
    "empirical_tail_check",
    "estimate_parameter",
    "estimate_reach",
    "fmt",
    "geodesic_between",
    "geodesic_distance",
    "geodesic_distances",
    "greedy_net",
    "hierarchy_cardinality_bound",
    "load_operator",
    "make_circle",
    "make_complex_exponential",
    "make_gaussian_pulse",
    "make_line_segment",
    "nearest_point_on_manifold",
    "packing_bound",
    "philox_generator",
    "principal_angle",
    "recover_signal",
    "required_measurements",
    "run",
    "run_toolbox_suite",
    "sample_manifold",
    "sample_secants",
    "sha256_of",
    "singular_value_range",
    "standard_normals",
    "uniform_open",
    "unit_ball_volume",
    "validate_config",
    "validate_config_data",
    "volume_reach_assumption_ok",
    "write_csv",
    "write_json",
    "__version__",
]
