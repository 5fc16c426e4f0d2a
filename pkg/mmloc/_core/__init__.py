# Copyright 2026 mmloc contributors
#
# Description:
# mmloc core modules

from .crlb import (
    FISHER_COND_LIMIT,
    CrlbResult,
    jacobian_b1,
    crlb_joint,
    verify_efficiency_identity,
    jacobian_mapping,
    crlb_mapping,
)
from .ensemble import (
    RADIUS_SPREAD_FACTOR,
    SUPPRESSION_FACTOR,
    EnsembleConfig,
    subtractive_cluster_centers,
    subtractive_cluster_select,
    train_ensemble,
    calibrate_radii,
    ewlsnet_estimate,
)
from .errors import (
    MmlocError,
    GeometryError,
    UnderdeterminedError,
    SingularSystemError,
    UnobservableError,
    DivergenceError,
    DimensionError,
    ConfigError,
    EnsembleError,
    RunAborted,
)
from .factory import (
    Factory,
)
from .geometry import (
    Vec3,
    LIGHT_SPEED,
    as_vec3,
    Scenario,
    SIX_RRH_POSITIONS,
    EIGHTEEN_RRH_POSITIONS,
    MAPPING_SCATTERER,
    MAPPING_RRH_INDEX,
    STREET_WALLS_X,
    six_rrh_preset,
    eighteen_rrh_preset,
    PRESETS,
    load_preset,
    street_canyon_scenario,
    los_range,
    arrival_time,
    tdoa_related,
    range_rate,
    range_rate_diff,
    aoa_pair,
    aoa_basis,
    nlos_params,
    location_parameters,
    wrap_angle,
    rrh_array,
)
from .harness import (
    ESTIMATORS,
    MAX_FAILURE_FRACTION,
    OUTLIER_RATIO,
    REPORT_COLUMNS,
    db_to_linear,
    linear_to_db,
    build_scenario_family,
    RunConfig,
    MetricsReport,
    TimingReport,
    trial_rng,
    run_estimator,
    monte_carlo,
    sweep_rho,
    sweep_na,
    sweep_sigmas,
    evaluate_testset,
    compare_family,
    bench_timing,
    reports_frame,
    emit_report,
    load_report_json,
)
from .log import (
    Log,
)
from .mapping import (
    MappingSystem,
    ScattererEstimate,
    MappingFailure,
    build_mapping_system,
    build_mapping_linearization,
    estimate_scatterer,
    map_environment,
    POINT_CLOUD_COLUMNS,
    point_cloud,
    write_point_cloud,
)
from .measurement import (
    STD_FLOOR,
    NOISE_KINDS,
    BASE_SIGMA_D,
    BASE_SIGMA_A,
    NoiseModel,
    joint_covariance,
    mapping_covariance,
    MeasurementSet,
    MappingMeasurement,
    measurement_error,
    synthesize_measurements,
    synthesize_mapping_measurement,
    measurement_columns,
    write_measurements,
    read_measurements,
    MAPPING_COLUMNS,
    write_mapping_measurements,
    read_mapping_measurements,
)
from .mlp import (
    RANGE_FLOOR,
    RANGE_MARGIN,
    NormalizationSpec,
    MlpParams,
    mlp_forward,
    predict,
    loss_and_grad,
    TrainingConfig,
    TrainResult,
    train_mlp,
    save_network,
    load_network,
)
from .stats import (
    ErrorAccumulator,
    lag1_autocorrelation,
)
from .wls import (
    COND_LIMIT,
    DesignSystem,
    LinearizationB,
    JointEstimate,
    build_design,
    build_linearization,
    wls_solve,
    estimate_joint,
)
from .wlsnet import (
    SPLITS,
    MAPPING_MODES,
    WlsNetConfig,
    TrainingSet,
    generate_dataset,
    generate_mapping_dataset,
    write_dataset,
    read_dataset,
    residual,
    train_residual_net,
    train_fp_net,
    predict_residual,
    residual_whitening,
    wlsnet_estimate,
    lsnet_estimate,
    fp_estimate,
    estimate_scatterer_net,
)

__all__ = [
    "FISHER_COND_LIMIT",
    "CrlbResult",
    "jacobian_b1",
    "crlb_joint",
    "verify_efficiency_identity",
    "jacobian_mapping",
    "crlb_mapping",
    "RADIUS_SPREAD_FACTOR",
    "SUPPRESSION_FACTOR",
    "EnsembleConfig",
    "subtractive_cluster_centers",
    "subtractive_cluster_select",
    "train_ensemble",
    "calibrate_radii",
    "ewlsnet_estimate",
    "MmlocError",
    "GeometryError",
    "UnderdeterminedError",
    "SingularSystemError",
    "UnobservableError",
    "DivergenceError",
    "DimensionError",
    "ConfigError",
    "EnsembleError",
    "RunAborted",
    "Factory",
    "Vec3",
    "LIGHT_SPEED",
    "as_vec3",
    "Scenario",
    "SIX_RRH_POSITIONS",
    "EIGHTEEN_RRH_POSITIONS",
    "MAPPING_SCATTERER",
    "MAPPING_RRH_INDEX",
    "STREET_WALLS_X",
    "six_rrh_preset",
    "eighteen_rrh_preset",
    "PRESETS",
    "load_preset",
    "street_canyon_scenario",
    "los_range",
    "arrival_time",
    "tdoa_related",
    "range_rate",
    "range_rate_diff",
    "aoa_pair",
    "aoa_basis",
    "nlos_params",
    "location_parameters",
    "wrap_angle",
    "rrh_array",
    "ESTIMATORS",
    "MAX_FAILURE_FRACTION",
    "OUTLIER_RATIO",
    "REPORT_COLUMNS",
    "db_to_linear",
    "linear_to_db",
    "build_scenario_family",
    "RunConfig",
    "MetricsReport",
    "TimingReport",
    "trial_rng",
    "run_estimator",
    "monte_carlo",
    "sweep_rho",
    "sweep_na",
    "sweep_sigmas",
    "evaluate_testset",
    "compare_family",
    "bench_timing",
    "reports_frame",
    "emit_report",
    "load_report_json",
    "Log",
    "MappingSystem",
    "ScattererEstimate",
    "MappingFailure",
    "build_mapping_system",
    "build_mapping_linearization",
    "estimate_scatterer",
    "map_environment",
    "POINT_CLOUD_COLUMNS",
    "point_cloud",
    "write_point_cloud",
    "STD_FLOOR",
    "NOISE_KINDS",
    "BASE_SIGMA_D",
    "BASE_SIGMA_A",
    "NoiseModel",
    "joint_covariance",
    "mapping_covariance",
    "MeasurementSet",
    "MappingMeasurement",
    "measurement_error",
    "synthesize_measurements",
    "synthesize_mapping_measurement",
    "measurement_columns",
    "write_measurements",
    "read_measurements",
    "MAPPING_COLUMNS",
    "write_mapping_measurements",
    "read_mapping_measurements",
    "RANGE_FLOOR",
    "RANGE_MARGIN",
    "NormalizationSpec",
    "MlpParams",
    "mlp_forward",
    "predict",
    "loss_and_grad",
    "TrainingConfig",
    "TrainResult",
    "train_mlp",
    "save_network",
    "load_network",
    "ErrorAccumulator",
    "lag1_autocorrelation",
    "COND_LIMIT",
    "DesignSystem",
    "LinearizationB",
    "JointEstimate",
    "build_design",
    "build_linearization",
    "wls_solve",
    "estimate_joint",
    "SPLITS",
    "MAPPING_MODES",
    "WlsNetConfig",
    "TrainingSet",
    "generate_dataset",
    "generate_mapping_dataset",
    "write_dataset",
    "read_dataset",
    "residual",
    "train_residual_net",
    "train_fp_net",
    "predict_residual",
    "residual_whitening",
    "wlsnet_estimate",
    "lsnet_estimate",
    "fp_estimate",
    "estimate_scatterer_net",
]
