from ._core import (
    aoa_basis as aoa_basis,
)
from ._core import (
    aoa_pair as aoa_pair,
)
from ._core import (
    arrival_time as arrival_time,
)
from ._core import (
    as_vec3 as as_vec3,
)
from ._core import (
    BASE_SIGMA_A as BASE_SIGMA_A,
)
from ._core import (
    BASE_SIGMA_D as BASE_SIGMA_D,
)
from ._core import (
    bench_timing as bench_timing,
)
from ._core import (
    build_design as build_design,
)
from ._core import (
    build_linearization as build_linearization,
)
from ._core import (
    build_mapping_linearization as build_mapping_linearization,
)
from ._core import (
    build_mapping_system as build_mapping_system,
)
from ._core import (
    build_scenario_family as build_scenario_family,
)
from ._core import (
    calibrate_radii as calibrate_radii,
)
from ._core import (
    compare_family as compare_family,
)
from ._core import (
    COND_LIMIT as COND_LIMIT,
)
from ._core import (
    ConfigError as ConfigError,
)
from ._core import (
    CrlbResult as CrlbResult,
)
from ._core import (
    crlb_joint as crlb_joint,
)
from ._core import (
    crlb_mapping as crlb_mapping,
)
from ._core import (
    db_to_linear as db_to_linear,
)
from ._core import (
    DesignSystem as DesignSystem,
)
from ._core import (
    DimensionError as DimensionError,
)
from ._core import (
    DivergenceError as DivergenceError,
)
from ._core import (
    EIGHTEEN_RRH_POSITIONS as EIGHTEEN_RRH_POSITIONS,
)
from ._core import (
    eighteen_rrh_preset as eighteen_rrh_preset,
)
from ._core import (
    emit_report as emit_report,
)
from ._core import (
    EnsembleConfig as EnsembleConfig,
)
from ._core import (
    EnsembleError as EnsembleError,
)
from ._core import (
    ErrorAccumulator as ErrorAccumulator,
)
from ._core import (
    estimate_joint as estimate_joint,
)
from ._core import (
    estimate_scatterer as estimate_scatterer,
)
from ._core import (
    estimate_scatterer_net as estimate_scatterer_net,
)
from ._core import (
    ESTIMATORS as ESTIMATORS,
)
from ._core import (
    evaluate_testset as evaluate_testset,
)
from ._core import (
    ewlsnet_estimate as ewlsnet_estimate,
)
from ._core import (
    Factory as Factory,
)
from ._core import (
    FISHER_COND_LIMIT as FISHER_COND_LIMIT,
)
from ._core import (
    fp_estimate as fp_estimate,
)
from ._core import (
    generate_dataset as generate_dataset,
)
from ._core import (
    generate_mapping_dataset as generate_mapping_dataset,
)
from ._core import (
    GeometryError as GeometryError,
)
from ._core import (
    jacobian_b1 as jacobian_b1,
)
from ._core import (
    jacobian_mapping as jacobian_mapping,
)
from ._core import (
    JointEstimate as JointEstimate,
)
from ._core import (
    joint_covariance as joint_covariance,
)
from ._core import (
    lag1_autocorrelation as lag1_autocorrelation,
)
from ._core import (
    LIGHT_SPEED as LIGHT_SPEED,
)
from ._core import (
    LinearizationB as LinearizationB,
)
from ._core import (
    linear_to_db as linear_to_db,
)
from ._core import (
    load_network as load_network,
)
from ._core import (
    load_preset as load_preset,
)
from ._core import (
    load_report_json as load_report_json,
)
from ._core import (
    location_parameters as location_parameters,
)
from ._core import (
    Log as Log,
)
from ._core import (
    loss_and_grad as loss_and_grad,
)
from ._core import (
    los_range as los_range,
)
from ._core import (
    lsnet_estimate as lsnet_estimate,
)
from ._core import (
    MappingFailure as MappingFailure,
)
from ._core import (
    MappingMeasurement as MappingMeasurement,
)
from ._core import (
    MappingSystem as MappingSystem,
)
from ._core import (
    MAPPING_COLUMNS as MAPPING_COLUMNS,
)
from ._core import (
    mapping_covariance as mapping_covariance,
)
from ._core import (
    MAPPING_MODES as MAPPING_MODES,
)
from ._core import (
    MAPPING_RRH_INDEX as MAPPING_RRH_INDEX,
)
from ._core import (
    MAPPING_SCATTERER as MAPPING_SCATTERER,
)
from ._core import (
    map_environment as map_environment,
)
from ._core import (
    MAX_FAILURE_FRACTION as MAX_FAILURE_FRACTION,
)
from ._core import (
    OUTLIER_RATIO as OUTLIER_RATIO,
)
from ._core import (
    MeasurementSet as MeasurementSet,
)
from ._core import (
    measurement_columns as measurement_columns,
)
from ._core import (
    measurement_error as measurement_error,
)
from ._core import (
    MetricsReport as MetricsReport,
)
from ._core import (
    MlpParams as MlpParams,
)
from ._core import (
    mlp_forward as mlp_forward,
)
from ._core import (
    MmlocError as MmlocError,
)
from ._core import (
    monte_carlo as monte_carlo,
)
from ._core import (
    nlos_params as nlos_params,
)
from ._core import (
    NoiseModel as NoiseModel,
)
from ._core import (
    NOISE_KINDS as NOISE_KINDS,
)
from ._core import (
    NormalizationSpec as NormalizationSpec,
)
from ._core import (
    point_cloud as point_cloud,
)
from ._core import (
    POINT_CLOUD_COLUMNS as POINT_CLOUD_COLUMNS,
)
from ._core import (
    predict as predict,
)
from ._core import (
    predict_residual as predict_residual,
)
from ._core import (
    PRESETS as PRESETS,
)
from ._core import (
    RADIUS_SPREAD_FACTOR as RADIUS_SPREAD_FACTOR,
)
from ._core import (
    RANGE_FLOOR as RANGE_FLOOR,
)
from ._core import (
    RANGE_MARGIN as RANGE_MARGIN,
)
from ._core import (
    range_rate as range_rate,
)
from ._core import (
    range_rate_diff as range_rate_diff,
)
from ._core import (
    read_dataset as read_dataset,
)
from ._core import (
    read_mapping_measurements as read_mapping_measurements,
)
from ._core import (
    read_measurements as read_measurements,
)
from ._core import (
    reports_frame as reports_frame,
)
from ._core import (
    REPORT_COLUMNS as REPORT_COLUMNS,
)
from ._core import (
    residual as residual,
)
from ._core import (
    residual_whitening as residual_whitening,
)
from ._core import (
    rrh_array as rrh_array,
)
from ._core import (
    RunAborted as RunAborted,
)
from ._core import (
    RunConfig as RunConfig,
)
from ._core import (
    run_estimator as run_estimator,
)
from ._core import (
    save_network as save_network,
)
from ._core import (
    ScattererEstimate as ScattererEstimate,
)
from ._core import (
    Scenario as Scenario,
)
from ._core import (
    SingularSystemError as SingularSystemError,
)
from ._core import (
    SIX_RRH_POSITIONS as SIX_RRH_POSITIONS,
)
from ._core import (
    six_rrh_preset as six_rrh_preset,
)
from ._core import (
    SPLITS as SPLITS,
)
from ._core import (
    STD_FLOOR as STD_FLOOR,
)
from ._core import (
    street_canyon_scenario as street_canyon_scenario,
)
from ._core import (
    STREET_WALLS_X as STREET_WALLS_X,
)
from ._core import (
    subtractive_cluster_centers as subtractive_cluster_centers,
)
from ._core import (
    subtractive_cluster_select as subtractive_cluster_select,
)
from ._core import (
    SUPPRESSION_FACTOR as SUPPRESSION_FACTOR,
)
from ._core import (
    sweep_na as sweep_na,
)
from ._core import (
    sweep_rho as sweep_rho,
)
from ._core import (
    sweep_sigmas as sweep_sigmas,
)
from ._core import (
    synthesize_mapping_measurement as synthesize_mapping_measurement,
)
from ._core import (
    synthesize_measurements as synthesize_measurements,
)
from ._core import (
    tdoa_related as tdoa_related,
)
from ._core import (
    TimingReport as TimingReport,
)
from ._core import (
    TrainingConfig as TrainingConfig,
)
from ._core import (
    TrainingSet as TrainingSet,
)
from ._core import (
    TrainResult as TrainResult,
)
from ._core import (
    train_ensemble as train_ensemble,
)
from ._core import (
    train_fp_net as train_fp_net,
)
from ._core import (
    train_mlp as train_mlp,
)
from ._core import (
    train_residual_net as train_residual_net,
)
from ._core import (
    trial_rng as trial_rng,
)
from ._core import (
    UnderdeterminedError as UnderdeterminedError,
)
from ._core import (
    UnobservableError as UnobservableError,
)
from ._core import (
    Vec3 as Vec3,
)
from ._core import (
    verify_efficiency_identity as verify_efficiency_identity,
)
from ._core import (
    WlsNetConfig as WlsNetConfig,
)
from ._core import (
    wlsnet_estimate as wlsnet_estimate,
)
from ._core import (
    wls_solve as wls_solve,
)
from ._core import (
    wrap_angle as wrap_angle,
)
from ._core import (
    write_dataset as write_dataset,
)
from ._core import (
    write_mapping_measurements as write_mapping_measurements,
)
from ._core import (
    write_measurements as write_measurements,
)
from ._core import (
    write_point_cloud as write_point_cloud,
)

__version__ = "0.1.0"

Log._install()
