# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Learned-residual estimators
#
# A network predicts the residual e = h - G x of the pseudo-linear model from
# the measurements. WLS-Net weights with W = (e e^T + a I)^-1, LS-Net solves
# with h - e, FP regresses [u; u_dot] directly.

import dataclasses
import os
from dataclasses import dataclass
from typing import Any

import numpy as np
import pandas as pd

from .errors import ConfigError, DimensionError, GeometryError, SingularSystemError
from .factory import Factory
from .geometry import MAPPING_RRH_INDEX, Scenario, as_vec3, rrh_array
from .log import Log
from .mapping import ScattererEstimate, build_mapping_system
from .measurement import MappingMeasurement, MeasurementSet, NoiseModel, joint_covariance, mapping_covariance, measurement_columns, synthesize_mapping_measurement, synthesize_measurements
from .mlp import MlpParams, TrainingConfig, predict, train_mlp
from .wls import DesignSystem, JointEstimate, build_design, wls_solve

SPLITS = ("train", "val", "test")
MAPPING_MODES = ("weighted", "subtract")


@dataclass(frozen=True)
class WlsNetConfig:
    """
    Network shape, optimiser and inference settings.

    ``disturbance`` is the a of W = (e e^T + a I)^-1 relative to the mean squared predicted residual.
    """

    hidden: tuple[int, ...] = (32, 32)
    disturbance: float = 1e-6
    epochs: int = 500
    batch_size: int = 128
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    patience: int = 50
    seed: int = 0
    log_interval: int = 50
    six_input_subnet2: bool = False
    mapping_mode: str = "weighted"

    def __post_init__(self) -> None:
        if not self.disturbance > 0:
            raise ConfigError(f"disturbance must be positive, got {self.disturbance}")
        if self.mapping_mode not in MAPPING_MODES:
            raise ConfigError(f"mapping_mode must be one of {MAPPING_MODES}, got {self.mapping_mode!r}")
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))

    def training(self, seed: int | None = None) -> TrainingConfig:
        return TrainingConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            beta1=self.beta1,
            beta2=self.beta2,
            eps=self.eps,
            patience=self.patience,
            seed=self.seed if seed is None else seed,
            log_interval=self.log_interval,
        )

    @staticmethod
    def from_config(prefix: str = "nn") -> "WlsNetConfig":
        kwargs: dict[str, Any] = {}
        for f in dataclasses.fields(WlsNetConfig):
            v = Factory.get_variable(f"{prefix}.{f.name}", None)
            if v is None:
                continue
            if f.name == "hidden":
                kwargs[f.name] = tuple(v)
            elif f.name in ("six_input_subnet2",):
                kwargs[f.name] = bool(v)
            elif f.name == "mapping_mode":
                kwargs[f.name] = str(v)
            elif isinstance(f.default, int):
                kwargs[f.name] = int(v)
            else:
                kwargs[f.name] = float(v)
        return WlsNetConfig(**kwargs)


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """
    Labelled samples for residual learning.

    ``inputs`` are measurement vectors, ``targets`` the residuals h - G x of the true state, ``labels``
    the true state ([u; u_dot] for the joint problem, s for mapping) and ``split`` tags each row
    ``train``, ``val`` or ``test``. Mapping sets also carry ``ue`` (the UE position used to build the
    residuals) and ``rrh_index``.
    """

    inputs: np.ndarray
    targets: np.ndarray
    labels: np.ndarray
    split: np.ndarray
    rrhs: np.ndarray
    q: np.ndarray
    na: int = 0
    rrh_index: int = -1
    ue: np.ndarray | None = None

    def __post_init__(self) -> None:
        n = self.inputs.shape[0]
        if n < 1:
            raise DimensionError("a training set needs at least one sample")
        if self.targets.shape[0] != n or self.labels.shape[0] != n or self.split.shape[0] != n:
            raise DimensionError("inputs, targets, labels and split must have the same number of rows")

    @property
    def is_mapping(self) -> bool:
        return self.rrh_index >= 0

    def __len__(self) -> int:
        return int(self.inputs.shape[0])

    def part(self, tag: str) -> "TrainingSet":
        """
        Rows tagged ``tag``.

        :raises ConfigError: unknown tag
        :raises DimensionError: no rows carry the tag
        """
        if tag not in SPLITS:
            raise ConfigError(f"unknown split {tag!r}, expected one of {SPLITS}")
        sel = self.split == tag
        return dataclasses.replace(self, inputs=self.inputs[sel], targets=self.targets[sel], labels=self.labels[sel], split=self.split[sel])

    def measurements(self) -> list[MeasurementSet]:
        return [MeasurementSet(na=self.na, m=row, q=self.q) for row in self.inputs]

    def mapping_measurements(self) -> list[MappingMeasurement]:
        return [MappingMeasurement(rrh_index=self.rrh_index, m_s=row, q_s=self.q) for row in self.inputs]

    def to_frame(self) -> pd.DataFrame:
        if self.is_mapping:
            in_cols = ["r_s", "phi_s", "theta_s"]
            lab_cols = ["s_x", "s_y", "s_z"]
        else:
            in_cols = measurement_columns(self.na)
            lab_cols = ["u_x", "u_y", "u_z", "udot_x", "udot_y", "udot_z"]
        out_cols = [f"e_{k}" for k in range(self.targets.shape[1])]
        df = pd.DataFrame(np.hstack([self.inputs, self.targets, self.labels]), columns=in_cols + out_cols + lab_cols)
        df.insert(0, "split", self.split)
        return df


def _split_tags(n: int, rng: np.random.Generator, train_fraction: float, val_fraction: float) -> np.ndarray:
    if not (0 < train_fraction and 0 <= val_fraction and train_fraction + val_fraction < 1):
        raise ConfigError(f"invalid split fractions train={train_fraction}, val={val_fraction}")
    n_train = int(round(train_fraction * n))
    n_val = int(round(val_fraction * n))
    tags = np.empty(n, dtype=object)
    order = rng.permutation(n)
    tags[order[:n_train]] = "train"
    tags[order[n_train : n_train + n_val]] = "val"
    tags[order[n_train + n_val :]] = "test"
    return tags.astype(str)


def residual(design: DesignSystem, x: np.ndarray) -> np.ndarray:
    return design.h - design.g @ x


def generate_dataset(
    scenario: Scenario,
    noise: NoiseModel,
    na: int,
    samples: int,
    area_halfwidth: float = 50.0,
    speed_halfwidth: float = 5.0,
    seed: int = 0,
    train_fraction: float = 0.6,
    val_fraction: float = 0.2,
) -> TrainingSet:
    """
    Labelled joint-localisation samples with the UE spread uniformly in a box around the scenario UE.

    Every sample shares the dominant offset of ``noise`` (fixed by ``noise.seed``); the Gaussian part is
    fresh per sample.

    :param scenario: Base geometry.
    :type scenario: Scenario
    :param noise: Error model.
    :type noise: NoiseModel
    :param na: RRHs used.
    :param samples: Number of samples.
    :param area_halfwidth: Half width of the position box (m).
    :param speed_halfwidth: Half width of the velocity box (m/s).
    :param seed: Seed for positions, fluctuations and the split.
    :rtype: TrainingSet
    """
    if samples < 1:
        raise ConfigError(f"samples must be >= 1, got {samples}")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0xDA,)))
    n_out = 4 * na - 2
    inputs = np.empty((samples, n_out))
    targets = np.empty((samples, n_out))
    labels = np.empty((samples, 6))
    for i in range(samples):
        u = scenario.ue_pos + rng.uniform(-area_halfwidth, area_halfwidth, 3)
        v = scenario.ue_vel + rng.uniform(-speed_halfwidth, speed_halfwidth, 3)
        sc = scenario.with_ue(u, v)
        meas = synthesize_measurements(sc, noise, na, rng)
        inputs[i] = meas.m
        targets[i] = residual(build_design(meas, sc.rrhs), sc.x)
        labels[i] = sc.x
    split = _split_tags(samples, rng, train_fraction, val_fraction)
    Log.debug(f"generated {samples} samples for na={na}, noise {noise.kind}", group="mmloc.nn")
    return TrainingSet(
        inputs=inputs,
        targets=targets,
        labels=labels,
        split=split,
        rrhs=np.asarray(scenario.rrhs),
        q=joint_covariance(na, noise.gaussian_stds()),
        na=na,
    )


def generate_mapping_dataset(
    scenario: Scenario,
    noise: NoiseModel,
    samples: int,
    n: int = MAPPING_RRH_INDEX,
    box_halfwidth: float = 20.0,
    seed: int = 0,
    train_fraction: float = 0.6,
    val_fraction: float = 0.2,
) -> TrainingSet:
    """
    Labelled NLoS samples for the scatterer of RRH ``n``, moved uniformly in a box around its scenario
    position with the UE fixed. Residuals use the true UE position.

    :raises GeometryError: RRH ``n`` has no scatterer
    :rtype: TrainingSet
    """
    s0 = scenario.scatterers[n]
    if s0 is None:
        raise GeometryError(f"RRH {n} has no scatterer")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0xDB,)))
    inputs = np.empty((samples, 3))
    targets = np.empty((samples, 3))
    labels = np.empty((samples, 3))
    u = scenario.ue_pos
    r1 = float(np.linalg.norm(u - scenario.rrhs[0]))
    for i in range(samples):
        s = s0 + rng.uniform(-box_halfwidth, box_halfwidth, 3)
        sc = scenario.with_scatterer(n, s)
        mm = synthesize_mapping_measurement(sc, n, noise, rng)
        system = build_mapping_system(mm, sc.rrhs[n], u, r1)
        inputs[i] = mm.m_s
        targets[i] = system.h_s - system.g_s @ s
        labels[i] = s
    split = _split_tags(samples, rng, train_fraction, val_fraction)
    return TrainingSet(
        inputs=inputs,
        targets=targets,
        labels=labels,
        split=split,
        rrhs=np.asarray(scenario.rrhs),
        q=mapping_covariance(noise.gaussian_stds()),
        rrh_index=n,
        ue=u.copy(),
    )


def write_dataset(path: str, data: TrainingSet) -> None:
    data.to_frame().to_csv(path, index=False)


def read_dataset(path: str, scenario: Scenario, noise: NoiseModel) -> TrainingSet:
    """
    Read a joint-localisation dataset written by :func:`write_dataset`.

    :raises ConfigError: missing file
    :raises DimensionError: unrecognised columns
    :rtype: TrainingSet
    """
    if not os.path.exists(path):
        raise ConfigError(f"Dataset file {path} does not exist")
    df = pd.read_csv(path)
    n_cols = len(df.columns) - 1 - 6
    if n_cols <= 0 or n_cols % 2:
        raise DimensionError(f"{path}: {len(df.columns)} columns do not form a dataset")
    na = (n_cols // 2 + 2) // 4
    in_cols = measurement_columns(na)
    out_cols = [f"e_{k}" for k in range(len(in_cols))]
    lab_cols = ["u_x", "u_y", "u_z", "udot_x", "udot_y", "udot_z"]
    if list(df.columns) != ["split"] + in_cols + out_cols + lab_cols:
        raise DimensionError(f"{path}: columns do not match a dataset for na={na}")
    return TrainingSet(
        inputs=df[in_cols].to_numpy(dtype=float),
        targets=df[out_cols].to_numpy(dtype=float),
        labels=df[lab_cols].to_numpy(dtype=float),
        split=df["split"].to_numpy(dtype=str),
        rrhs=np.asarray(scenario.rrhs),
        q=joint_covariance(na, noise.gaussian_stds()),
        na=na,
    )


def _net_inputs(data: TrainingSet, cfg: WlsNetConfig) -> np.ndarray:
    if data.is_mapping and cfg.six_input_subnet2:
        assert data.ue is not None
        return np.hstack([data.inputs, np.tile(data.ue, (len(data), 1))])
    return data.inputs


def _fit(data: TrainingSet, cfg: WlsNetConfig, targets: np.ndarray, val_targets: np.ndarray, kind: str, seed: int | None) -> MlpParams:
    train = data.part("train")
    val = data.part("val") if np.any(data.split == "val") else None
    x = _net_inputs(train, cfg)
    sizes = [x.shape[1], *cfg.hidden, targets.shape[1]]
    val_pair = None if val is None else (_net_inputs(val, cfg), val_targets)
    res = train_mlp(x, targets, sizes, cfg.training(seed), val=val_pair, kind=kind)
    Log.info(f"trained {kind} network {sizes}: best epoch {res.best_epoch}, final train loss {res.train_loss[-1]:.4e}", group="mmloc.nn")
    return res.params


def train_residual_net(data: TrainingSet, cfg: WlsNetConfig, seed: int | None = None) -> MlpParams:
    """
    Train a residual network (sub-Net 1 for joint sets, sub-Net 2 for mapping sets) on the ``train``
    rows, early-stopping on the ``val`` rows.

    :param data: Labelled samples.
    :type data: TrainingSet
    :param cfg: Network and optimiser settings.
    :type cfg: WlsNetConfig
    :param seed: Overrides ``cfg.seed`` (ensemble members differ only here).
    :raises DivergenceError: non-finite loss
    :rtype: MlpParams
    """
    kind = "mapping" if data.is_mapping else "residual"
    val_targets = data.targets[data.split == "val"]
    return _fit(data, cfg, data.part("train").targets, val_targets, kind, seed)


def train_fp_net(data: TrainingSet, cfg: WlsNetConfig, seed: int | None = None) -> MlpParams:
    """
    Train the direct regression network mapping measurements to [u; u_dot].

    :rtype: MlpParams
    """
    if data.is_mapping:
        raise ConfigError("FP networks are trained on joint-localisation sets")
    val_labels = data.labels[data.split == "val"]
    return _fit(data, cfg, data.part("train").labels, val_labels, "fp", seed)


def predict_residual(meas: MeasurementSet, params: MlpParams) -> np.ndarray:
    if params.n_inputs != meas.m.size:
        raise DimensionError(f"network expects {params.n_inputs} measurements, got {meas.m.size} (na={meas.na})")
    return predict(params, meas.m)


def residual_whitening(e_hat: np.ndarray, disturbance: float) -> tuple[np.ndarray, np.ndarray]:
    """
    W = (e e^T + a I)^-1 and a factor L with L^T L proportional to W.

    a is ``disturbance`` times the mean squared entry of ``e_hat`` (or ``disturbance`` itself when
    ``e_hat`` is zero). W comes from the Sherman-Morrison form and L = I - g e e^T, so nothing is inverted.

    :return: (W, L)
    """
    n = e_hat.size
    s = float(e_hat @ e_hat)
    eye = np.eye(n)
    if s == 0.0:
        return eye / disturbance, eye
    a = disturbance * s / n
    outer = np.outer(e_hat, e_hat)
    w = (eye - outer / (a + s)) / a
    gamma = (1.0 - np.sqrt(a / (a + s))) / s
    return w, eye - gamma * outer


def wlsnet_estimate(meas: MeasurementSet, params: MlpParams, cfg: WlsNetConfig, rrhs: Any, e_hat: np.ndarray | None = None) -> JointEstimate:
    """
    Single weighted solve with the learned residual. No re-weighting iterations.

    :param meas: Measurements.
    :param params: Residual network for ``meas.na`` RRHs.
    :param cfg: Supplies the disturbance.
    :param rrhs: RRH positions.
    :param e_hat: Use this residual instead of the network prediction.
    :raises SingularSystemError: rank-deficient normal matrix
    :rtype: JointEstimate
    """
    design = build_design(meas, rrhs)
    e = predict_residual(meas, params) if e_hat is None else np.asarray(e_hat, dtype=float)
    w, lmat = residual_whitening(e, cfg.disturbance)
    return wls_solve(design, w, whitening=lmat, allow_rank_deficient=meas.na < 4)


def lsnet_estimate(meas: MeasurementSet, params: MlpParams, rrhs: Any, e_hat: np.ndarray | None = None) -> JointEstimate:
    """
    Unweighted least squares on h - e_hat.

    :rtype: JointEstimate
    """
    design = build_design(meas, rrhs)
    e = predict_residual(meas, params) if e_hat is None else np.asarray(e_hat, dtype=float)
    shifted = DesignSystem(h=design.h - e, g=design.g)
    n = design.h.size
    return wls_solve(shifted, np.eye(n), whitening=np.eye(n), allow_rank_deficient=meas.na < 4)


def fp_estimate(meas: MeasurementSet, fp_params: MlpParams) -> JointEstimate:
    """
    Direct regression of [u; u_dot] from the measurements.

    :raises DimensionError: not a 6-output network or wrong input width
    :rtype: JointEstimate
    """
    if fp_params.n_outputs != 6:
        raise DimensionError(f"FP network must have 6 outputs, got {fp_params.n_outputs}")
    if fp_params.n_inputs != meas.m.size:
        raise DimensionError(f"FP network expects {fp_params.n_inputs} measurements, got {meas.m.size}")
    x = predict(fp_params, meas.m)
    return JointEstimate(u=x[:3], udot=x[3:])


def estimate_scatterer_net(
    meas_s: MappingMeasurement, u_est: Any, params2: MlpParams, cfg: WlsNetConfig, rrhs: Any, e_hat: np.ndarray | None = None
) -> ScattererEstimate:
    """
    Single-pass scatterer estimate with the residual from sub-Net 2.

    ``cfg.mapping_mode`` ``weighted`` solves with W = (e e^T + a I)^-1; ``subtract`` solves with h - e.
    With ``cfg.six_input_subnet2`` the network sees the measurements followed by ``u_est``.

    :rtype: ScattererEstimate
    """
    b_all = rrh_array(rrhs)
    u = as_vec3(u_est, "u_est")
    system = build_mapping_system(meas_s, b_all[meas_s.rrh_index], u, float(np.linalg.norm(u - b_all[0])))
    if e_hat is None:
        x = np.concatenate([meas_s.m_s, u]) if cfg.six_input_subnet2 else meas_s.m_s
        if params2.n_inputs != x.size:
            raise DimensionError(f"sub-Net 2 expects {params2.n_inputs} inputs, got {x.size}")
        e = predict(params2, x)
    else:
        e = np.asarray(e_hat, dtype=float)

    if cfg.mapping_mode == "subtract":
        h = system.h_s - e
        lmat = np.eye(3)
    else:
        h = system.h_s
        _, lmat = residual_whitening(e, cfg.disturbance)
    s, _, rank, sv = np.linalg.lstsq(lmat @ system.g_s, lmat @ h, rcond=None)
    cond = float((sv[0] / sv[-1]) ** 2) if sv[-1] > 0 else float("inf")
    if rank < 3:
        raise SingularSystemError(f"rank-deficient mapping system (rank {rank})", cond)
    return ScattererEstimate(s=s, rrh_index=meas_s.rrh_index, iterations_used=0, cond=cond)


__all__ = [
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
