# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Noise models and measurement synthesis

import dataclasses
import functools
import os
from dataclasses import dataclass
from typing import Any

import numpy as np
import pandas as pd
from scipy.linalg import LinAlgError, block_diag, cholesky

from .errors import ConfigError, DimensionError, UnderdeterminedError
from .factory import Factory
from .geometry import Scenario, location_parameters, nlos_params

# Standard deviation substituted for an exactly-zero one so covariances stay positive definite
STD_FLOOR = 1e-12

NOISE_KINDS = ("gaussian", "dominant_plus_fluctuating")

# Base TDoA (m) and AoA (rad) deviations that rho scales
BASE_SIGMA_D = 40.0
BASE_SIGMA_A = 0.1


@dataclass(frozen=True)
class NoiseModel:
    """
    Measurement error model.

    ``gaussian``: zero-mean errors with standard deviations sigma_d (TDoA), fdoa_factor * sigma_d (FDoA)
    and sigma_a (both angles).

    ``dominant_plus_fluctuating``: a fixed offset drawn once from those deviations (seeded by ``seed``)
    plus an i.i.d. fluctuation whose deviations are the dominant ones times the per-kind ratios.
    """

    kind: str = "gaussian"
    sigma_d: float = 0.0
    sigma_a: float = 0.0
    fdoa_factor: float = 0.1
    fluctuating_ratio_tdoa: float = 0.0
    fluctuating_ratio_fdoa: float = 0.0
    fluctuating_ratio_aoa: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in NOISE_KINDS:
            raise ConfigError(f"Unknown noise kind {self.kind!r}, expected one of {NOISE_KINDS}")
        for name in ("sigma_d", "sigma_a", "fdoa_factor", "fluctuating_ratio_tdoa", "fluctuating_ratio_fdoa", "fluctuating_ratio_aoa"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ConfigError(f"{name} must be finite and >= 0, got {v}")

    @property
    def is_dominant(self) -> bool:
        return self.kind == "dominant_plus_fluctuating"

    def dominant_stds(self) -> tuple[float, float, float]:
        """
        (TDoA, FDoA, AoA) deviations before the fluctuation ratios are applied.
        """
        return (self.sigma_d, self.fdoa_factor * self.sigma_d, self.sigma_a)

    def gaussian_stds(self) -> tuple[float, float, float]:
        """
        (TDoA, FDoA, AoA) deviations of the per-sample Gaussian part.
        """
        sd, sf, sa = self.dominant_stds()
        if self.is_dominant:
            return (sd * self.fluctuating_ratio_tdoa, sf * self.fluctuating_ratio_fdoa, sa * self.fluctuating_ratio_aoa)
        return (sd, sf, sa)

    def scaled(self, rho: float) -> "NoiseModel":
        """
        Copy with sigma_d and sigma_a multiplied by ``rho``.
        """
        return dataclasses.replace(self, sigma_d=self.sigma_d * rho, sigma_a=self.sigma_a * rho)

    def with_seed(self, seed: int) -> "NoiseModel":
        return dataclasses.replace(self, seed=seed)

    @staticmethod
    def from_config(prefix: str = "noise") -> "NoiseModel":
        """
        Build a noise model from the configuration store.

        ``<prefix>.family`` (D0..D4, P1..P4) selects a family as the base, otherwise the base is Gaussian with
        BASE_SIGMA_D and BASE_SIGMA_A. Every other field overrides the base and ``<prefix>.rho`` scales the result.

        :rtype: NoiseModel
        """
        family = Factory.get_variable(f"{prefix}.family", None)
        if family is not None:
            from .harness import build_scenario_family

            base = build_scenario_family(family)
        else:
            base = NoiseModel(sigma_d=BASE_SIGMA_D, sigma_a=BASE_SIGMA_A)
        kwargs: dict[str, Any] = {}
        for f in dataclasses.fields(NoiseModel):
            v = Factory.get_variable(f"{prefix}.{f.name}", None)
            if v is not None:
                kwargs[f.name] = v if f.name == "kind" else (int(v) if f.name == "seed" else float(v))
        noise = dataclasses.replace(base, **kwargs)
        rho = Factory.get_variable(f"{prefix}.rho", None)
        return noise if rho is None else noise.scaled(float(rho))


def joint_covariance(na: int, stds: tuple[float, float, float]) -> np.ndarray:
    """
    blkdiag(Qd x (na - 1), Qa x na) with Qd = diag(s_d^2, s_f^2) and Qa = diag(s_a^2, s_a^2).

    :param na: Number of RRHs used.
    :type na: int
    :param stds: (TDoA, FDoA, AoA) deviations; zeros are floored at STD_FLOOR.
    :rtype: numpy.ndarray
    """
    sd, sf, sa = (max(s, STD_FLOOR) for s in stds)
    qd = np.diag([sd**2, sf**2])
    qa = np.diag([sa**2, sa**2])
    return block_diag(*([qd] * (na - 1) + [qa] * na))


def mapping_covariance(stds: tuple[float, float, float]) -> np.ndarray:
    """
    diag(s_d^2, s_a^2, s_a^2) for one NLoS triple.
    """
    sd, _, sa = (max(s, STD_FLOOR) for s in stds)
    return np.diag([sd**2, sa**2, sa**2])


def _check_covariance(q: np.ndarray, name: str) -> None:
    if not np.allclose(q, q.T, rtol=1e-10, atol=0.0):
        raise DimensionError(f"{name} is not symmetric")
    try:
        cholesky(q, lower=True)
    except (LinAlgError, ValueError) as e:
        raise DimensionError(f"{name} is not positive definite: {e}") from e


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """
    Hybrid measurement vector for ``na`` RRHs and the covariance of its Gaussian part.
    """

    na: int
    m: np.ndarray
    q: np.ndarray

    def __post_init__(self) -> None:
        n = 4 * self.na - 2
        m = np.asarray(self.m, dtype=float).reshape(-1)
        q = np.asarray(self.q, dtype=float)
        if self.na < 2:
            raise UnderdeterminedError(f"at least 2 RRHs are required, got na={self.na}")
        if m.shape != (n,):
            raise DimensionError(f"m must have {n} entries for na={self.na}, got {m.shape}")
        if q.shape != (n, n):
            raise DimensionError(f"q must be {n}x{n} for na={self.na}, got {q.shape}")
        _check_covariance(q, "q")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "q", q)

    @property
    def tdoa(self) -> np.ndarray:
        return self.m[0 : 2 * (self.na - 1) : 2]

    @property
    def fdoa(self) -> np.ndarray:
        return self.m[1 : 2 * (self.na - 1) : 2]

    @property
    def azimuth(self) -> np.ndarray:
        return self.m[2 * (self.na - 1) :: 2]

    @property
    def elevation(self) -> np.ndarray:
        return self.m[2 * (self.na - 1) + 1 :: 2]


@dataclass(frozen=True, eq=False)
class MappingMeasurement:
    """
    NLoS triple [r_n1^s, azimuth, elevation] observed at RRH ``rrh_index``.
    """

    rrh_index: int
    m_s: np.ndarray
    q_s: np.ndarray

    def __post_init__(self) -> None:
        m_s = np.asarray(self.m_s, dtype=float).reshape(-1)
        q_s = np.asarray(self.q_s, dtype=float)
        if m_s.shape != (3,):
            raise DimensionError(f"m_s must have 3 entries, got {m_s.shape}")
        if q_s.shape != (3, 3):
            raise DimensionError(f"q_s must be 3x3, got {q_s.shape}")
        _check_covariance(q_s, "q_s")
        object.__setattr__(self, "m_s", m_s)
        object.__setattr__(self, "q_s", q_s)


@functools.lru_cache(maxsize=64)
def _dominant_offset(noise: NoiseModel, n_rrh: int) -> np.ndarray:
    # Full-N layout: (N-1) TDoA/FDoA pairs then N AoA pairs, sliced per na
    rng = np.random.default_rng(np.random.SeedSequence(noise.seed, spawn_key=(0xD0,)))
    return _draw_full(rng, n_rrh, noise.dominant_stds())


@functools.lru_cache(maxsize=64)
def _dominant_mapping_offset(noise: NoiseModel, n_rrh: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(noise.seed, spawn_key=(0xD5,)))
    sd, _, sa = noise.dominant_stds()
    return rng.standard_normal((n_rrh, 3)) * np.array([sd, sa, sa])


def _draw_full(rng: np.random.Generator, n_rrh: int, stds: tuple[float, float, float]) -> np.ndarray:
    sd, sf, sa = stds
    pairs = rng.standard_normal((n_rrh - 1, 2)) * np.array([sd, sf])
    angles = rng.standard_normal((n_rrh, 2)) * sa
    return np.concatenate([pairs.reshape(-1), angles.reshape(-1)])


def _slice_full(full: np.ndarray, n_rrh: int, na: int) -> np.ndarray:
    off = 2 * (n_rrh - 1)
    return np.concatenate([full[: 2 * (na - 1)], full[off : off + 2 * na]])


def measurement_error(noise: NoiseModel, n_rrh: int, na: int, rng: np.random.Generator) -> np.ndarray:
    """
    One draw of the measurement error for ``na`` of ``n_rrh`` RRHs.

    Errors are drawn per RRH in a fixed full-N layout and then sliced, so draws from equally seeded
    generators agree on the RRHs that two different ``na`` share.

    :rtype: numpy.ndarray
    """
    full = _draw_full(rng, n_rrh, noise.gaussian_stds())
    if noise.is_dominant:
        full = full + _dominant_offset(noise, n_rrh)
    return _slice_full(full, n_rrh, na)


def synthesize_measurements(scenario: Scenario, noise: NoiseModel, na: int, rng: np.random.Generator | None = None) -> MeasurementSet:
    """
    m = m_true + dm for the first ``na`` RRHs.

    ``q`` reports the nominal covariance of the Gaussian part of dm. Angles are not re-wrapped.

    :param scenario: World geometry.
    :type scenario: Scenario
    :param noise: Error model.
    :type noise: NoiseModel
    :param na: Number of RRHs used, 2 <= na <= N.
    :type na: int
    :param rng: Generator for the Gaussian part; ``default_rng(noise.seed)`` when None.
    :type rng: numpy.random.Generator | None
    :raises UnderdeterminedError: na out of range
    :rtype: MeasurementSet
    """
    if not 2 <= na <= scenario.n_rrh:
        raise UnderdeterminedError(f"na must be in [2, {scenario.n_rrh}], got {na}")
    if rng is None:
        rng = np.random.default_rng(noise.seed)
    m = location_parameters(scenario, na) + measurement_error(noise, scenario.n_rrh, na, rng)
    return MeasurementSet(na=na, m=m, q=joint_covariance(na, noise.gaussian_stds()))


def synthesize_mapping_measurement(scenario: Scenario, n: int, noise: NoiseModel, rng: np.random.Generator | None = None) -> MappingMeasurement:
    """
    Noisy NLoS triple for the scatterer of RRH ``n`` with Q_s = diag(s_d^2, s_a^2, s_a^2).

    :raises GeometryError: RRH ``n`` has no scatterer
    :rtype: MappingMeasurement
    """
    if rng is None:
        rng = np.random.default_rng(noise.seed)
    sd, _, sa = noise.gaussian_stds()
    dm = rng.standard_normal(3) * np.array([sd, sa, sa])
    if noise.is_dominant:
        dm = dm + _dominant_mapping_offset(noise, scenario.n_rrh)[n]
    m_s = np.asarray(nlos_params(scenario, n)) + dm
    return MappingMeasurement(rrh_index=n, m_s=m_s, q_s=mapping_covariance(noise.gaussian_stds()))


def measurement_columns(na: int) -> list[str]:
    """
    CSV column names for a measurement vector, using 0-based RRH indices.
    """
    cols = []
    for i in range(1, na):
        cols += [f"r_{i}_0", f"rdot_{i}_0"]
    for j in range(na):
        cols += [f"phi_{j}", f"theta_{j}"]
    return cols


def write_measurements(path: str, sets: list[MeasurementSet]) -> None:
    """
    Write measurement vectors as CSV, one row per set.

    :raises DimensionError: mixed na
    """
    if not sets:
        raise DimensionError("no measurement sets to write")
    na = sets[0].na
    if any(s.na != na for s in sets):
        raise DimensionError("all measurement sets in one file must share na")
    pd.DataFrame(np.vstack([s.m for s in sets]), columns=measurement_columns(na)).to_csv(path, index=False)


def read_measurements(path: str, noise: NoiseModel) -> list[MeasurementSet]:
    """
    Read a measurement CSV written by :func:`write_measurements`.

    :param noise: Supplies the covariance attached to every row.
    :raises ConfigError: missing file
    :raises DimensionError: unrecognised columns
    :rtype: list[MeasurementSet]
    """
    if not os.path.exists(path):
        raise ConfigError(f"Measurement file {path} does not exist")
    df = pd.read_csv(path)
    na = (len(df.columns) + 2) // 4
    if list(df.columns) != measurement_columns(na):
        raise DimensionError(f"{path}: columns {list(df.columns)} do not form a measurement vector")
    q = joint_covariance(na, noise.gaussian_stds())
    return [MeasurementSet(na=na, m=row, q=q) for row in df.to_numpy(dtype=float)]


MAPPING_COLUMNS = ["rrh_index", "r_s", "phi_s", "theta_s"]


def write_mapping_measurements(path: str, meas: list[MappingMeasurement]) -> None:
    rows = [[mm.rrh_index, *mm.m_s] for mm in meas]
    df = pd.DataFrame(rows, columns=MAPPING_COLUMNS)
    df["rrh_index"] = df["rrh_index"].astype(int)
    df.to_csv(path, index=False)


def read_mapping_measurements(path: str, noise: NoiseModel) -> list[MappingMeasurement]:
    """
    Read per-scatterer NLoS triples (columns rrh_index, r_s, phi_s, theta_s).

    :rtype: list[MappingMeasurement]
    """
    if not os.path.exists(path):
        raise ConfigError(f"Measurement file {path} does not exist")
    df = pd.read_csv(path)
    missing = [c for c in MAPPING_COLUMNS if c not in df.columns]
    if missing:
        raise DimensionError(f"{path}: missing columns {missing}")
    q_s = mapping_covariance(noise.gaussian_stds())
    return [
        MappingMeasurement(rrh_index=int(r.rrh_index), m_s=np.array([r.r_s, r.phi_s, r.theta_s]), q_s=q_s)
        for r in df.itertuples(index=False)
    ]


__all__ = [
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
]
