# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Monte Carlo harness
#
# Trial i draws its noise from SeedSequence(seed, spawn_key=(i,)) so results do
# not depend on how trials are scheduled.

import dataclasses
import json
import math
import os
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd

from .crlb import crlb_joint, crlb_mapping
from .ensemble import EnsembleConfig, calibrate_radii, ewlsnet_estimate, train_ensemble
from .errors import ConfigError, MmlocError, UnderdeterminedError, UnobservableError
from .factory import Factory
from .geometry import Scenario
from .log import Log
from .mapping import estimate_scatterer
from .measurement import (
    BASE_SIGMA_A,
    BASE_SIGMA_D,
    MeasurementSet,
    NoiseModel,
    joint_covariance,
    mapping_covariance,
    synthesize_mapping_measurement,
    synthesize_measurements,
)
from .mlp import MlpParams
from .stats import ErrorAccumulator
from .wls import JointEstimate, estimate_joint
from .wlsnet import TrainingSet, WlsNetConfig, fp_estimate, generate_dataset, lsnet_estimate, train_fp_net, wlsnet_estimate

ESTIMATORS = ("wls", "wlsnet", "lsnet", "fp", "ewlsnet", "mapping")

# Fraction of failed trials above which a run is aborted
MAX_FAILURE_FRACTION = 0.1

# RMSE to median error ratio above which a run is reported as outlier dominated
OUTLIER_RATIO = 10.0

REPORT_COLUMNS = ["estimator", "scenario", "rho", "na", "rmse_u", "rmse_udot", "crlb_pos", "crlb_vel", "t_per_estimate"]

FAMILY_RATIOS = {
    "P1": (1e-4, 1e-3, 1e-3),
    "P2": (1e-3, 1e-2, 1e-2),
    "P3": (1e-2, 1e-1, 1e-1),
}


def db_to_linear(db: float) -> float:
    return float(10.0 ** (db / 10.0))


def linear_to_db(x: float) -> float:
    if not x > 0:
        raise ValueError(f"cannot express {x} in dB")
    return float(10.0 * math.log10(x))


def build_scenario_family(name: str, seed: int = 0) -> NoiseModel:
    """
    Noise model of a named error family.

    D0..D4: dominant deviations (0.1 m, 0.01 m/s, 0.001 rad) times 10^k with fluctuations of
    (1e-4, 1e-3, 1e-3) times the dominant ones. P1..P3 keep the D0 dominant part and raise the
    fluctuating share; P4 is purely Gaussian with the D0 deviations.

    :param name: Family name, case-insensitive.
    :type name: str
    :param seed: Seed of the fixed dominant offset.
    :type seed: int
    :raises ConfigError: unknown name
    :rtype: NoiseModel
    """
    key = str(name).upper()
    if len(key) == 2 and key[0] == "D" and key[1] in "01234":
        k = int(key[1])
        return NoiseModel(
            kind="dominant_plus_fluctuating",
            sigma_d=0.1 * 10**k,
            sigma_a=0.001 * 10**k,
            fdoa_factor=0.1,
            fluctuating_ratio_tdoa=1e-4,
            fluctuating_ratio_fdoa=1e-3,
            fluctuating_ratio_aoa=1e-3,
            seed=seed,
        )
    if key in FAMILY_RATIOS:
        rt, rf, ra = FAMILY_RATIOS[key]
        return NoiseModel(
            kind="dominant_plus_fluctuating",
            sigma_d=0.1,
            sigma_a=0.001,
            fdoa_factor=0.1,
            fluctuating_ratio_tdoa=rt,
            fluctuating_ratio_fdoa=rf,
            fluctuating_ratio_aoa=ra,
            seed=seed,
        )
    if key == "P4":
        return NoiseModel(kind="gaussian", sigma_d=0.1, sigma_a=0.001, fdoa_factor=0.1, seed=seed)
    raise ConfigError(f"Unknown error family {name!r}, expected D0..D4 or P1..P4")


@dataclass(frozen=True, eq=False)
class RunConfig:
    """
    One Monte Carlo experiment.

    ``noise`` is the base model; trials use ``noise.scaled(rho)``. Neural estimators need ``members``
    (residual networks, all of them for ``ewlsnet``, the first for ``wlsnet``/``lsnet``) or ``fp_params``.
    ``mapping`` runs the joint estimate followed by every scatterer of the scenario.
    """

    scenario: Scenario
    noise: NoiseModel = field(default_factory=lambda: NoiseModel(sigma_d=BASE_SIGMA_D, sigma_a=BASE_SIGMA_A))
    estimator: str = "wls"
    trials: int = 1000
    rho: float = 1.0
    na: int = 6
    seed: int = 0
    iterations: int = 5
    mapping_truth_ue: bool = False
    record_timing: bool = True
    members: tuple[MlpParams, ...] = ()
    fp_params: MlpParams | None = None
    nn: WlsNetConfig = field(default_factory=WlsNetConfig)
    ensemble: EnsembleConfig | None = None
    family: str | None = None

    def __post_init__(self) -> None:
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"Unknown estimator {self.estimator!r}, expected one of {ESTIMATORS}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.rho > 0:
            raise ConfigError(f"rho must be positive, got {self.rho}")
        if not 2 <= self.na <= self.scenario.n_rrh:
            raise UnderdeterminedError(f"na must be in [2, {self.scenario.n_rrh}], got {self.na}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        object.__setattr__(self, "members", tuple(self.members))

    @property
    def scenario_label(self) -> str:
        return self.scenario.name if self.family is None else f"{self.scenario.name}/{self.family}"

    @staticmethod
    def from_config(prefix: str = "run") -> "RunConfig":
        """
        Build a run from the ``scenario``, ``noise``, ``wls``, ``nn``, ``ensemble`` and ``run`` sections.
        ``run.rho_db`` is accepted instead of ``run.rho``.

        :rtype: RunConfig
        """
        rho = Factory.get_variable(f"{prefix}.rho", None)
        rho_db = Factory.get_variable(f"{prefix}.rho_db", None)
        if rho is None:
            rho = 1.0 if rho_db is None else db_to_linear(float(rho_db))
        ens = None
        if Factory.has_variable("ensemble.r_a"):
            ens = EnsembleConfig.from_config()
        return RunConfig(
            scenario=Scenario.from_config(),
            noise=NoiseModel.from_config(),
            estimator=str(Factory.get_variable(f"{prefix}.estimator", "wls")),
            trials=int(Factory.get_variable(f"{prefix}.trials", 1000)),
            rho=float(rho),
            na=int(Factory.get_variable(f"{prefix}.na", 6)),
            seed=int(Factory.get_variable(f"{prefix}.seed", 0)),
            iterations=int(Factory.get_variable("wls.iterations", 5)),
            mapping_truth_ue=bool(Factory.get_variable("mapping.truth_ue", False)),
            nn=WlsNetConfig.from_config(),
            ensemble=ens,
            family=Factory.get_variable("noise.family", None),
        )


@dataclass(eq=False)
class MetricsReport:
    """
    Aggregate of one run. ``median_u``/``median_udot`` are median error norms and ``flagged`` counts
    estimates that fell back on a rank deficient or ill-conditioned solve; only the JSON form carries them.
    """

    estimator: str
    scenario: str
    rho: float
    na: int
    trials: int = 0
    failures: int = 0
    rmse_u: float = float("nan")
    rmse_udot: float = float("nan")
    crlb_pos: float = float("nan")
    crlb_vel: float = float("nan")
    mean_error: np.ndarray = field(default_factory=lambda: np.full(6, np.nan))
    t_per_estimate: float = float("nan")
    rmse_s: dict[int, float] = field(default_factory=dict)
    crlb_s: dict[int, float] = field(default_factory=dict)
    median_u: float = float("nan")
    median_udot: float = float("nan")
    flagged: int = 0
    errors: np.ndarray | None = None

    def to_row(self) -> dict[str, Any]:
        return {c: getattr(self, c) for c in REPORT_COLUMNS}

    def to_dict(self) -> dict[str, Any]:
        d = self.to_row()
        d["trials"] = self.trials
        d["failures"] = self.failures
        d["flagged"] = self.flagged
        d["median_u"] = self.median_u
        d["median_udot"] = self.median_udot
        d["mean_error"] = [float(v) for v in self.mean_error]
        d["rmse_s"] = {str(k): v for k, v in self.rmse_s.items()}
        d["crlb_s"] = {str(k): v for k, v in self.crlb_s.items()}
        return d

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "MetricsReport":
        def num(v: Any) -> float:
            return float("nan") if v is None else float(v)

        def per_rrh(v: Any) -> dict[int, float]:
            return {int(k): num(x) for k, x in v.items()} if isinstance(v, dict) else {}

        mean_error = d.get("mean_error")
        if not isinstance(mean_error, list | tuple | np.ndarray):
            mean_error = [None] * 6

        return MetricsReport(
            estimator=str(d["estimator"]),
            scenario=str(d["scenario"]),
            rho=num(d["rho"]),
            na=int(d["na"]),
            trials=int(d.get("trials", 0)),
            failures=int(d.get("failures", 0)),
            rmse_u=num(d["rmse_u"]),
            rmse_udot=num(d["rmse_udot"]),
            crlb_pos=num(d["crlb_pos"]),
            crlb_vel=num(d["crlb_vel"]),
            mean_error=np.array([num(v) for v in mean_error]),
            t_per_estimate=num(d["t_per_estimate"]),
            rmse_s=per_rrh(d.get("rmse_s")),
            crlb_s=per_rrh(d.get("crlb_s")),
            median_u=num(d.get("median_u")),
            median_udot=num(d.get("median_udot")),
            flagged=int(d.get("flagged", 0)),
        )


@dataclass(frozen=True)
class TimingReport:
    t_wls: float
    t_wlsnet: float
    t_ewlsnet: float

    def to_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def run_estimator(cfg: RunConfig, meas: MeasurementSet) -> JointEstimate:
    """
    Apply the configured joint estimator to one measurement vector.

    :raises ConfigError: the estimator needs networks that ``cfg`` does not carry
    :rtype: JointEstimate
    """
    rrhs = cfg.scenario.rrhs
    est = cfg.estimator
    if est in ("wls", "mapping"):
        return estimate_joint(meas, rrhs, iterations=cfg.iterations)
    if est == "fp":
        if cfg.fp_params is None:
            raise ConfigError("estimator 'fp' needs fp_params")
        return fp_estimate(meas, cfg.fp_params)
    if not cfg.members:
        raise ConfigError(f"estimator {est!r} needs trained residual networks")
    if est == "wlsnet":
        return wlsnet_estimate(meas, cfg.members[0], cfg.nn, rrhs)
    if est == "lsnet":
        return lsnet_estimate(meas, cfg.members[0], rrhs)
    ens = cfg.ensemble if cfg.ensemble is not None else EnsembleConfig(l=len(cfg.members))
    return ewlsnet_estimate(meas, list(cfg.members), ens, cfg.nn, rrhs)


def _crlb(cfg: RunConfig, noise: NoiseModel) -> tuple[float, float]:
    try:
        res = crlb_joint(cfg.scenario, joint_covariance(cfg.na, noise.gaussian_stds()), cfg.na)
    except UnobservableError as e:
        Log.debug(f"no CRLB for na={cfg.na}: {e}", group="mmloc.harness")
        return float("nan"), float("nan")
    return res.pos_bound, res.vel_bound


def _check_failures(failures: int, trials: int) -> None:
    if failures > MAX_FAILURE_FRACTION * trials:
        Log.critical(f"{failures} of {trials} trials failed", group="mmloc.harness")


def monte_carlo(cfg: RunConfig) -> MetricsReport:
    """
    Run ``cfg.trials`` independent trials and aggregate the errors.

    Failed trials are logged and counted; more than MAX_FAILURE_FRACTION of them aborts the run.

    At high noise (rho near 1 on the six-RRH preset) the linearisation breaks down on a few trials
    and their errors dominate the RMSE; compare with ``median_u``/``median_udot``. A warning is logged
    when an RMSE exceeds OUTLIER_RATIO times the matching median.

    :param cfg: Experiment.
    :type cfg: RunConfig
    :raises RunAborted: too many failed trials
    :rtype: MetricsReport
    """
    noise = cfg.noise.scaled(cfg.rho)
    acc_u = ErrorAccumulator("u")
    acc_v = ErrorAccumulator("udot")
    scat = cfg.scenario.scatterer_indices() if cfg.estimator == "mapping" else []
    acc_s = {n: ErrorAccumulator(f"s{n}", keep=False) for n in scat}
    failures = 0
    flagged = 0
    elapsed: list[float] = []

    for i in range(cfg.trials):
        rng = trial_rng(cfg.seed, i)
        s_est: dict[int, np.ndarray] = {}
        try:
            meas = synthesize_measurements(cfg.scenario, noise, cfg.na, rng)
            t0 = time.perf_counter()
            est = run_estimator(cfg, meas)
            elapsed.append(time.perf_counter() - t0)
            if scat:
                u_est = cfg.scenario.ue_pos if cfg.mapping_truth_ue else est.u
                for n in scat:
                    mm = synthesize_mapping_measurement(cfg.scenario, n, noise, rng)
                    s_est[n] = estimate_scatterer(mm, cfg.scenario.rrhs, u_est, iterations=cfg.iterations).s
        except MmlocError as e:
            failures += 1
            Log.warn(f"trial {i} failed: {type(e).__name__}: {e}", group="mmloc.harness")
            continue

        flagged += int(est.flagged)
        acc_u.sample(est.u - cfg.scenario.ue_pos)
        acc_v.sample(est.udot - cfg.scenario.ue_vel)
        for n, s in s_est.items():
            acc_s[n].sample(s - cfg.scenario.scatterers[n])

    _check_failures(failures, cfg.trials)

    crlb_pos, crlb_vel = _crlb(cfg, noise)
    crlb_s = {}
    for n in scat:
        crlb_s[n] = crlb_mapping(cfg.scenario, n, mapping_covariance(noise.gaussian_stds())).pos_bound

    errors = np.hstack([acc_u.errors(), acc_v.errors()])
    report = MetricsReport(
        estimator=cfg.estimator,
        scenario=cfg.scenario_label,
        rho=cfg.rho,
        na=cfg.na,
        trials=cfg.trials,
        failures=failures,
        rmse_u=acc_u.rmse(),
        rmse_udot=acc_v.rmse(),
        crlb_pos=crlb_pos,
        crlb_vel=crlb_vel,
        mean_error=np.concatenate([acc_u.mean, acc_v.mean]),
        t_per_estimate=float(np.median(elapsed)) if cfg.record_timing and elapsed else float("nan"),
        rmse_s={n: a.rmse() for n, a in acc_s.items()},
        crlb_s=crlb_s,
        median_u=acc_u.median(),
        median_udot=acc_v.median(),
        flagged=flagged,
        errors=errors,
    )
    Log.info(
        f"{cfg.estimator} rho={cfg.rho:.3e} na={cfg.na}: rmse_u={report.rmse_u:.4e} (crlb {crlb_pos:.4e}), "
        f"rmse_udot={report.rmse_udot:.4e} (crlb {crlb_vel:.4e}), {failures} failures",
        group="mmloc.harness",
    )
    for name, rmse, med in (("position", report.rmse_u, report.median_u), ("velocity", report.rmse_udot, report.median_udot)):
        if med > 0 and rmse > OUTLIER_RATIO * med:
            Log.warn(f"{name} rmse {rmse:.4e} is {rmse / med:.1f} times the median error {med:.4e}; a few trials dominate", group="mmloc.harness")
    return report


def sweep_rho(cfg: RunConfig, rhos: list[float]) -> list[MetricsReport]:
    """
    One report per noise scale, all with the same master seed.
    """
    return [monte_carlo(dataclasses.replace(cfg, rho=float(r))) for r in rhos]


def sweep_na(cfg: RunConfig, nas: list[int]) -> list[MetricsReport]:
    """
    One report per RRH count. Seeds are matched, so runs share the noise of their common RRHs.
    """
    return [monte_carlo(dataclasses.replace(cfg, na=int(n))) for n in nas]


def sweep_sigmas(cfg: RunConfig, sigma_ds: list[float], sigma_as: list[float]) -> list[MetricsReport]:
    """
    One report per (sigma_d, sigma_a) pair with rho fixed at 1.
    """
    out = []
    for sd in sigma_ds:
        for sa in sigma_as:
            noise = dataclasses.replace(cfg.noise, sigma_d=float(sd), sigma_a=float(sa))
            out.append(monte_carlo(dataclasses.replace(cfg, noise=noise, rho=1.0)))
    return out


def evaluate_testset(estimator: str, data: TrainingSet, cfg: RunConfig) -> MetricsReport:
    """
    Errors of a joint estimator over the ``test`` rows of a labelled dataset.

    ``cfg`` supplies the networks and settings; its scenario and noise are not used for drawing.

    :rtype: MetricsReport
    """
    test = data.part("test")
    run = dataclasses.replace(cfg, estimator=estimator, na=data.na)
    acc_u = ErrorAccumulator("u")
    acc_v = ErrorAccumulator("udot")
    failures = 0
    flagged = 0
    elapsed = []
    for meas, truth in zip(test.measurements(), test.labels, strict=True):
        try:
            t0 = time.perf_counter()
            est = run_estimator(run, meas)
            elapsed.append(time.perf_counter() - t0)
        except MmlocError as e:
            failures += 1
            Log.warn(f"{estimator}: test sample failed: {e}", group="mmloc.harness")
            continue
        flagged += int(est.flagged)
        acc_u.sample(est.u - truth[:3])
        acc_v.sample(est.udot - truth[3:])
    _check_failures(failures, len(test))
    return MetricsReport(
        estimator=estimator,
        scenario=run.scenario_label,
        rho=run.rho,
        na=data.na,
        trials=len(test),
        failures=failures,
        rmse_u=acc_u.rmse(),
        rmse_udot=acc_v.rmse(),
        mean_error=np.concatenate([acc_u.mean, acc_v.mean]),
        t_per_estimate=float(np.median(elapsed)) if elapsed else float("nan"),
        median_u=acc_u.median(),
        median_udot=acc_v.median(),
        flagged=flagged,
        errors=np.hstack([acc_u.errors(), acc_v.errors()]),
    )


def compare_family(
    name: str,
    scenario: Scenario,
    na: int = 6,
    samples: int = 10000,
    nn: WlsNetConfig | None = None,
    members: int = 10,
    seed: int = 0,
    estimators: tuple[str, ...] = ("wls", "wlsnet", "lsnet", "ewlsnet", "fp"),
) -> list[MetricsReport]:
    """
    Train networks on one error family and compare estimators on the common test split.

    :param name: Family (D0..D4, P1..P4).
    :param scenario: Base geometry; the UE is spread around its position.
    :param samples: Dataset size before the split.
    :param members: Ensemble size; member 0 serves as the single WLS-Net.
    :rtype: list[MetricsReport]
    """
    nn = WlsNetConfig() if nn is None else nn
    noise = build_scenario_family(name, seed=seed)
    data = generate_dataset(scenario, noise, na, samples, seed=seed)

    need_members = any(e in ("wlsnet", "lsnet", "ewlsnet") for e in estimators)
    nets = train_ensemble(data, nn, l=members if "ewlsnet" in estimators else 1) if need_members else []
    ens = calibrate_radii(nets, data.part("val"), nn) if "ewlsnet" in estimators and len(nets) > 1 else None
    fp = train_fp_net(data, nn) if "fp" in estimators else None

    cfg = RunConfig(scenario=scenario, noise=noise, na=na, seed=seed, members=tuple(nets), fp_params=fp, nn=nn, ensemble=ens, family=name.upper())
    reports = [evaluate_testset(e, data, cfg) for e in estimators]
    for r in reports:
        Log.info(f"{name}: {r.estimator} rmse_u={r.rmse_u:.4e} rmse_udot={r.rmse_udot:.4e}", group="mmloc.harness")
    return reports


def bench_timing(cfg: RunConfig, repetitions: int = 1000) -> TimingReport:
    """
    Median wall clock of one WLS, WLS-Net and eWLS-Net estimate on the same input.

    :param cfg: Supplies scenario, noise, seed and the trained members.
    :raises ConfigError: no trained members
    :rtype: TimingReport
    """
    if not cfg.members:
        raise ConfigError("timing needs trained residual networks")
    meas = synthesize_measurements(cfg.scenario, cfg.noise.scaled(cfg.rho), cfg.na, trial_rng(cfg.seed, 0))
    ens = cfg.ensemble if cfg.ensemble is not None else EnsembleConfig(l=len(cfg.members))
    rrhs = cfg.scenario.rrhs

    def median_time(fn: Any) -> float:
        times = np.empty(repetitions)
        for k in range(repetitions):
            t0 = time.perf_counter()
            fn()
            times[k] = time.perf_counter() - t0
        return float(np.median(times))

    res = TimingReport(
        t_wls=median_time(lambda: estimate_joint(meas, rrhs, iterations=cfg.iterations)),
        t_wlsnet=median_time(lambda: wlsnet_estimate(meas, cfg.members[0], cfg.nn, rrhs)),
        t_ewlsnet=median_time(lambda: ewlsnet_estimate(meas, list(cfg.members), ens, cfg.nn, rrhs)),
    )
    Log.info(f"timing: wls {res.t_wls:.3e} s, wlsnet {res.t_wlsnet:.3e} s, ewlsnet {res.t_ewlsnet:.3e} s", group="mmloc.harness")
    return res


def reports_frame(reports: list[MetricsReport]) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in reports], columns=REPORT_COLUMNS)


def _json_safe(v: Any) -> Any:
    # shortest round-trip float repr; NaN becomes null
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, list | tuple | np.ndarray):
        return [_json_safe(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, float | np.floating):
        return None if math.isnan(v) else float(v)
    return v


def emit_report(reports: list[MetricsReport], path: str, fmt: str = "csv") -> None:
    """
    Write reports as CSV (columns REPORT_COLUMNS, in that order) or as a JSON list of objects that
    also carry trials, failures, mean_error and the per-scatterer values.

    :raises ConfigError: unknown format or unwritable path
    """
    try:
        if fmt == "csv":
            reports_frame(reports).to_csv(path, index=False)
        elif fmt == "json":
            with open(path, "w") as fh:
                json.dump([_json_safe(r.to_dict()) for r in reports], fh, indent=1)
        else:
            raise ConfigError(f"Unsupported report format {fmt!r}, expected csv or json")
    except OSError as e:
        raise ConfigError(f"Cannot write report {path}: {e}") from e


def load_report_json(path: str) -> list[MetricsReport]:
    """
    :raises ConfigError: missing file
    :rtype: list[MetricsReport]
    """
    if not os.path.exists(path):
        raise ConfigError(f"Report file {path} does not exist")
    df = pd.read_json(path, orient="records", dtype=False, precise_float=True)
    return [MetricsReport.from_dict(d) for d in df.to_dict(orient="records")]


__all__ = [
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
]
