# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Ensemble of residual networks fused by subtractive clustering

import dataclasses
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigError, EnsembleError, MmlocError
from .factory import Factory
from .log import Log
from .measurement import MeasurementSet
from .mlp import MlpParams
from .wls import JointEstimate
from .wlsnet import TrainingSet, WlsNetConfig, train_residual_net, wlsnet_estimate

# r_a as a multiple of the member spread, and r_b as a multiple of r_a
RADIUS_SPREAD_FACTOR = 4.0
SUPPRESSION_FACTOR = 1.5


@dataclass(frozen=True)
class EnsembleConfig:
    """
    ``r_a``/``r_b`` are the density and suppression radii for positions, ``r_a_vel``/``r_b_vel`` the
    same for velocities (both default to the position values).
    """

    l: int = 10  # noqa: E741
    r_a: float = 1.0
    r_b: float = 1.5
    r_a_vel: float | None = None
    r_b_vel: float | None = None
    centers_wanted: int = 1

    def __post_init__(self) -> None:
        if self.l < 1:
            raise ConfigError(f"ensemble size must be >= 1, got {self.l}")
        if self.centers_wanted < 1:
            raise ConfigError(f"centers_wanted must be >= 1, got {self.centers_wanted}")
        for ra, rb, what in ((self.r_a, self.r_b, "position"), (self.velocity_radii[0], self.velocity_radii[1], "velocity")):
            if not (0 < ra < rb):
                raise ConfigError(f"{what} radii must satisfy 0 < r_a < r_b, got r_a={ra}, r_b={rb}")

    @property
    def velocity_radii(self) -> tuple[float, float]:
        ra = self.r_a if self.r_a_vel is None else self.r_a_vel
        rb = self.r_b if self.r_b_vel is None else self.r_b_vel
        return ra, rb

    @staticmethod
    def from_config(prefix: str = "ensemble") -> "EnsembleConfig":
        kwargs: dict[str, Any] = {}
        for name, cast in (("members", int), ("r_a", float), ("r_b", float), ("r_a_vel", float), ("r_b_vel", float), ("centers_wanted", int)):
            v = Factory.get_variable(f"{prefix}.{name}", None)
            if v is not None:
                kwargs["l" if name == "members" else name] = cast(v)
        if "r_a" in kwargs and "r_b" not in kwargs:
            kwargs["r_b"] = SUPPRESSION_FACTOR * kwargs["r_a"]
        if "r_a_vel" in kwargs and "r_b_vel" not in kwargs:
            kwargs["r_b_vel"] = SUPPRESSION_FACTOR * kwargs["r_a_vel"]
        return EnsembleConfig(**kwargs)


def _sorted_points(points: Any) -> np.ndarray:
    p = np.atleast_2d(np.asarray(points, dtype=float))
    if p.shape[0] == 0 or p.size == 0:
        raise EnsembleError("subtractive clustering needs at least one point")
    # lexsort keys are given last-significant first
    order = np.lexsort(p.T[::-1])
    return p[order]


def subtractive_cluster_centers(points: Any, r_a: float, r_b: float, count: int = 1) -> np.ndarray:
    """
    Cluster centres in the order they are found.

    The density of point i is D_i = sum_j exp(-||p_i - p_j||^2 / (r_a/2)^2). The densest point becomes a
    centre, and every density is reduced by D_c exp(-||p_i - p_c||^2 / (r_b/2)^2) before the next pick.
    Points are sorted lexicographically first and ties go to the earliest, so the result does not depend
    on input order. Every centre is one of the input points.

    :param points: (L, k) array.
    :param r_a: Density radius.
    :param r_b: Suppression radius.
    :param count: Number of centres (at most L).
    :raises EnsembleError: no points
    :return: (min(count, L), k) array.
    :rtype: numpy.ndarray
    """
    p = _sorted_points(points)
    d2 = cdist(p, p, "sqeuclidean")
    density = np.exp(-d2 / (r_a / 2.0) ** 2).sum(axis=1)
    centers = []
    for _ in range(min(count, p.shape[0])):
        c = int(np.argmax(density))
        centers.append(p[c])
        density = density - density[c] * np.exp(-d2[c] / (r_b / 2.0) ** 2)
    return np.vstack(centers)


def subtractive_cluster_select(points: Any, r_a: float, r_b: float) -> np.ndarray:
    """
    The first subtractive-clustering centre, i.e. the input point with the highest density.

    :rtype: numpy.ndarray
    """
    return subtractive_cluster_centers(points, r_a, r_b, 1)[0]


def train_ensemble(data: TrainingSet, cfg: WlsNetConfig, l: int = 10) -> list[MlpParams]:  # noqa: E741
    """
    ``l`` residual networks on the same data, differing only in the initialisation seed
    (``cfg.seed + k``).

    :rtype: list[MlpParams]
    """
    members = []
    for k in range(l):
        Log.info(f"training ensemble member {k + 1}/{l}", group="mmloc.ensemble")
        members.append(train_residual_net(data, cfg, seed=cfg.seed + k))
    return members


def _member_estimates(meas: MeasurementSet, members: list[MlpParams], wcfg: WlsNetConfig, rrhs: Any) -> list[JointEstimate]:
    out = []
    for k, params in enumerate(members):
        try:
            out.append(wlsnet_estimate(meas, params, wcfg, rrhs))
        except MmlocError as e:
            Log.warn(f"ensemble member {k} dropped: {e}", group="mmloc.ensemble")
    if not out:
        raise EnsembleError(f"none of the {len(members)} ensemble members produced an estimate")
    return out


def calibrate_radii(members: list[MlpParams], val: TrainingSet, wcfg: WlsNetConfig, samples: int = 200) -> EnsembleConfig:
    """
    Radii from the spread of member predictions on validation samples.

    The spread of one sample is the RMS distance of the member estimates to their mean; r_a is
    RADIUS_SPREAD_FACTOR times the mean spread over the samples and r_b = SUPPRESSION_FACTOR r_a, separately for
    position and velocity.

    :rtype: EnsembleConfig
    """
    spreads_u = []
    spreads_v = []
    for meas in val.measurements()[:samples]:
        ests = _member_estimates(meas, members, wcfg, val.rrhs)
        u = np.vstack([e.u for e in ests])
        v = np.vstack([e.udot for e in ests])
        spreads_u.append(np.sqrt(np.mean(np.sum((u - u.mean(axis=0)) ** 2, axis=1))))
        spreads_v.append(np.sqrt(np.mean(np.sum((v - v.mean(axis=0)) ** 2, axis=1))))
    ra = max(RADIUS_SPREAD_FACTOR * float(np.mean(spreads_u)), 1e-9)
    ra_v = max(RADIUS_SPREAD_FACTOR * float(np.mean(spreads_v)), 1e-9)
    cfg = EnsembleConfig(l=len(members), r_a=ra, r_b=SUPPRESSION_FACTOR * ra, r_a_vel=ra_v, r_b_vel=SUPPRESSION_FACTOR * ra_v)
    Log.info(f"ensemble radii: position r_a={ra:.4e}, velocity r_a={ra_v:.4e}", group="mmloc.ensemble")
    return cfg


def ewlsnet_estimate(meas: MeasurementSet, member_params: list[MlpParams], cfg: EnsembleConfig, wcfg: WlsNetConfig, rrhs: Any) -> JointEstimate:
    """
    Run every member and pick the position and the velocity independently by subtractive clustering.

    :raises EnsembleError: no member produced an estimate
    :rtype: JointEstimate
    """
    ests = _member_estimates(meas, member_params, wcfg, rrhs)
    if len(ests) == 1:
        return dataclasses.replace(ests[0])
    ra_v, rb_v = cfg.velocity_radii
    u = subtractive_cluster_select([e.u for e in ests], cfg.r_a, cfg.r_b)
    udot = subtractive_cluster_select([e.udot for e in ests], ra_v, rb_v)
    return JointEstimate(u=u, udot=udot, iterations_used=0, cond=max(e.cond for e in ests), flagged=any(e.flagged for e in ests))


__all__ = [
    "RADIUS_SPREAD_FACTOR",
    "SUPPRESSION_FACTOR",
    "EnsembleConfig",
    "subtractive_cluster_centers",
    "subtractive_cluster_select",
    "train_ensemble",
    "calibrate_radii",
    "ewlsnet_estimate",
]
