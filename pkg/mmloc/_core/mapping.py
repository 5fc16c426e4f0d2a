# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Environment mapping
#
# Each single-bounce NLoS path gives (r_n1^s, azimuth, elevation) at its RRH.
# With the UE position known the scatterer solves a 3x3 pseudo-linear system.

from dataclasses import dataclass
from typing import Any

import numpy as np
import pandas as pd
from scipy.linalg import LinAlgError, cholesky

from .errors import DivergenceError, GeometryError, MmlocError, SingularSystemError
from .geometry import aoa_basis, aoa_pair, as_vec3, rrh_array
from .log import Log
from .measurement import MappingMeasurement


@dataclass(frozen=True, eq=False)
class MappingSystem:
    h_s: np.ndarray
    g_s: np.ndarray
    j: float


@dataclass(frozen=True, eq=False)
class ScattererEstimate:
    s: np.ndarray
    rrh_index: int
    iterations_used: int = 0
    cond: float = float("nan")

    def to_dict(self) -> dict[str, Any]:
        return {"rrh_index": self.rrh_index, "s": [float(v) for v in self.s], "iterations": self.iterations_used, "cond": self.cond}


@dataclass(frozen=True)
class MappingFailure:
    """
    Placeholder for a scatterer that could not be estimated in a batch.
    """

    rrh_index: int
    error: str
    message: str


def build_mapping_system(meas: MappingMeasurement, rrh: Any, u_est: Any, r1_est: float) -> MappingSystem:
    """
    h_s = G_s s for the scatterer seen by ``rrh``.

    Rows are the range equation, then the azimuth and elevation equations. J = r_n1^s + r_1 is the
    total path length UE -> scatterer -> RRH.

    :param meas: Measured NLoS triple.
    :type meas: MappingMeasurement
    :param rrh: Position of the observing RRH.
    :param u_est: UE position (normally the joint estimate).
    :param r1_est: Distance from ``u_est`` to the reference RRH.
    :type r1_est: float
    :raises GeometryError: r1_est <= 0
    :rtype: MappingSystem
    """
    if not r1_est > 0:
        raise GeometryError(f"reference range must be positive, got {r1_est}")
    b = as_vec3(rrh, "rrh")
    u = as_vec3(u_est, "u_est")
    r_s, phi, theta = meas.m_s
    j = float(r_s + r1_est)
    a, c, d = aoa_basis(phi, theta)

    h_s = np.array([j * j + 2.0 * j * (a @ b) - u @ u + b @ b, c @ b, d @ b])
    g_s = np.vstack([2.0 * (b - u + j * a), c, d])
    return MappingSystem(h_s=h_s, g_s=g_s, j=j)


def build_mapping_linearization(d_n1: float, d_n2: float, theta_s: float) -> np.ndarray:
    """
    B_s = diag(2 d_n2, d_n1 cos(theta_s), d_n1).

    :param d_n1: RRH to scatterer distance.
    :param d_n2: Scatterer to UE distance.
    :param theta_s: Elevation of the scatterer seen from the RRH.
    :raises GeometryError: a non-positive distance
    :rtype: numpy.ndarray
    """
    if not (d_n1 > 0 and d_n2 > 0):
        raise GeometryError(f"distances must be positive, got d_n1={d_n1}, d_n2={d_n2}")
    return np.diag([2.0 * d_n2, d_n1 * np.cos(theta_s), d_n1])


def _weighted_solve(system: MappingSystem, w: np.ndarray) -> tuple[np.ndarray, float]:
    try:
        lw = cholesky(w, lower=False)
    except LinAlgError as e:
        raise SingularSystemError("mapping weighting is not positive definite", float(np.linalg.cond(w))) from e
    s, _, rank, sv = np.linalg.lstsq(lw @ system.g_s, lw @ system.h_s, rcond=None)
    cond = float((sv[0] / sv[-1]) ** 2) if sv[-1] > 0 else float("inf")
    if rank < 3:
        raise SingularSystemError(f"rank-deficient mapping system (rank {rank})", cond)
    if not np.all(np.isfinite(s)):
        raise DivergenceError(f"non-finite scatterer iterate {s}")
    return s, cond


def estimate_scatterer(meas: MappingMeasurement, rrhs: Any, u_est: Any, iterations: int = 5, tolerance: float = 1e-9) -> ScattererEstimate:
    """
    Re-weighted WLS estimate of one scatterer.

    The first solve uses W = Q_s^-1; every further iteration recomputes d_n1, d_n2 and the elevation from
    the current scatterer estimate and re-weights with W = (B_s Q_s B_s^T)^-1.

    :param meas: NLoS triple with its covariance.
    :type meas: MappingMeasurement
    :param rrhs: All RRH positions; row 0 is the reference and ``meas.rrh_index`` the observer.
    :param u_est: UE position.
    :param iterations: Re-weighting iterations.
    :type iterations: int
    :raises SingularSystemError: rank-deficient system
    :rtype: ScattererEstimate
    """
    b_all = rrh_array(rrhs)
    if not 0 <= meas.rrh_index < b_all.shape[0]:
        raise GeometryError(f"RRH index {meas.rrh_index} out of range for {b_all.shape[0]} RRHs")
    b = b_all[meas.rrh_index]
    u = as_vec3(u_est, "u_est")
    system = build_mapping_system(meas, b, u, float(np.linalg.norm(u - b_all[0])))

    w = np.linalg.inv(meas.q_s)
    s, cond = _weighted_solve(system, w)
    used = 0
    for t in range(1, iterations + 1):
        used = t
        d_n1 = float(np.linalg.norm(s - b))
        d_n2 = float(np.linalg.norm(u - s))
        try:
            _, theta = aoa_pair(b, s)
            bs = build_mapping_linearization(d_n1, d_n2, theta)
        except GeometryError as e:
            Log.warn(f"RRH {meas.rrh_index}: keeping previous weighting at iteration {t} ({e})", group="mmloc.mapping")
            break
        cov = bs @ meas.q_s @ bs.T
        if np.linalg.cond(cov) > 1e12:
            Log.warn(f"RRH {meas.rrh_index}: B_s Q_s B_s^T ill-conditioned at iteration {t}", group="mmloc.mapping")
            break
        s_new, cond = _weighted_solve(system, np.linalg.inv(cov))
        step = float(np.linalg.norm(s_new - s))
        s = s_new
        Log.debug(f"RRH {meas.rrh_index} iteration {t}: step {step:.3e}", group="mmloc.mapping")
        if step < tolerance:
            break

    return ScattererEstimate(s=s, rrh_index=meas.rrh_index, iterations_used=used, cond=cond)


def map_environment(measurements: list[MappingMeasurement], rrhs: Any, u_est: Any, iterations: int = 5) -> list[ScattererEstimate | MappingFailure]:
    """
    Estimate every scatterer of a batch. A failing entry becomes a :class:`MappingFailure` and the
    remaining entries are still processed.

    :rtype: list[ScattererEstimate | MappingFailure]
    """
    out: list[ScattererEstimate | MappingFailure] = []
    for mm in measurements:
        try:
            out.append(estimate_scatterer(mm, rrhs, u_est, iterations))
        except MmlocError as e:
            Log.warn(f"RRH {mm.rrh_index}: scatterer not mapped: {e}", group="mmloc.mapping")
            out.append(MappingFailure(rrh_index=mm.rrh_index, error=type(e).__name__, message=str(e)))
    return out


POINT_CLOUD_COLUMNS = ["x", "y", "z", "rrh_index"]


def point_cloud(estimates: list[ScattererEstimate | MappingFailure]) -> pd.DataFrame:
    rows = [[*e.s, e.rrh_index] for e in estimates if isinstance(e, ScattererEstimate)]
    df = pd.DataFrame(rows, columns=POINT_CLOUD_COLUMNS)
    df["rrh_index"] = df["rrh_index"].astype(int)
    return df


def write_point_cloud(path: str, estimates: list[ScattererEstimate | MappingFailure]) -> None:
    """
    Write the mapped scatterers as CSV with columns x, y, z, rrh_index. Failures are omitted.
    """
    point_cloud(estimates).to_csv(path, index=False)


__all__ = [
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
]
