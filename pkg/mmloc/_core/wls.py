# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Joint position and velocity WLS estimator
#
# Pseudo-linear model h = G x + e with x = [u; u_dot]. Rows are ordered as
# the measurement vector: (na - 1) TDoA/FDoA pairs, then na AoA pairs.

from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.linalg import LinAlgError, cholesky, solve_triangular

from .errors import DivergenceError, GeometryError, SingularSystemError, UnderdeterminedError
from .geometry import Scenario, aoa_basis, aoa_pair, rrh_array
from .log import Log
from .measurement import MeasurementSet

# Condition number above which B Q B^T is not trusted as a covariance
COND_LIMIT = 1e12

# Rank decisions of the whitened least-squares solve
_RCOND = None


@dataclass(frozen=True, eq=False)
class DesignSystem:
    h: np.ndarray
    g: np.ndarray

    @property
    def na(self) -> int:
        return (self.h.shape[0] + 2) // 4


@dataclass(frozen=True, eq=False)
class LinearizationB:
    b: np.ndarray


@dataclass(frozen=True, eq=False)
class JointEstimate:
    """
    Estimated UE position ``u`` and velocity ``udot``.

    ``cond`` is the condition number of the final weighted normal matrix. ``flagged`` is set when a
    re-weighting step was skipped because B Q B^T was ill-conditioned, or when the velocity is not
    observable (fewer than 4 RRHs) and a minimum-norm velocity was returned.
    """

    u: np.ndarray
    udot: np.ndarray
    iterations_used: int = 0
    weighting: np.ndarray | None = None
    cond: float = float("nan")
    flagged: bool = False

    @property
    def x(self) -> np.ndarray:
        return np.concatenate([self.u, self.udot])

    def to_dict(self) -> dict[str, Any]:
        return {
            "u": [float(v) for v in self.u],
            "udot": [float(v) for v in self.udot],
            "iterations": int(self.iterations_used),
            "cond": float(self.cond),
            "flagged": bool(self.flagged),
        }


def build_design(meas: MeasurementSet, rrhs: Any) -> DesignSystem:
    """
    Assemble h and G with the measured parameters in place of the true ones.

    :param meas: Measurement vector for ``meas.na`` RRHs.
    :type meas: MeasurementSet
    :param rrhs: RRH positions; the first ``meas.na`` rows are used and row 0 is the reference.
    :raises UnderdeterminedError: fewer than 2 RRHs
    :rtype: DesignSystem
    """
    na = meas.na
    b = rrh_array(rrhs)
    if na < 2 or b.shape[0] < na:
        raise UnderdeterminedError(f"need 2 <= na <= {b.shape[0]} RRHs, got na={na}")

    n = 4 * na - 2
    h = np.zeros(n)
    g = np.zeros((n, 6))

    r = meas.tdoa
    rd = meas.fdoa
    phi = meas.azimuth
    theta = meas.elevation

    b1 = b[0]
    a1, _, _ = aoa_basis(phi[0], theta[0])
    a1b1 = a1 @ b1
    b1b1 = b1 @ b1

    for i in range(1, na):
        k = 2 * (i - 1)
        bi = b[i]
        ri, rdi = r[i - 1], rd[i - 1]
        lever = (b1 - bi) - ri * a1

        h[k] = ri * ri - 2.0 * ri * a1b1 - bi @ bi + b1b1
        g[k, :3] = 2.0 * lever

        h[k + 1] = rdi * ri - rdi * a1b1
        g[k + 1, :3] = -rdi * a1
        g[k + 1, 3:] = lever

    off = 2 * (na - 1)
    for j in range(na):
        _, c, d = aoa_basis(phi[j], theta[j])
        k = off + 2 * j
        h[k] = c @ b[j]
        h[k + 1] = d @ b[j]
        g[k, :3] = c
        g[k + 1, :3] = d

    return DesignSystem(h=h, g=g)


def _state(state: Any) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(state, JointEstimate):
        return np.asarray(state.u, dtype=float), np.asarray(state.udot, dtype=float)
    if isinstance(state, Scenario):
        return np.asarray(state.ue_pos), np.asarray(state.ue_vel)
    x = np.asarray(state, dtype=float).reshape(-1)
    if x.shape != (6,):
        raise GeometryError(f"state must be a 6-vector [u; u_dot], got shape {x.shape}")
    return x[:3], x[3:]


def build_linearization(state: Any, rrhs: Any, na: int) -> LinearizationB:
    """
    Matrix B of the first-order error model e = B dm, evaluated at ``state``.

    Every derived scalar (ranges, range rates, angular rates of the reference direction) is recomputed
    from ``state``. The angular rates are phi_dot_1 = c_1^T u_dot / (r_1 cos(theta_1)) and
    theta_dot_1 = d_1^T u_dot / r_1.

    :param state: JointEstimate, Scenario (truth) or a 6-vector [u; u_dot].
    :param rrhs: RRH positions.
    :param na: Number of RRHs used.
    :type na: int
    :raises GeometryError: a zero range or a direction with cos(elevation) = 0
    :rtype: LinearizationB
    """
    u, udot = _state(state)
    b = rrh_array(rrhs)[:na]

    diff = u - b
    r = np.linalg.norm(diff, axis=1)
    if np.any(r <= 0.0):
        raise GeometryError(f"zero range to RRH {int(np.argmin(r))}")
    rdot = diff @ udot / r
    cos_t = np.sqrt(diff[:, 0] ** 2 + diff[:, 1] ** 2) / r
    if np.any(cos_t <= 0.0):
        raise GeometryError(f"RRH {int(np.argmin(cos_t))} sees the UE at elevation +-pi/2")

    phi1, theta1 = aoa_pair(b[0], u)
    _, c1, d1 = aoa_basis(phi1, theta1)
    phi1_dot = c1 @ udot / (r[0] * cos_t[0])
    theta1_dot = d1 @ udot / r[0]

    n = 4 * na - 2
    off = 2 * (na - 1)
    bm = np.zeros((n, n))
    for i in range(1, na):
        k = 2 * (i - 1)
        ri1 = r[i] - r[0]
        bm[k, k] = 2.0 * r[i]
        bm[k + 1, k] = rdot[i]
        bm[k + 1, k + 1] = r[i]
        bm[k + 1, off] = r[0] * ri1 * phi1_dot * cos_t[0] ** 2
        bm[k + 1, off + 1] = r[0] * ri1 * theta1_dot
    for j in range(na):
        k = off + 2 * j
        bm[k, k] = r[j] * cos_t[j]
        bm[k + 1, k + 1] = r[j]

    return LinearizationB(b=bm)


def _solve_whitened(design: DesignSystem, lg: np.ndarray, lh: np.ndarray, allow_rank_deficient: bool) -> tuple[np.ndarray, float, bool]:
    x, _, rank, sv = np.linalg.lstsq(lg, lh, rcond=_RCOND)
    cond = float((sv[0] / sv[-1]) ** 2) if sv[-1] > 0 else float("inf")
    deficient = rank < design.g.shape[1]
    if deficient and not allow_rank_deficient:
        raise SingularSystemError(f"rank-deficient normal matrix (rank {rank} < {design.g.shape[1]})", cond)
    return x, cond, deficient


def _whitening_from_weight(w: np.ndarray) -> np.ndarray:
    # W = L^T L with L = R^T for the upper Cholesky factor R of W
    try:
        return cholesky(w, lower=False)
    except LinAlgError as e:
        raise SingularSystemError("weighting matrix is not positive definite", float(np.linalg.cond(w))) from e


def wls_solve(design: DesignSystem, w: np.ndarray, whitening: np.ndarray | None = None, allow_rank_deficient: bool = False) -> JointEstimate:
    """
    Closed-form WLS solution x = (G^T W G)^-1 G^T W h.

    The normal equations are never formed; the system is whitened with a factor L (L^T L = W) and
    solved by least squares.

    :param design: The pseudo-linear system.
    :type design: DesignSystem
    :param w: Symmetric positive definite weighting matrix.
    :type w: numpy.ndarray
    :param whitening: Precomputed factor L with L^T L proportional to ``w``.
    :type whitening: numpy.ndarray | None
    :param allow_rank_deficient: Return the minimum-norm solution instead of raising.
    :type allow_rank_deficient: bool
    :raises SingularSystemError: rank-deficient normal matrix
    :rtype: JointEstimate
    """
    lmat = _whitening_from_weight(w) if whitening is None else whitening
    x, cond, deficient = _solve_whitened(design, lmat @ design.g, lmat @ design.h, allow_rank_deficient)
    if not np.all(np.isfinite(x)):
        raise DivergenceError(f"non-finite WLS solution {x}")
    return JointEstimate(u=x[:3], udot=x[3:], iterations_used=0, weighting=w, cond=cond, flagged=deficient)


def estimate_joint(meas: MeasurementSet, rrhs: Any, iterations: int = 5, tolerance: float = 1e-9, cond_limit: float = COND_LIMIT) -> JointEstimate:
    """
    Iteratively re-weighted joint position and velocity estimate.

    Starts from W = Q^-1, then re-weights ``iterations`` times with W = (B Q B^T)^-1 where B is
    recomputed from the current estimate. Stops early once the estimate moves less than ``tolerance``.
    If B Q B^T is ill-conditioned the previous weighting is kept and the estimate is flagged.

    With fewer than 4 RRHs the velocity is not observable; the minimum-norm velocity is returned and the
    estimate is flagged.

    :param meas: Measurements.
    :type meas: MeasurementSet
    :param rrhs: RRH positions.
    :param iterations: Number of re-weighting iterations T >= 1.
    :type iterations: int
    :raises SingularSystemError: rank-deficient position model
    :raises DivergenceError: non-finite iterate
    :rtype: JointEstimate
    """
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")

    design = build_design(meas, rrhs)
    na = meas.na
    partial = na < 4

    try:
        cq = cholesky(meas.q, lower=True)
    except LinAlgError as e:
        raise SingularSystemError("measurement covariance is not positive definite", float(np.linalg.cond(meas.q))) from e

    def solve(c: np.ndarray) -> tuple[np.ndarray, float]:
        lg = solve_triangular(c, design.g, lower=True)
        lh = solve_triangular(c, design.h, lower=True)
        x, cond, _ = _solve_whitened(design, lg, lh, partial)
        if not np.all(np.isfinite(x)):
            raise DivergenceError(f"non-finite iterate {x}")
        return x, cond

    x, cond = solve(cq)
    factor = cq
    flagged = partial
    used = 0
    for t in range(1, iterations + 1):
        used = t
        bm = build_linearization(x, rrhs, na).b
        cov = bm @ meas.q @ bm.T
        cov_cond = float(np.linalg.cond(cov))
        if not np.isfinite(cov_cond) or cov_cond > cond_limit:
            Log.warn(f"B Q B^T ill-conditioned at iteration {t} (cond={cov_cond:.3e}), keeping previous weighting", group="mmloc.wls")
            flagged = True
            break
        try:
            factor = cholesky(cov, lower=True)
        except LinAlgError:
            Log.warn(f"B Q B^T not positive definite at iteration {t}, keeping previous weighting", group="mmloc.wls")
            flagged = True
            break

        x_new, cond = solve(factor)
        step = float(np.linalg.norm(x_new - x))
        x = x_new
        Log.debug(f"iteration {t}: step {step:.3e}, cond {cond:.3e}", group="mmloc.wls")
        if step < tolerance:
            break

    eye = np.eye(factor.shape[0])
    linv = solve_triangular(factor, eye, lower=True)
    w = linv.T @ linv
    return JointEstimate(u=x[:3], udot=x[3:], iterations_used=used, weighting=w, cond=cond, flagged=flagged)


__all__ = [
    "COND_LIMIT",
    "DesignSystem",
    "LinearizationB",
    "JointEstimate",
    "build_design",
    "build_linearization",
    "wls_solve",
    "estimate_joint",
]
