# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Cramer-Rao lower bounds

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import GeometryError, UnobservableError
from .geometry import Scenario, aoa_basis, aoa_pair, location_parameters
from .log import Log
from .measurement import MeasurementSet
from .wls import build_design, build_linearization

# Fisher matrices with a larger condition number are treated as singular
FISHER_COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class CrlbResult:
    """
    Inverse Fisher information and the root-trace bounds derived from it.

    For the joint problem ``fim_inverse`` is 6x6 ([u; u_dot]); for a single scatterer it is 3x3 and
    ``vel_bound`` is NaN.
    """

    fim_inverse: np.ndarray
    pos_bound: float
    vel_bound: float
    cond: float

    def to_dict(self) -> dict[str, float]:
        return {"pos_bound": self.pos_bound, "vel_bound": self.vel_bound, "cond": self.cond}


def _direction(frm: np.ndarray, to: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    r = float(np.linalg.norm(to - frm))
    phi, theta = aoa_pair(frm, to)
    cos_t = np.cos(theta)
    if cos_t <= 1e-12:
        raise GeometryError(f"elevation {theta:.6f} rad makes the azimuth derivative singular")
    _, c, d = aoa_basis(phi, theta)
    return r, c / (r * cos_t), d / r


def jacobian_b1(scenario: Scenario, na: int) -> np.ndarray:
    """
    Jacobian of the noise-free measurement vector with respect to [u; u_dot].

    Rows follow the measurement order: (na - 1) TDoA/FDoA pairs, then na azimuth/elevation pairs.

    :param scenario: Geometry evaluated at its true UE state.
    :type scenario: Scenario
    :param na: Number of RRHs used.
    :type na: int
    :raises GeometryError: cos(elevation) = 0 for some RRH
    :return: Matrix of shape (4 na - 2, 6).
    :rtype: numpy.ndarray
    """
    u = scenario.ue_pos
    udot = scenario.ue_vel
    b = scenario.rrhs[:na]

    diff = u - b
    r = np.linalg.norm(diff, axis=1)
    unit = diff / r[:, None]
    rdot = unit @ udot
    # d r_dot / d u = u_dot / r - r_dot (u - b) / r^2
    drdot = udot[None, :] / r[:, None] - rdot[:, None] * diff / r[:, None] ** 2

    b1 = np.zeros((4 * na - 2, 6))
    for i in range(1, na):
        k = 2 * (i - 1)
        b1[k, :3] = unit[i] - unit[0]
        b1[k + 1, :3] = drdot[i] - drdot[0]
        b1[k + 1, 3:] = unit[i] - unit[0]

    off = 2 * (na - 1)
    for j in range(na):
        _, dphi, dtheta = _direction(b[j], u)
        b1[off + 2 * j, :3] = dphi
        b1[off + 2 * j + 1, :3] = dtheta
    return b1


def _fisher_inverse(jac: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, float]:
    # F = J^T Q^-1 J through the whitened Jacobian
    lq = linalg.cholesky(q, lower=True)
    a = linalg.solve_triangular(lq, jac, lower=True)
    fim = a.T @ a
    cond = float(np.linalg.cond(fim))
    if not np.isfinite(cond) or cond > FISHER_COND_LIMIT:
        raise UnobservableError("singular Fisher information matrix", cond)
    c = linalg.cho_factor(fim, lower=True)
    inv = linalg.cho_solve(c, np.eye(fim.shape[0]))
    return 0.5 * (inv + inv.T), cond


def crlb_joint(scenario: Scenario, q: np.ndarray, na: int) -> CrlbResult:
    """
    CRLB(x) = (B1^T Q^-1 B1)^-1 for the joint position and velocity estimate.

    :param scenario: Geometry at the true UE state.
    :type scenario: Scenario
    :param q: Measurement covariance of matching size.
    :type q: numpy.ndarray
    :param na: Number of RRHs used.
    :type na: int
    :raises UnobservableError: Fisher matrix condition number above FISHER_COND_LIMIT
    :rtype: CrlbResult
    """
    inv, cond = _fisher_inverse(jacobian_b1(scenario, na), np.asarray(q, dtype=float))
    res = CrlbResult(
        fim_inverse=inv,
        pos_bound=float(np.sqrt(np.trace(inv[:3, :3]))),
        vel_bound=float(np.sqrt(np.trace(inv[3:, 3:]))),
        cond=cond,
    )
    Log.debug(f"CRLB na={na}: pos {res.pos_bound:.6e} m, vel {res.vel_bound:.6e} m/s, cond {cond:.3e}", group="mmloc.crlb")
    return res


def verify_efficiency_identity(scenario: Scenario, na: int) -> float:
    """
    Largest absolute entry of B B1 - G evaluated on noise-free data.

    The identity holds exactly for every non-degenerate geometry, so the return value only measures
    floating point error.

    :rtype: float
    """
    m = location_parameters(scenario, na)
    design = build_design(MeasurementSet(na=na, m=m, q=np.eye(m.size)), scenario.rrhs)
    bm = build_linearization(scenario, scenario.rrhs, na).b
    return float(np.max(np.abs(bm @ jacobian_b1(scenario, na) - design.g)))


def jacobian_mapping(scenario: Scenario, n: int) -> np.ndarray:
    """
    Jacobian of the NLoS triple [r_n1^s, azimuth, elevation] with respect to the scatterer position,
    the UE position held fixed.

    :raises GeometryError: RRH ``n`` has no scatterer or sees it at elevation +-pi/2
    :rtype: numpy.ndarray
    """
    s = scenario.scatterers[n]
    if s is None:
        raise GeometryError(f"RRH {n} has no scatterer")
    b = scenario.rrhs[n]
    d_n1, dphi, dtheta = _direction(b, s)
    d_n2 = float(np.linalg.norm(s - scenario.ue_pos))
    return np.vstack([(s - scenario.ue_pos) / d_n2 + (s - b) / d_n1, dphi, dtheta])


def crlb_mapping(scenario: Scenario, n: int, q_s: np.ndarray) -> CrlbResult:
    """
    Bound on the scatterer of RRH ``n`` given a known UE position.

    :param q_s: 3x3 covariance of the NLoS triple.
    :rtype: CrlbResult
    """
    inv, cond = _fisher_inverse(jacobian_mapping(scenario, n), np.asarray(q_s, dtype=float))
    return CrlbResult(fim_inverse=inv, pos_bound=float(np.sqrt(np.trace(inv))), vel_bound=float("nan"), cond=cond)


__all__ = [
    "FISHER_COND_LIMIT",
    "CrlbResult",
    "jacobian_b1",
    "crlb_joint",
    "verify_efficiency_identity",
    "jacobian_mapping",
    "crlb_mapping",
]
