# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Geometry
#
# World geometry (RRHs, UE, scatterers) and the noise-free location
# parameters derived from it. RRH index 0 is the TDoA/FDoA reference.

import dataclasses
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt

from .errors import ConfigError, GeometryError
from .factory import Factory

Vec3 = npt.NDArray[np.float64]

LIGHT_SPEED = 299792458.0

# Minimum separation treated as a distinct point (m)
_MIN_RANGE = 1e-9


def as_vec3(v: Any, name: str = "vector") -> Vec3:
    """
    Convert to a finite float 3-vector.

    :param v: Anything array-like with three components.
    :param name: Used in the error message.
    :type name: str
    :raises GeometryError: wrong shape or non-finite components
    :return: A new float64 array of shape (3,).
    :rtype: numpy.ndarray
    """
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.shape != (3,):
        raise GeometryError(f"{name} must have 3 components, got shape {np.shape(v)}")
    if not np.all(np.isfinite(a)):
        raise GeometryError(f"{name} has non-finite components {a}")
    return a.copy()


@dataclass(frozen=True, eq=False)
class Scenario:
    """
    World geometry.

    ``scatterers`` holds one optional single-bounce scatterer per RRH index.
    """

    rrhs: np.ndarray
    ue_pos: Vec3
    ue_vel: Vec3
    scatterers: tuple[Vec3 | None, ...] = ()
    clock_bias: float = 0.0
    light_speed: float = LIGHT_SPEED
    name: str = "custom"

    def __post_init__(self) -> None:
        rrhs = np.asarray(self.rrhs, dtype=float)
        if rrhs.ndim != 2 or rrhs.shape[1] != 3:
            raise GeometryError(f"rrhs must be an (N, 3) array, got shape {rrhs.shape}")
        if rrhs.shape[0] < 2:
            raise GeometryError(f"at least 2 RRHs are required, got {rrhs.shape[0]}")
        if not np.all(np.isfinite(rrhs)):
            raise GeometryError("rrhs contain non-finite coordinates")

        ue_pos = as_vec3(self.ue_pos, "ue_pos")
        ue_vel = as_vec3(self.ue_vel, "ue_vel")

        scat = list(self.scatterers) + [None] * (rrhs.shape[0] - len(self.scatterers))
        if len(scat) != rrhs.shape[0]:
            raise GeometryError(f"{len(self.scatterers)} scatterers given for {rrhs.shape[0]} RRHs")
        scat = [None if s is None else as_vec3(s, f"scatterer[{n}]") for n, s in enumerate(scat)]

        n = rrhs.shape[0]
        for i in range(n):
            for j in range(i + 1, n):
                if np.linalg.norm(rrhs[i] - rrhs[j]) < _MIN_RANGE:
                    raise GeometryError(f"RRH {i} and RRH {j} coincide at {rrhs[i]}")
        for i in range(n):
            if np.linalg.norm(ue_pos - rrhs[i]) < _MIN_RANGE:
                raise GeometryError(f"UE coincides with RRH {i}")
        for i, s in enumerate(scat):
            if s is None:
                continue
            if np.linalg.norm(ue_pos - s) < _MIN_RANGE:
                raise GeometryError(f"UE coincides with scatterer {i}")
            if np.linalg.norm(rrhs[i] - s) < _MIN_RANGE:
                raise GeometryError(f"scatterer {i} coincides with its RRH")

        if not np.isfinite(self.clock_bias):
            raise GeometryError(f"clock_bias must be finite, got {self.clock_bias}")
        if not self.light_speed > 0:
            raise GeometryError(f"light_speed must be positive, got {self.light_speed}")

        rrhs = rrhs.copy()
        rrhs.setflags(write=False)
        ue_pos.setflags(write=False)
        ue_vel.setflags(write=False)
        for s in scat:
            if s is not None:
                s.setflags(write=False)

        object.__setattr__(self, "rrhs", rrhs)
        object.__setattr__(self, "ue_pos", ue_pos)
        object.__setattr__(self, "ue_vel", ue_vel)
        object.__setattr__(self, "scatterers", tuple(scat))
        object.__setattr__(self, "clock_bias", float(self.clock_bias))
        object.__setattr__(self, "light_speed", float(self.light_speed))

    @property
    def n_rrh(self) -> int:
        return int(self.rrhs.shape[0])

    @property
    def x(self) -> np.ndarray:
        """
        True state [u; u_dot].
        """
        return np.concatenate([self.ue_pos, self.ue_vel])

    def scatterer_indices(self) -> list[int]:
        return [n for n, s in enumerate(self.scatterers) if s is not None]

    def with_ue(self, ue_pos: Any, ue_vel: Any | None = None) -> "Scenario":
        """
        Copy of the scenario with the UE moved.

        :param ue_pos: New UE position.
        :param ue_vel: New UE velocity (unchanged when None).
        :return: A new Scenario.
        :rtype: Scenario
        """
        return dataclasses.replace(self, ue_pos=ue_pos, ue_vel=self.ue_vel if ue_vel is None else ue_vel)

    def with_scatterer(self, n: int, s: Any | None) -> "Scenario":
        scat = list(self.scatterers)
        scat[n] = s
        return dataclasses.replace(self, scatterers=tuple(scat))

    @staticmethod
    def from_config(prefix: str = "scenario") -> "Scenario":
        """
        Build a scenario from the configuration store.

        ``<prefix>.preset`` names a preset (default ``six_rrh``); ``rrhs``, ``ue_pos``, ``ue_vel``,
        ``scatterers``, ``clock_bias`` and ``light_speed`` override individual fields.

        :param prefix: Configuration section.
        :type prefix: str
        :return: The configured scenario.
        :rtype: Scenario
        """
        base = load_preset(Factory.get_variable(f"{prefix}.preset", "six_rrh"))
        kwargs: dict[str, Any] = {}
        for key in ("rrhs", "ue_pos", "ue_vel", "clock_bias", "light_speed"):
            v = Factory.get_variable(f"{prefix}.{key}", None)
            if v is not None:
                kwargs[key] = v
        scat = Factory.get_variable(f"{prefix}.scatterers", None)
        if scat is not None:
            n = len(kwargs.get("rrhs", base.rrhs))
            if isinstance(scat, dict):
                merged: list[Any] = [None] * n
                for k, v in scat.items():
                    merged[int(k)] = v
                kwargs["scatterers"] = tuple(merged)
            else:
                kwargs["scatterers"] = tuple(scat)
        elif "rrhs" in kwargs:
            kwargs["scatterers"] = ()
        if kwargs:
            kwargs["name"] = Factory.get_variable(f"{prefix}.name", "custom")
        return dataclasses.replace(base, **kwargs)


SIX_RRH_POSITIONS = np.array(
    [
        [-400.0, 0.0, 0.0],
        [400.0, 0.0, 0.0],
        [200.0, 350.0, 0.0],
        [-200.0, 350.0, 0.0],
        [-200.0, -350.0, 0.0],
        [200.0, -350.0, 0.0],
    ]
)

MAPPING_SCATTERER = np.array([50.0, 200.0, -70.0])
MAPPING_RRH_INDEX = 1

EIGHTEEN_RRH_POSITIONS = np.column_stack(
    [
        [235.5042, 287.5042, 235.5042, 287.5042, 235.5042, 287.5042, 235.5042, 287.5042, 235.5042,
         287.5042, 235.5042, 287.5042, 38.0751, 38.0751, 188.0751, 188.0751, 338.0751, 338.0751],
        [389.5038, 389.5038, 489.5038, 489.5038, 589.5038, 589.5038, 851.5038, 851.5038, 651.5038,
         651.5038, 751.5038, 751.5038, 594.7361, 646.7361, 594.7361, 646.7361, 594.7361, 646.7361],
        [6.0] * 18,
    ]
)

# Street between the two RRH columns of the 18-RRH layout
STREET_WALLS_X = (225.0, 298.0)


def six_rrh_preset() -> Scenario:
    """
    Six RRHs on the z = 0 plane, UE below it, one scatterer seen by RRH index 1.
    """
    scat: list[Vec3 | None] = [None] * 6
    scat[MAPPING_RRH_INDEX] = MAPPING_SCATTERER
    return Scenario(
        rrhs=SIX_RRH_POSITIONS,
        ue_pos=np.array([300.0, -20.0, -100.0]),
        ue_vel=np.array([-9.0, 7.0, 5.0]),
        scatterers=tuple(scat),
        name="six_rrh",
    )


def eighteen_rrh_preset() -> Scenario:
    """
    Eighteen street-side RRHs at 6 m height with a vehicle UE in the street.
    """
    return Scenario(
        rrhs=EIGHTEEN_RRH_POSITIONS,
        ue_pos=np.array([261.5, 620.0, 1.5]),
        ue_vel=np.array([0.0, 10.0, 0.0]),
        name="eighteen_rrh",
    )


PRESETS = {
    "six_rrh": six_rrh_preset,
    "eighteen_rrh": eighteen_rrh_preset,
}


def load_preset(name: str) -> Scenario:
    """
    :param name: One of ``six_rrh`` or ``eighteen_rrh``.
    :type name: str
    :raises ConfigError: unknown name
    :rtype: Scenario
    """
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"Unknown scenario preset {name!r}, expected one of {sorted(PRESETS)}") from None


def street_canyon_scenario(count: int = 12, seed: int = 0, y_range: tuple[float, float] = (380.0, 860.0),
                           z_range: tuple[float, float] = (1.0, 15.0)) -> Scenario:
    """
    18-RRH scene with ``count`` scatterers on the two building walls bordering the street.

    Scatterer ``k`` belongs to RRH ``k``; even RRHs (west column) see the west wall,
    odd RRHs (east column) the east wall.

    :param count: Number of scatterers, at most 12 (the street-side RRHs).
    :type count: int
    :param seed: Seed for the wall positions.
    :type seed: int
    :return: The scenario.
    :rtype: Scenario
    """
    if not 0 <= count <= 12:
        raise ConfigError(f"street canyon supports up to 12 scatterers, got {count}")
    rng = np.random.default_rng(seed)
    base = eighteen_rrh_preset()
    scat: list[Vec3 | None] = [None] * base.n_rrh
    for k in range(count):
        wall = STREET_WALLS_X[k % 2]
        scat[k] = np.array([wall, rng.uniform(*y_range), rng.uniform(*z_range)])
    return dataclasses.replace(base, scatterers=tuple(scat), name="street_canyon")


def _check_index(scenario: Scenario, n: int) -> None:
    if not 0 <= n < scenario.n_rrh:
        raise GeometryError(f"RRH index {n} out of range for {scenario.n_rrh} RRHs")


def los_range(scenario: Scenario, n: int) -> float:
    """
    Distance from the UE to RRH ``n``.

    :rtype: float
    """
    _check_index(scenario, n)
    return float(np.linalg.norm(scenario.ue_pos - scenario.rrhs[n]))


def arrival_time(scenario: Scenario, n: int) -> float:
    """
    LoS arrival time at RRH ``n`` including the unknown clock bias.

    :rtype: float
    """
    return los_range(scenario, n) / scenario.light_speed + scenario.clock_bias


def tdoa_related(scenario: Scenario, n: int) -> float:
    """
    TDoA-related range difference r_n1 = r_n - r_1 (RRH 0 is the reference).

    The clock bias is common to every arrival time and cancels in the difference,
    so it does not enter the computation.

    :rtype: float
    """
    if n < 1:
        raise GeometryError(f"TDoA is defined for RRH index >= 1, got {n}")
    return los_range(scenario, n) - los_range(scenario, 0)


def range_rate(scenario: Scenario, n: int) -> float:
    """
    Range rate u_dot^T (u - b_n) / r_n.

    :rtype: float
    """
    r = los_range(scenario, n)
    return float(scenario.ue_vel @ (scenario.ue_pos - scenario.rrhs[n]) / r)


def range_rate_diff(scenario: Scenario, n: int) -> float:
    """
    FDoA-related quantity r_dot_n1 = r_dot_n - r_dot_1.

    :rtype: float
    """
    if n < 1:
        raise GeometryError(f"FDoA is defined for RRH index >= 1, got {n}")
    return range_rate(scenario, n) - range_rate(scenario, 0)


def aoa_pair(frm: Any, to: Any) -> tuple[float, float]:
    """
    Azimuth (full quadrant, in (-pi, pi]) and elevation (in [-pi/2, pi/2]) of ``to`` seen from ``frm``.

    :raises GeometryError: the points coincide
    :return: (azimuth, elevation) in radians.
    :rtype: tuple[float, float]
    """
    d = np.asarray(to, dtype=float) - np.asarray(frm, dtype=float)
    r = float(np.linalg.norm(d))
    if r < _MIN_RANGE:
        raise GeometryError("AoA undefined for zero range")
    return float(np.arctan2(d[1], d[0])), float(np.arcsin(np.clip(d[2] / r, -1.0, 1.0)))


def aoa_basis(azimuth: float, elevation: float) -> tuple[Vec3, Vec3, Vec3]:
    """
    Orthonormal basis attached to a direction.

    ``a`` points along the direction, ``c`` is the horizontal normal and ``d`` completes the frame;
    da/dphi = cos(theta) c and da/dtheta = d.

    :return: (a, c, d)
    :rtype: tuple[numpy.ndarray, numpy.ndarray, numpy.ndarray]
    """
    cp, sp = np.cos(azimuth), np.sin(azimuth)
    ct, st = np.cos(elevation), np.sin(elevation)
    a = np.array([ct * cp, ct * sp, st])
    c = np.array([-sp, cp, 0.0])
    d = np.array([-st * cp, -st * sp, ct])
    return a, c, d


def nlos_params(scenario: Scenario, n: int) -> tuple[float, float, float]:
    """
    Single-bounce NLoS parameters for the scatterer of RRH ``n``.

    :raises GeometryError: RRH ``n`` has no scatterer
    :return: (r_n1^s, azimuth, elevation) with r_n1^s = |u - s| + |s - b_n| - |u - b_1|.
    :rtype: tuple[float, float, float]
    """
    _check_index(scenario, n)
    s = scenario.scatterers[n]
    if s is None:
        raise GeometryError(f"RRH {n} has no scatterer")
    b = scenario.rrhs[n]
    d_n1 = float(np.linalg.norm(s - b))
    d_n2 = float(np.linalg.norm(scenario.ue_pos - s))
    phi, theta = aoa_pair(b, s)
    return d_n1 + d_n2 - los_range(scenario, 0), phi, theta


def location_parameters(scenario: Scenario, na: int) -> np.ndarray:
    """
    Noise-free measurement vector m for the first ``na`` RRHs, ordered
    [r_21, rdot_21, ..., r_Na1, rdot_Na1, phi_1, theta_1, ..., phi_Na, theta_Na].

    :rtype: numpy.ndarray
    """
    m = np.empty(4 * na - 2)
    for i in range(1, na):
        m[2 * (i - 1)] = tdoa_related(scenario, i)
        m[2 * (i - 1) + 1] = range_rate_diff(scenario, i)
    off = 2 * (na - 1)
    for j in range(na):
        m[off + 2 * j], m[off + 2 * j + 1] = aoa_pair(scenario.rrhs[j], scenario.ue_pos)
    return m


def wrap_angle(a: np.ndarray | float) -> np.ndarray | float:
    """
    Map angles (or angle differences) to the nearest representative in (-pi, pi].
    """
    return -np.mod(np.pi - np.asarray(a), 2.0 * np.pi) + np.pi


def rrh_array(rrhs: Sequence[Any] | np.ndarray) -> np.ndarray:
    a = np.asarray(rrhs, dtype=float)
    if a.ndim != 2 or a.shape[1] != 3:
        raise GeometryError(f"rrhs must be an (N, 3) array, got shape {a.shape}")
    return a


__all__ = [
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
]
