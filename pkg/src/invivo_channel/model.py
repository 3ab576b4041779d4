"""Depth-linear in vivo path loss model at 915 MHz.

Mean path loss grows linearly with the normalized depth ``d / d0``::

    PL(d) = PL0 + m * (d / d0) + S,    d >= d0,  S ~ Normal(0, sigma^2)

with ``d0 = 10 mm``. Parameters are tabulated per torso region, per body side
and for the whole torso, separately for a receiver 5 cm (near) and 30 cm (far)
from the body surface.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .errors import (
    DepthBelowReference,
    ExtrapolationRequired,
    InvalidAngle,
    InvalidPermittivity,
)

REFERENCE_DEPTH_MM = 10.0
MAX_GRID_DEPTH_MM = 100.0
ANGLE_STEP_DEG = 22.5
SPEED_OF_LIGHT = 2.9979e8  # m/s
FREQUENCY_HZ = 915e6


def _normalize_key(text: str) -> str:
    return re.sub(r"[\s_\-]", "", text).lower()


class BodyArea(Enum):
    REGION1 = "Region1"
    REGION2 = "Region2"
    REGION3 = "Region3"
    REGION4 = "Region4"
    ANTERIOR = "Anterior"
    POSTERIOR = "Posterior"
    LEFT_LATERAL = "LeftLateral"
    RIGHT_LATERAL = "RightLateral"
    OVERALL_TORSO = "OverallTorso"

    @classmethod
    def parse(cls, text: str) -> BodyArea:
        """Parse a name such as ``"Region3"``, ``"left-lateral"`` or ``"overall torso"``."""
        key = _normalize_key(text)
        for area in cls:
            if _normalize_key(area.value) == key:
                return area
        aliases = {"torso": cls.OVERALL_TORSO, "overalltorsoarea": cls.OVERALL_TORSO}
        if key in aliases:
            return aliases[key]
        raise ValueError(f"unknown body area {text!r}")

    @property
    def is_region(self) -> bool:
        return self in REGIONS

    @property
    def is_side(self) -> bool:
        return self in SIDES


REGIONS = (BodyArea.REGION1, BodyArea.REGION2, BodyArea.REGION3, BodyArea.REGION4)
SIDES = (
    BodyArea.ANTERIOR,
    BodyArea.POSTERIOR,
    BodyArea.LEFT_LATERAL,
    BodyArea.RIGHT_LATERAL,
)


class FieldZone(Enum):
    NEAR = "Near"
    FAR = "Far"

    @classmethod
    def parse(cls, text: str) -> FieldZone:
        key = _normalize_key(text)
        for zone in cls:
            if zone.value.lower() == key:
                return zone
        raise ValueError(f"unknown field zone {text!r}")

    @property
    def receiver_distance_cm(self) -> float:
        return 5.0 if self is FieldZone.NEAR else 30.0


@dataclass(frozen=True)
class PathLossParams:
    """Intercept ``pl0_db`` [dB], decay rate ``m`` [dB per d0], shadowing deviation ``sigma_db`` [dB]."""

    pl0_db: float
    m: float
    sigma_db: float


_TABLE_ROWS = {
    #                        near: PL0,   m,    sigma    far: PL0,   m,    sigma
    BodyArea.REGION1:       ((24.75, 2.30, 3.73), (41.07, 1.46, 2.84)),
    BodyArea.REGION2:       ((22.70, 1.96, 2.38), (39.37, 1.48, 3.04)),
    BodyArea.REGION3:       ((22.56, 2.55, 1.79), (39.09, 2.14, 3.02)),
    BodyArea.REGION4:       ((24.23, 2.31, 3.47), (41.05, 1.82, 3.90)),
    BodyArea.ANTERIOR:      ((23.83, 2.46, 3.51), (40.57, 1.88, 4.08)),
    BodyArea.POSTERIOR:     ((23.76, 2.21, 1.92), (40.53, 1.76, 2.34)),
    BodyArea.LEFT_LATERAL:  ((23.34, 2.28, 3.67), (39.57, 1.68, 3.62)),
    BodyArea.RIGHT_LATERAL: ((23.22, 2.27, 3.51), (39.43, 1.69, 3.52)),
    BodyArea.OVERALL_TORSO: ((23.56, 2.28, 3.38), (40.14, 1.73, 3.62)),
}  # fmt: skip

PARAMETER_TABLE: dict[tuple[BodyArea, FieldZone], PathLossParams] = {
    (area, zone): PathLossParams(*row)
    for area, (near, far) in _TABLE_ROWS.items()
    for zone, row in ((FieldZone.NEAR, near), (FieldZone.FAR, far))
}

REGION_PERMITTIVITY = {
    BodyArea.REGION1: 16.0,
    BodyArea.REGION2: 16.0,
    BodyArea.REGION3: 27.0,
    BodyArea.REGION4: 29.0,
}


def lookup_params(area: BodyArea, zone: FieldZone) -> PathLossParams:
    return PARAMETER_TABLE[(area, zone)]


def parameter_table_records() -> list[dict]:
    """The table as a list of ``{area, zone, pl0_db, m, sigma_db}`` dicts, areas in table order."""
    return [
        {"area": area.value, "zone": zone.value, **asdict(PARAMETER_TABLE[(area, zone)])}
        for area in BodyArea
        for zone in FieldZone
    ]


def parameter_table_json(indent: int | None = 2) -> str:
    return json.dumps(parameter_table_records(), indent=indent)


def _check_depth(depth, extrapolate: bool) -> np.ndarray:
    d = np.asarray(depth, dtype=float)
    if np.any(~np.isfinite(d)):
        raise ValueError("depth must be finite")
    if np.any(d < REFERENCE_DEPTH_MM):
        raise DepthBelowReference(
            f"depth must satisfy d >= d0 = {REFERENCE_DEPTH_MM:g} mm, got {np.min(d):g} mm"
        )
    if not extrapolate and np.any(d > MAX_GRID_DEPTH_MM):
        raise ExtrapolationRequired(
            f"depth {np.max(d):g} mm exceeds the {MAX_GRID_DEPTH_MM:g} mm grid; "
            "pass extrapolate=True to evaluate anyway"
        )
    return d


def mean_path_loss(params: PathLossParams, depth_mm, *, extrapolate: bool = False):
    """Mean path loss ``PL0 + m * d / d0`` in dB; accepts a scalar or an array of depths."""
    d = _check_depth(depth_mm, extrapolate)
    pl = params.pl0_db + params.m * (d / REFERENCE_DEPTH_MM)
    return float(pl) if pl.ndim == 0 else pl


def sample_path_loss(
    params: PathLossParams,
    depth_mm,
    rng: np.random.Generator,
    size=None,
    *,
    extrapolate: bool = False,
):
    """Mean path loss plus one zero-mean Gaussian shadowing draw per output element.

    ``size`` follows numpy conventions and must broadcast with ``depth_mm``.
    With ``sigma_db == 0`` the mean is returned unchanged and ``rng`` is not advanced.
    """
    mean = np.asarray(mean_path_loss(params, depth_mm, extrapolate=extrapolate))
    if size is not None:
        mean = np.broadcast_to(mean, size)
    if params.sigma_db == 0:
        out = np.array(mean, dtype=float)
    else:
        out = mean + rng.normal(0.0, params.sigma_db, size=mean.shape)
    return float(out) if out.ndim == 0 else out


def _angle_index(angle_deg: float) -> int:
    if not math.isfinite(angle_deg):
        raise InvalidAngle(f"angle must be finite, got {angle_deg!r}")
    steps = angle_deg / ANGLE_STEP_DEG
    k = round(steps)
    if abs(steps - k) > 1e-9 or not 0 <= k < 16:
        raise InvalidAngle(f"angle must be a multiple of 22.5 in [0, 360), got {angle_deg!r}")
    return k


GRID_ANGLES_DEG = tuple(ANGLE_STEP_DEG * k for k in range(16))
GRID_DEPTHS_MM = tuple(10.0 * k for k in range(1, 11))


def side_of_angle(angle_deg: float) -> BodyArea:
    """Body side owning a grid angle.

    0 deg is the anterior axis and angles grow toward the subject's left; each
    side owns the half-open 90 deg quadrant centred on its axis.
    """
    k = _angle_index(angle_deg)
    # quadrant q covers grid indices 4q-2 .. 4q+1 (mod 16)
    q = ((k + 2) % 16) // 4
    return (BodyArea.ANTERIOR, BodyArea.LEFT_LATERAL, BodyArea.POSTERIOR, BodyArea.RIGHT_LATERAL)[q]


@dataclass(frozen=True)
class BodyLocation:
    area: BodyArea
    zone: FieldZone
    depth_mm: float
    angle_deg: float | None = None

    def __post_init__(self):
        if self.angle_deg is not None:
            _angle_index(self.angle_deg)
        if self.depth_mm < REFERENCE_DEPTH_MM:
            raise DepthBelowReference(f"depth {self.depth_mm:g} mm is below d0")

    @property
    def params(self) -> PathLossParams:
        return lookup_params(self.area, self.zone)


def half_wave_dipole_length_mm(freq_hz: float = FREQUENCY_HZ, eps_r: float = 1.0) -> float:
    """Resonant half-wave dipole length in a dielectric, ``c / (2 f sqrt(eps_r))``."""
    if freq_hz <= 0:
        raise ValueError("frequency must be positive")
    if not eps_r >= 1:
        raise InvalidPermittivity(f"relative permittivity must be >= 1, got {eps_r!r}")
    return SPEED_OF_LIGHT / (2.0 * freq_hz * math.sqrt(eps_r)) * 1e3
