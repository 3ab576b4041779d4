"""Power delay profiles and delay-dispersion statistics per body side."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace
from typing import TextIO

import numpy as np

from .errors import InvalidConfig
from .model import BodyArea
from .units import db_to_linear, linear_to_db

# Placeholder decay constants; only their ordering (sides > anterior/posterior) is meaningful.
DEFAULT_DECAY_NS = {
    BodyArea.ANTERIOR: 3.0,
    BodyArea.POSTERIOR: 4.0,
    BodyArea.LEFT_LATERAL: 8.0,
    BodyArea.RIGHT_LATERAL: 8.0,
}


@dataclass(frozen=True)
class PowerDelayProfile:
    delays_ns: tuple[float, ...]
    powers_db: tuple[float, ...]
    direction: BodyArea | None = None

    def __post_init__(self):
        d = np.asarray(self.delays_ns, dtype=float)
        p = np.asarray(self.powers_db, dtype=float)
        if d.ndim != 1 or d.shape != p.shape or len(d) == 0:
            raise ValueError("a profile needs at least one tap and matching delay/power lengths")
        if d[0] < 0 or np.any(np.diff(d) <= 0):
            raise ValueError("delays must be non-negative and strictly increasing")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(p))):
            raise ValueError("delays and powers must be finite")
        if self.direction is not None and not self.direction.is_side:
            raise ValueError(f"direction must be a body side, got {self.direction.value}")
        object.__setattr__(self, "delays_ns", tuple(float(x) for x in d))
        object.__setattr__(self, "powers_db", tuple(float(x) for x in p))

    def __len__(self):
        return len(self.delays_ns)

    def to_csv(self, stream: TextIO | None = None) -> str | None:
        out = io.StringIO() if stream is None else stream
        if self.direction is not None:
            out.write(f"# direction={self.direction.value}\n")
        out.write("delay_ns,power_db\n")
        for t, p in zip(self.delays_ns, self.powers_db):
            out.write(f"{t:.6g},{p + 0.0:.6f}\n")
        return out.getvalue() if stream is None else None

    @classmethod
    def from_csv(cls, stream: TextIO | str) -> PowerDelayProfile:
        if isinstance(stream, str):
            stream = io.StringIO(stream)
        direction = None
        delays, powers = [], []
        for line in stream:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key.strip() == "direction":
                    direction = BodyArea.parse(value.strip())
                continue
            if line.replace(" ", "") == "delay_ns,power_db":
                continue
            t, p = line.split(",")
            delays.append(float(t))
            powers.append(float(p))
        return cls(tuple(delays), tuple(powers), direction)


@dataclass(frozen=True)
class DispersionStats:
    mean_excess_delay_ns: float
    rms_delay_spread_ns: float
    total_power_db: float


def dispersion_stats(pdp: PowerDelayProfile) -> DispersionStats:
    tau = np.asarray(pdp.delays_ns)
    p = db_to_linear(pdp.powers_db)
    total = p.sum()
    w = p / total
    mean = float(w @ tau)
    # second central moment, computed about the mean to avoid cancellation
    rms = math.sqrt(float(w @ (tau - mean) ** 2))
    return DispersionStats(mean, rms, float(linear_to_db(total)))


@dataclass(frozen=True)
class PdpConfig:
    """Exponential tapped-delay-line settings.

    ``floor_db`` is the dynamic range below tap 0; synthesis stops at the first
    tap whose mean power falls below ``-floor_db``. ``max_taps`` bounds very
    slow decays.
    """

    decay_ns: float
    tap_spacing_ns: float = 1.0
    floor_db: float = 30.0
    sigma_tap_db: float = 0.0
    max_taps: int = 4096

    def validate(self):
        if not self.tap_spacing_ns > 0:
            raise InvalidConfig(f"tap spacing must be positive, got {self.tap_spacing_ns!r}")
        if not self.decay_ns > 0:
            raise InvalidConfig(f"decay constant must be positive, got {self.decay_ns!r}")
        if not self.floor_db > 0:
            raise InvalidConfig(f"floor must be positive, got {self.floor_db!r}")
        if self.sigma_tap_db < 0:
            raise InvalidConfig("per-tap fading deviation must be non-negative")
        if self.max_taps < 1:
            raise InvalidConfig("max_taps must be at least 1")


def default_config(direction: BodyArea, **overrides) -> PdpConfig:
    if direction not in DEFAULT_DECAY_NS:
        raise InvalidConfig(f"direction must be a body side, got {direction.value}")
    return replace(PdpConfig(DEFAULT_DECAY_NS[direction]), **overrides)


def exponential_mean_powers_db(config: PdpConfig) -> np.ndarray:
    """Mean tap powers (dB relative to tap 0), already truncated at the floor."""
    config.validate()
    per_tap = 10.0 * config.tap_spacing_ns / (config.decay_ns * math.log(10.0))
    n = math.floor(config.floor_db / per_tap + 1e-9) + 1
    n = min(n, config.max_taps)
    return -per_tap * np.arange(n)


def synthesize_pdp(
    direction: BodyArea,
    config: PdpConfig | None = None,
    rng: np.random.Generator | None = None,
) -> PowerDelayProfile:
    """Exponentially decaying profile for one body side, with optional log-normal tap fading."""
    if not direction.is_side:
        raise InvalidConfig(f"direction must be a body side, got {direction.value}")
    config = default_config(direction) if config is None else config
    powers = exponential_mean_powers_db(config)
    if config.sigma_tap_db > 0:
        if rng is None:
            raise ValueError("a seeded rng is required when sigma_tap_db > 0")
        powers = powers + rng.normal(0.0, config.sigma_tap_db, size=powers.shape)
    delays = config.tap_spacing_ns * np.arange(len(powers))
    return PowerDelayProfile(tuple(delays), tuple(powers), direction)

