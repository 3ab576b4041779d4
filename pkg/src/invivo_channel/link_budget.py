"""Implant-to-external link budgets over the depth-linear path loss model.

Outage is the event that received power drops below
``rx_sensitivity_dbm + required_margin_db``. Path loss is Gaussian in dB, so for
``allowed = tx_power + tx_gain + rx_gain - sensitivity - margin`` the outage
probability is ``Q((allowed - mean_PL(d)) / sigma)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import norm

from .errors import NoFeasibleDepth
from .model import (
    MAX_GRID_DEPTH_MM,
    REFERENCE_DEPTH_MM,
    BodyArea,
    FieldZone,
    PathLossParams,
    lookup_params,
    mean_path_loss,
    sample_path_loss,
)


@dataclass(frozen=True)
class LinkBudgetSpec:
    """Link parameters. ``max_tx_power_dbm`` is an optional tissue-safety cap on ``tx_power_dbm``."""

    tx_power_dbm: float
    rx_sensitivity_dbm: float
    tx_gain_dbi: float = 0.0
    rx_gain_dbi: float = 0.0
    required_margin_db: float = 0.0
    max_tx_power_dbm: float | None = None

    def __post_init__(self):
        if math.isnan(self.tx_power_dbm) or self.tx_power_dbm == -math.inf:
            raise ValueError("tx_power_dbm must be a number")
        for name in ("rx_sensitivity_dbm", "tx_gain_dbi", "rx_gain_dbi", "required_margin_db"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.required_margin_db < 0:
            raise ValueError("required_margin_db must be non-negative")
        if self.max_tx_power_dbm is not None and self.tx_power_dbm > self.max_tx_power_dbm:
            raise ValueError(
                f"tx power {self.tx_power_dbm} dBm exceeds the cap of {self.max_tx_power_dbm} dBm"
            )

    @classmethod
    def from_max_path_loss(cls, max_path_loss_db: float) -> LinkBudgetSpec:
        """A spec whose allowed path loss is exactly ``max_path_loss_db`` (0 dBm, unity gains)."""
        return cls(tx_power_dbm=0.0, rx_sensitivity_dbm=-max_path_loss_db)

    @property
    def allowed_path_loss_db(self) -> float:
        return (
            self.tx_power_dbm + self.tx_gain_dbi + self.rx_gain_dbi
            - self.rx_sensitivity_dbm - self.required_margin_db
        )

    def to_dict(self) -> dict:
        return asdict(self)


def received_power(spec: LinkBudgetSpec, path_loss_db):
    """Received power in dBm; accepts a scalar or an array of path losses."""
    out = spec.tx_power_dbm + spec.tx_gain_dbi + spec.rx_gain_dbi - np.asarray(path_loss_db, dtype=float)
    return float(out) if out.ndim == 0 else out


def deterministic_margin_db(spec: LinkBudgetSpec, area: BodyArea, zone: FieldZone, depth_mm: float) -> float:
    """Allowed minus mean path loss; positive means the mean link closes."""
    return spec.allowed_path_loss_db - mean_path_loss(lookup_params(area, zone), depth_mm)


class MonteCarlo(NamedTuple):
    n: int
    seed: int


def outage_probability(
    spec: LinkBudgetSpec,
    area: BodyArea,
    zone: FieldZone,
    depth_mm: float,
    method: str | MonteCarlo = "analytic",
    *,
    params: PathLossParams | None = None,
) -> float:
    """Probability that shadowing pushes received power below sensitivity + margin.

    ``method`` is ``"analytic"`` (Gaussian tail) or a :class:`MonteCarlo` ``(n, seed)``.
    ``params`` overrides the tabulated row for ``(area, zone)``.
    """
    params = lookup_params(area, zone) if params is None else params
    margin = spec.allowed_path_loss_db - mean_path_loss(params, depth_mm)
    if isinstance(method, MonteCarlo):
        rng = np.random.default_rng(method.seed)
        pl = sample_path_loss(params, depth_mm, rng, size=method.n)
        return float(np.mean(received_power(spec, pl) < spec.rx_sensitivity_dbm + spec.required_margin_db))
    if method != "analytic":
        raise ValueError(f"unknown method {method!r}")
    if params.sigma_db == 0:
        return 0.0 if margin >= 0 else 1.0
    return float(norm.sf(margin / params.sigma_db))


class DepthResult(NamedTuple):
    depth_mm: float
    saturated: bool


def max_reliable_depth(
    spec: LinkBudgetSpec,
    area: BodyArea,
    zone: FieldZone,
    target_outage: float,
    *,
    include_shadowing: bool = True,
    params: PathLossParams | None = None,
) -> DepthResult:
    """Deepest implant position in [10, 100] mm whose outage does not exceed ``target_outage``.

    Inverts the mean path loss in closed form. ``saturated`` is set when even
    100 mm meets the target. ``include_shadowing=False`` treats sigma as 0.
    """
    if not 0 < target_outage < 1:
        raise ValueError("target_outage must lie strictly between 0 and 1")
    params = lookup_params(area, zone) if params is None else params
    sigma = params.sigma_db if include_shadowing else 0.0
    # outage <= p  <=>  mean_PL(d) <= allowed - sigma * z,  z = Q^-1(p)
    max_mean_pl = spec.allowed_path_loss_db - sigma * norm.isf(target_outage)
    depth = REFERENCE_DEPTH_MM * (max_mean_pl - params.pl0_db) / params.m
    if depth < REFERENCE_DEPTH_MM:
        raise NoFeasibleDepth(
            f"outage exceeds {target_outage:g} already at {REFERENCE_DEPTH_MM:g} mm "
            f"({area.value}/{zone.value})"
        )
    if depth >= MAX_GRID_DEPTH_MM:
        return DepthResult(MAX_GRID_DEPTH_MM, True)
    return DepthResult(float(depth), False)
