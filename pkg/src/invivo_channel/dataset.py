"""Measurement grid, sample collections and grid-level analyses.

The simulation grid spans 4 torso regions x 2 receiver zones x 16 angles
(22.5 deg steps) x 10 depths (10..100 mm), 1280 points in total. Datasets are
read from and written to a flat CSV with the header::

    region,zone,angle_deg,depth_mm,path_loss_db[,return_loss_db]
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, TextIO

import numpy as np

from .errors import (
    DuplicatePoint,
    InsufficientAngles,
    MissingCell,
    ParseError,
    UnknownRegion,
    UnknownZone,
)
from .fitting import DepthSample
from .model import (
    GRID_ANGLES_DEG,
    GRID_DEPTHS_MM,
    PARAMETER_TABLE,
    REFERENCE_DEPTH_MM,
    REGIONS,
    BodyArea,
    FieldZone,
    PathLossParams,
    sample_path_loss,
)
from .units import db_to_linear, linear_to_db

RETURN_LOSS_THRESHOLD_DB = -7.0
DEFAULT_SIGMA_M = 0.2
CSV_COLUMNS = ("region", "zone", "angle_deg", "depth_mm", "path_loss_db", "return_loss_db")


@dataclass(frozen=True)
class GridPoint:
    region: BodyArea
    zone: FieldZone
    angle_deg: float
    depth_mm: float


@dataclass(frozen=True)
class SampleRecord:
    point: GridPoint
    path_loss_db: float
    return_loss_db: float | None = None

    @property
    def valid(self) -> bool:
        return self.return_loss_db is None or self.return_loss_db <= RETURN_LOSS_THRESHOLD_DB


@dataclass(frozen=True)
class Measured:
    pass


@dataclass(frozen=True)
class Synthetic:
    seed: int
    config: dict = field(default_factory=dict, compare=False, hash=False)


@dataclass(frozen=True)
class PathLossDataset:
    records: tuple[SampleRecord, ...]
    provenance: Measured | Synthetic = Measured()

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        seen = set()
        for rec in self.records:
            if rec.point in seen:
                raise DuplicatePoint(f"duplicate grid point {rec.point}")
            seen.add(rec.point)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def select(self, region: BodyArea | None = None, zone: FieldZone | None = None) -> PathLossDataset:
        recs = [
            r for r in self.records
            if (region is None or r.point.region is region) and (zone is None or r.point.zone is zone)
        ]
        return PathLossDataset(recs, self.provenance)

    def depth_samples(self) -> list[DepthSample]:
        return [DepthSample(r.point.depth_mm, r.path_loss_db) for r in self.records]

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """``(depth_mm, path_loss_db)`` arrays, the form accepted by the fitting functions."""
        depth = np.array([r.point.depth_mm for r in self.records], dtype=float)
        pl = np.array([r.path_loss_db for r in self.records], dtype=float)
        return depth, pl


def enumerate_grid() -> list[GridPoint]:
    return [
        GridPoint(region, zone, angle, depth)
        for region, zone, angle, depth in itertools.product(REGIONS, FieldZone, GRID_ANGLES_DEG, GRID_DEPTHS_MM)
    ]


def _parse_float(text: str, name: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"{name} is not a number: {text!r}", line) from None
    if not math.isfinite(value):
        raise ParseError(f"{name} must be finite", line)
    return value


def ingest_csv(stream: TextIO | str) -> PathLossDataset:
    """Parse a dataset CSV. ``stream`` may be a file object or the CSV text itself.

    A completely empty input yields an empty dataset.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None:
        return PathLossDataset(())
    header = [h.strip() for h in header]
    if tuple(header) not in (CSV_COLUMNS[:5], CSV_COLUMNS):
        raise ParseError(f"header must be {','.join(CSV_COLUMNS[:5])}[,return_loss_db], got {','.join(header)}", 1)
    has_rl = len(header) == 6

    records = []
    seen = {}
    for line, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header) and not (has_rl and len(row) == 5):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", line)
        region_s, zone_s = row[0].strip(), row[1].strip()
        try:
            region = BodyArea.parse(region_s)
        except ValueError:
            region = None
        if region is None or not region.is_region:
            raise UnknownRegion(f"unknown region {region_s!r}", line)
        try:
            zone = FieldZone.parse(zone_s)
        except ValueError:
            raise UnknownZone(f"unknown zone {zone_s!r}", line) from None
        angle = _parse_float(row[2], "angle_deg", line)
        depth = _parse_float(row[3], "depth_mm", line)
        pl = _parse_float(row[4], "path_loss_db", line)
        rl = None
        if has_rl and len(row) == 6 and row[5].strip():
            rl = _parse_float(row[5], "return_loss_db", line)
        point = GridPoint(region, zone, angle, depth)
        if point in seen:
            raise DuplicatePoint(f"grid point repeats line {seen[point]}", line)
        seen[point] = line
        records.append(SampleRecord(point, pl, rl))
    return PathLossDataset(records, Measured())


def _fmt_num(x: float) -> str:
    short = f"{x:g}"
    return short if float(short) == x else repr(float(x))


def export_csv(ds: PathLossDataset, stream: TextIO | None = None) -> str | None:
    """Write ``ds`` as CSV (path and return loss with 4 decimals).

    Returns the text when ``stream`` is None.
    """
    out = io.StringIO() if stream is None else stream
    has_rl = any(r.return_loss_db is not None for r in ds.records)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS if has_rl else CSV_COLUMNS[:5])
    for r in ds.records:
        p = r.point
        row = [p.region.value, p.zone.value, _fmt_num(p.angle_deg), _fmt_num(p.depth_mm), f"{r.path_loss_db:.4f}"]
        if has_rl:
            row.append("" if r.return_loss_db is None else f"{r.return_loss_db:.4f}")
        writer.writerow(row)
    return out.getvalue() if stream is None else None


def filter_by_return_loss(ds: PathLossDataset, threshold_db: float = RETURN_LOSS_THRESHOLD_DB) -> PathLossDataset:
    """Drop poorly matched antenna locations (return loss above ``threshold_db``)."""
    keep = [r for r in ds.records if r.return_loss_db is None or r.return_loss_db <= threshold_db]
    return PathLossDataset(keep, ds.provenance)


def average_over_regions_linear(
    ds: PathLossDataset, zone: FieldZone, *, complete: bool = True
) -> dict[tuple[float, float], float]:
    """Per-(angle, depth) average of region path losses, taken on linear attenuation factors.

    With ``complete=True`` every region present in the zone must be present in
    every (angle, depth) cell of the zone; otherwise only non-empty cells are required.
    Cells are returned in ascending (angle, depth) order.
    """
    cells: dict[tuple[float, float], dict[BodyArea, float]] = defaultdict(dict)
    for r in ds.records:
        if r.point.zone is zone:
            cells[(r.point.angle_deg, r.point.depth_mm)][r.point.region] = r.path_loss_db
    if not cells:
        raise MissingCell([f"no records in zone {zone.value}"])

    angles = sorted({a for a, _ in cells})
    depths = sorted({d for _, d in cells})
    regions = sorted({reg for c in cells.values() for reg in c}, key=REGIONS.index)
    missing = []
    for a, d in itertools.product(angles, depths):
        present = cells.get((a, d), {})
        if not present:
            missing.append((a, d))
        elif complete:
            missing.extend((reg.value, a, d) for reg in regions if reg not in present)
    if missing:
        raise MissingCell(missing)

    return {
        key: float(linear_to_db(db_to_linear(list(cells[key].values())).mean()))
        for key in itertools.product(angles, depths)
    }


def variance_by_depth(ds: PathLossDataset, region: BodyArea, zone: FieldZone) -> dict[float, float]:
    """Sample variance (n - 1) of path loss across angles at each depth, depth-ascending."""
    by_depth: dict[float, list[float]] = defaultdict(list)
    for r in ds.records:
        if r.point.region is region and r.point.zone is zone:
            by_depth[r.point.depth_mm].append(r.path_loss_db)
    if not by_depth:
        raise InsufficientAngles(f"no records for {region.value}/{zone.value}")
    short = [d for d, v in by_depth.items() if len(v) < 2]
    if short:
        raise InsufficientAngles(f"fewer than 2 angles at depth(s) {sorted(short)} mm")
    return {d: float(np.var(by_depth[d], ddof=1)) for d in sorted(by_depth)}


def generate_synthetic_grid(
    params_by_region: Mapping[tuple[BodyArea, FieldZone], PathLossParams] | None = None,
    sigma_m: float = DEFAULT_SIGMA_M,
    seed: int = 0,
) -> PathLossDataset:
    """Synthetic 1280-point grid with angle-dependent decay rates.

    For every (region, zone) each angle gets one slope ``m_theta ~ Normal(m, sigma_m^2)``;
    every record then draws independent shadowing, so the across-angle variance at
    depth ``d`` is ``sigma_m^2 (d/d0)^2 + sigma^2`` in expectation.
    ``params_by_region`` defaults to the tabulated Region1-4 parameters.
    """
    if sigma_m < 0:
        raise ValueError("sigma_m must be non-negative")
    if params_by_region is None:
        params_by_region = {(r, z): PARAMETER_TABLE[(r, z)] for r in REGIONS for z in FieldZone}
    rng = np.random.default_rng(seed)
    x = np.asarray(GRID_DEPTHS_MM) / REFERENCE_DEPTH_MM
    records = []
    for region, zone in itertools.product(REGIONS, FieldZone):
        p = params_by_region[(region, zone)]
        slopes = rng.normal(p.m, sigma_m, size=len(GRID_ANGLES_DEG)) if sigma_m > 0 else np.full(16, p.m)
        shadow = rng.normal(0.0, p.sigma_db, size=(len(GRID_ANGLES_DEG), len(x))) if p.sigma_db > 0 else 0.0
        pl = p.pl0_db + slopes[:, None] * x[None, :] + shadow
        for i, angle in enumerate(GRID_ANGLES_DEG):
            for j, depth in enumerate(GRID_DEPTHS_MM):
                records.append(SampleRecord(GridPoint(region, zone, angle, depth), float(pl[i, j])))
    config = {
        "sigma_m": sigma_m,
        "params": {f"{r.value}/{z.value}": asdict(p) for (r, z), p in params_by_region.items()},
    }
    return PathLossDataset(records, Synthetic(seed, config))


def synthetic_depth_samples(
    params: PathLossParams,
    n: int,
    rng: np.random.Generator,
    depths: Iterable[float] = GRID_DEPTHS_MM,
) -> tuple[np.ndarray, np.ndarray]:
    """``n`` forward-model draws cycling over ``depths``, as ``(depth_mm, path_loss_db)`` arrays."""
    d = np.resize(np.asarray(tuple(depths), dtype=float), n)
    return d, sample_path_loss(params, d, rng)
