"""Statistical in vivo path loss model for implant-to-external links at 915 MHz."""

from .dataset import (
    GridPoint,
    PathLossDataset,
    SampleRecord,
    average_over_regions_linear,
    enumerate_grid,
    export_csv,
    filter_by_return_loss,
    generate_synthetic_grid,
    ingest_csv,
    variance_by_depth,
)
from .errors import ChannelModelError
from .fitting import (
    DepthSample,
    FitResult,
    ModelKind,
    compare_models,
    fit_linear,
    fit_linear_gd,
    fit_log_distance,
)
from .link_budget import (
    LinkBudgetSpec,
    MonteCarlo,
    max_reliable_depth,
    outage_probability,
    received_power,
)
from .model import (
    PARAMETER_TABLE,
    BodyArea,
    BodyLocation,
    FieldZone,
    PathLossParams,
    half_wave_dipole_length_mm,
    lookup_params,
    mean_path_loss,
    sample_path_loss,
    side_of_angle,
)
from .multipath import (
    DispersionStats,
    PdpConfig,
    PowerDelayProfile,
    dispersion_stats,
    synthesize_pdp,
)

__version__ = "0.1.0"
