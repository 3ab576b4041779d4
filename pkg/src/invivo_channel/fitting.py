"""Least-squares fitting of path loss against depth.

Two competing regressors are supported: the depth-linear model used throughout
this package (``x = d / d0``) and the classical log-distance model
(``x = 10 log10(d / d0)``, slope = path loss exponent ``n``). Both are fitted by
ordinary least squares on the same samples so their mean squared errors are
directly comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateDesign, InsufficientSamples, InvalidStep, NonConvergence
from .model import REFERENCE_DEPTH_MM, PathLossParams

DEFAULT_LR = 0.01
DEFAULT_MAX_ITERS = 100_000
DEFAULT_TOL = 1e-10


class ModelKind(Enum):
    LINEAR = "Linear"
    LOG_DISTANCE = "LogDistance"


@dataclass(frozen=True)
class DepthSample:
    depth_mm: float
    path_loss_db: float

    def __post_init__(self):
        if not self.depth_mm >= REFERENCE_DEPTH_MM:
            raise ValueError(f"depth must be >= {REFERENCE_DEPTH_MM:g} mm, got {self.depth_mm!r}")
        if not math.isfinite(self.path_loss_db):
            raise ValueError("path loss must be finite")


@dataclass(frozen=True)
class FitResult:
    model_kind: ModelKind
    intercept_db: float
    slope: float
    sigma_db: float
    mse_db2: float
    n_samples: int
    iterations: int | None = None

    def predict(self, depth_mm):
        return self.intercept_db + self.slope * regressor(self.model_kind, depth_mm)

    def as_params(self) -> PathLossParams:
        """Reinterpret a linear fit as model parameters."""
        if self.model_kind is not ModelKind.LINEAR:
            raise ValueError("only linear fits map onto PathLossParams")
        return PathLossParams(self.intercept_db, self.slope, self.sigma_db)

    def to_dict(self) -> dict:
        out = {
            "model_kind": self.model_kind.value,
            "intercept_db": self.intercept_db,
            "slope": self.slope,
            "sigma_db": self.sigma_db,
            "mse_db2": self.mse_db2,
            "n_samples": self.n_samples,
        }
        if self.iterations is not None:
            out["iterations"] = self.iterations
        return out


def regressor(kind: ModelKind, depth_mm):
    d = np.asarray(depth_mm, dtype=float) / REFERENCE_DEPTH_MM
    if kind is ModelKind.LINEAR:
        return d
    return 10.0 * np.log10(d)


def _as_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(samples, tuple) and len(samples) == 2 and not isinstance(samples[0], DepthSample):
        depth, pl = (np.asarray(a, dtype=float) for a in samples)
    else:
        samples = list(samples)
        depth = np.array([s.depth_mm for s in samples], dtype=float)
        pl = np.array([s.path_loss_db for s in samples], dtype=float)
    if depth.shape != pl.shape or depth.ndim != 1:
        raise ValueError("depth and path loss must be 1-D arrays of equal length")
    if len(depth) < 2:
        raise InsufficientSamples(f"need at least 2 samples, got {len(depth)}")
    if np.ptp(depth) == 0:
        raise DegenerateDesign("all samples share one depth; slope is not identifiable")
    return depth, pl


def _result(kind, x, y, intercept, slope, iterations=None) -> FitResult:
    resid = y - (intercept + slope * x)
    n = len(y)
    sse = float(resid @ resid)
    # two-point fits interpolate exactly and leave no residual degree of freedom
    sigma = math.sqrt(sse / (n - 2)) if n > 2 else 0.0
    return FitResult(kind, float(intercept), float(slope), sigma, sse / n, n, iterations)


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    slope = float(dx @ (y - ym)) / float(dx @ dx)
    return ym - slope * xm, slope


def fit_linear(samples: Iterable[DepthSample] | tuple) -> FitResult:
    """Closed-form OLS of path loss on ``d / d0``.

    ``samples`` is a sequence of :class:`DepthSample` or a ``(depth_mm, path_loss_db)``
    pair of arrays.
    """
    depth, y = _as_arrays(samples)
    x = regressor(ModelKind.LINEAR, depth)
    return _result(ModelKind.LINEAR, x, y, *_ols(x, y))


def fit_log_distance(samples: Iterable[DepthSample] | tuple) -> FitResult:
    """Closed-form OLS of path loss on ``10 log10(d / d0)``; ``slope`` is the exponent ``n``."""
    depth, y = _as_arrays(samples)
    x = regressor(ModelKind.LOG_DISTANCE, depth)
    return _result(ModelKind.LOG_DISTANCE, x, y, *_ols(x, y))


def fit_linear_gd(
    samples: Iterable[DepthSample] | tuple,
    lr: float = DEFAULT_LR,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
) -> FitResult:
    """Full-batch gradient descent on the linear-model MSE.

    The regressor is standardized (zero mean, unit variance) while iterating, so
    the Hessian is ``2 I`` and any ``0 < lr < 1`` is stable regardless of the
    depth range. Iteration stops once one step improves the MSE by less than
    ``tol`` [dB^2].

    Raises:
        InvalidStep: ``lr`` is not a positive finite number.
        NonConvergence: ``max_iters`` exhausted, or the MSE grows (``lr`` too large).
    """
    if not (lr > 0 and math.isfinite(lr)):
        raise InvalidStep(f"learning rate must be positive, got {lr!r}")
    depth, y = _as_arrays(samples)
    x = regressor(ModelKind.LINEAR, depth)
    xm, xs = x.mean(), x.std()
    z = (x - xm) / xs

    b = s = 0.0
    r = b + s * z - y
    mse = float(r @ r) / len(y)
    for it in range(1, max_iters + 1):
        b -= lr * 2.0 * r.mean()
        s -= lr * 2.0 * float(r @ z) / len(y)
        r = b + s * z - y
        new_mse = float(r @ r) / len(y)
        improvement = mse - new_mse
        if not math.isfinite(new_mse) or improvement < -1e-12 * max(mse, 1.0):
            raise NonConvergence(f"MSE increased at iteration {it}; lower the learning rate")
        mse = new_mse
        if improvement <= tol:
            break
    else:
        raise NonConvergence(
            f"MSE still improving by {improvement:.3g} dB^2 after {max_iters} iterations"
        )
    slope = s / xs
    return _result(ModelKind.LINEAR, x, y, b - slope * xm, slope, iterations=it)


def compare_models(samples: Sequence[DepthSample] | tuple) -> tuple[FitResult, FitResult]:
    """Linear and log-distance fits ordered by ascending MSE; Linear wins exact ties."""
    data = _as_arrays(samples)
    fits = (fit_linear(data), fit_log_distance(data))
    order = {ModelKind.LINEAR: 0, ModelKind.LOG_DISTANCE: 1}
    return tuple(sorted(fits, key=lambda f: (f.mse_db2, order[f.model_kind])))
