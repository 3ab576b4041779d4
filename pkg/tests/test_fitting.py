import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from invivo_channel.dataset import synthetic_depth_samples
from invivo_channel.errors import DegenerateDesign, InsufficientSamples, InvalidStep, NonConvergence
from invivo_channel.fitting import (
    DepthSample,
    ModelKind,
    compare_models,
    fit_linear,
    fit_linear_gd,
    fit_log_distance,
)
from invivo_channel.model import PARAMETER_TABLE, BodyArea, FieldZone, PathLossParams

GRID = np.arange(10.0, 101.0, 10.0)


def noiseless(pl0=20.0, m=2.0, depths=GRID):
    return [DepthSample(d, pl0 + m * d / 10) for d in depths]


def lstsq_oracle(depth, pl, log=False):
    x = np.asarray(depth) / 10.0
    if log:
        x = 10 * np.log10(x)
    A = np.column_stack([np.ones_like(x), x])
    (b, s), *_ = np.linalg.lstsq(A, pl, rcond=None)
    return b, s


def test_fit_linear_noiseless_recovery():
    f = fit_linear(noiseless())
    assert f.model_kind is ModelKind.LINEAR
    assert f.intercept_db == pytest.approx(20, abs=1e-9)
    assert f.slope == pytest.approx(2, abs=1e-9)
    assert f.sigma_db == pytest.approx(0, abs=1e-9)
    assert f.n_samples == 10


def test_fit_linear_two_points():
    f = fit_linear([DepthSample(10, 30), DepthSample(20, 40)])
    assert f.intercept_db == pytest.approx(20)
    assert f.slope == pytest.approx(10)
    assert f.mse_db2 == pytest.approx(0, abs=1e-20)


def test_fit_linear_region3_near_synthetic():
    p = PARAMETER_TABLE[(BodyArea.REGION3, FieldZone.NEAR)]
    f = fit_linear(synthetic_depth_samples(p, 1600, np.random.default_rng(7)))
    assert f.intercept_db == pytest.approx(22.56, abs=0.5)
    assert f.slope == pytest.approx(2.55, abs=0.10)
    assert f.sigma_db == pytest.approx(1.79, rel=0.10)


def test_fit_accepts_array_pair_and_samples_equally():
    d, y = synthetic_depth_samples(PathLossParams(30, 2, 1), 50, np.random.default_rng(1))
    a = fit_linear((d, y))
    b = fit_linear([DepthSample(*t) for t in zip(d, y)])
    assert a == b


@pytest.mark.parametrize("fit", [fit_linear, fit_log_distance, fit_linear_gd])
def test_insufficient_samples(fit):
    with pytest.raises(InsufficientSamples):
        fit([DepthSample(10, 30)])
    with pytest.raises(InsufficientSamples):
        fit([])


@pytest.mark.parametrize("fit", [fit_linear, fit_log_distance, fit_linear_gd])
def test_degenerate_design(fit):
    with pytest.raises(DegenerateDesign):
        fit([DepthSample(40, 30), DepthSample(40, 31), DepthSample(40, 32)])


def test_depth_sample_validation():
    with pytest.raises(ValueError):
        DepthSample(5, 30)
    with pytest.raises(ValueError):
        DepthSample(20, math.inf)


depth_lists = st.lists(st.floats(10, 100, allow_nan=False), min_size=3, max_size=40)


@settings(max_examples=60)
@given(depths=depth_lists, seed=st.integers(0, 2**32 - 1))
def test_fit_linear_satisfies_normal_equations(depths, seed):
    d = np.array(depths)
    assume(np.ptp(d) > 1e-3)
    y = np.random.default_rng(seed).normal(40, 5, size=len(d))
    f = fit_linear((d, y))
    x = d / 10
    r = y - (f.intercept_db + f.slope * x)
    scale = np.abs(y).sum()
    assert abs(r.sum()) <= 1e-9 * scale
    assert abs((r * x).sum()) <= 1e-9 * scale * x.max()
    b, s = lstsq_oracle(d, y)
    assert f.intercept_db == pytest.approx(b, abs=1e-6)
    assert f.slope == pytest.approx(s, abs=1e-6)
    assert f.mse_db2 == pytest.approx(float(np.mean(r**2)), rel=1e-9, abs=1e-12)
    assert f.sigma_db == pytest.approx(math.sqrt(float(r @ r) / (len(d) - 2)), rel=1e-9, abs=1e-12)


@settings(max_examples=40)
@given(seed=st.integers(0, 2**32 - 1), c=st.floats(-50, 50))
def test_scale_equivariance(seed, c):
    d, y = synthetic_depth_samples(PathLossParams(25, 2.2, 3), 80, np.random.default_rng(seed))
    a, b = fit_linear((d, y)), fit_linear((d, y + c))
    assert b.intercept_db == pytest.approx(a.intercept_db + c, abs=1e-9)
    assert b.slope == pytest.approx(a.slope, abs=1e-9)
    assert b.sigma_db == pytest.approx(a.sigma_db, abs=1e-9)
    assert b.mse_db2 == pytest.approx(a.mse_db2, abs=1e-9)


def test_gd_matches_ols_noiseless():
    # lr = 0.02 as in the reference example; tol tightened to 1e-14 because an
    # MSE-improvement stop at 1e-12 leaves ~2e-6 dB of intercept error
    samples = noiseless()
    ols = fit_linear(samples)
    gd = fit_linear_gd(samples, lr=0.02, tol=1e-14)
    assert gd.intercept_db == pytest.approx(ols.intercept_db, abs=1e-6)
    assert gd.slope == pytest.approx(ols.slope, abs=1e-6)
    assert gd.iterations > 0


def test_gd_stop_rule_bound_at_loose_tolerance():
    # at stop the excess MSE is below tol / (1 - (1 - 2 lr)^2), so the parameter
    # error in standardized units is at most sqrt of that
    samples = noiseless()
    ols = fit_linear(samples)
    gd = fit_linear_gd(samples, lr=0.02, tol=1e-12)
    bound = math.sqrt(1e-12 / (1 - (1 - 0.04) ** 2))
    x = GRID / 10
    assert abs(gd.slope - ols.slope) * x.std() <= bound
    assert abs(gd.intercept_db - ols.intercept_db) <= bound * (1 + x.mean() / x.std())


@pytest.mark.parametrize("lr", [0.0, -0.1, math.nan])
def test_gd_invalid_step(lr):
    with pytest.raises((InvalidStep, NonConvergence)):
        fit_linear_gd(noiseless(), lr=lr)


def test_gd_diverges_with_large_step():
    with pytest.raises(NonConvergence):
        fit_linear_gd(noiseless(), lr=1.5)


def test_gd_max_iters_exhausted():
    with pytest.raises(NonConvergence):
        fit_linear_gd(noiseless(), lr=1e-4, max_iters=10, tol=1e-12)


def test_fit_log_distance_noiseless():
    f = fit_log_distance([DepthSample(10, 30), DepthSample(100, 70)])
    assert f.model_kind is ModelKind.LOG_DISTANCE
    assert f.intercept_db == pytest.approx(30)
    assert f.slope == pytest.approx(4)


def test_fit_log_distance_matches_oracle():
    d, y = synthetic_depth_samples(PathLossParams(25, 2.2, 3), 200, np.random.default_rng(5))
    f = fit_log_distance((d, y))
    b, s = lstsq_oracle(d, y, log=True)
    assert (f.intercept_db, f.slope) == pytest.approx((b, s), abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_log_fit_worse_on_linear_data(seed):
    p = PARAMETER_TABLE[(BodyArea.ANTERIOR, FieldZone.NEAR)]
    samples = synthetic_depth_samples(p, 160, np.random.default_rng(seed))
    assert fit_log_distance(samples).mse_db2 >= fit_linear(samples).mse_db2


def test_compare_models_orders_by_mse():
    first, second = compare_models(noiseless())
    assert first.model_kind is ModelKind.LINEAR
    assert first.mse_db2 == pytest.approx(0, abs=1e-20)
    assert second.mse_db2 > 0

    p = PARAMETER_TABLE[(BodyArea.REGION2, FieldZone.FAR)]
    first, _ = compare_models(synthetic_depth_samples(p, 1600, np.random.default_rng(0)))
    assert first.model_kind is ModelKind.LINEAR


def test_compare_models_log_data_ranks_log_first():
    samples = [DepthSample(d, 30 + 10 * 4 * math.log10(d / 10)) for d in (10, 25, 100)]
    first, second = compare_models(samples)
    assert first.model_kind is ModelKind.LOG_DISTANCE
    assert first.mse_db2 == pytest.approx(0, abs=1e-20)
    assert second.model_kind is ModelKind.LINEAR


def test_compare_models_tie_breaks_to_linear():
    # two points are interpolated exactly by both models
    first, second = compare_models([DepthSample(10, 30), DepthSample(100, 70)])
    assert first.mse_db2 == second.mse_db2 == 0
    assert first.model_kind is ModelKind.LINEAR


def test_compare_models_accepts_generator():
    first, second = compare_models(s for s in noiseless())
    assert {first.model_kind, second.model_kind} == set(ModelKind)


def test_fit_result_json_fields():
    f = fit_linear(noiseless())
    payload = json.loads(json.dumps(f.to_dict()))
    assert set(payload) == {"model_kind", "intercept_db", "slope", "sigma_db", "mse_db2", "n_samples"}
    assert payload["model_kind"] == "Linear"
    assert "iterations" in fit_linear_gd(noiseless(), tol=1e-14).to_dict()


def _whitened_error(fit, p, n):
    x = np.resize(GRID / 10, n)
    cov = p.sigma_db**2 * np.linalg.inv(np.column_stack([np.ones(n), x]).T @ np.column_stack([np.ones(n), x]))
    e = np.array([fit.intercept_db - p.pl0_db, fit.slope - p.m])
    sigma_se = p.sigma_db / math.sqrt(2 * n)
    return float(e @ np.linalg.solve(cov, e)) + ((fit.sigma_db - p.sigma_db) / sigma_se) ** 2


def _refit_errors(p, seeds):
    # errors are measured in units of the 160-sample standard errors
    small, large = [], []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        small.append(_whitened_error(fit_linear(synthetic_depth_samples(p, 160, rng)), p, 160))
        large.append(_whitened_error(fit_linear(synthetic_depth_samples(p, 1600, rng)), p, 160))
    return np.array(small), np.array(large)


@pytest.mark.parametrize("key", list(PARAMETER_TABLE)[:4])
def test_refit_error_shrinks_tenfold(key):
    small, large = _refit_errors(PARAMETER_TABLE[key], range(100))
    # squared whitened error scales with 1/n
    assert large.mean() / small.mean() == pytest.approx(0.1, rel=0.35)


@pytest.mark.xfail(
    strict=False,
    reason="win rate is F(3,3) cdf at 10, about 0.955, so a 95-of-100 threshold passes only by chance",
)
def test_refit_error_shrinks_in_95_percent_of_seeds():
    small, large = _refit_errors(PARAMETER_TABLE[(BodyArea.REGION1, FieldZone.NEAR)], range(100))
    assert np.sum(large < small) >= 95
