import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from invivo_channel.errors import InvalidConfig
from invivo_channel.model import SIDES, BodyArea
from invivo_channel.multipath import (
    DEFAULT_DECAY_NS,
    PdpConfig,
    PowerDelayProfile,
    default_config,
    dispersion_stats,
    synthesize_pdp,
)


def weighted_moments_oracle(delays, powers_db):
    w = [10 ** (p / 10) for p in powers_db]
    mean = np.average(delays, weights=w)
    var = np.average((np.asarray(delays) - mean) ** 2, weights=w)
    return mean, math.sqrt(var), 10 * math.log10(sum(w))


def test_single_tap():
    st_ = dispersion_stats(PowerDelayProfile((7.0,), (-3.0,)))
    assert st_.mean_excess_delay_ns == 7.0
    assert st_.rms_delay_spread_ns == 0.0
    assert st_.total_power_db == pytest.approx(-3.0)


def test_two_equal_taps():
    st_ = dispersion_stats(PowerDelayProfile((0.0, 10.0), (0.0, 0.0)))
    assert st_.mean_excess_delay_ns == pytest.approx(5.0, abs=1e-9)
    assert st_.rms_delay_spread_ns == pytest.approx(5.0, abs=1e-9)


def test_three_to_one_taps():
    p2 = 10 * math.log10(1 / 3)  # -4.771 dB
    st_ = dispersion_stats(PowerDelayProfile((0.0, 4.0), (0.0, p2)))
    assert st_.mean_excess_delay_ns == pytest.approx(1.0, abs=1e-9)
    assert st_.rms_delay_spread_ns == pytest.approx(math.sqrt(3), abs=1e-9)


profiles = st.lists(
    st.tuples(st.floats(0.01, 5), st.floats(-40, 10)), min_size=1, max_size=20
).map(lambda taps: (np.cumsum([t for t, _ in taps]) - taps[0][0], [p for _, p in taps]))


@given(profiles)
def test_stats_match_weighted_moments_oracle(profile):
    delays, powers = profile
    st_ = dispersion_stats(PowerDelayProfile(tuple(delays), tuple(powers)))
    mean, rms, total = weighted_moments_oracle(delays, powers)
    assert st_.mean_excess_delay_ns == pytest.approx(mean, rel=1e-9, abs=1e-9)
    assert st_.rms_delay_spread_ns == pytest.approx(rms, rel=1e-7, abs=1e-7)
    assert st_.total_power_db == pytest.approx(total, abs=1e-9)


@given(profiles, st.floats(-50, 50))
def test_rms_invariant_under_power_offset(profile, offset):
    delays, powers = profile
    a = dispersion_stats(PowerDelayProfile(tuple(delays), tuple(powers)))
    b = dispersion_stats(PowerDelayProfile(tuple(delays), tuple(np.asarray(powers) + offset)))
    assert b.rms_delay_spread_ns == pytest.approx(a.rms_delay_spread_ns, rel=1e-9, abs=1e-9)
    assert b.total_power_db == pytest.approx(a.total_power_db + offset, abs=1e-9)


@given(profiles, st.floats(0, 100))
def test_delay_shift(profile, shift):
    delays, powers = profile
    a = dispersion_stats(PowerDelayProfile(tuple(delays), tuple(powers)))
    b = dispersion_stats(PowerDelayProfile(tuple(np.asarray(delays) + shift), tuple(powers)))
    assert b.mean_excess_delay_ns == pytest.approx(a.mean_excess_delay_ns + shift, abs=1e-8)
    assert b.rms_delay_spread_ns == pytest.approx(a.rms_delay_spread_ns, abs=1e-7)


@pytest.mark.parametrize("delays, powers", [
    ((), ()),
    ((1.0, 1.0), (0.0, 0.0)),
    ((-1.0,), (0.0,)),
    ((0.0, 1.0), (0.0, math.inf)),
    ((0.0,), (0.0, 1.0)),
])
def test_invalid_profiles(delays, powers):
    with pytest.raises(ValueError):
        PowerDelayProfile(delays, powers)


def test_profile_direction_must_be_side():
    with pytest.raises(ValueError):
        PowerDelayProfile((0.0,), (0.0,), BodyArea.REGION1)


def test_synthesize_two_db_per_tap():
    gamma = 10 / (2 * math.log(10))  # 2.1715 ns, i.e. -2 dB per 1 ns tap
    pdp = synthesize_pdp(BodyArea.ANTERIOR, PdpConfig(decay_ns=gamma))
    assert len(pdp) == 16
    np.testing.assert_allclose(pdp.powers_db, -2.0 * np.arange(16), atol=1e-9)
    np.testing.assert_allclose(pdp.delays_ns, np.arange(16.0))


def test_synthesize_slow_decay_is_near_flat_until_floor():
    cfg = PdpConfig(decay_ns=100.0)
    pdp = synthesize_pdp(BodyArea.POSTERIOR, cfg)
    per_tap = 10 / (100 * math.log(10))
    assert len(pdp) == math.floor(30 / per_tap) + 1
    assert pdp.powers_db[1] > -0.05
    assert pdp.powers_db[-1] >= -30 > pdp.powers_db[-1] - per_tap


def test_synthesize_respects_max_taps():
    pdp = synthesize_pdp(BodyArea.ANTERIOR, PdpConfig(decay_ns=1e6, max_taps=64))
    assert len(pdp) == 64


@pytest.mark.parametrize("field, value", [("tap_spacing_ns", 0.0), ("decay_ns", -1.0), ("floor_db", 0.0)])
def test_synthesize_invalid_config(field, value):
    cfg = default_config(BodyArea.ANTERIOR, **{field: value})
    with pytest.raises(InvalidConfig):
        synthesize_pdp(BodyArea.ANTERIOR, cfg)


def test_synthesize_requires_side():
    with pytest.raises(InvalidConfig):
        synthesize_pdp(BodyArea.REGION2)


def test_synthesize_fading_is_seeded():
    cfg = default_config(BodyArea.LEFT_LATERAL, sigma_tap_db=2.0)
    a = synthesize_pdp(BodyArea.LEFT_LATERAL, cfg, np.random.default_rng(8))
    b = synthesize_pdp(BodyArea.LEFT_LATERAL, cfg, np.random.default_rng(8))
    assert a == b
    assert a != synthesize_pdp(BodyArea.LEFT_LATERAL, cfg, np.random.default_rng(9))
    with pytest.raises(ValueError):
        synthesize_pdp(BodyArea.LEFT_LATERAL, cfg)


def test_rms_strictly_increasing_in_decay():
    rms = [
        dispersion_stats(synthesize_pdp(BodyArea.ANTERIOR, PdpConfig(decay_ns=g))).rms_delay_spread_ns
        for g in np.linspace(0.5, 20, 40)
    ]
    assert all(b > a for a, b in zip(rms, rms[1:]))


def test_default_sides_more_dispersive():
    rms = {s: dispersion_stats(synthesize_pdp(s)).rms_delay_spread_ns for s in SIDES}
    for lateral in (BodyArea.LEFT_LATERAL, BodyArea.RIGHT_LATERAL):
        assert rms[lateral] > rms[BodyArea.ANTERIOR]
        assert rms[lateral] > rms[BodyArea.POSTERIOR]
    assert DEFAULT_DECAY_NS[BodyArea.LEFT_LATERAL] > DEFAULT_DECAY_NS[BodyArea.ANTERIOR]


def test_csv_round_trip():
    pdp = synthesize_pdp(BodyArea.RIGHT_LATERAL)
    text = pdp.to_csv()
    assert text.splitlines()[:2] == ["# direction=RightLateral", "delay_ns,power_db"]
    back = PowerDelayProfile.from_csv(text)
    assert back.direction is BodyArea.RIGHT_LATERAL
    np.testing.assert_allclose(back.powers_db, pdp.powers_db, atol=1e-6)
    np.testing.assert_allclose(back.delays_ns, pdp.delays_ns)
