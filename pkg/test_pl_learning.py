"""
Tests for channel extraction, period estimation and candidate PL generation
"""

import numpy as np
import pytest

from src.flowlaw.core.errors import EmptyFamily, NoPeriodAvailable
from src.flowlaw.core.features import QuantizedFlow, SymbolAlphabet
from src.flowlaw.core.measures import d_free
from src.flowlaw.core.pl_learning import (
    Channel,
    HistogramConfig,
    PeriodEstimate,
    PLFamily,
    estimate_channel,
    estimate_feature,
    extract_channels,
    generate_candidates,
)

HOUR = 3600.0
ALPHABET = SymbolAlphabet((2, 2, 2, 8))


def bursts(gaps, burst_len=99, start=0.0):
    """Timestamps of 1 s spaced bursts separated by the given gaps (integer seconds)"""
    times, t = [], start
    for gap in gaps:
        times.extend(t + np.arange(burst_len))
        t += burst_len - 1 + gap
    times.extend(t + np.arange(burst_len))
    return np.array(times, dtype=float)


# --- channels ---

def test_one_flow_lands_in_four_channels():
    symbol = int(ALPHABET.encode(0, 1, 0, 3))
    channels = extract_channels([QuantizedFlow(symbol, 5.0)], ALPHABET)
    assert [(c.feature, c.level) for c in channels] == [(1, 0), (2, 1), (3, 0), (4, 3)]
    assert all(c.times.tolist() == [5.0] for c in channels)


def test_alternating_size_levels_split_channel_three():
    flows = [QuantizedFlow(int(ALPHABET.encode(0, 0, i % 2, 0)), float(i)) for i in range(10)]
    channels = {(c.feature, c.level): c.times.tolist() for c in extract_channels(flows, ALPHABET)}
    assert channels[(3, 0)] == [0.0, 2.0, 4.0, 6.0, 8.0]
    assert channels[(3, 1)] == [1.0, 3.0, 5.0, 7.0, 9.0]


def test_channel_membership_count():
    rng = np.random.default_rng(0)
    flows = [QuantizedFlow(int(s), float(t)) for t, s in enumerate(rng.integers(0, 64, 300))]
    channels = extract_channels(flows, ALPHABET)
    assert sum(c.times.size for c in channels) == 4 * 300
    assert all(np.all(np.diff(c.times) >= 0) for c in channels)


# --- channel estimates ---

def test_aperiodic_channel_has_no_period():
    est = estimate_channel(Channel(3, 0, np.arange(1000, dtype=float)))
    assert est.t_d == 1200.0
    assert est.t_p is None


def test_day_active_channel_period():
    """Test gaps of 10 h and 14 h each day"""
    times = bursts([36000, 50400] * 5)
    est = estimate_channel(Channel(3, 1, times))
    assert est.t_d == 1200.0
    assert est.t_p == pytest.approx(24 * HOUR, rel=0.02)


def test_single_gap_channel_period():
    times = bursts([43200])
    est = estimate_channel(Channel(3, 1, times))
    assert est.t_p == pytest.approx(24 * HOUR, rel=0.02)


def test_too_few_timestamps():
    assert estimate_channel(Channel(1, 0, np.array([3.0]))) == PeriodEstimate()
    assert estimate_channel(Channel(1, 0, np.array([]))) == PeriodEstimate()


def test_estimate_is_shift_invariant():
    times = bursts([36000, 50400] * 3)
    assert estimate_channel(Channel(3, 1, times)) == estimate_channel(Channel(3, 1, times + 12345.0))


def test_estimate_scales_with_time_and_bin_width():
    times = bursts([36000, 50400] * 3)
    base = estimate_channel(Channel(3, 1, times), HistogramConfig(bin_width_s=600))
    doubled = estimate_channel(Channel(3, 1, 2 * times), HistogramConfig(bin_width_s=1200))
    assert doubled.t_d == 2 * base.t_d
    assert doubled.t_p == pytest.approx(2 * base.t_p)


def test_feature_estimate_is_mean_of_present_values():
    est = estimate_feature([PeriodEstimate(600, 23 * HOUR), PeriodEstimate(1200, 25 * HOUR),
                            PeriodEstimate(1200, None)])
    assert est.t_p == pytest.approx(24 * HOUR)
    assert est.t_d == pytest.approx(1000.0)


def test_feature_without_periodic_channel():
    est = estimate_feature([PeriodEstimate(600, None), PeriodEstimate(1200, None)])
    assert est.t_p is None and not est.periodic


# --- candidates ---

def uniform_flows(days, per_hour, rng, alphabet_size=64):
    n = int(days * 24 * per_hour)
    times = np.sort(rng.uniform(0, days * 24 * HOUR, n))
    symbols = rng.integers(0, alphabet_size, n)
    return [QuantizedFlow(int(s), float(t)) for s, t in zip(symbols, times)]


def test_prior_gives_eight_segments():
    rng = np.random.default_rng(1)
    flows = uniform_flows(2, 60, rng)
    free, based = generate_candidates(flows, (0.0, 48 * HOUR), {}, 64, priors=[(3 * HOUR, 24 * HOUR)])
    assert len(free) == 8 and len(based) == 8
    assert [p.segment for p in free.provenance] == list(range(8))
    assert free.kind == 'free' and based.kind == 'based'


def test_segment_pooling_conserves_flows():
    rng = np.random.default_rng(2)
    flows = uniform_flows(2, 30, rng)
    estimates = {3: PeriodEstimate(5 * HOUR, 24 * HOUR)}
    free, _ = generate_candidates(flows, (0.0, 48 * HOUR), estimates, 64)
    # 24 h / 5 h: 4 segments, the last one absorbing the 4 h remainder
    assert len(free) == 4
    assert free.provenance[-1].phase_end_s == 24 * HOUR
    assert sum(p.support_count for p in free.pls) == len(flows)


def test_provenance_time_of_day():
    rng = np.random.default_rng(3)
    flows = uniform_flows(1, 60, rng)
    free, _ = generate_candidates(flows, (0.0, 24 * HOUR), {}, 64,
                                  priors=[(3 * HOUR, 24 * HOUR)], clock_start_s=17 * HOUR)
    assert free.provenance[0].time_of_day == '17:00-20:00'
    assert free.provenance[7].time_of_day == '14:00-17:00'
    assert free.provenance[0].source == 'prior'


def test_time_of_day_follows_drifting_period():
    """Test that a 23 h period labels each segment with the clock span it pooled"""
    rng = np.random.default_rng(9)
    flows = uniform_flows(2, 60, rng)
    free, _ = generate_candidates(flows, (0.0, 48 * HOUR), {}, 64,
                                  priors=[(3 * HOUR, 23 * HOUR)], clock_start_s=17 * HOUR)
    labels = [p.time_of_day for p in free.provenance]
    assert len(labels) == 7
    # Segment 0 starts at 17:00, 16:00 and 15:00 in the three periods
    assert labels[0] == '15:00-20:00'
    assert labels[1] == '19:00-23:00'
    # The last segment spans 5 h and only two periods reach it
    assert labels[6] == '10:00-16:00'


def test_time_of_day_wraps_midnight():
    rng = np.random.default_rng(10)
    flows = uniform_flows(1, 60, rng)
    free, _ = generate_candidates(flows, (0.0, 24 * HOUR), {}, 64,
                                  priors=[(4 * HOUR, 24 * HOUR)], clock_start_s=22 * HOUR)
    assert free.provenance[0].time_of_day == '22:00-02:00'
    assert free.provenance[0].clock_end_s == pytest.approx(2 * HOUR)


def test_empty_segments_are_skipped():
    rng = np.random.default_rng(4)
    flows = [f for f in uniform_flows(2, 60, rng) if f.start_time % (24 * HOUR) < 12 * HOUR]
    free, based = generate_candidates(flows, (0.0, 48 * HOUR), {}, 64, priors=[(3 * HOUR, 24 * HOUR)])
    assert [p.segment for p in free.provenance] == [0, 1, 2, 3]
    assert len(based) == 4


def test_unusable_pair_is_skipped():
    rng = np.random.default_rng(5)
    flows = uniform_flows(1, 60, rng)
    estimates = {3: PeriodEstimate(3 * HOUR, 72 * HOUR)}
    free, _ = generate_candidates(flows, (0.0, 24 * HOUR), estimates, 64,
                                  priors=[(6 * HOUR, 24 * HOUR)])
    assert len(free) == 4
    assert {p.source for p in free.provenance} == {'prior'}


def test_no_period_available():
    rng = np.random.default_rng(6)
    flows = uniform_flows(1, 10, rng)
    with pytest.raises(NoPeriodAvailable):
        generate_candidates(flows, (0.0, 24 * HOUR), {1: PeriodEstimate(600, None)}, 64)


def test_stationary_candidates_agree():
    """Test that i.i.d. traffic gives near-identical PLs across segments"""
    rng = np.random.default_rng(7)
    probs = rng.random(16) + 0.5
    probs /= probs.sum()
    n = 80000
    times = np.sort(rng.uniform(0, 24 * HOUR, n))
    symbols = rng.choice(16, size=n, p=probs)
    flows = [QuantizedFlow(int(s), float(t)) for s, t in zip(symbols, times)]
    free, _ = generate_candidates(flows, (0.0, 24 * HOUR), {}, 16, priors=[(3 * HOUR, 24 * HOUR)])
    assert len(free) == 8
    for a in free.pls:
        for b in free.pls:
            assert d_free(a, b) <= 0.05


def test_family_round_trip_and_subset():
    rng = np.random.default_rng(8)
    flows = uniform_flows(1, 60, rng)
    free, based = generate_candidates(flows, (0.0, 24 * HOUR), {}, 64, priors=[(6 * HOUR, 24 * HOUR)])
    picked = based.subset([1, 3], c_v=[0.0, 0.5, 0.0, 0.25])
    assert picked.c_v == (0.5, 0.25)
    back = PLFamily.from_dict(picked.to_dict())
    assert back.provenance == picked.provenance
    assert back.c_v == picked.c_v
    assert np.array_equal(back.pls[1].pair_probs, picked.pls[1].pair_probs)


def test_empty_family():
    with pytest.raises(EmptyFamily):
        PLFamily('free', ())
