"""
Tests for the synthetic diurnal traffic generator
"""

import numpy as np
import pytest

from src.flowlaw.core.traffic_gen import (
    DEFAULT_HOURLY_LEVELS,
    AnomalySpec,
    DiurnalProfile,
    GroundTruth,
    NodeSpec,
    default_diurnal_profile,
    generate,
)

HOUR = 3600.0
DAY = 24 * HOUR


def test_default_profile_shape():
    profile = default_diurnal_profile()
    hours = np.arange(24) * HOUR
    assert profile.value(hours).tolist() == pytest.approx(list(DEFAULT_HOURLY_LEVELS))
    assert profile.value(hours).max() == 1.0
    assert profile.value(20 * HOUR) == pytest.approx(1.0)
    assert profile.value(4 * HOUR) == pytest.approx(0.2)


def test_profile_is_periodic():
    profile = default_diurnal_profile()
    t = np.linspace(0, DAY, 97)
    assert profile.value(t + 3 * DAY) == pytest.approx(profile.value(t))
    # Wraps from 23:00 back to midnight
    assert profile.value(23.5 * HOUR) == pytest.approx((0.58 + 0.45) / 2)


@pytest.mark.parametrize('samples', [((0.0, 0.5),), ((0.0, 1.0), (0.0, 0.5)), ((0.0, 1.0), (1.0, 0.5)),
                                     ((0.0, 0.0), (0.5, 1.0))])
def test_invalid_profiles(samples):
    with pytest.raises(ValueError):
        DiurnalProfile(samples=samples)


def test_profile_round_trip():
    profile = default_diurnal_profile()
    assert DiurnalProfile.from_dict(profile.to_dict()) == profile


def test_plateau_profile_levels_and_ramps():
    profile = DiurnalProfile.plateaus([(10 * HOUR, 1.0), (100 * 60, 0.61), (510 * 60, 0.8)], ramp_s=60.0)
    assert profile.value(5 * HOUR) == pytest.approx(0.61)
    assert profile.value(9 * HOUR) == pytest.approx(0.8)
    assert profile.value(20 * HOUR) == pytest.approx(1.0)
    # The day level holds past midnight until the ramp into 01:40
    assert profile.value(DAY + 1 * HOUR) == pytest.approx(1.0)
    assert profile.value(100 * 60 - 30) == pytest.approx((1.0 + 0.61) / 2)
    assert profile.value(10 * HOUR) == pytest.approx(1.0)


@pytest.mark.parametrize('steps, ramp', [([], 1.0), ([(0.0, 1.0), (30.0, 0.5)], 60.0),
                                         ([(0.0, 0.5), (HOUR, 0.7)], 1.0)])
def test_invalid_plateau_profiles(steps, ramp):
    with pytest.raises(ValueError):
        DiurnalProfile.plateaus(steps, ramp_s=ramp)


def test_flat_profile_flow_count():
    """Test a homogeneous node: 10^4 expected flows within three standard deviations"""
    flows, _ = generate([NodeSpec('10.0.0.1', peak_rate_fps=0.1)], DiurnalProfile.flat(), 1e5, seed=3)
    assert abs(len(flows) - 1e4) <= 3 * np.sqrt(1e4)


def test_flows_are_sorted_and_inside_horizon():
    nodes = [NodeSpec(f'10.0.0.{i}') for i in range(1, 4)]
    flows, _ = generate(nodes, default_diurnal_profile(), DAY, seed=1)
    starts = [f.start_time for f in flows]
    assert starts == sorted(starts)
    assert 0.0 <= starts[0] and starts[-1] < DAY
    assert {f.user_ip for f in flows} == {n.ip for n in nodes}
    assert all(f.size_bytes >= 1.0 and f.duration_s >= 0.0 for f in flows)


def test_hourly_counts_follow_profile():
    profile = default_diurnal_profile()
    nodes = [NodeSpec(f'10.0.0.{i}') for i in range(1, 6)]
    clock_start = 17 * HOUR
    flows, _ = generate(nodes, profile, 2 * DAY, seed=11, clock_start_s=clock_start)
    clock_hours = ((np.array([f.start_time for f in flows]) + clock_start) % DAY // HOUR).astype(int)
    counts = np.bincount(clock_hours, minlength=24)
    expected = profile.value((np.arange(24) + 0.5) * HOUR)
    assert np.corrcoef(counts, expected)[0, 1] > 0.9


def test_anomaly_scales_mean_size():
    node = NodeSpec('10.0.0.7', peak_rate_fps=0.1, peak_mean_size_bytes=500000)
    anomaly = AnomalySpec('10.0.0.7', start_s=20000, duration_s=20000, mean_size_multiplier=1.3, id=1)
    flows, _ = generate([node], DiurnalProfile.flat(), 60000, anomalies=[anomaly], seed=5)
    inside = [f.size_bytes for f in flows if anomaly.start_s <= f.start_time < anomaly.end_s]
    outside = [f.size_bytes for f in flows if not anomaly.start_s <= f.start_time < anomaly.end_s]
    assert np.mean(inside) / 500000 == pytest.approx(1.3, abs=0.01)
    assert np.mean(outside) / 500000 == pytest.approx(1.0, abs=0.01)


def test_anomaly_mean_tracks_profile():
    profile = default_diurnal_profile()
    node = NodeSpec('10.0.0.7', peak_rate_fps=0.5)
    anomaly = AnomalySpec('10.0.0.7', start_s=0, duration_s=DAY)
    flows, _ = generate([node], profile, DAY, anomalies=[anomaly], seed=9, clock_start_s=0.0)
    times = np.array([f.start_time for f in flows])
    sizes = np.array([f.size_bytes for f in flows])
    ratio = sizes / (node.peak_mean_size_bytes * profile.value(times))
    assert ratio.mean() == pytest.approx(1.3, abs=0.01)


def test_generation_is_deterministic():
    nodes = [NodeSpec('10.0.0.1'), NodeSpec('10.0.0.2')]
    first = generate(nodes, default_diurnal_profile(), 20000, seed=42)
    second = generate(nodes, default_diurnal_profile(), 20000, seed=42)
    other = generate(nodes, default_diurnal_profile(), 20000, seed=43)
    assert first == second
    assert first[0] != other[0]


def test_ground_truth_ranges():
    anomaly = AnomalySpec('10.0.0.1', start_s=200, duration_s=100, id=4)
    _, truth = generate([NodeSpec('10.0.0.1')], DiurnalProfile.flat(), 1000, anomalies=[anomaly])
    spans = [(r.start_s, r.end_s, r.anomalous, r.anomaly_id) for r in truth.ranges]
    assert spans == [(0.0, 200.0, False, None), (200.0, 300.0, True, 4), (300.0, 1000.0, False, None)]


def test_ground_truth_round_trip():
    anomalies = (AnomalySpec('10.0.0.1', 100, 50, 1.3, id=0), AnomalySpec('10.0.0.2', 400, 25, 2.0, id=1))
    truth = GroundTruth(horizon_s=1000.0, anomalies=anomalies)
    assert GroundTruth.from_dict(truth.to_dict()) == truth


def test_invalid_node():
    with pytest.raises(ValueError):
        NodeSpec('10.0.0.300')
    with pytest.raises(ValueError):
        NodeSpec('10.0.0.1', peak_rate_fps=0.0)
