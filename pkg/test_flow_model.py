"""
Tests for packet-to-flow compilation and windowing
"""

import numpy as np
import pytest

from src.flowlaw.core.errors import ConfigError, UnsortedInput
from src.flowlaw.core.flow_model import (
    Flow,
    Packet,
    WindowingConfig,
    aggregate_windows,
    compile_flows,
    window_count,
)


def test_close_packets_merge_into_one_flow():
    """Test that a gap below the flow gap merges packets"""
    flows = compile_flows([Packet('10.0.0.1', 100, 0.0), Packet('10.0.0.1', 200, 1.0)], 10.0)
    assert len(flows) == 1
    assert flows[0] == Flow('10.0.0.1', 300.0, 1.0, 0.0)


def test_gap_at_or_above_flow_gap_splits():
    """Test that a gap of flow_gap_s or more starts a new flow"""
    flows = compile_flows([Packet('10.0.0.1', 100, 0.0), Packet('10.0.0.1', 200, 20.0)], 10.0)
    assert [f.size_bytes for f in flows] == [100.0, 200.0]
    assert [f.start_time for f in flows] == [0.0, 20.0]

    flows = compile_flows([Packet('10.0.0.1', 100, 0.0), Packet('10.0.0.1', 200, 10.0)], 10.0)
    assert len(flows) == 2


def test_interleaved_ips_form_one_flow_each():
    """Test six interleaved packets of two IPs"""
    packets = [Packet('10.0.0.1' if t % 2 == 0 else '10.0.0.2', 10 * (t + 1), float(t))
               for t in range(6)]
    flows = compile_flows(packets, 10.0)
    assert len(flows) == 2
    by_ip = {f.user_ip: f for f in flows}
    assert by_ip['10.0.0.1'].size_bytes == 10 + 30 + 50
    assert by_ip['10.0.0.2'].size_bytes == 20 + 40 + 60
    assert by_ip['10.0.0.1'].duration_s == 4.0
    assert by_ip['10.0.0.2'].start_time == 1.0


def test_unsorted_packets_are_rejected():
    """Test UnsortedInput on decreasing timestamps"""
    with pytest.raises(UnsortedInput):
        compile_flows([Packet('10.0.0.1', 1, 5.0), Packet('10.0.0.1', 1, 4.0)], 10.0)


def test_empty_packet_stream():
    assert compile_flows([], 10.0) == []


def test_bytes_are_conserved():
    """Test that flow sizes add up to the packet sizes"""
    rng = np.random.default_rng(3)
    times = np.sort(rng.uniform(0, 1000, 400))
    ips = rng.choice(['10.0.0.1', '10.0.0.2', '10.0.0.3'], size=400)
    sizes = rng.integers(40, 1500, size=400)
    packets = [Packet(str(ip), float(b), float(t)) for ip, b, t in zip(ips, sizes, times)]
    flows = compile_flows(packets, 5.0)
    assert sum(f.size_bytes for f in flows) == pytest.approx(float(sizes.sum()))
    starts = [f.start_time for f in flows]
    assert starts == sorted(starts)


def test_flow_gap_rule_is_local():
    """Test that traces separated by at least the flow gap compile independently"""
    first = [Packet('10.0.0.1', 100, 0.0), Packet('10.0.0.2', 50, 1.0), Packet('10.0.0.1', 100, 3.0)]
    second = [Packet('10.0.0.1', 70, 20.0), Packet('10.0.0.2', 80, 21.0)]
    assert compile_flows(first + second, 10.0) == compile_flows(first, 10.0) + compile_flows(second, 10.0)


def test_windows_partition_flows():
    """Test two flows falling in consecutive windows"""
    flows = [Flow('10.0.0.1', 1, 0, 100.0), Flow('10.0.0.1', 1, 0, 2100.0)]
    windows = aggregate_windows(flows, WindowingConfig(2000, 2000), (0.0, 4000.0))
    assert len(windows) == 2
    assert [f.start_time for f in windows[0].flows] == [100.0]
    assert [f.start_time for f in windows[1].flows] == [2100.0]
    assert windows[1].start == 2000.0 and windows[1].end == 4000.0


def test_overlapping_windows_share_flows():
    """Test a flow landing in two windows when the hop is below the window size"""
    flows = [Flow('10.0.0.1', 1, 0, 1500.0)]
    windows = aggregate_windows(flows, WindowingConfig(2000, 1000), (0.0, 3000.0))
    assert len(windows) == 2
    assert windows[0].flow_count == 1 and windows[1].flow_count == 1


def test_one_week_gives_302_windows():
    cfg = WindowingConfig(2000, 2000)
    assert window_count((0.0, 604800.0), cfg) == 302
    assert len(aggregate_windows([], cfg, (0.0, 604800.0))) == 302


def test_empty_windows_are_emitted():
    flows = [Flow('10.0.0.1', 1, 0, 100.0)]
    windows = aggregate_windows(flows, WindowingConfig(1000, 1000), (0.0, 3000.0))
    assert [w.empty for w in windows] == [False, True, True]


def test_each_flow_in_exactly_one_window_when_hop_equals_size():
    rng = np.random.default_rng(11)
    times = rng.uniform(0, 20000, 500)
    flows = [Flow('10.0.0.1', 1, 0, float(t)) for t in times]
    windows = aggregate_windows(flows, WindowingConfig(2000, 2000), (0.0, 20000.0))
    assert sum(w.flow_count for w in windows) == 500


def test_flows_outside_horizon_are_dropped():
    flows = [Flow('10.0.0.1', 1, 0, 50.0), Flow('10.0.0.1', 1, 0, 110.0), Flow('10.0.0.1', 1, 0, 5000.0)]
    windows = aggregate_windows(flows, WindowingConfig(2000, 2000), (100.0, 4100.0))
    assert sum(w.flow_count for w in windows) == 1


@pytest.mark.parametrize('make', [
    lambda: Flow('10.0.0.1', 1, 0, -5.0),
    lambda: Flow('10.0.0.1', -1, 0, 5.0),
    lambda: Flow('10.0.0.1', 1, -0.5, 5.0),
    lambda: Packet('10.0.0.1', 1, -1.0),
    lambda: Packet('10.0.0.300', 1, 1.0),
    lambda: Packet('not-an-ip', 1, 1.0),
])
def test_invalid_packets_and_flows(make):
    with pytest.raises(ValueError):
        make()


def test_invalid_windowing_config():
    with pytest.raises(ConfigError):
        WindowingConfig(window_size_s=0)
    with pytest.raises(ConfigError):
        aggregate_windows([], WindowingConfig(), (10.0, 10.0))
