"""
Packets, flows and detection windows for FlowLaw
"""

import ipaddress
import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from .errors import ConfigError, UnsortedInput

logger = logging.getLogger(__name__)


def validate_ipv4(ip: str) -> str:
    """
    Check that a string is a dotted-quad IPv4 address

    Args:
        ip: Address text

    Returns:
        The normalized address

    Raises:
        ValueError: If the text is not an IPv4 address
    """
    return str(ipaddress.IPv4Address(ip.strip()))


@dataclass(frozen=True)
class Packet:
    """One captured packet on the monitored port"""

    user_ip: str
    size_bytes: float
    start_time: float

    def __post_init__(self):
        validate_ipv4(self.user_ip)
        if self.size_bytes < 0:
            raise ValueError(f"Negative packet size: {self.size_bytes}")
        if self.start_time < 0:
            raise ValueError(f"Negative packet start time: {self.start_time}")


@dataclass(frozen=True)
class Flow:
    """One compiled flow: user IP, total bytes, duration and transmission time"""

    user_ip: str
    size_bytes: float
    duration_s: float
    start_time: float

    def __post_init__(self):
        if self.size_bytes < 0:
            raise ValueError(f"Negative flow size: {self.size_bytes}")
        if self.duration_s < 0:
            raise ValueError(f"Negative flow duration: {self.duration_s}")
        if self.start_time < 0:
            raise ValueError(f"Negative flow start time: {self.start_time}")


@dataclass(frozen=True)
class WindowingConfig:
    """Window size w_s, hop h and flow gap δ_F, all in seconds"""

    window_size_s: float = 2000.0
    hop_s: float = 2000.0
    flow_gap_s: float = 10.0

    def __post_init__(self):
        for name in ('window_size_s', 'hop_s', 'flow_gap_s'):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class Window:
    """A detection window holding the flows whose start time lies in [start, end)"""

    index: int
    start: float
    end: float
    flows: Tuple = field(default_factory=tuple)

    @property
    def flow_count(self) -> int:
        return len(self.flows)

    @property
    def empty(self) -> bool:
        return not self.flows


def compile_flows(packets: Sequence[Packet], flow_gap_s: float) -> List[Flow]:
    """
    Compile a time-ordered packet stream into flows

    Consecutive packets of one IP whose inter-packet gap is below flow_gap_s
    belong to the same flow; a gap of flow_gap_s or more starts a new one.

    Args:
        packets: Packets sorted by start time, possibly interleaved across IPs
        flow_gap_s: The flow gap δ_F in seconds

    Returns:
        Flows sorted by start time

    Raises:
        UnsortedInput: If packet timestamps decrease
    """
    if not flow_gap_s > 0:
        raise ConfigError(f"flow_gap_s must be positive, got {flow_gap_s}")
    if not packets:
        return []

    frame = pd.DataFrame({
        'ip': [p.user_ip for p in packets],
        'size': [float(p.size_bytes) for p in packets],
        't': [float(p.start_time) for p in packets],
    })
    backwards = np.flatnonzero(np.diff(frame['t'].to_numpy()) < 0)
    if backwards.size:
        raise UnsortedInput(
            f"Packet timestamps decrease at row {int(backwards[0]) + 1}"
        )

    by_ip = frame.groupby('ip', sort=False)
    gap = by_ip['t'].diff()
    frame['flow_id'] = (gap.isna() | (gap >= flow_gap_s)).astype(np.int64)
    frame['flow_id'] = frame.groupby('ip', sort=False)['flow_id'].cumsum()

    # Groups keep first-appearance order, which is start-time order
    grouped = frame.groupby(['ip', 'flow_id'], sort=False).agg(
        start=('t', 'first'), end=('t', 'last'), size=('size', 'sum')
    )
    return [
        Flow(user_ip=ip, size_bytes=float(row.size),
             duration_s=float(row.end - row.start), start_time=float(row.start))
        for (ip, _), row in zip(grouped.index, grouped.itertuples(index=False))
    ]


def window_count(horizon: Tuple[float, float], cfg: WindowingConfig) -> int:
    """Number of complete windows that fit in the horizon"""
    t0, t1 = horizon
    span = t1 - t0
    if span < cfg.window_size_s:
        return 0
    return int(np.floor((span - cfg.window_size_s) / cfg.hop_s + 1e-9)) + 1


def aggregate_windows(flows: Sequence, cfg: WindowingConfig,
                      horizon: Tuple[float, float]) -> List[Window]:
    """
    Aggregate flows into windows by their transmission time

    Window k starts at t0 + k·h and holds every flow with
    start <= flow.start_time < start + w_s. Overlapping windows (h < w_s)
    share flows. Works for raw and quantized flows alike.

    Args:
        flows: Flows (or quantized flows) with a start_time attribute
        cfg: Windowing configuration
        horizon: (t0, t1) with t1 > t0

    Returns:
        The windows, empty ones included
    """
    t0, t1 = horizon
    if not t1 > t0:
        raise ConfigError(f"Horizon end {t1} must exceed its start {t0}")

    times = np.fromiter((f.start_time for f in flows), dtype=float, count=len(flows))
    order = np.argsort(times, kind='stable')
    times = times[order]
    ordered = [flows[i] for i in order]

    n_windows = window_count(horizon, cfg)
    covered_end = t0 + (n_windows - 1) * cfg.hop_s + cfg.window_size_s if n_windows else t0
    dropped = int(np.sum((times < t0) | (times >= covered_end)))
    if dropped:
        logger.warning("%d flow(s) fall outside the windowed horizon [%g, %g) and were dropped",
                       dropped, t0, covered_end)

    windows = []
    empty = 0
    for k in range(n_windows):
        start = t0 + k * cfg.hop_s
        end = start + cfg.window_size_s
        lo = int(np.searchsorted(times, start, side='left'))
        hi = int(np.searchsorted(times, end, side='left'))
        window = Window(index=k, start=start, end=end, flows=tuple(ordered[lo:hi]))
        empty += window.empty
        windows.append(window)
    if empty:
        logger.info("%d of %d windows are empty", empty, n_windows)
    return windows
