"""
Synthetic diurnal flow traffic for FlowLaw

Each node emits flows as an inhomogeneous Poisson process with rate Λ·p(t),
drawn by thinning a homogeneous process. Flow sizes are Gaussian with mean
M_p·p(t), scaled during anomalies that target the node.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .flow_model import Flow, validate_ipv4

logger = logging.getLogger(__name__)

# Hourly levels from midnight: trough at 04:00, peak at 20:00
DEFAULT_HOURLY_LEVELS = (
    0.45, 0.33, 0.25, 0.21, 0.20, 0.21, 0.24, 0.30,
    0.36, 0.60, 0.80, 0.84, 0.86, 0.87, 0.88, 0.89,
    0.91, 0.93, 0.96, 0.98, 1.00, 0.95, 0.82, 0.58,
)


@dataclass(frozen=True)
class DiurnalProfile:
    """
    Periodic activity profile p(t) in (0, 1]

    samples are (phase, level) pairs with phase in [0, 1) of the period;
    p(t) interpolates them linearly and wraps around.
    """

    samples: Tuple[Tuple[float, float], ...]
    period_s: float = 86400.0

    def __post_init__(self):
        if not self.period_s > 0:
            raise ValueError(f"Profile period must be positive, got {self.period_s}")
        if not self.samples:
            raise ValueError("Profile needs at least one sample")
        phases = np.array([s[0] for s in self.samples], dtype=float)
        levels = np.array([s[1] for s in self.samples], dtype=float)
        if np.any(phases < 0) or np.any(phases >= 1) or np.any(np.diff(phases) <= 0):
            raise ValueError("Profile phases must be strictly increasing within [0, 1)")
        if np.any(levels <= 0) or np.any(levels > 1):
            raise ValueError("Profile levels must lie in (0, 1]")
        if not np.isclose(levels.max(), 1.0):
            raise ValueError(f"Profile must be normalized to a peak of 1, got {levels.max()}")

    @classmethod
    def flat(cls, period_s: float = 86400.0) -> 'DiurnalProfile':
        """Constant p(t) = 1"""
        return cls(samples=((0.0, 1.0),), period_s=period_s)

    @classmethod
    def plateaus(cls, steps: Sequence[Tuple[float, float]], ramp_s: float = 1.0,
                 period_s: float = 86400.0) -> 'DiurnalProfile':
        """
        Piecewise-constant p(t) with short linear ramps between levels

        Args:
            steps: (clock start in seconds, level) pairs; each level holds
                until the next start, the last one wrapping past midnight
            ramp_s: Length of the ramp that ends at each start
            period_s: Period of the profile

        Returns:
            The profile
        """
        ordered = sorted((float(t) % period_s, float(level)) for t, level in steps)
        if not ordered:
            raise ValueError("A plateau profile needs at least one step")
        starts = [t for t, _ in ordered]
        ends = starts[1:] + [starts[0] + period_s]
        if any(end - start <= ramp_s for start, end in zip(starts, ends)):
            raise ValueError(f"Every plateau must outlast the {ramp_s} s ramp")
        points = []
        for (start, level), end in zip(ordered, ends):
            points.append((start, level))
            points.append(((end - ramp_s) % period_s, level))
        points.sort()
        return cls(samples=tuple((t / period_s, level) for t, level in points), period_s=period_s)

    def value(self, t) -> np.ndarray:
        """p(t) for clock times t in seconds"""
        phase = np.mod(np.asarray(t, dtype=float), self.period_s) / self.period_s
        phases = np.array([s[0] for s in self.samples], dtype=float)
        levels = np.array([s[1] for s in self.samples], dtype=float)
        if levels.size == 1:
            return np.full(phase.shape, levels[0])
        return np.interp(phase, phases, levels, period=1.0)

    def to_dict(self) -> Dict:
        return {'period_s': self.period_s, 'samples': [list(s) for s in self.samples]}

    @classmethod
    def from_dict(cls, data: Dict) -> 'DiurnalProfile':
        return cls(samples=tuple((float(p), float(v)) for p, v in data['samples']),
                   period_s=float(data.get('period_s', 86400.0)))


def default_diurnal_profile() -> DiurnalProfile:
    """24 hourly samples, trough 0.2 at 04:00 and peak 1.0 at 20:00"""
    return DiurnalProfile(samples=tuple((h / 24.0, level)
                                        for h, level in enumerate(DEFAULT_HOURLY_LEVELS)))


@dataclass(frozen=True)
class NodeSpec:
    """One user node: peak rate Λ, peak mean size M_p, size variance σ² and mean duration"""

    ip: str
    peak_rate_fps: float = 0.1
    peak_mean_size_bytes: float = 500000.0
    size_variance: float = 1.5625e8
    mean_duration_s: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'ip', validate_ipv4(self.ip))
        for name in ('peak_rate_fps', 'peak_mean_size_bytes', 'size_variance', 'mean_duration_s'):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive for node {self.ip}")


@dataclass(frozen=True)
class AnomalySpec:
    """Mean flow size of one node multiplied over [start_s, start_s + duration_s)"""

    ip: str
    start_s: float
    duration_s: float
    mean_size_multiplier: float = 1.3
    id: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'ip', validate_ipv4(self.ip))
        if not self.duration_s > 0:
            raise ValueError(f"Anomaly duration must be positive, got {self.duration_s}")
        if not self.mean_size_multiplier > 0:
            raise ValueError(f"Size multiplier must be positive, got {self.mean_size_multiplier}")

    @property
    def end_s(self) -> float:
        return self.start_s + self.duration_s

    def to_dict(self) -> Dict:
        return {'id': self.id, 'ip': self.ip, 'start_s': self.start_s, 'end_s': self.end_s,
                'mean_size_multiplier': self.mean_size_multiplier}


@dataclass(frozen=True)
class LabelRange:
    start_s: float
    end_s: float
    anomalous: bool
    anomaly_id: Optional[int] = None

    def to_dict(self) -> Dict:
        return {'start_s': self.start_s, 'end_s': self.end_s, 'anomalous': self.anomalous,
                'anomaly_id': self.anomaly_id}


@dataclass(frozen=True)
class GroundTruth:
    """Anomaly intervals and the normal/anomalous partition of the horizon"""

    horizon_s: float
    anomalies: Tuple[AnomalySpec, ...] = ()
    ranges: Tuple[LabelRange, ...] = field(default=())

    def __post_init__(self):
        if not self.ranges:
            object.__setattr__(self, 'ranges', _label_ranges(self.horizon_s, self.anomalies))

    def to_dict(self) -> Dict:
        return {'horizon_s': self.horizon_s,
                'anomalies': [a.to_dict() for a in self.anomalies],
                'ranges': [r.to_dict() for r in self.ranges]}

    @classmethod
    def from_dict(cls, data: Dict) -> 'GroundTruth':
        anomalies = tuple(
            AnomalySpec(ip=a['ip'], start_s=float(a['start_s']),
                        duration_s=float(a['end_s']) - float(a['start_s']),
                        mean_size_multiplier=float(a.get('mean_size_multiplier', 1.0)),
                        id=int(a.get('id', i)))
            for i, a in enumerate(data.get('anomalies', []))
        )
        ranges = tuple(
            LabelRange(start_s=float(r['start_s']), end_s=float(r['end_s']),
                       anomalous=bool(r['anomalous']), anomaly_id=r.get('anomaly_id'))
            for r in data.get('ranges', [])
        )
        return cls(horizon_s=float(data['horizon_s']), anomalies=anomalies, ranges=ranges)


def _label_ranges(horizon_s: float, anomalies: Sequence[AnomalySpec]) -> Tuple[LabelRange, ...]:
    cuts = {0.0, float(horizon_s)}
    for a in anomalies:
        cuts.update(min(max(t, 0.0), horizon_s) for t in (a.start_s, a.end_s))
    edges = sorted(cuts)
    ranges = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        hit = next((a for a in anomalies if a.start_s <= lo and hi <= a.end_s), None)
        ranges.append(LabelRange(start_s=lo, end_s=hi, anomalous=hit is not None,
                                 anomaly_id=None if hit is None else hit.id))
    return tuple(ranges)


def _node_flows(node: NodeSpec, profile: DiurnalProfile, horizon_s: float,
                anomalies: Sequence[AnomalySpec], clock_start_s: float,
                rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Thinning: homogeneous arrivals at the peak rate, kept with probability p(t)
    n = rng.poisson(node.peak_rate_fps * horizon_s)
    times = np.sort(rng.uniform(0.0, horizon_s, n))
    level = profile.value(clock_start_s + times)
    keep = rng.uniform(size=n) < level
    times, level = times[keep], level[keep]

    multiplier = np.ones(times.size)
    for a in anomalies:
        if a.ip == node.ip:
            multiplier[(times >= a.start_s) & (times < a.end_s)] *= a.mean_size_multiplier

    mean = node.peak_mean_size_bytes * level * multiplier
    sizes = np.maximum(rng.normal(mean, np.sqrt(node.size_variance)), 1.0)
    durations = rng.exponential(node.mean_duration_s, size=times.size)
    return times, sizes, durations


def generate(nodes: Sequence[NodeSpec], profile: DiurnalProfile, horizon_s: float,
             anomalies: Sequence[AnomalySpec] = (), seed: int = 0,
             clock_start_s: float = 61200.0) -> Tuple[List[Flow], GroundTruth]:
    """
    Generate labelled flow traffic over [0, horizon_s)

    Args:
        nodes: User nodes
        profile: Activity profile, evaluated at clock time clock_start_s + t
        horizon_s: Length of the trace in seconds
        anomalies: Size anomalies to inject
        seed: Root seed; node i draws from the i-th spawned child
        clock_start_s: Time of day at t = 0

    Returns:
        Flows sorted by start time, and the ground truth labels
    """
    if not horizon_s > 0:
        raise ValueError(f"Horizon must be positive, got {horizon_s}")
    known = {n.ip for n in nodes}
    for a in anomalies:
        if a.ip not in known:
            logger.warning("Anomaly %d targets %s, which is not a generated node", a.id, a.ip)

    children = np.random.SeedSequence(seed).spawn(len(nodes))
    parts = []
    for node, child in zip(nodes, children):
        times, sizes, durations = _node_flows(node, profile, horizon_s, anomalies,
                                              clock_start_s, np.random.default_rng(child))
        parts.append((node.ip, times, sizes, durations))
        logger.debug("Node %s: %d flows", node.ip, times.size)

    ips = np.concatenate([np.full(p[1].size, i, dtype=np.int64) for i, p in enumerate(parts)]) \
        if parts else np.zeros(0, dtype=np.int64)
    times = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0)
    sizes = np.concatenate([p[2] for p in parts]) if parts else np.zeros(0)
    durations = np.concatenate([p[3] for p in parts]) if parts else np.zeros(0)
    order = np.argsort(times, kind='stable')

    flows = [Flow(user_ip=parts[ips[k]][0], size_bytes=float(sizes[k]),
                  duration_s=float(durations[k]), start_time=float(times[k]))
             for k in order]
    logger.info("Generated %d flows from %d node(s) over %g s", len(flows), len(nodes), horizon_s)
    return flows, GroundTruth(horizon_s=float(horizon_s), anomalies=tuple(anomalies))
