"""
Period estimation and candidate PL generation for FlowLaw

Reference traffic is split into channels (one per feature level), the
interval histogram of each channel gives a change timescale t_d and a period
t_p, and every period is cut into segments of length t_d whose pooled flows
become candidate probability laws.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import AlphabetMismatch, ConfigError, EmptyFamily, NoPeriodAvailable
from .features import QuantizedFlow, SymbolAlphabet, symbols_of
from .measures import (
    ModelBasedMeasure,
    ModelFreeMeasure,
    based_measure_from_symbols,
    free_measure_from_symbols,
)

logger = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400.0
KINDS = ('free', 'based')

Measure = Union[ModelFreeMeasure, ModelBasedMeasure]


@dataclass(frozen=True, eq=False)
class Channel:
    """Start times of the flows whose feature `feature` sits at level `level`"""

    feature: int
    level: int
    times: np.ndarray

    def __post_init__(self):
        if self.feature not in (1, 2, 3, 4):
            raise ValueError(f"Feature must be 1..4, got {self.feature}")


@dataclass(frozen=True)
class PeriodEstimate:
    """Change timescale t_d and period t_p in seconds; None means absent"""

    t_d: Optional[float] = None
    t_p: Optional[float] = None

    def __post_init__(self):
        if self.t_d is not None and self.t_p is not None and not self.t_p > self.t_d:
            raise ValueError(f"Period {self.t_p} must exceed change timescale {self.t_d}")

    @property
    def periodic(self) -> bool:
        return self.t_d is not None and self.t_p is not None

    def to_dict(self) -> Dict:
        return {'t_d': self.t_d, 't_p': self.t_p}


@dataclass(frozen=True)
class HistogramConfig:
    """Interval histogram settings for period estimation"""

    bin_width_s: float = 600.0
    freq_threshold: float = 0.05
    peak_min_prominence: float = 0.02

    def __post_init__(self):
        if not self.bin_width_s > 0:
            raise ConfigError(f"bin_width_s must be positive, got {self.bin_width_s}")
        for name in ('freq_threshold', 'peak_min_prominence'):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ConfigError(f"{name} must lie in (0, 1), got {value}")


@dataclass(frozen=True)
class PLProvenance:
    """Where a candidate PL came from: its (t_d, t_p) pair and segment"""

    source: str
    t_d: float
    t_p: float
    segment: int
    phase_start_s: float
    phase_end_s: float
    clock_start_s: float
    clock_end_s: float

    @property
    def key(self) -> Tuple:
        return (self.source, self.t_d, self.t_p, self.segment)

    @property
    def time_of_day(self) -> str:
        return f"{_hhmm(self.clock_start_s)}-{_hhmm(self.clock_end_s)}"

    def to_dict(self) -> Dict:
        return {
            'source': self.source, 't_d': self.t_d, 't_p': self.t_p, 'segment': self.segment,
            'phase_start_s': self.phase_start_s, 'phase_end_s': self.phase_end_s,
            'clock_start_s': self.clock_start_s, 'clock_end_s': self.clock_end_s,
            'time_of_day': self.time_of_day,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'PLProvenance':
        return cls(source=str(data['source']), t_d=float(data['t_d']), t_p=float(data['t_p']),
                   segment=int(data['segment']),
                   phase_start_s=float(data['phase_start_s']),
                   phase_end_s=float(data['phase_end_s']),
                   clock_start_s=float(data['clock_start_s']),
                   clock_end_s=float(data['clock_end_s']))


def _hhmm(seconds: float) -> str:
    minutes = int(round(seconds / 60.0)) % (24 * 60)
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def _clock_arc(clock_start_s: float, t_p: float, phase_start_s: float, phase_end_s: float,
               span: float) -> Tuple[float, float]:
    """
    Time-of-day arc covered by one segment over every period in the horizon

    Each period m contributes the clock interval starting at
    clock_start_s + m·t_p + phase_start_s. The arc is the complement of the
    largest uncovered gap; equal ends mean the whole day is covered.
    """
    length = phase_end_s - phase_start_s
    offsets = np.arange(int(np.ceil(span / t_p))) * t_p + phase_start_s
    offsets = offsets[offsets < span]
    starts = np.sort(np.mod(clock_start_s + offsets, SECONDS_PER_DAY))
    if length >= SECONDS_PER_DAY:
        return float(starts[0]), float(starts[0])
    gaps = np.diff(np.append(starts, starts[0] + SECONDS_PER_DAY)) - length
    widest = int(np.argmax(gaps))
    if gaps[widest] <= 0:
        return float(starts[0]), float(starts[0])
    arc_start = starts[(widest + 1) % starts.size]
    arc_end = (starts[widest] + length) % SECONDS_PER_DAY
    return float(arc_start), float(arc_end)


@dataclass(frozen=True, eq=False)
class PLFamily:
    """
    A finite family of probability laws of one kind

    `provenance` entries are None for PLs that were not cut from a
    period segment (the vanilla PL). `c_v` is filled in by refinement.
    """

    kind: str
    pls: Tuple[Measure, ...]
    provenance: Tuple[Optional[PLProvenance], ...] = field(default=())
    c_v: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"PL family kind must be one of {KINDS}, got {self.kind!r}")
        if not self.pls:
            raise EmptyFamily(f"A {self.kind} PL family needs at least one PL")
        expected = ModelFreeMeasure if self.kind == 'free' else ModelBasedMeasure
        if not all(isinstance(p, expected) for p in self.pls):
            raise TypeError(f"All PLs of a {self.kind} family must be {expected.__name__}")
        sizes = {p.alphabet_size for p in self.pls}
        if len(sizes) != 1:
            raise AlphabetMismatch(f"PLs of one family use different alphabets: {sorted(sizes)}")
        if not self.provenance:
            object.__setattr__(self, 'provenance', (None,) * len(self.pls))
        if len(self.provenance) != len(self.pls):
            raise ValueError("Provenance must have one entry per PL")
        if self.c_v is not None and len(self.c_v) != len(self.pls):
            raise ValueError("c_v must have one entry per PL")

    def __len__(self) -> int:
        return len(self.pls)

    @property
    def alphabet_size(self) -> int:
        return self.pls[0].alphabet_size

    def subset(self, indices: Sequence[int], c_v: Optional[Sequence[float]] = None) -> 'PLFamily':
        """Family restricted to `indices`, optionally stamped with their c_v"""
        idx = list(indices)
        return PLFamily(kind=self.kind,
                        pls=tuple(self.pls[i] for i in idx),
                        provenance=tuple(self.provenance[i] for i in idx),
                        c_v=None if c_v is None else tuple(float(c_v[i]) for i in idx))

    def to_dict(self) -> Dict:
        pls = []
        for i, pl in enumerate(self.pls):
            entry = pl.to_dict()
            prov = self.provenance[i]
            entry['provenance'] = None if prov is None else prov.to_dict()
            entry['c_v'] = None if self.c_v is None else self.c_v[i]
            pls.append(entry)
        return {'kind': self.kind, 'alphabet_size': self.alphabet_size, 'pls': pls}

    @classmethod
    def from_dict(cls, data: Dict) -> 'PLFamily':
        kind = data['kind']
        measure_cls = ModelFreeMeasure if kind == 'free' else ModelBasedMeasure
        entries = data['pls']
        c_v = [e.get('c_v') for e in entries]
        return cls(kind=kind,
                   pls=tuple(measure_cls.from_dict(e) for e in entries),
                   provenance=tuple(None if e.get('provenance') is None
                                    else PLProvenance.from_dict(e['provenance'])
                                    for e in entries),
                   c_v=None if any(v is None for v in c_v) else tuple(float(v) for v in c_v))


def extract_channels(flows: Sequence[QuantizedFlow], alphabet: SymbolAlphabet) -> List[Channel]:
    """
    Split quantized flows into channels a–b

    Every flow contributes its start time to exactly four channels, one per
    feature. Channels without flows are not emitted.

    Args:
        flows: Quantized flows
        alphabet: Alphabet used to decode symbols into feature levels

    Returns:
        Channels ordered by (feature, level), each with sorted times
    """
    if not flows:
        return []
    times = np.fromiter((f.start_time for f in flows), dtype=float, count=len(flows))
    order = np.argsort(times, kind='stable')
    times = times[order]
    levels = alphabet.decode(symbols_of(flows)[order])

    channels = []
    for a in range(4):
        for b in np.unique(levels[a]):
            channels.append(Channel(feature=a + 1, level=int(b), times=times[levels[a] == b]))
    return channels


def estimate_channel(ch: Channel, cfg: HistogramConfig = HistogramConfig()) -> PeriodEstimate:
    """
    Estimate (t_d, t_p) from the interval histogram of one channel

    t_d is the right edge of the first bin whose share of intervals falls
    below cfg.freq_threshold. Beyond t_d each bin is weighted by the share of
    the channel's observed span its intervals take up; bins that reach
    cfg.peak_min_prominence and are local maxima count as peaks, and t_p is
    twice the mean of their centers.

    Args:
        ch: Channel with sorted start times
        cfg: Histogram settings

    Returns:
        The estimate; t_p is absent when no peak stands out
    """
    times = np.asarray(ch.times, dtype=float)
    if times.size < 2:
        return PeriodEstimate()

    intervals = np.diff(times)
    w = cfg.bin_width_s
    n_bins = int(np.floor(intervals.max() / w)) + 2
    idx = np.minimum(np.floor(intervals / w).astype(np.int64), n_bins - 1)

    freq = np.bincount(idx, minlength=n_bins) / intervals.size
    # The last bin is always empty, so a sub-threshold bin exists
    first_rare = int(np.flatnonzero(freq < cfg.freq_threshold)[0])
    t_d = (first_rare + 1) * w

    span = float(intervals.sum())
    if span <= 0:
        return PeriodEstimate(t_d=t_d)
    mass = np.bincount(idx, weights=intervals, minlength=n_bins) / span
    mass[:first_rare + 1] = 0.0

    padded = np.concatenate(([0.0], mass, [0.0]))
    center = padded[1:-1]
    is_peak = ((center >= cfg.peak_min_prominence)
               & (center > padded[:-2])
               & (center >= padded[2:]))
    peaks = np.flatnonzero(is_peak)
    logger.debug("Channel %d-%d: t_d=%g s, %d peak bin(s) %s",
                 ch.feature, ch.level, t_d, peaks.size, peaks.tolist())
    if not peaks.size:
        return PeriodEstimate(t_d=t_d)
    t_p = 2.0 * float(np.mean((peaks + 0.5) * w))
    return PeriodEstimate(t_d=t_d, t_p=t_p)


def estimate_feature(estimates: Sequence[PeriodEstimate]) -> PeriodEstimate:
    """
    Combine channel estimates of one feature by averaging present values

    Returns:
        Mean t_d and mean t_p; t_p is absent (non-periodic feature) when no
        channel reports one
    """
    if not estimates:
        raise ValueError("estimate_feature needs at least one channel estimate")
    t_ds = [e.t_d for e in estimates if e.t_d is not None]
    t_ps = [e.t_p for e in estimates if e.t_p is not None]
    t_d = float(np.mean(t_ds)) if t_ds else None
    t_p = float(np.mean(t_ps)) if t_ps else None
    if t_d is not None and t_p is not None and t_p <= t_d:
        logger.warning("Averaged period %g s does not exceed t_d %g s; treating feature as "
                       "non-periodic", t_p, t_d)
        t_p = None
    return PeriodEstimate(t_d=t_d, t_p=t_p)


@dataclass(frozen=True)
class PeriodReport:
    """Channel-level and feature-level period estimates"""

    channels: Tuple[Tuple[int, int, PeriodEstimate], ...]
    features: Dict[int, PeriodEstimate]

    def to_dict(self) -> Dict:
        return {
            'channels': [{'feature': a, 'level': b, **e.to_dict()} for a, b, e in self.channels],
            'features': {str(a): e.to_dict() for a, e in sorted(self.features.items())},
        }


def estimate_periods(flows: Sequence[QuantizedFlow], alphabet: SymbolAlphabet,
                     cfg: HistogramConfig = HistogramConfig()) -> PeriodReport:
    """Run channel extraction, channel estimation and per-feature averaging"""
    per_feature: Dict[int, List[PeriodEstimate]] = {a: [] for a in (1, 2, 3, 4)}
    rows = []
    for ch in extract_channels(flows, alphabet):
        est = estimate_channel(ch, cfg)
        per_feature[ch.feature].append(est)
        rows.append((ch.feature, ch.level, est))
    features = {a: estimate_feature(ests) if ests else PeriodEstimate()
                for a, ests in per_feature.items()}
    for a, est in features.items():
        logger.info("Feature %d: t_d=%s s, t_p=%s s", a, est.t_d, est.t_p)
    return PeriodReport(channels=tuple(rows), features=features)


def _candidate_pairs(feature_estimates: Dict[int, PeriodEstimate],
                     priors: Sequence[Tuple[float, float]]) -> List[Tuple[str, float, float]]:
    pairs = [(f"feature-{a}", est.t_d, est.t_p)
             for a, est in sorted(feature_estimates.items()) if est.periodic]
    pairs += [('prior', float(t_d), float(t_p)) for t_d, t_p in priors]
    return pairs


def generate_candidates(flows: Sequence[QuantizedFlow], horizon: Tuple[float, float],
                        feature_estimates: Dict[int, PeriodEstimate],
                        alphabet_size: int,
                        priors: Sequence[Tuple[float, float]] = (),
                        clock_start_s: float = 61200.0) -> Tuple[PLFamily, PLFamily]:
    """
    Cut reference traffic into period segments and build candidate PLs

    For every (t_d, t_p) pair each period, measured from the horizon start,
    is split into ⌊t_p/t_d⌋ segments of length t_d (the remainder of a period
    joins the last segment). Flows of matching segments are pooled across
    periods, and each pooled segment yields one model-free and one
    model-based PL.

    Args:
        flows: Quantized reference flows
        horizon: Reference horizon (t0, t1)
        feature_estimates: Per-feature (t_d, t_p) estimates
        alphabet_size: |Σ|
        priors: Extra (t_d, t_p) pairs from prior knowledge
        clock_start_s: Time of day at t0; provenance labels give the clock
            arc each segment covers across all pooled periods

    Returns:
        (model-free family, model-based family)

    Raises:
        NoPeriodAvailable: If no (t_d, t_p) pair produces a PL
    """
    pairs = _candidate_pairs(feature_estimates, priors)
    if not pairs:
        raise NoPeriodAvailable("No feature is periodic and no prior (t_d, t_p) was given")

    t0, t1 = horizon
    span = t1 - t0
    ordered = sorted(flows, key=lambda f: f.start_time)
    symbols = symbols_of(ordered)
    phase_all = np.fromiter((f.start_time for f in ordered), dtype=float,
                            count=len(ordered)) - t0

    free_pls, free_prov, based_pls, based_prov = [], [], [], []
    seen = set()
    for source, t_d, t_p in pairs:
        n_seg = int(np.floor(t_p / t_d)) if t_d > 0 else 0
        if t_p > span or n_seg == 0:
            logger.warning("Skipping (t_d=%g s, t_p=%g s) from %s: needs t_p <= %g s and t_p >= t_d",
                           t_d, t_p, source, span)
            continue
        phase = np.mod(phase_all, t_p)
        seg_of = np.minimum(np.floor(phase / t_d).astype(np.int64), n_seg - 1)
        for s in range(n_seg):
            phase_start = s * t_d
            phase_end = t_p if s == n_seg - 1 else (s + 1) * t_d
            arc_start, arc_end = _clock_arc(clock_start_s, t_p, phase_start, phase_end, span)
            prov = PLProvenance(
                source=source, t_d=t_d, t_p=t_p, segment=s,
                phase_start_s=phase_start, phase_end_s=phase_end,
                clock_start_s=arc_start, clock_end_s=arc_end,
            )
            if prov.key in seen:
                continue
            seen.add(prov.key)
            pooled = symbols[seg_of == s]
            if not pooled.size:
                logger.warning("Segment %d of (t_d=%g s, t_p=%g s) from %s holds no flows; skipped",
                               s, t_d, t_p, source)
                continue
            free_pls.append(free_measure_from_symbols(pooled, alphabet_size))
            free_prov.append(prov)
            based = based_measure_from_symbols(pooled, alphabet_size)
            if based.insufficient:
                logger.warning("Segment %d of (t_d=%g s, t_p=%g s) from %s has a single flow; "
                               "no model-based PL", s, t_d, t_p, source)
                continue
            based_pls.append(based)
            based_prov.append(prov)

    if not free_pls or not based_pls:
        raise NoPeriodAvailable("No (t_d, t_p) pair produced a candidate PL for both kinds")
    logger.info("Generated %d model-free and %d model-based candidate PLs from %d pair(s)",
                len(free_pls), len(based_pls), len(pairs))
    return (PLFamily('free', tuple(free_pls), tuple(free_prov)),
            PLFamily('based', tuple(based_pls), tuple(based_prov)))
