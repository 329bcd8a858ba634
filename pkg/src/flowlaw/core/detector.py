"""
Generalized Hoeffding tests for FlowLaw

Each window's empirical measure is compared against every PL of a family;
the smallest divergence is the test statistic and an alarm fires when it
reaches λ.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import AlphabetMismatch, ConfigError, EmptyFamily, EmptyReference
from .features import QuantizedFlow, symbols_of
from .flow_model import Window
from .measures import (
    DivergenceConfig,
    ModelBasedMeasure,
    ModelFreeMeasure,
    based_measure_from_symbols,
    free_measure_from_symbols,
)
from .pl_learning import PLFamily
from .pl_refinement import family_divergence_matrix

logger = logging.getLogger(__name__)

TIMELINE_COLUMNS = ['window_index', 'start_time', 'flow_count',
                    'div_free', 'argmin_free', 'alarm_free',
                    'div_based', 'argmin_based', 'alarm_based']


@dataclass(frozen=True)
class DetectionConfig:
    """Thresholds λ per test and the minimum flow count for a window to be tested"""

    lambda_free: float = 0.6
    lambda_based: float = 0.4
    min_flows_per_window: int = 10
    run_free: bool = True
    run_based: bool = True

    def __post_init__(self):
        if not self.lambda_free > 0 or not self.lambda_based > 0:
            raise ConfigError(f"Thresholds must be positive, got lambda_free={self.lambda_free}, "
                              f"lambda_based={self.lambda_based}")
        if self.min_flows_per_window < 0:
            raise ConfigError(f"min_flows_per_window must be >= 0, got {self.min_flows_per_window}")


@dataclass(frozen=True)
class WindowVerdict:
    """Outcome of both tests on one window; divergences are None on sparse windows"""

    index: int
    start_time: float
    flow_count: int
    div_free: Optional[float] = None
    argmin_free: Optional[int] = None
    alarm_free: bool = False
    div_based: Optional[float] = None
    argmin_based: Optional[int] = None
    alarm_based: bool = False
    sparse: bool = False

    @property
    def alarm(self) -> bool:
        return self.alarm_free or self.alarm_based


FamilyLike = Union[PLFamily, Sequence]


def _as_family(family: FamilyLike, kind: str) -> PLFamily:
    if isinstance(family, PLFamily):
        if family.kind != kind:
            raise ValueError(f"Expected a {kind} family, got {family.kind}")
        return family
    if not family:
        raise EmptyFamily(f"Generalized divergence over an empty {kind} family")
    return PLFamily(kind, tuple(family))


def _generalized(window, family: PLFamily, cfg: DivergenceConfig) -> Tuple[float, int]:
    if window.alphabet_size != family.alphabet_size:
        raise AlphabetMismatch(f"Window alphabet {window.alphabet_size} differs from "
                               f"family alphabet {family.alphabet_size}")
    row = family_divergence_matrix([window], family, cfg)[0]
    j = int(np.argmin(row))
    return float(row[j]), j


def generalized_divergence_free(window: ModelFreeMeasure, family: FamilyLike,
                                cfg: DivergenceConfig = DivergenceConfig()) -> Tuple[float, int]:
    """
    Minimum d_free of a window measure over a family

    Returns:
        (value, argmin PL index), lowest index on ties

    Raises:
        EmptyFamily: If the family has no PLs
    """
    return _generalized(window, _as_family(family, 'free'), cfg)


def generalized_divergence_based(window: ModelBasedMeasure, family: FamilyLike,
                                 cfg: DivergenceConfig = DivergenceConfig()) -> Tuple[float, int]:
    """Minimum d_based of a window measure over a family, as generalized_divergence_free"""
    return _generalized(window, _as_family(family, 'based'), cfg)


def window_measures(windows: Sequence[Window], alphabet_size: int, kind: str) -> List:
    """Empirical measure of each window's quantized flows"""
    build = free_measure_from_symbols if kind == 'free' else based_measure_from_symbols
    out = []
    for w in windows:
        symbols = symbols_of(w.flows)
        if symbols.size and (symbols.min() < 0 or symbols.max() >= alphabet_size):
            raise AlphabetMismatch(f"Window {w.index} holds symbols outside an alphabet of "
                                   f"size {alphabet_size}")
        out.append(build(symbols, alphabet_size))
    return out


def dense_windows(windows: Sequence[Window], min_flows: int) -> List[Window]:
    """Windows holding at least min_flows flows"""
    return [w for w in windows if w.flow_count >= min_flows]


def _test(windows: Sequence[Window], family: PLFamily, cfg: DivergenceConfig):
    measures = window_measures(windows, family.alphabet_size, family.kind)
    d = family_divergence_matrix(measures, family, cfg)
    argmin = np.argmin(d, axis=1)
    return d[np.arange(len(windows)), argmin], argmin


def detect(windows: Sequence[Window], families: Tuple[Optional[PLFamily], Optional[PLFamily]],
           cfg: DetectionConfig = DetectionConfig(),
           div_cfg: DivergenceConfig = DivergenceConfig()) -> List[WindowVerdict]:
    """
    Run the model-free and model-based tests on every window

    Windows with fewer than cfg.min_flows_per_window flows are marked sparse
    and raise no alarm. A test runs only when it is enabled in cfg and its
    family is given.

    Args:
        windows: Windows of quantized flows
        families: (model-free family, model-based family)
        cfg: Thresholds and sparse-window rule
        div_cfg: Divergence floor

    Returns:
        One verdict per window, in window order

    Raises:
        AlphabetMismatch: If the families disagree with each other or the windows
    """
    free_family, based_family = families
    run_free = cfg.run_free and free_family is not None
    run_based = cfg.run_based and based_family is not None
    if run_free and run_based and free_family.alphabet_size != based_family.alphabet_size:
        raise AlphabetMismatch(f"Model-free family alphabet {free_family.alphabet_size} differs "
                               f"from model-based family alphabet {based_family.alphabet_size}")

    tested = dense_windows(windows, max(cfg.min_flows_per_window, 1))
    sparse = len(windows) - len(tested)
    if sparse:
        logger.warning("%d of %d window(s) hold fewer than %d flows and are not tested",
                       sparse, len(windows), cfg.min_flows_per_window)

    results = {}
    if tested:
        if run_free:
            results['free'] = _test(tested, free_family, div_cfg)
        if run_based:
            results['based'] = _test(tested, based_family, div_cfg)
    position = {w.index: i for i, w in enumerate(tested)}

    verdicts = []
    for w in windows:
        i = position.get(w.index)
        if i is None:
            verdicts.append(WindowVerdict(index=w.index, start_time=w.start,
                                          flow_count=w.flow_count, sparse=True))
            continue
        fields = {}
        for kind, lam in (('free', cfg.lambda_free), ('based', cfg.lambda_based)):
            if kind in results:
                values, argmin = results[kind]
                value = float(values[i])
                fields[f'div_{kind}'] = value
                fields[f'argmin_{kind}'] = int(argmin[i])
                fields[f'alarm_{kind}'] = value >= lam
        verdicts.append(WindowVerdict(index=w.index, start_time=w.start,
                                      flow_count=w.flow_count, **fields))

    logger.info("Detection over %d window(s): %d model-free alarm(s), %d model-based alarm(s)",
                len(verdicts), sum(v.alarm_free for v in verdicts),
                sum(v.alarm_based for v in verdicts))
    return verdicts


def vanilla_family(reference: Sequence[QuantizedFlow],
                   alphabet_size: int) -> Tuple[PLFamily, PLFamily]:
    """
    Single-PL families fitted to all reference traffic at once

    Raises:
        EmptyReference: If reference is empty
    """
    if not reference:
        raise EmptyReference("Vanilla PL needs at least one reference flow")
    ordered = sorted(reference, key=lambda f: f.start_time)
    symbols = symbols_of(ordered)
    if symbols.min() < 0 or symbols.max() >= alphabet_size:
        raise AlphabetMismatch(f"Reference symbols fall outside an alphabet of size {alphabet_size}")
    based = based_measure_from_symbols(symbols, alphabet_size)
    if based.insufficient:
        logger.warning("Vanilla model-based PL rests on fewer than two flows")
    return (PLFamily('free', (free_measure_from_symbols(symbols, alphabet_size),)),
            PLFamily('based', (based,)))


def timeline_frame(verdicts: Sequence[WindowVerdict]) -> pd.DataFrame:
    """Verdicts as a timeline table; alarms as 0/1, absent values as NaN"""
    rows = [{
        'window_index': v.index, 'start_time': v.start_time, 'flow_count': v.flow_count,
        'div_free': v.div_free, 'argmin_free': v.argmin_free, 'alarm_free': int(v.alarm_free),
        'div_based': v.div_based, 'argmin_based': v.argmin_based,
        'alarm_based': int(v.alarm_based),
    } for v in verdicts]
    frame = pd.DataFrame(rows, columns=TIMELINE_COLUMNS)
    for col in ('argmin_free', 'argmin_based'):
        frame[col] = frame[col].astype('Int64')
    for col in ('div_free', 'div_based'):
        frame[col] = frame[col].astype(float)
    return frame
