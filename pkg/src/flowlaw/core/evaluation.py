"""
Scoring a detection timeline against ground truth labels
"""

import logging
from typing import Any, Dict

import numpy as np
import pandas as pd

from .errors import InputFormatError
from .traffic_gen import GroundTruth

logger = logging.getLogger(__name__)

METHODS = ('free', 'based', 'both')


def alarm_column(timeline: pd.DataFrame, method: str) -> np.ndarray:
    """Alarms of one test, or of either test for method 'both'"""
    if method not in METHODS:
        raise ValueError(f"Method must be one of {METHODS}, got {method!r}")
    missing = [c for c in ('alarm_free', 'alarm_based') if c not in timeline.columns]
    if missing:
        raise InputFormatError(f"Timeline lacks column(s) {missing}")
    free = timeline['alarm_free'].fillna(0).astype(int).to_numpy() > 0
    based = timeline['alarm_based'].fillna(0).astype(int).to_numpy() > 0
    return {'free': free, 'based': based, 'both': free | based}[method]


def evaluate(timeline: pd.DataFrame, truth: GroundTruth, method: str = 'free',
             window_size_s: float = 2000.0, horizon_start_s: float = 0.0,
             clock_start_s: float = 61200.0) -> Dict[str, Any]:
    """
    Confusion counts, anomaly detections and false alarms by clock hour

    A window [start, start + window_size_s) is anomalous when it overlaps
    an anomaly interval; an anomaly is detected when any alarmed window
    overlaps it.

    Args:
        timeline: Detection timeline
        truth: Ground truth labels
        method: 'free', 'based' or 'both' (either test alarms)
        window_size_s: Window size w_s
        horizon_start_s: Trace time at which clock_start_s applies
        clock_start_s: Time of day at horizon_start_s

    Returns:
        JSON-ready metrics
    """
    alarms = alarm_column(timeline, method)
    starts = timeline['start_time'].to_numpy(dtype=float)
    ends = starts + window_size_s

    anomalous = np.zeros(len(timeline), dtype=bool)
    detected = []
    for a in truth.anomalies:
        overlap = (starts < a.end_s) & (ends > a.start_s)
        anomalous |= overlap
        if np.any(overlap & alarms):
            detected.append(a.id)

    tp = int(np.sum(alarms & anomalous))
    fp = int(np.sum(alarms & ~anomalous))
    tn = int(np.sum(~alarms & ~anomalous))
    fn = int(np.sum(~alarms & anomalous))
    normal = fp + tn

    midpoint_tod = np.mod(clock_start_s + (starts + window_size_s / 2.0 - horizon_start_s), 86400.0)
    hours = (midpoint_tod // 3600).astype(int)
    by_hour = {f"{h:02d}": int(np.sum(alarms & ~anomalous & (hours == h))) for h in range(24)}

    active = {}
    for kind in ('free', 'based'):
        col = f'argmin_{kind}'
        if col in timeline.columns:
            counts = timeline[col].dropna().astype(int).value_counts().sort_index()
            active[kind] = {str(k): int(v) for k, v in counts.items()}

    metrics = {
        'method': method,
        'windows': int(len(timeline)),
        'tp': tp, 'fp': fp, 'tn': tn, 'fn': fn,
        'anomalies': len(truth.anomalies),
        'detected': len(detected),
        'detected_ids': detected,
        'false_alarm_rate': fp / normal if normal else 0.0,
        'false_alarms_by_hour': by_hour,
        'active_pl_counts': active,
    }
    logger.info("Evaluation (%s): TP=%d FP=%d TN=%d FN=%d, %d/%d anomalies detected",
                method, tp, fp, tn, fn, len(detected), len(truth.anomalies))
    return metrics
