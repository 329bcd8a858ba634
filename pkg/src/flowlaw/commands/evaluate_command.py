"""
evaluate: score a detection timeline against the ground truth
"""

import argparse

from ..core.detector import TIMELINE_COLUMNS
from ..core.errors import InputFormatError
from ..core.evaluation import evaluate
from ..core.traffic_gen import GroundTruth
from ..utils.config import RunConfig
from ..utils.file_io import FileIO
from .base_command import BaseCommand


class EvaluateCommand(BaseCommand):
    name = 'evaluate'
    help = 'Compare a detection timeline with the ground truth labels'

    def run(self, config: RunConfig, args: argparse.Namespace) -> int:
        self.require_paths(config, 'timeline', 'ground_truth', 'metrics')
        timeline = FileIO.read_csv(config.paths.timeline, TIMELINE_COLUMNS)
        try:
            truth = GroundTruth.from_dict(FileIO.read_json(config.paths.ground_truth))
        except (KeyError, TypeError, ValueError) as e:
            raise InputFormatError(f"Malformed ground truth {config.paths.ground_truth}: {e}") from e

        metrics = evaluate(timeline, truth, method=config.method,
                           window_size_s=config.windowing.window_size_s,
                           horizon_start_s=config.horizon.start_s,
                           clock_start_s=config.horizon.clock_start_s)
        FileIO.write_json(config.paths.metrics, metrics)

        print(f"Evaluation ({config.method}): TP={metrics['tp']} FP={metrics['fp']} "
              f"TN={metrics['tn']} FN={metrics['fn']}")
        print(f"  anomalies detected: {metrics['detected']} of {metrics['anomalies']}")
        print(f"  false-alarm rate: {metrics['false_alarm_rate']:.3f}")
        return 0
