"""
detect: run the generalized Hoeffding tests window by window
"""

import argparse
import logging
from typing import Dict, Optional, Tuple

from ..core.detector import detect, timeline_frame
from ..core.errors import AlphabetMismatch, InputFormatError
from ..core.features import FeatureModel
from ..core.pl_learning import PLFamily
from ..utils.config import RunConfig
from ..utils.file_io import FileIO
from .base_command import BaseCommand

logger = logging.getLogger(__name__)


def load_families(data: Dict, vanilla: bool) -> Tuple[Optional[PLFamily], Optional[PLFamily]]:
    """(model-free, model-based) families from a PL-family document"""
    section = 'vanilla' if vanilla else 'families'
    try:
        entries = data[section]
        families = {k: PLFamily.from_dict(v) for k, v in entries.items()}
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, AlphabetMismatch):
            raise
        raise InputFormatError(f"PL-family file has no usable '{section}' section: {e}") from e
    return families.get('free'), families.get('based')


class DetectCommand(BaseCommand):
    name = 'detect'
    help = 'Score flows window by window against the learned PL families'

    def add_arguments(self, parser: argparse.ArgumentParser):
        parser.add_argument('--vanilla', action='store_true',
                            help='use the single PL fitted to all reference traffic')

    def run(self, config: RunConfig, args: argparse.Namespace) -> int:
        self.require_paths(config, 'model', 'pl_family', 'timeline')
        try:
            model = FeatureModel.from_dict(FileIO.read_json(config.paths.model))
        except (KeyError, TypeError) as e:
            raise InputFormatError(f"Malformed model file {config.paths.model}: {e}") from e
        free, based = load_families(FileIO.read_json(config.paths.pl_family), args.vanilla)
        self.check_alphabet(model, free, based)

        flows = self.load_flows(config, args)
        quantized = self.quantize(flows, model)
        _, windows = self.windows_for(flows, quantized, config)

        verdicts = detect(windows, (free, based), config.detection, config.divergence)
        FileIO.write_csv(config.paths.timeline, timeline_frame(verdicts))

        label = 'vanilla' if args.vanilla else 'robust'
        print(f"Detection ({label}) over {len(verdicts)} windows -> {config.paths.timeline}")
        if config.detection.run_free and free is not None:
            print(f"  model-free alarms: {sum(v.alarm_free for v in verdicts)} "
                  f"(lambda = {config.detection.lambda_free:g})")
        if config.detection.run_based and based is not None:
            print(f"  model-based alarms: {sum(v.alarm_based for v in verdicts)} "
                  f"(lambda = {config.detection.lambda_based:g})")
        print(f"  sparse windows: {sum(v.sparse for v in verdicts)}")
        return 0
