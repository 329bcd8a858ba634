"""
Shared plumbing for FlowLaw commands
"""

import argparse
import logging
from typing import List, Tuple

from ..core.errors import AlphabetMismatch, ConfigError, InputFormatError
from ..core.features import FeatureModel, QuantizedFlow, quantize_flows
from ..core.flow_model import Flow, Window, aggregate_windows, compile_flows
from ..core.pl_learning import PLFamily
from ..utils.config import RunConfig
from ..utils.file_io import FileIO

logger = logging.getLogger(__name__)


class BaseCommand:
    """A subcommand: declares its options and runs against a RunConfig"""

    name = ''
    help = ''

    def add_arguments(self, parser: argparse.ArgumentParser):
        """Add subcommand-specific options"""

    def run(self, config: RunConfig, args: argparse.Namespace) -> int:
        raise NotImplementedError

    @staticmethod
    def load_flows(config: RunConfig, args: argparse.Namespace) -> List[Flow]:
        """Flows from the flow CSV, or compiled from the packet CSV with --input-format packets"""
        if getattr(args, 'input_format', 'flows') == 'packets':
            path = args.flows or config.paths.packets
            if not path:
                raise ConfigError("No packet file given (paths.packets or --flows)")
            packets = FileIO.read_packets(path)
            flows = compile_flows(packets, config.windowing.flow_gap_s)
            logger.info("Compiled %d packet(s) from %s into %d flow(s)",
                        len(packets), path, len(flows))
            return flows
        path = args.flows or config.paths.flows
        if not path:
            raise ConfigError("No flow file given (paths.flows or --flows)")
        return FileIO.read_flows(path)

    @staticmethod
    def windows_for(flows: List[Flow], quantized: List[QuantizedFlow],
                    config: RunConfig) -> Tuple[Tuple[float, float], List[Window]]:
        """Horizon bounds and the windows of quantized flows within them"""
        if not flows:
            raise InputFormatError("No flows to process")
        horizon = config.horizon.bounds(max(f.start_time for f in flows))
        return horizon, aggregate_windows(quantized, config.windowing, horizon)

    @staticmethod
    def quantize(flows: List[Flow], model: FeatureModel) -> List[QuantizedFlow]:
        return quantize_flows(flows, model.clusters, model.quantizer)

    @staticmethod
    def check_alphabet(model: FeatureModel, *families: PLFamily):
        total = model.alphabet.total
        for family in families:
            if family is not None and family.alphabet_size != total:
                raise AlphabetMismatch(f"Model alphabet has {total} symbols but the "
                                       f"{family.kind} family uses {family.alphabet_size}")

    @staticmethod
    def require_paths(config: RunConfig, *keys: str):
        missing = [k for k in keys if not getattr(config.paths, k)]
        if missing:
            raise ConfigError(f"Missing path(s) in configuration: {missing}")
