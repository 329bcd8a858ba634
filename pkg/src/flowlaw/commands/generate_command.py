"""
generate: synthetic diurnal traffic with injected anomalies
"""

import argparse
import logging

from ..core.errors import ConfigError
from ..core.traffic_gen import generate
from ..utils.config import RunConfig
from ..utils.file_io import FileIO
from .base_command import BaseCommand

logger = logging.getLogger(__name__)


class GenerateCommand(BaseCommand):
    name = 'generate'
    help = 'Generate a labelled synthetic flow trace'

    def add_arguments(self, parser: argparse.ArgumentParser):
        parser.add_argument('--clean', action='store_true',
                            help='leave out the configured anomalies (reference traffic)')

    def run(self, config: RunConfig, args: argparse.Namespace) -> int:
        gen = config.generator
        if not gen.nodes:
            raise ConfigError("generator.nodes lists no nodes")
        if config.horizon.length_s is None:
            raise ConfigError("horizon.length is required to generate traffic")
        flows_path = args.flows or config.paths.flows
        if not flows_path or not config.paths.ground_truth:
            raise ConfigError("generate needs paths.flows and paths.ground_truth")

        anomalies = () if args.clean else gen.anomalies
        flows, truth = generate(gen.nodes, gen.profile, config.horizon.length_s,
                                anomalies, seed=config.seed,
                                clock_start_s=config.horizon.clock_start_s)
        if config.horizon.start_s:
            logger.warning("Generated traces start at t=0; horizon.start=%g s is ignored here",
                           config.horizon.start_s)
        FileIO.write_flows(flows_path, flows)
        FileIO.write_json(config.paths.ground_truth, truth.to_dict())

        print(f"Generated {len(flows)} flows from {len(gen.nodes)} node(s) "
              f"over {config.horizon.length_s:g} s -> {flows_path}")
        for a in anomalies:
            print(f"  anomaly {a.id}: {a.ip} x{a.mean_size_multiplier:g} "
                  f"[{a.start_s:g} s, {a.end_s:g} s)")
        return 0
