"""
Command Manager for FlowLaw
Handles creation of the command-line parser and dispatch to the subcommands
"""

import argparse
import logging
import sys
from typing import List, Optional

from ..core.errors import FlowLawError
from ..utils.config import load_config
from .detect_command import DetectCommand
from .estimate_command import EstimateCommand
from .evaluate_command import EvaluateCommand
from .generate_command import GenerateCommand


class CommandManager:
    """Manages the creation and organization of the subcommands"""

    def __init__(self):
        self.commands = {}
        self._init_commands()
        self.parser = self._build_parser()

    def _init_commands(self):
        """Initialize all subcommands"""
        for command in (GenerateCommand(), EstimateCommand(), DetectCommand(), EvaluateCommand()):
            self.commands[command.name] = command

    def _build_parser(self) -> argparse.ArgumentParser:
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument('--config', help='run configuration (JSON)')
        common.add_argument('--flows', help='flow or packet CSV, overriding paths in the config')
        common.add_argument('--input-format', choices=('flows', 'packets'), default='flows',
                            help='read the input CSV as flows or as packets')
        common.add_argument('--method', choices=('free', 'based', 'both'),
                            help='which test(s) to run, refine or evaluate')
        common.add_argument('--lambda-free', type=float, help='model-free threshold')
        common.add_argument('--lambda-based', type=float, help='model-based threshold')
        common.add_argument('--seed', type=int, help='random seed')
        common.add_argument('-v', '--verbose', action='count', default=0,
                            help='-v for INFO, -vv for DEBUG logging')

        parser = argparse.ArgumentParser(
            prog='flowlaw',
            description='Robust anomaly detection in flow traffic with families of probability laws',
        )
        sub = parser.add_subparsers(dest='command', required=True)
        for name, command in self.commands.items():
            p = sub.add_parser(name, parents=[common], help=command.help)
            command.add_arguments(p)
        return parser

    def get_command(self, name):
        """Get a specific command by name"""
        return self.commands.get(name)

    def run(self, argv: Optional[List[str]] = None) -> int:
        """
        Parse arguments and run one subcommand

        Returns:
            Process exit code: 0 on success, the error's exit code on a FlowLawError
        """
        args = self.parser.parse_args(argv)
        level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
        logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s', force=True)

        try:
            config = load_config(args.config).with_overrides(
                lambda_free=args.lambda_free, lambda_based=args.lambda_based,
                seed=args.seed, method=args.method,
            )
            return self.commands[args.command].run(config, args)
        except FlowLawError as e:
            print(f"flowlaw {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
            return e.exit_code
