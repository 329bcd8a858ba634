"""
FLOWLAW
Robust flow-traffic anomaly detection with families of probability laws

Version: 1.2.0
Date: 2026-10-16

Changelog:
- 1.0.0
    - Model-free and model-based generalized Hoeffding tests
    - Period estimation and candidate PL generation
    - Greedy and exhaustive set-cover refinement
- 1.1.0
    - Synthetic diurnal traffic generator with anomaly injection
    - Packet input compiled into flows
- 1.2.0
    - Vanilla family stored alongside the refined families
    - Evaluation breakdown by clock hour and active PL counts
"""

import sys

from src.flowlaw.commands.command_manager import CommandManager


def main(argv=None):
    """Main application entry point"""
    return CommandManager().run(argv)


if __name__ == '__main__':
    sys.exit(main())
