"""
dicke-sense - command-line front end

Single-spin detection with Dicke-state probes: field maps, optimum recovery,
detection-time maps, oracle comparisons, pulse-sequence simulation and the
verifier suites. Every subcommand writes CSV tables with '#' provenance
headers into a fresh run directory.

Usage:
    python app.py optimize
    python app.py ts-map --n_rho 11 --n_z 11 --out runs/ts
    python app.py oracle-compare --config oracle.cfg --seed 7
    python app.py pulse-sim --strict

Exit codes: 0 success, 1 computation error, 2 configuration error,
3 regime violation (strict mode).
"""

import argparse
import dataclasses
import logging
import os
import sys
from typing import List, Optional

from commands import COMMANDS
from lib import __version__
from lib.config import COMMAND_CONFIGS, resolve_config
from lib.errors import ConfigError, DickeSenseError, RegimeViolationError

logger = logging.getLogger('dicke_sense')

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_REGIME = 3

COMMAND_HELP = {
    'field-map': "reduced dipolar field over an (r, z) grid",
    'optimize': "optimal interaction time and probe shapes",
    'ts-map': "detection time over density and standoff distance",
    'oracle-compare': "exact readout probability vs asymptotics and closed forms",
    'pulse-sim': "spin-star preparation and readout fidelities",
    'verify': "combinatorial, invariance and equivalence checks",
}


def build_parser() -> argparse.ArgumentParser:
    # argparse exits with 2 on bad flags, the same code as a config error
    parser = argparse.ArgumentParser(prog='dicke-sense',
                                     description="Single-spin detection with Dicke-state probes")
    parser.add_argument('--version', action='version', version=f'dicke-sense {__version__}')
    subparsers = parser.add_subparsers(dest='command', required=True)

    for name, config_cls in COMMAND_CONFIGS.items():
        sub = subparsers.add_parser(name, help=COMMAND_HELP[name])
        sub.add_argument('--config', help="flat 'key = value' config file")
        sub.add_argument('--out', help="output directory (must not already hold results)")
        sub.add_argument('--strict', action='store_true', help="treat regime advisories as errors")
        sub.add_argument('-v', '--verbose', action='count', default=0)
        axes = sub.add_argument_group('parameters')
        for f in dataclasses.fields(config_cls):
            default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
            if isinstance(default, list):
                default = ','.join(str(item) for item in default)
            # values stay strings here and are typed by lib.config
            axes.add_argument(f'--{f.name}', dest=f.name, default=None, metavar='VALUE',
                              help=f"default: {default}")
    return parser


def configure_logging(verbose: int, level_name: Optional[str]):
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, (level_name or 'WARNING').upper(), logging.WARNING)
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    logging.captureWarnings(True)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    field_names = [f.name for f in dataclasses.fields(COMMAND_CONFIGS[args.command])]
    overrides = {name: getattr(args, name) for name in field_names}

    try:
        config = resolve_config(args.command, args.config, overrides, out_dir=args.out, strict=args.strict)
    except ConfigError as exc:
        configure_logging(args.verbose, None)
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    configure_logging(args.verbose, config.params.log_level)

    if os.path.isdir(config.out_dir) and os.listdir(config.out_dir):
        logger.error("output directory %s already holds results", config.out_dir)
        return EXIT_CONFIG

    try:
        paths = COMMANDS[args.command](config)
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except RegimeViolationError as exc:
        logger.error("regime violation: %s", exc)
        return EXIT_REGIME
    except DickeSenseError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return EXIT_FAILURE

    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
