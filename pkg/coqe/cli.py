"""Command line interface.

    coqe curvature godel
    coqe verify path/to/manifest.yaml --json
    coqe sectional round-sphere-2 --plane "1,0;0,1"
    coqe report godel --checks all --format msgpack
"""
import argparse
import logging
import os
import sys
from setproctitle import setproctitle
from typing import Optional, Sequence
from .exceptions import ManifestError
from .logger import setup_logger
from .manifest import (
    load_manifest,
    parse_plane,
    parse_sample_point,
    validate_checks,
)
from .report import EXIT_INPUT, FORMATS, emit_report
from .runner import run_checks
from .version import __version__

OUTPUT_TYPE = os.getenv('OUTPUT_TYPE', 'TEXT').lower()
COQE_SEED = os.getenv('COQE_SEED', '42')
COQE_SAMPLE_POINT = os.getenv('COQE_SAMPLE_POINT', '')

COMMANDS = {
    'curvature': ['curvature'],
    'verify': ['coqe-verify', 'constraints', 'trace-identity'],
    'classify': ['classify'],
    'sectional': ['sectional'],
    'fluid': ['fluid'],
    'spacematter': ['spacematter'],
    'report': None,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        'manifest', help='manifest file or bundled fixture name')
    common.add_argument(
        '--json', action='store_true', help='machine readable output')
    common.add_argument(
        '--format', choices=FORMATS, default=None,
        help='report format; overrides --json and OUTPUT_TYPE')
    common.add_argument(
        '--seed', type=int, default=None,
        help='seed for probabilistic checks (default COQE_SEED or 42)')
    common.add_argument(
        '--sample-point', default=None,
        help='override the sample point, e.g. "x=1/3,k=2"')

    parser = argparse.ArgumentParser(
        prog='coqe',
        description='Verify comprehensive quasi-Einstein structures.')
    parser.add_argument(
        '--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == 'sectional':
            p.add_argument(
                '--plane', default=None,
                help='two vectors, e.g. "1,0,0,0;0,1,0,0"')
        if name == 'report':
            p.add_argument(
                '--checks', default=None,
                help='comma separated check names or `all`')
    return parser


def _output_format(args) -> str:
    if args.format:
        return args.format
    if args.json:
        return 'json'
    if OUTPUT_TYPE not in FORMATS:
        raise ManifestError(
            f'invalid output type `{OUTPUT_TYPE.upper()}`; '
            'must be TEXT, JSON or MSGPACK', 'OUTPUT_TYPE')
    return OUTPUT_TYPE


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    try:
        return int(COQE_SEED)
    except ValueError:
        raise ManifestError(f'`{COQE_SEED}` is not an integer', 'COQE_SEED')


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setproctitle('coqe')
    try:
        setup_logger()
    except ValueError as e:
        print(f'error: {e}', file=sys.stderr)
        return EXIT_INPUT

    try:
        fmt = _output_format(args)
        seed = _seed(args)
        sample = parse_sample_point(args.sample_point or COQE_SAMPLE_POINT)
        m = load_manifest(args.manifest, sample)
        if args.command == 'sectional':
            plane = parse_plane(m, args.plane)
            if plane is not None:
                m.plane = plane
        names = COMMANDS[args.command]
        if names is None and args.checks:
            names = validate_checks(args.checks.split(','), '--checks')
        report = run_checks(m, names, seed=seed)
    except ManifestError as e:
        logging.error(f'input error; {e}')
        print(f'error: {e}', file=sys.stderr)
        return EXIT_INPUT

    sys.stdout.buffer.write(emit_report(report, fmt))
    sys.stdout.flush()
    return report.exit_code
