"""
Django management command for deniakit experiments.

Usage:
    python manage.py deniakit channel validate example1
    python manage.py deniakit zeroinfo example2 --side tx
    python manage.py deniakit region tx example2 --grid 21 --out tx.csv
    python manage.py deniakit region eq --bec 0.5
    python manage.py deniakit simulate transmitter example2 --n 3 --rate 1 --deniability 0.6667
    python manage.py deniakit rerun tx.csv.manifest.toml

The `deniakit` console script runs the same command without a project.
"""

import argparse

from django.core.management.base import BaseCommand, CommandError

from deniakit.evalx import FAKE_PROCEDURES
from deniakit.exceptions import ChannelFormatError, DeniabilityError, UsageError

from ._experiments import ExperimentHandler

SEED_LIMIT = 2**64


def seed_type(value):
    seed = int(value)
    if not 0 <= seed < SEED_LIMIT:
        raise argparse.ArgumentTypeError(f'seed {value} is not a 64-bit unsigned integer')
    return seed


def probability_list(value):
    try:
        return [float(v) for v in value.split(',')]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f'{value!r} is not a comma-separated list of probabilities') from e


def add_channel_arguments(parser):
    parser.add_argument('channel', nargs='?', help='Channel file or built-in name (example1, example2)')
    parser.add_argument('--bec', type=float, metavar='P', help='Use the erasure example with erasure probability P')
    parser.add_argument('--degraded-tol', type=float, help='Tolerance of the degradedness test (default: 1e-7)')
    parser.add_argument('--out', help='Output file; a run manifest is written next to it')


class Command(BaseCommand):
    help = 'Plausible deniability experiments on broadcast channels'
    requires_system_checks = []

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest='command', required=True, help='Available commands')

        # Channel command
        channel_parser = subparsers.add_parser('channel', help='Channel file operations')
        channel_subparsers = channel_parser.add_subparsers(dest='subcommand', required=True)

        # Channel: validate
        validate = channel_subparsers.add_parser('validate', help='Check that a channel file is well formed')
        add_channel_arguments(validate)

        # Channel: marginals
        marginals = channel_subparsers.add_parser('marginals', help="Print Bob's and Judy's channels")
        add_channel_arguments(marginals)

        # Channel: degraded
        degraded = channel_subparsers.add_parser('degraded', help='Test whether Z is a stochastic function of Y')
        add_channel_arguments(degraded)

        # Zero-information partitions
        zeroinfo = subparsers.add_parser('zeroinfo', help='Zero-information classes of the inputs or outputs')
        add_channel_arguments(zeroinfo)
        zeroinfo.add_argument('--side', choices=['tx', 'rx'], help='tx: inputs w.r.t. P(z|x); rx: outputs w.r.t. P(z|y)')
        zeroinfo.add_argument('--tol', type=float, help='Row equality tolerance (default: 1e-9)')

        # Region command
        region_parser = subparsers.add_parser('region', help='Rate/deniability frontiers')
        region_subparsers = region_parser.add_subparsers(dest='subcommand', required=True)
        region_help = {
            'message': 'Message deniability (optimizer lower bound)',
            'tx': 'Transmitter deniability',
            'rx': 'Receiver deniability (degraded channels, inner bound)',
            'eq': 'Equivocation region of the erasure example',
            'bcc': 'Confidential-message region of the erasure example',
        }
        for kind, kind_help in region_help.items():
            region = region_subparsers.add_parser(kind, help=kind_help)
            add_channel_arguments(region)
            region.add_argument('--closed-form', action='store_true', help='Use the closed form of the erasure example')
            region.add_argument('--check-inclusion', action='store_true', help='Check the optimizer frontier against the closed form')
            region.add_argument('--grid', type=int, metavar='N', help='Number of deniability grid points (default: 101)')
            region.add_argument('--threads', type=int, help='Worker threads for grid points (default: 1)')
            region.add_argument('--seed', type=seed_type, help='Optimizer restart seed (default: $DENIAKIT_SEED or 0)')
            region.add_argument('--tol', type=float, help='Zero-information row tolerance (default: 1e-9)')
            region.add_argument('--restarts', type=int, help='Random restarts per grid point')
            region.add_argument('--max-iter', type=int, help='Iteration cap per ascent')
            region.add_argument('--caps', type=int, nargs=2, metavar=('V', 'U'), help='Auxiliary alphabet sizes (message region)')

        # Simulate command
        simulate_parser = subparsers.add_parser('simulate', help='Build a code and evaluate it exactly')
        simulate_subparsers = simulate_parser.add_subparsers(dest='subcommand', required=True)
        for setting in ('message', 'transmitter', 'receiver'):
            simulate = simulate_subparsers.add_parser(setting, help=f'Summoned party in the {setting} setting')
            add_channel_arguments(simulate)
            simulate.add_argument('--n', type=int, help='Blocklength (default: 3)')
            simulate.add_argument('--rate', type=float, help='Rate R (transmitter, receiver; default: 1)')
            simulate.add_argument('--deniability', type=float, help='Deniability rate D (transmitter; default: 0)')
            simulate.add_argument('--s-bits', type=int, help='Confidential message bits (message; default: 1)')
            simulate.add_argument('--t-bits', type=int, help='Leaked message bits (message; default: 1)')
            simulate.add_argument('--r-bits', type=int, help='Private randomness bits (message; default: 0)')
            simulate.add_argument('--cloud-law', type=probability_list, help='Cloud law over zero-information classes, e.g. 1,0')
            simulate.add_argument('--fake', choices=FAKE_PROCEDURES, help='Faking procedure (default depends on the setting)')
            simulate.add_argument('--decoder', choices=['ml', 'typical'], help="Bob's decoder (default: ml)")
            simulate.add_argument('--eps', type=float, help='Typicality parameter (default: 0.1)')
            simulate.add_argument('--distinct', action='store_true', help='Redraw repeated satellite codewords')
            simulate.add_argument('--trials', type=int, help='Also estimate the error probability by Monte Carlo')
            simulate.add_argument('--seed', type=seed_type, help='Codebook seed (default: $DENIAKIT_SEED or 0)')
            simulate.add_argument('--tol', type=float, help='Zero-information row tolerance (default: 1e-9)')

        # Rerun command
        rerun = subparsers.add_parser('rerun', help='Replay a run manifest and verify its outputs')
        rerun.add_argument('manifest', help='Path to a .manifest.toml file')
        rerun.add_argument('--out', help='Write the outputs here instead of the recorded path')

    def handle(self, *args, **options):
        command = options.get('command')
        subcommand = options.get('subcommand')
        handler = ExperimentHandler(stdout=self.stdout, style=self.style)

        try:
            if command == 'rerun':
                handler.rerun(options)
            elif command in ('channel', 'zeroinfo', 'region', 'simulate'):
                handler.run(command, subcommand, options)
            else:
                raise UsageError(f'Unknown command: {command}')
        except (UsageError, ChannelFormatError) as e:
            raise CommandError(str(e), returncode=2) from e
        except DeniabilityError as e:
            raise CommandError(str(e), returncode=1) from e
