import argparse
import logging

from django.core.management.base import BaseCommand, CommandError

from soilqr.exceptions import SoilQRException
from soilqr.runs import COMMANDS, RunConfig

logger = logging.getLogger(__name__)

VERBOSITY_LEVELS = {
    0: logging.ERROR,
    1: logging.WARNING,
    2: logging.INFO,
    3: logging.DEBUG,
}


def tau_list(value):
    try:
        return [float(v) for v in value.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('expected comma separated numbers, got %r' % value)


class Command(BaseCommand):
    help = '''Runs a step of the quantile regression workflow: fit, cv, bootstrap, predict or compare'''
    requires_system_checks = []

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest='subcommand', metavar='{%s}' % ','.join(COMMANDS))
        subparsers.required = True
        for name, command in COMMANDS.items():
            sub = subparsers.add_parser(name, help=command.__doc__.strip().splitlines()[0])
            sub.add_argument('--config', required=True, metavar='PATH',
                             help='YAML run configuration')
            sub.add_argument('--seed', type=int, dest='master_seed',
                             help='Master seed of the bootstrap replicates')
            sub.add_argument('--taus', type=tau_list, metavar='LIST',
                             help='Comma separated probability levels, e.g. 0.25,0.5,0.75')
            sub.add_argument('--bootstrap-b', type=int, dest='bootstrap_replicates', metavar='INT',
                             help='Number of bootstrap replicates')
            sub.add_argument('--workers', type=int, metavar='INT',
                             help='Parallel workers (-1 for all cores)')
            sub.add_argument('--out', dest='output', metavar='DIR', help='Output directory')

    def handle(self, *args, **options):
        verbosity = int(options.get('verbosity', 1))
        package_logger = logging.getLogger('soilqr')
        package_logger.setLevel(VERBOSITY_LEVELS.get(verbosity, logging.DEBUG))
        if not package_logger.handlers and not logging.getLogger().handlers:
            package_logger.addHandler(logging.StreamHandler(self.stderr))

        subcommand = options['subcommand']
        try:
            config = RunConfig.load(options['config'],
                                    **dict((key, options.get(key)) for key in
                                           ('master_seed', 'taus', 'bootstrap_replicates', 'workers',
                                            'output')))
            outputs = COMMANDS[subcommand](config)
        except SoilQRException as e:
            logger.debug('%s failed', subcommand, exc_info=True)
            raise CommandError('%s: %s' % (type(e).__name__, e), returncode=e.exit_code)

        if verbosity >= 1:
            for path in outputs:
                self.stdout.write(path)
