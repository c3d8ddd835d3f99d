
from argparse import ArgumentParser, Namespace
from typing import Sequence

from .logger import logger, set_verbosity


def add_verbosity(parser: ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument('--verbose', dest='verbosity', action='store_const',
                       const='verbose', help='Report sampler progress.')
    group.add_argument('--no-verbose', dest='verbosity',
                       action='store_const', const='normal',
                       help='Only report warnings (default).')
    group.add_argument('--debug', dest='verbosity', action='store_const',
                       const='debug', help='Maximum output verbosity.')
    group.add_argument('--quiet', dest='verbosity', action='store_const',
                       const='quiet', help='Only report errors.')
    parser.set_defaults(verbosity='normal')


def parse_cli(parser: ArgumentParser, args: Sequence[str]) -> Namespace:
    add_verbosity(parser)
    ret = parser.parse_args(args)
    set_verbosity(ret.verbosity)
    logger.debug("Start %s with %s.", parser.prog, list(args))
    return ret
