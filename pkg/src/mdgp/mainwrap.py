
import json
import sys
from typing import Callable, Sequence

from .logger import logger
from .usererror import UserError

ABORTED_EXIT = 1


def report(error: UserError) -> int:
    """Log `error` and print its JSON form as the last line of stderr."""

    logger.fatal(error.fmt, *error.fmt_args)
    print(json.dumps(error.to_json(), default=str), file=sys.stderr)
    return error.code


def mainwrap(main: Callable[[Sequence[str]], int]) -> None:
    try:
        rc = main(sys.argv[1:])
        logger.debug("Exit code %r.", rc)
    except BrokenPipeError:
        logger.debug("Broken pipe.")
        rc = ABORTED_EXIT
    except KeyboardInterrupt:
        logger.debug("Interrupted.")
        rc = ABORTED_EXIT
    except UserError as e:
        rc = report(e)

    sys.exit(rc)
