
from pathlib import Path
import os
from typing import NewType

from .usererror import UserError
from .escape import escape
from .logger import logger


DirPath = NewType('DirPath', Path)


def dir_path(string: str) -> DirPath:
    if (not os.path.exists(string)) or os.path.isdir(string):
        return DirPath(Path(string))
    else:
        raise UserError("Path %s is not a directory.", escape(string))


def existing_dir_path(string: str) -> DirPath:
    if os.path.isdir(string):
        return DirPath(Path(string))
    else:
        raise UserError("Directory %s does not exist.", escape(string))


def make_output_dir(path: Path) -> DirPath:
    logger.debug("Making output directory at %s.", escape(path))
    os.makedirs(path, exist_ok=True)
    return DirPath(path)
