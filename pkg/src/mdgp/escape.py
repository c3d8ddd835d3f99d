
from pathlib import Path
from typing import NoReturn, Union


def escape(value: Union[Path, str]) -> str:
    if isinstance(value, Path):
        return repr(str(value))
    elif isinstance(value, str):
        return repr(value)
    else:
        x: NoReturn = value
        assert x is None
