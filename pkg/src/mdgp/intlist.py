from typing import List

from .usererror import UserError


def int_list(string: str) -> List[int]:
    """Parse "8,16,32" into positive integers."""

    ret = []
    for part in string.split(","):
        try:
            value = int(part.strip())
        except ValueError:
            raise UserError("Expected a comma-separated list of integers,"
                            " got %r.", string) from None
        if value < 1:
            raise UserError("List entries must be positive, got %r.", value)
        ret.append(value)
    return ret
