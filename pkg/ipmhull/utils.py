import math

from typing import Sequence
from typing import Union

Vec2 = tuple[float, float]


def cleanNumber(number: Union[int, float], decimal:int=1):
    """
    Cleanly format a number.

    If this is an int value, there will be no decimal.
    """
    if isinstance(number, int) or number.is_integer():
        return str(int(number))
    fstr = f"{{number:.{decimal}f}}"
    return fstr.format(number=number).rstrip("0").rstrip(".")


def perp(a: Sequence[float]) -> Vec2:
    """
    Rotate a 2-vector by a quarter turn, (a1, a2) -> (-a2, a1).
    """
    return (-a[1], a[0])


def dot(a: Sequence[float], b: Sequence[float]) -> float:
    return a[0] * b[0] + a[1] * b[1]


def norm(a: Sequence[float]) -> float:
    return math.hypot(a[0], a[1])


def norm2(a: Sequence[float]) -> float:
    return a[0] * a[0] + a[1] * a[1]
