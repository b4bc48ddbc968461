"""
Closed form membership in the lamination convex hull of K.

The hull is the union of four sets:

X1: (rho, 0, ((1 - rho^2)/2)(e - (0,1))) with |rho| <= 1 and |e| <= 1
X2: (rho, v, k v) with v != 0 and 1 <= k <= kBound
X3: (rho, v, k v) with |rho| < 1, v != 0 and -1 < k = kBound < 1
X4: (rho, v, k v) with v != 0 and kBound <= k <= -1

where kBound = rho - (1 - rho^2) v2 / |v|^2. X2 and X4 project onto the two
cones |v|^2 + (rho + 1) v2 <= 0 and |v|^2 + (rho - 1) v2 <= 0 (the flexible
region); X3 projects onto the rigid region between them.
"""
import math

from enum import Enum
from typing import Optional

import numpy as np

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field

from ipmhull.core.errors import PreconditionError
from ipmhull.core.states import DEFAULT_TOLERANCE
from ipmhull.core.states import State
from ipmhull.core.states import ToleranceConfig
from ipmhull.utils import Vec2

UNIT_UP = (0.0, 1.0)


class RegionTag(Enum):
    ON_K = "OnK"
    X1 = "X1"
    X2 = "X2"
    X3 = "X3"
    X4 = "X4"
    OUTSIDE = "Outside"


HULL_TAGS = frozenset((RegionTag.ON_K,
                       RegionTag.X1,
                       RegionTag.X2,
                       RegionTag.X3,
                       RegionTag.X4))


class Region(BaseModel):
    """
    Where a state sits relative to K and the hull components.
    """
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    tag: RegionTag
    k: Optional[float] = None
    """ Proportionality in m = k v, present when v != 0 and m is parallel to v """
    e: Optional[Vec2] = None
    """ X1 payload, |e| <= 1 """
    kBound: Optional[float] = Field(default=None, alias="k_bound")
    """ rho - (1 - rho^2) v2 / |v|^2, present when v != 0 """

    def inHull(self) -> bool:
        return self.tag in HULL_TAGS


class KRangeKind(Enum):
    FLEXIBLE = "Flexible"
    RIGID = "Rigid"
    EMPTY = "Empty"


class KRange(BaseModel):
    """
    The admissible closed interval of k for a given (rho, v) with v != 0.
    """
    model_config = ConfigDict(frozen=True)

    kind: KRangeKind
    lo: float
    hi: float

    def contains(self, k: float, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
        if self.kind == KRangeKind.EMPTY:
            return False
        return tol.le(self.lo, k) and tol.le(k, self.hi)


EMPTY_K_RANGE = KRange(kind=KRangeKind.EMPTY, lo=1.0, hi=-1.0)


class ConeSide(Enum):
    UPPER = "Upper"
    """ The X2 cone |v|^2 + (rho + 1) v2 <= 0 """
    LOWER = "Lower"
    """ The X4 cone |v|^2 + (rho - 1) v2 <= 0 """


def powerBalance(z: State) -> float:
    """
    The power balance |v|^2 + rho v2.
    """
    return z.v[0] * z.v[0] + z.v[1] * z.v[1] + z.rho * z.v[1]


def kBound(rho: float, v: Vec2) -> float:
    """
    rho - (1 - rho^2) v2 / |v|^2. The caller guarantees v != 0.
    """
    return rho - (1.0 - rho * rho) * v[1] / (v[0] * v[0] + v[1] * v[1])


def inCone(z: State,
           which: ConeSide,
           tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    shift = 1.0 if which == ConeSide.UPPER else -1.0
    value = z.v[0] * z.v[0] + z.v[1] * z.v[1] + (z.rho + shift) * z.v[1]
    return tol.le(value, 0.0)


def isFlexible(z: State, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    """
    The flexible region |v|^2 + rho v2 <= |v2| for v != 0.
    """
    if math.hypot(*z.v) <= tol.eqTol:
        return False
    return tol.le(powerBalance(z), abs(z.v[1]))


def isRigid(z: State, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    if math.hypot(*z.v) <= tol.eqTol:
        return False
    return not isFlexible(z, tol)


def kRange(rho: float,
           v: Vec2,
           tol: ToleranceConfig = DEFAULT_TOLERANCE) -> KRange:
    """
    The exact range of the proportionality constant k at (rho, v).
    """
    if math.hypot(v[0], v[1]) <= tol.eqTol:
        raise PreconditionError(f"kRange needs v != 0, got v = {v}")
    if not tol.le(abs(rho), 1.0):
        return EMPTY_K_RANGE
    b = kBound(rho, v)
    if tol.le(1.0, b):
        return KRange(kind=KRangeKind.FLEXIBLE, lo=1.0, hi=max(b, 1.0))
    if tol.le(b, -1.0):
        return KRange(kind=KRangeKind.FLEXIBLE, lo=min(b, -1.0), hi=-1.0)
    if tol.lt(abs(rho), 1.0):
        return KRange(kind=KRangeKind.RIGID, lo=b, hi=b)
    return KRange(kind=KRangeKind.RIGID, lo=rho, hi=rho)


def classifyParts(rho: float,
                  v: Vec2,
                  m: Vec2,
                  tol: ToleranceConfig = DEFAULT_TOLERANCE
                  ) -> tuple[RegionTag, Optional[float], Optional[Vec2], Optional[float]]:
    """
    classify on raw components, returning (tag, k, e, kBound).

    Used directly by the loops that classify many points.
    """
    eqTol = tol.eqTol
    v2norm = v[0] * v[0] + v[1] * v[1]
    hasV = math.sqrt(v2norm) > eqTol

    k = None
    b = None
    parallel = True
    if hasV:
        b = kBound(rho, v)
        cross = m[1] * v[0] - m[0] * v[1]
        parallel = abs(cross) <= eqTol * (1.0 + math.hypot(*m) * math.sqrt(v2norm))
        if parallel:
            k = (m[0] * v[0] + m[1] * v[1]) / v2norm

    if (abs(abs(rho) - 1.0) <= eqTol
            and abs(m[0] - rho * v[0]) <= eqTol
            and abs(m[1] - rho * v[1]) <= eqTol):
        return RegionTag.ON_K, k, None, b

    if not tol.le(abs(rho), 1.0):
        return RegionTag.OUTSIDE, k, None, b

    if not hasV:
        return _classifyStagnant(rho, m, tol)

    if not parallel:
        return RegionTag.OUTSIDE, None, None, b
    if tol.le(1.0, k) and tol.le(k, b):
        return RegionTag.X2, k, None, b
    if tol.le(b, k) and tol.le(k, -1.0):
        return RegionTag.X4, k, None, b
    if (tol.lt(abs(rho), 1.0)
            and abs(k - b) <= eqTol
            and tol.lt(-1.0, k)
            and tol.lt(k, 1.0)):
        return RegionTag.X3, k, None, b
    return RegionTag.OUTSIDE, k, None, b


def _classifyStagnant(rho: float, m: Vec2, tol: ToleranceConfig):
    """
    The v = 0 branch: X1 or outside.
    """
    width = 1.0 - rho * rho
    if width <= tol.eqTol:
        # The disc degenerates to the point m = 0.
        if math.hypot(*m) <= tol.eqTol:
            return RegionTag.X1, None, UNIT_UP, None
        return RegionTag.OUTSIDE, None, None, None
    e = (2.0 * m[0] / width, 2.0 * m[1] / width + 1.0)
    if tol.le(math.hypot(*e), 1.0):
        return RegionTag.X1, None, e, None
    return RegionTag.OUTSIDE, None, None, None


def classify(z: State, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Region:
    """
    Classify a state against K and the four hull components.

    OnK takes precedence over the components that contain it. X2 and X4
    are closed and claim k = +-1 and k = kBound; X3 only gets the strict
    interior.
    """
    tag, k, e, b = classifyParts(z.rho, z.v, z.m, tol)
    return Region(tag=tag, k=k, e=e, kBound=b)


def classifyArray(values: np.ndarray,
                  tol: ToleranceConfig = DEFAULT_TOLERANCE) -> list[RegionTag]:
    """
    Region tags for the rows (rho, v1, v2, m1, m2) of an array.
    """
    toRet = list[RegionTag]()
    for row in np.asarray(values, dtype=float).reshape(-1, 5).tolist():
        toRet.append(classifyParts(row[0], (row[1], row[2]), (row[3], row[4]), tol)[0])
    return toRet


def insideHull(values: np.ndarray, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    row = values.tolist()
    tag = classifyParts(row[0], (row[1], row[2]), (row[3], row[4]), tol)[0]
    return tag in HULL_TAGS
