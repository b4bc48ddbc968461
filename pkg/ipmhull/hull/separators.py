"""
Lambda-convex separating functions.

Each G is lambda-convex (convex along every wave cone line) and non-positive
on K, so G > 0 certifies that a state is outside the lamination hull.
G2 is lambda-affine and separates on both sides.
"""
import logging

from enum import Enum
from typing import Callable
from typing import Optional

import numpy as np

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field

from ipmhull.core.errors import PreconditionError
from ipmhull.core.states import DEFAULT_TOLERANCE
from ipmhull.core.states import State
from ipmhull.core.states import ToleranceConfig
from ipmhull.core.states import inWaveCone
from ipmhull.hull.regions import powerBalance
from ipmhull.utils import dot
from ipmhull.utils import norm
from ipmhull.utils import norm2
from ipmhull.utils import perp

logger = logging.getLogger(__name__)

CONVEXITY_SAMPLES = 11


class SeparatorId(Enum):
    G1 = "G1"
    """ |m - rho v + (0, (1 - rho^2)/2)| - (1 - rho^2)/2 """
    G2 = "G2"
    """ m . v_perp """
    G3 = "G3"
    """ -(v - m) . (v + (0, 1 + rho)) + |v - m|^2 / 2 """
    G4 = "G4"
    """ -(v + m) . (v - (0, 1 - rho)) + |v + m|^2 / 2 """


AFFINE_SEPARATORS = frozenset((SeparatorId.G2, ))


def evalG(which: SeparatorId, z: State) -> float:
    rho = z.rho
    v = z.v
    m = z.m
    if which == SeparatorId.G1:
        half = 0.5 * (1.0 - rho * rho)
        return norm((m[0] - rho * v[0], m[1] - rho * v[1] + half)) - half
    if which == SeparatorId.G2:
        return dot(m, perp(v))
    if which == SeparatorId.G3:
        diff = (v[0] - m[0], v[1] - m[1])
        return -dot(diff, (v[0], v[1] + 1.0 + rho)) + 0.5 * norm2(diff)
    total = (v[0] + m[0], v[1] + m[1])
    return -dot(total, (v[0], v[1] - 1.0 + rho)) + 0.5 * norm2(total)


def separates(which: SeparatorId,
              value: float,
              tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    if which in AFFINE_SEPARATORS:
        return abs(value) > tol.eqTol
    return value > tol.eqTol


class SeparatorValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float
    separates: bool


class SeparationReport(BaseModel):
    """
    Every separator evaluated at one state.
    """
    model_config = ConfigDict(frozen=True)

    values: dict[SeparatorId, SeparatorValue]

    def firing(self) -> list[SeparatorId]:
        return [sid for sid, entry in self.values.items() if entry.separates]

    def separated(self) -> bool:
        return any(entry.separates for entry in self.values.values())


def separationBound(z: State,
                    tol: ToleranceConfig = DEFAULT_TOLERANCE) -> SeparationReport:
    values = dict[SeparatorId, SeparatorValue]()
    for sid in SeparatorId:
        value = evalG(sid, z)
        values[sid] = SeparatorValue(value=value, separates=separates(sid, value, tol))
    return SeparationReport(values=values)


class ConvexityReport(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    minSecondDifference: float = Field(alias="min_second_difference")
    maxAbsSecondDifference: float = Field(alias="max_abs_second_difference")
    passed: bool = Field(alias="pass")


def checkAlong(fn: Callable[[State], float],
               affine: bool,
               z0: State,
               direction: State,
               ts: Optional[np.ndarray] = None,
               tol: ToleranceConfig = DEFAULT_TOLERANCE) -> ConvexityReport:
    """
    Sample t -> fn(z0 + t direction) and check its second differences.

    Non-uniform samples are handled with divided differences scaled back to
    the size of plain second differences.
    """
    if not inWaveCone(direction, tol):
        raise PreconditionError("convexity can only be checked along a wave cone direction")
    if ts is None:
        ts = np.linspace(-1.0, 1.0, CONVEXITY_SAMPLES)
    ts = np.sort(np.asarray(ts, dtype=float))
    if ts.size < 3:
        raise PreconditionError(f"need at least three samples, got {ts.size}")

    base = z0.toArray()
    step = direction.toArray()
    g = np.array([fn(State.fromArray(base + t * step)) for t in ts])

    h1 = ts[1:-1] - ts[:-2]
    h2 = ts[2:] - ts[1:-1]
    divided = 2.0 * ((g[2:] - g[1:-1]) / h2 - (g[1:-1] - g[:-2]) / h1) / (h1 + h2)
    second = divided * h1 * h2

    minSecond = float(second.min())
    maxAbs = float(np.abs(second).max())
    if affine:
        passed = maxAbs <= tol.eqTol
    else:
        passed = minSecond >= -tol.eqTol
    return ConvexityReport(minSecondDifference=minSecond,
                           maxAbsSecondDifference=maxAbs,
                           passed=passed)


def checkConvexAlong(which: SeparatorId,
                     z0: State,
                     direction: State,
                     ts: Optional[np.ndarray] = None,
                     tol: ToleranceConfig = DEFAULT_TOLERANCE) -> ConvexityReport:
    """
    G2 must come out affine along the line, the others convex.
    """
    report = checkAlong(lambda z: evalG(which, z),
                        which in AFFINE_SEPARATORS,
                        z0,
                        direction,
                        ts,
                        tol)
    if not report.passed:
        logger.debug("%s fails along %s from %s", which.value, direction, z0)
    return report


def inNonStationaryHull(z: State, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    """
    Membership in the hull of the time dependent problem, where v is free:
    |rho| <= 1 and G1 <= 0.
    """
    return tol.le(abs(z.rho), 1.0) and evalG(SeparatorId.G1, z) <= tol.eqTol


def lambdaAffineQuadratics(z: State) -> tuple[float, float, float]:
    """
    The lambda-affine quadratics m . v_perp, |v|^2 + rho v2 and
    m . (v + (0, rho)), each affine along every wave cone line.
    """
    return (dot(z.m, perp(z.v)),
            powerBalance(z),
            dot(z.m, (z.v[0], z.v[1] + z.rho)))
