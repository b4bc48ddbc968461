"""
Time series of fields and the infinite time energy bound.

With F(t) = int rho x2 and the transport equation d_t rho + div m = 0,
F(t) = F(0) + int_0^t int m2. The energy inequality then gives

int_0^T int |v|^2 <= int rho0 x2 - F(T) <= int rho0 x2 + sup|rho| int |x2|
"""
import logging

from typing import Optional

import numpy as np

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from scipy.integrate import cumulative_trapezoid
from scipy.integrate import trapezoid

from ipmhull.core.errors import FieldError
from ipmhull.core.errors import PreconditionError
from ipmhull.core.states import DEFAULT_TOLERANCE
from ipmhull.core.states import State
from ipmhull.core.states import ToleranceConfig
from ipmhull.hull.separators import inNonStationaryHull
from ipmhull.subsolution.discreteField import DiscreteField
from ipmhull.subsolution.discreteField import Grid

logger = logging.getLogger(__name__)

HULL_DENSITY_BOUND = 1.0


class TimeSeries(object):
    """
    Frames (t, field) on one grid with strictly increasing times.

    rho0 defaults to the density of the first frame.
    """
    def __init__(self,
                 frames: list[tuple[float, DiscreteField]],
                 rho0: Optional[np.ndarray] = None):
        if not frames:
            raise PreconditionError("a time series needs at least one frame")
        times = np.array([t for t, _ in frames], dtype=float)
        if np.any(np.diff(times) <= 0.0):
            raise FieldError("frame times must be strictly increasing")
        grid = frames[0][1].grid
        for t, field in frames:
            other = field.grid
            if (other.nx, other.ny, other.Lx, other.Ly) != (grid.nx, grid.ny, grid.Lx, grid.Ly):
                raise FieldError(f"frame at t = {t} is on a different grid")
        if rho0 is None:
            rho0 = frames[0][1].rho
        rho0 = np.asarray(rho0, dtype=float)
        if rho0.shape != grid.cellShape():
            raise FieldError(f"rho0 has shape {rho0.shape}, expected {grid.cellShape()}")
        self.__times = times
        self.__fields = [field for _, field in frames]
        self.__rho0 = rho0

    @property
    def times(self) -> np.ndarray:
        return self.__times

    @property
    def fields(self) -> list[DiscreteField]:
        return self.__fields

    @property
    def rho0(self) -> np.ndarray:
        return self.__rho0

    @property
    def grid(self) -> Grid:
        return self.__fields[0].grid

    def size(self) -> int:
        return len(self.__fields)


class FPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    t: float
    direct: float
    """ int rho x2 of the frame """
    reconstructed: float
    """ int rho0 x2 plus the time integral of int m2 up to t """


class FReport(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    points: list[FPoint]
    maxDiscrepancy: float = Field(alias="max_discrepancy")


class TimeBoundReport(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lhs: float
    """ int_0^T int |v|^2 """
    rhs: float
    """ int rho0 x2 + rhoSup int |x2| """
    rhoSup: float = Field(alias="rho_sup")
    quadratureTol: float = Field(alias="quadrature_tol")
    finalF: float = Field(alias="final_F")
    passed: bool = Field(alias="pass")


def _heightMoment(rho: np.ndarray, grid: Grid) -> float:
    _, y = grid.cellCenters()
    return float(np.sum(rho * y) * grid.cellArea)


def fOfT(series: TimeSeries) -> FReport:
    """
    F(t) per frame next to its reconstruction from rho0 and the trapezoid
    rule in time of int m2.
    """
    grid = series.grid
    direct = np.array([_heightMoment(field.rho, grid) for field in series.fields])
    fluxes = np.array([float(np.sum(field.cellFlux()[1]) * grid.cellArea)
                       for field in series.fields])
    start = _heightMoment(series.rho0, grid)
    if series.size() > 1:
        accumulated = cumulative_trapezoid(fluxes, series.times, initial=0.0)
    else:
        accumulated = np.zeros(1)
    reconstructed = start + accumulated
    points = [FPoint(t=float(t), direct=float(d), reconstructed=float(r))
              for t, d, r in zip(series.times, direct, reconstructed)]
    return FReport(points=points,
                   maxDiscrepancy=float(np.abs(direct - reconstructed).max()))


def infiniteTimeBound(series: TimeSeries,
                      tol: ToleranceConfig = DEFAULT_TOLERANCE,
                      rhoSup: float = HULL_DENSITY_BOUND) -> TimeBoundReport:
    """
    Compare int_0^T int |v|^2 with int rho0 x2 + rhoSup int |x2|.

    Every cell of every frame has to lie in the non-stationary hull;
    otherwise PreconditionError carries the offending frame indices.
    """
    bad = list[int]()
    for index, field in enumerate(series.fields):
        for row in field.cellStates().reshape(-1, 5).tolist():
            if not inNonStationaryHull(State.fromArray(row), tol):
                bad.append(index)
                break
    if bad:
        raise PreconditionError(f"frames {bad} leave the non-stationary hull", details=bad)

    grid = series.grid
    energies = np.array([field.velocityEnergy() for field in series.fields])
    lhs = float(trapezoid(energies, series.times)) if series.size() > 1 else 0.0
    _, y = grid.cellCenters()
    rhs = _heightMoment(series.rho0, grid) + rhoSup * float(np.sum(np.abs(y)) * grid.cellArea)
    quadratureTol = max(tol.eqTol, (grid.dx * grid.dx + grid.dy * grid.dy) * grid.area)
    finalF = _heightMoment(series.fields[-1].rho, grid)
    passed = lhs <= rhs + quadratureTol
    if not passed:
        logger.warning("energy %g exceeds the bound %g", lhs, rhs)
    return TimeBoundReport(lhs=lhs,
                           rhs=rhs,
                           rhoSup=rhoSup,
                           quadratureTol=quadratureTol,
                           finalF=finalF,
                           passed=passed)
