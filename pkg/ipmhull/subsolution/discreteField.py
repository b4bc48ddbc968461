"""
Discrete fields (rho, v, m) on a staggered grid over a rectangle.

Scalars live at cell centres and fluxes on cell faces:

u[i, j] on the x-face at (x_i, y_{j+1/2}), shape (nx + 1, ny)
w[i, j] on the y-face at (x_{i+1/2}, y_j), shape (nx, ny + 1)

Velocities built from a nodal stream function psi, shape (nx + 1, ny + 1),
by u = d2 psi and w = -d1 psi are divergence free cell by cell, and
impermeable wherever psi is constant along the boundary.
"""
from enum import Enum
from typing import Optional

import numpy as np

from ipmhull.core.errors import FieldError
from ipmhull.core.states import DEFAULT_TOLERANCE
from ipmhull.core.states import ToleranceConfig


class BoundaryMode(Enum):
    IMPERMEABLE_BOX = "impermeable_box"
    HORIZONTAL_PERIODIC = "horizontal_periodic"
    """ Periodic in x, impermeable walls at the bottom and top """


class Grid(object):
    """
    nx x ny cells over [0, Lx] x [0, Ly].
    """
    def __init__(self, nx: int, ny: int, Lx: float = 1.0, Ly: float = 1.0):
        if nx < 1 or ny < 1:
            raise FieldError(f"a grid needs at least one cell per axis, got {nx} x {ny}")
        if not (Lx > 0.0 and Ly > 0.0):
            raise FieldError(f"domain lengths must be positive, got {Lx} x {Ly}")
        self.__nx = nx
        self.__ny = ny
        self.__Lx = float(Lx)
        self.__Ly = float(Ly)

    @property
    def nx(self) -> int:
        return self.__nx

    @property
    def ny(self) -> int:
        return self.__ny

    @property
    def Lx(self) -> float:
        return self.__Lx

    @property
    def Ly(self) -> float:
        return self.__Ly

    @property
    def dx(self) -> float:
        return self.__Lx / self.__nx

    @property
    def dy(self) -> float:
        return self.__Ly / self.__ny

    @property
    def cellArea(self) -> float:
        return self.dx * self.dy

    @property
    def area(self) -> float:
        return self.__Lx * self.__Ly

    def xFace(self) -> np.ndarray:
        return np.linspace(0.0, self.__Lx, self.__nx + 1)

    def yFace(self) -> np.ndarray:
        return np.linspace(0.0, self.__Ly, self.__ny + 1)

    def xCenter(self) -> np.ndarray:
        return (np.arange(self.__nx) + 0.5) * self.dx

    def yCenter(self) -> np.ndarray:
        return (np.arange(self.__ny) + 0.5) * self.dy

    def cellCenters(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xCenter(), self.yCenter(), indexing="ij")

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xFace(), self.yFace(), indexing="ij")

    def cellShape(self) -> tuple[int, int]:
        return (self.__nx, self.__ny)

    def nodeShape(self) -> tuple[int, int]:
        return (self.__nx + 1, self.__ny + 1)

    def xFaceShape(self) -> tuple[int, int]:
        return (self.__nx + 1, self.__ny)

    def yFaceShape(self) -> tuple[int, int]:
        return (self.__nx, self.__ny + 1)


def facesFromStream(psi: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """
    Face values (u, w) = (d2 psi, -d1 psi).
    """
    u = np.diff(psi, axis=1) / grid.dy
    w = -np.diff(psi, axis=0) / grid.dx
    return u, w


class DiscreteField(object):
    """
    One snapshot (rho, v, m). Built through buildField or buildFluxField,
    which check shapes and boundary conditions.
    """
    def __init__(self,
                 grid: Grid,
                 mode: BoundaryMode,
                 rho: np.ndarray,
                 psiV: np.ndarray,
                 uM: np.ndarray,
                 wM: np.ndarray,
                 psiM: Optional[np.ndarray] = None):
        self.__grid = grid
        self.__mode = mode
        self.__rho = rho
        self.__psiV = psiV
        self.__psiM = psiM
        self.__uV, self.__wV = facesFromStream(psiV, grid)
        self.__uM = uM
        self.__wM = wM

    @property
    def grid(self) -> Grid:
        return self.__grid

    @property
    def mode(self) -> BoundaryMode:
        return self.__mode

    @property
    def rho(self) -> np.ndarray:
        return self.__rho

    @property
    def psiV(self) -> np.ndarray:
        return self.__psiV

    @property
    def psiM(self) -> Optional[np.ndarray]:
        """
        None when m was given as face fluxes.
        """
        return self.__psiM

    def velocityFaces(self) -> tuple[np.ndarray, np.ndarray]:
        return self.__uV, self.__wV

    def fluxFaces(self) -> tuple[np.ndarray, np.ndarray]:
        return self.__uM, self.__wM

    def cellVelocity(self) -> tuple[np.ndarray, np.ndarray]:
        return _cellAverage(self.__uV, self.__wV)

    def cellFlux(self) -> tuple[np.ndarray, np.ndarray]:
        return _cellAverage(self.__uM, self.__wM)

    def cellStates(self) -> np.ndarray:
        """
        Cell-centred (rho, v1, v2, m1, m2), shape (nx, ny, 5).
        """
        v1, v2 = self.cellVelocity()
        m1, m2 = self.cellFlux()
        return np.stack((self.__rho, v1, v2, m1, m2), axis=-1)

    def velocityDivergence(self) -> np.ndarray:
        return _netOutflow(self.__uV, self.__wV, self.__grid)

    def fluxDivergence(self) -> np.ndarray:
        return _netOutflow(self.__uM, self.__wM, self.__grid)

    def velocityEnergy(self) -> float:
        """
        Face quadrature of the integral of |v|^2.
        """
        u, w = self.__uV, self.__wV
        total = np.sum(u[:-1] * u[:-1]) + np.sum(w * w)
        return float(total * self.__grid.cellArea)

    def densityOnYFaces(self) -> np.ndarray:
        """
        rho averaged onto the y-faces; boundary faces take their one cell.
        """
        rho = self.__rho
        faces = np.empty(self.__grid.yFaceShape())
        faces[:, 1:-1] = 0.5 * (rho[:, :-1] + rho[:, 1:])
        faces[:, 0] = rho[:, 0]
        faces[:, -1] = rho[:, -1]
        return faces

    def buoyancyCurl(self) -> np.ndarray:
        """
        The discrete d1 (v2 + rho) - d2 v1 at the nodes where it is defined:
        interior nodes for the box, every column but the repeated last one
        when periodic. Shape (columns, ny - 1).
        """
        grid = self.__grid
        lifted = self.__wV + self.densityOnYFaces()
        u = self.__uV
        if self.__mode == BoundaryMode.HORIZONTAL_PERIODIC:
            d1 = (lifted - np.roll(lifted, 1, axis=0)) / grid.dx
            d2 = (u[:-1, 1:] - u[:-1, :-1]) / grid.dy
            return d1[:, 1:-1] - d2
        d1 = (lifted[1:, :] - lifted[:-1, :]) / grid.dx
        d2 = (u[1:-1, 1:] - u[1:-1, :-1]) / grid.dy
        return d1[:, 1:-1] - d2

    def curlNodeStream(self) -> np.ndarray:
        """
        psiV at the same nodes as buoyancyCurl.
        """
        if self.__mode == BoundaryMode.HORIZONTAL_PERIODIC:
            return self.__psiV[:-1, 1:-1]
        return self.__psiV[1:-1, 1:-1]

    def horizontalDensityGradient(self) -> np.ndarray:
        """
        d1 rho between horizontally adjacent cells.
        """
        rho = self.__rho
        if self.__mode == BoundaryMode.HORIZONTAL_PERIODIC:
            return (np.roll(rho, -1, axis=0) - rho) / self.__grid.dx
        return (rho[1:, :] - rho[:-1, :]) / self.__grid.dx


def _cellAverage(u: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return 0.5 * (u[:-1, :] + u[1:, :]), 0.5 * (w[:, :-1] + w[:, 1:])


def _netOutflow(u: np.ndarray, w: np.ndarray, grid: Grid) -> np.ndarray:
    """
    Net outward flux through the four faces of each cell.
    """
    return (u[1:, :] - u[:-1, :]) * grid.dy + (w[:, 1:] - w[:, :-1]) * grid.dx


def _asArray(values, name: str) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.ndim != 2:
        raise FieldError(f"{name} must be two dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise FieldError(f"{name} has non-finite entries")
    return array


def _checkShape(array: np.ndarray, shape: tuple[int, int], name: str):
    if array.shape != shape:
        raise FieldError(f"{name} has shape {array.shape}, expected {shape}")


def _checkStream(psi: np.ndarray, mode: BoundaryMode, tol: ToleranceConfig, name: str):
    walls = max(np.abs(psi[:, 0]).max(), np.abs(psi[:, -1]).max())
    if mode == BoundaryMode.IMPERMEABLE_BOX:
        walls = max(walls, np.abs(psi[0, :]).max(), np.abs(psi[-1, :]).max())
        if walls > tol.eqTol:
            raise FieldError(f"{name} must vanish on the boundary, found {walls:g}")
        return
    if walls > tol.eqTol:
        raise FieldError(f"{name} must vanish on the bottom and top walls, found {walls:g}")
    seam = np.abs(psi[0, :] - psi[-1, :]).max()
    if seam > tol.eqTol:
        raise FieldError(f"{name} must be periodic in x, seam mismatch {seam:g}")


def _checkFaceFluxes(u: np.ndarray, w: np.ndarray, mode: BoundaryMode, tol: ToleranceConfig):
    walls = max(np.abs(w[:, 0]).max(), np.abs(w[:, -1]).max())
    if walls > tol.eqTol:
        raise FieldError(f"flux through the bottom or top wall: {walls:g}")
    if mode == BoundaryMode.IMPERMEABLE_BOX:
        sides = max(np.abs(u[0, :]).max(), np.abs(u[-1, :]).max())
        if sides > tol.eqTol:
            raise FieldError(f"flux through a side wall: {sides:g}")
        return
    seam = np.abs(u[0, :] - u[-1, :]).max()
    if seam > tol.eqTol:
        raise FieldError(f"x-face flux must be periodic, seam mismatch {seam:g}")


def _prepare(psiV, rho, mode: BoundaryMode, Lx: float, Ly: float, tol: ToleranceConfig):
    rho = _asArray(rho, "rho")
    grid = Grid(rho.shape[0], rho.shape[1], Lx, Ly)
    psiV = _asArray(psiV, "psi_v")
    _checkShape(psiV, grid.nodeShape(), "psi_v")
    _checkStream(psiV, mode, tol, "psi_v")
    excess = np.abs(rho).max() - 1.0
    if excess > tol.eqTol:
        raise FieldError(f"|rho| exceeds 1 by {excess:g}")
    return grid, psiV, rho


def buildField(psiV,
               psiM,
               rho,
               mode: BoundaryMode = BoundaryMode.IMPERMEABLE_BOX,
               Lx: float = 1.0,
               Ly: float = 1.0,
               tol: ToleranceConfig = DEFAULT_TOLERANCE) -> DiscreteField:
    """
    A field with both v and m given by nodal stream functions.

    Raises FieldError on a shape mismatch, a boundary violation or
    |rho| > 1.
    """
    grid, psiV, rho = _prepare(psiV, rho, mode, Lx, Ly, tol)
    psiM = _asArray(psiM, "psi_m")
    _checkShape(psiM, grid.nodeShape(), "psi_m")
    _checkStream(psiM, mode, tol, "psi_m")
    uM, wM = facesFromStream(psiM, grid)
    return DiscreteField(grid, mode, rho, psiV, uM, wM, psiM)


def buildFluxField(psiV,
                   uM,
                   wM,
                   rho,
                   mode: BoundaryMode = BoundaryMode.IMPERMEABLE_BOX,
                   Lx: float = 1.0,
                   Ly: float = 1.0,
                   tol: ToleranceConfig = DEFAULT_TOLERANCE) -> DiscreteField:
    """
    A field whose m is given directly as face fluxes, for frames of a time
    dependent flow where m need not be divergence free. The normal flux on
    the walls must vanish.
    """
    grid, psiV, rho = _prepare(psiV, rho, mode, Lx, Ly, tol)
    uM = _asArray(uM, "m_x")
    wM = _asArray(wM, "m_y")
    _checkShape(uM, grid.xFaceShape(), "m_x")
    _checkShape(wM, grid.yFaceShape(), "m_y")
    _checkFaceFluxes(uM, wM, mode, tol)
    return DiscreteField(grid, mode, rho, psiV, uM, wM)
