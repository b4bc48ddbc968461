"""
The state space of the decoupled stationary IPM system, the constitutive set
K and the wave cone.

A state is z = (rho, v, m) with the density rho, the velocity v and the
relaxed flux m. K holds the two pure fluids, |rho| = 1 and m = rho v. The
wave cone holds the directions along which plane waves are compatible with
div v = 0, div m = 0 and curl(v + (0, rho)) = 0.
"""
import math

from enum import Enum
from typing import Any
from typing import Optional

import numpy as np

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import field_validator

from ipmhull.core.errors import InvalidWaveDirectionError
from ipmhull.utils import Vec2
from ipmhull.utils import dot
from ipmhull.utils import norm
from ipmhull.utils import norm2
from ipmhull.utils import perp

DEFAULT_EQ_TOL = 1e-9

SAMPLE_BOX = 2.0
RHO_GAP = 1e-3
E_ARC = 1e-3

UP = (0.0, 1.0)


class BoundaryPolicy(Enum):
    """
    How inequalities are treated at set boundaries.

    CLOSED widens non-strict inequalities by eq_tol and narrows strict
    ones by eq_tol. STRICT compares exactly.
    """
    STRICT = "strict"
    CLOSED = "closed"


class ToleranceConfig(BaseModel):
    """
    Equality tolerance and boundary policy shared by every predicate.
    """
    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    eqTol: float = Field(default=DEFAULT_EQ_TOL, gt=0.0, alias="eq_tol")
    """ Scalar conditions hold when |expr| <= eqTol """
    boundaryPolicy: BoundaryPolicy = Field(default=BoundaryPolicy.CLOSED,
                                           alias="boundary_policy")

    def isZero(self, value: float) -> bool:
        return abs(value) <= self.eqTol

    def le(self, a: float, b: float) -> bool:
        """
        Non-strict a <= b under the boundary policy.
        """
        if self.boundaryPolicy == BoundaryPolicy.CLOSED:
            return a <= b + self.eqTol
        return a <= b

    def lt(self, a: float, b: float) -> bool:
        """
        Strict a < b under the boundary policy.
        """
        if self.boundaryPolicy == BoundaryPolicy.CLOSED:
            return a < b - self.eqTol
        return a < b


DEFAULT_TOLERANCE = ToleranceConfig()


class State(BaseModel):
    """
    A point z = (rho, v, m) of the state space.
    """
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    rho: float
    """ Dimensionless density """
    v: Vec2
    """ Velocity """
    m: Vec2
    """ Relaxed flux, m = rho v on K """

    @field_validator("v", "m", mode="before")
    @classmethod
    def _plainPair(cls, value: Any):
        """
        Lets numpy arrays stand in for 2-vectors.
        """
        if isinstance(value, np.ndarray):
            return tuple(float(x) for x in value.ravel())
        return value

    def toArray(self) -> np.ndarray:
        return np.array([self.rho, self.v[0], self.v[1], self.m[0], self.m[1]])

    @classmethod
    def fromArray(cls, values: np.ndarray) -> "State":
        return cls(rho=float(values[0]),
                   v=(float(values[1]), float(values[2])),
                   m=(float(values[3]), float(values[4])))

    def norm(self) -> float:
        return float(np.linalg.norm(self.toArray()))

    def __add__(self, other: "State") -> "State":
        return State.fromArray(self.toArray() + other.toArray())

    def __sub__(self, other: "State") -> "State":
        return State.fromArray(self.toArray() - other.toArray())

    def __mul__(self, scale: float) -> "State":
        return State.fromArray(scale * self.toArray())

    __rmul__ = __mul__


ZERO_STATE = State(rho=0.0, v=(0.0, 0.0), m=(0.0, 0.0))


class WaveForm(Enum):
    """
    The three parametrised branches of the wave cone.
    """
    SHEARED = "Sheared"
    HORIZONTAL_FLUX = "HorizontalFlux"
    PURE_FLUX = "PureFlux"


class WaveDirection(BaseModel):
    """
    A wave cone direction given by its branch parameters.

    Sheared:        (rho, (rho/2)(e - (0,1)), ell (e - (0,1)))
    HorizontalFlux: (rho, 0, (m1, 0))
    PureFlux:       (0, 0, m)
    """
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    form: WaveForm
    rho: float = 0.0
    """ Nonzero for Sheared and HorizontalFlux """
    e: Optional[Vec2] = None
    """ Unit vector other than (0,1), Sheared only """
    ell: float = 0.0
    m1: float = 0.0
    m: Optional[Vec2] = None
    """ PureFlux only """


def inK(z: State, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    """
    Is the state one of the two pure fluids, |rho| = 1 and m = rho v.
    """
    return (tol.isZero(abs(z.rho) - 1.0)
            and tol.isZero(z.m[0] - z.rho * z.v[0])
            and tol.isZero(z.m[1] - z.rho * z.v[1]))


def waveConeResiduals(z: State) -> tuple[float, float, float]:
    """
    The three quadratic conditions that cut out the wave cone:
    |v|^2 + rho v2, m . v_perp and m . (v + (0, rho)).
    """
    shifted = (z.v[0], z.v[1] + z.rho)
    return (norm2(z.v) + z.rho * z.v[1],
            dot(z.m, perp(z.v)),
            dot(z.m, shifted))


def inWaveCone(z: State, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    return all(tol.isZero(r) for r in waveConeResiduals(z))


def waveConeResidualArray(values: np.ndarray) -> np.ndarray:
    """
    waveConeResiduals over the rows (rho, v1, v2, m1, m2), shape (N, 3).
    """
    rho, v1, v2, m1, m2 = np.asarray(values, dtype=float).reshape(-1, 5).T
    return np.stack((v1 * v1 + v2 * v2 + rho * v2,
                     m2 * v1 - m1 * v2,
                     m1 * v1 + m2 * (v2 + rho)),
                    axis=1)


def checkWaveDirection(w: WaveDirection,
                       tol: ToleranceConfig = DEFAULT_TOLERANCE):
    """
    Raise InvalidWaveDirectionError unless the branch parameters are valid.
    """
    if w.form == WaveForm.SHEARED:
        if w.e is None:
            raise InvalidWaveDirectionError("Sheared direction needs e")
        if not tol.isZero(norm(w.e) - 1.0):
            raise InvalidWaveDirectionError(
                f"Sheared direction needs |e| = 1, got |e| = {norm(w.e)}")
        if norm((w.e[0] - UP[0], w.e[1] - UP[1])) <= tol.eqTol:
            raise InvalidWaveDirectionError("Sheared direction needs e != (0,1)")
        if tol.isZero(w.rho):
            raise InvalidWaveDirectionError("Sheared direction needs rho != 0")
    elif w.form == WaveForm.HORIZONTAL_FLUX:
        if tol.isZero(w.rho):
            raise InvalidWaveDirectionError(
                "HorizontalFlux direction needs rho != 0")
    elif w.m is None:
        raise InvalidWaveDirectionError("PureFlux direction needs m")


def realizeWaveDirection(w: WaveDirection,
                         tol: ToleranceConfig = DEFAULT_TOLERANCE) -> State:
    """
    Turn branch parameters into the wave cone state they describe.
    """
    checkWaveDirection(w, tol)
    if w.form == WaveForm.SHEARED:
        d = (w.e[0] - UP[0], w.e[1] - UP[1])
        half = 0.5 * w.rho
        return State(rho=w.rho,
                     v=(half * d[0], half * d[1]),
                     m=(w.ell * d[0], w.ell * d[1]))
    if w.form == WaveForm.HORIZONTAL_FLUX:
        return State(rho=w.rho, v=(0.0, 0.0), m=(w.m1, 0.0))
    return State(rho=0.0, v=(0.0, 0.0), m=w.m)


def _sampleRho(rng: np.random.Generator) -> float:
    """
    Uniform on [-2, 2] with the gap (-1e-3, 1e-3) removed.
    """
    magnitude = rng.uniform(RHO_GAP, SAMPLE_BOX)
    return float(magnitude if rng.random() < 0.5 else -magnitude)


def _sampleE(rng: np.random.Generator) -> Vec2:
    """
    Uniform on the unit circle minus an arc of length 1e-3 around (0,1).
    """
    theta = 0.5 * math.pi + 0.5 * E_ARC + rng.uniform(0.0, 2.0 * math.pi - E_ARC)
    return (math.cos(theta), math.sin(theta))


def sampleWaveDirection(rng: np.random.Generator) -> WaveDirection:
    """
    Draw a branch uniformly, then its parameters.
    """
    branch = int(rng.integers(3))
    if branch == 0:
        return WaveDirection(form=WaveForm.SHEARED,
                             rho=_sampleRho(rng),
                             e=_sampleE(rng),
                             ell=float(rng.uniform(-SAMPLE_BOX, SAMPLE_BOX)))
    if branch == 1:
        return WaveDirection(form=WaveForm.HORIZONTAL_FLUX,
                             rho=_sampleRho(rng),
                             m1=float(rng.uniform(-SAMPLE_BOX, SAMPLE_BOX)))
    m = rng.uniform(-SAMPLE_BOX, SAMPLE_BOX, size=2)
    return WaveDirection(form=WaveForm.PURE_FLUX, m=(float(m[0]), float(m[1])))


def sampleWaveCone(seed: int, count: int) -> list[State]:
    """
    Seeded wave cone states drawn over all three branches.
    """
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    rng = np.random.default_rng(seed)
    toRet = list[State]()
    for _ in range(count):
        toRet.append(realizeWaveDirection(sampleWaveDirection(rng)))
    return toRet


def recoverCovector(z: State,
                    tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Vec2:
    """
    The plane-wave covector xi of a wave cone state.

    Cases are tried in order: v + (0, rho) when it is nonzero, v_perp when
    v = (0, -rho) != 0, m_perp when rho = 0 = v and m != 0, (1, 1) for the
    zero state.
    """
    shifted = (z.v[0], z.v[1] + z.rho)
    if norm(shifted) > tol.eqTol:
        return shifted
    if norm(z.v) > tol.eqTol:
        return perp(z.v)
    if norm(z.m) > tol.eqTol:
        return perp(z.m)
    return (1.0, 1.0)


def planeWaveResiduals(z: State, xi: Vec2) -> tuple[float, float, float]:
    """
    The plane-wave conditions m . xi, v . xi and (v + (0, rho)) . xi_perp.
    """
    shifted = (z.v[0], z.v[1] + z.rho)
    return (dot(z.m, xi), dot(z.v, xi), dot(shifted, perp(xi)))
