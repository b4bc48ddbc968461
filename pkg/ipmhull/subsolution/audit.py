"""
Audit of a stationary field against the rigidity argument.

For a stationary subsolution,

0 <= int |v|^2 = -int rho v2 = int (m2 - rho v2) - int m2

and per region m2 - rho v2 is bounded by a non-positive quantity:

X2: (1 - rho) v2, X4: -(1 + rho) v2, X3: -(1 - rho^2) v2^2 / |v|^2,
v = 0: ((1 - rho^2)/2)(e2 - 1)

so v = 0. On a grid the identity picks up two defects, the curl residual of
v + (0, rho) and the cells that leave the hull. Both enter certifiedBound
through an explicit constant:

certifiedBound = max(0, S) + |int m2| + C (violation + curlResidual) + slack
C = |Omega| (max|m| + max|rho| max|v|) + ||psi_v||

where S sums m2 - rho v2 over the cells that classify inside the hull and
slack = eq_tol max(dx, dy) absorbs round-off in the sums. The slack is the
only mesh dependent term for a field that is exactly hydrostatic, so on such
a field the bound equals it.
"""
import logging
import math

import numpy as np

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field

from ipmhull.core.states import DEFAULT_TOLERANCE
from ipmhull.core.states import ToleranceConfig
from ipmhull.hull.regions import RegionTag
from ipmhull.hull.regions import classifyParts
from ipmhull.subsolution.discreteField import DiscreteField

logger = logging.getLogger(__name__)


class ChainTerms(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    upperCone: float = Field(alias="upper_cone")
    """ Integral over X2 of (1 - rho) v2, never positive """
    lowerCone: float = Field(alias="lower_cone")
    """ Integral over X4 of (1 + rho) v2, never negative; it enters the chain with a minus sign """
    rigid: float
    """ Integral over X3 of (1 - rho^2) v2^2 / |v|^2 """
    stagnant: float
    """ Integral over v = 0 of ((1 - rho^2)/2)(e2 - 1) """
    fluxIntegral: float = Field(alias="flux_integral")
    """ Integral of m2 """
    proportionality: float
    """ Integral over v != 0 of (k - rho) v2 """
    gravityWork: float = Field(alias="gravity_work")
    """ Minus the integral of rho v2 """
    cleanSum: float = Field(alias="clean_sum")
    """ Integral of m2 - rho v2 over cells inside the hull """
    chainUpper: float = Field(alias="chain_upper")
    """ upperCone - lowerCone - rigid + stagnant, which bounds cleanSum """

    def signsConsistent(self, tol: float = 0.0) -> bool:
        return (self.upperCone <= tol
                and self.lowerCone >= -tol
                and self.rigid >= -tol
                and self.stagnant <= tol)


class AuditReport(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    hullViolationMeasure: float = Field(alias="hull_violation_measure")
    """ Fraction of cells classifying Outside """
    curlResidual: float = Field(alias="curl_residual")
    """ L2 norm of the discrete curl of v + (0, rho) """
    chainTerms: ChainTerms = Field(alias="chain_terms")
    vEnergy: float = Field(alias="v_energy", ge=0.0)
    certifiedBound: float = Field(alias="certified_bound")
    stabilityConstant: float = Field(alias="stability_constant")
    powerDefect: float = Field(alias="power_defect")
    """ int v . (v + (0, rho)), at most ||psi_v|| curlResidual """
    maxDivergenceV: float = Field(alias="max_divergence_v")
    maxDivergenceM: float = Field(alias="max_divergence_m")
    horizontalDensityGradient: float = Field(alias="horizontal_density_gradient")
    """ L2 norm of d1 rho """
    regionCounts: dict[RegionTag, int] = Field(alias="region_counts")
    passed: bool = Field(alias="pass")


def auditStationary(field: DiscreteField,
                    tol: ToleranceConfig = DEFAULT_TOLERANCE) -> AuditReport:
    grid = field.grid
    area = grid.cellArea
    states = field.cellStates()
    rho = states[..., 0]
    v2 = states[..., 2]
    m2 = states[..., 4]

    counts = {tag: 0 for tag in RegionTag}
    upper = 0.0
    lower = 0.0
    rigid = 0.0
    stagnant = 0.0
    proportionality = 0.0
    clean = 0.0
    for row in states.reshape(-1, 5).tolist():
        r, a1, a2, b1, b2 = row
        tag, k, e, _ = classifyParts(r, (a1, a2), (b1, b2), tol)
        counts[tag] += 1
        if tag == RegionTag.OUTSIDE:
            continue
        clean += b2 - r * a2
        if k is not None:
            proportionality += (k - r) * a2
        if tag == RegionTag.X2:
            upper += (1.0 - r) * a2
        elif tag == RegionTag.X4:
            lower += (1.0 + r) * a2
        elif tag == RegionTag.X3:
            rigid += (1.0 - r * r) * a2 * a2 / (a1 * a1 + a2 * a2)
        elif tag == RegionTag.X1:
            stagnant += 0.5 * (1.0 - r * r) * (e[1] - 1.0)

    cells = rho.size
    violation = counts[RegionTag.OUTSIDE] / cells
    fluxIntegral = float(np.sum(m2) * area)
    gravityWork = -float(np.sum(rho * v2) * area)
    vEnergy = field.velocityEnergy()
    powerDefect = vEnergy - gravityWork

    curl = field.buoyancyCurl()
    curlResidual = math.sqrt(float(np.sum(curl * curl)) * area)
    psiNodes = field.curlNodeStream()
    psiNorm = math.sqrt(float(np.sum(psiNodes * psiNodes)) * area)

    v1 = states[..., 1]
    m1 = states[..., 3]
    supM = float(np.sqrt(m1 * m1 + m2 * m2).max())
    supV = float(np.sqrt(v1 * v1 + v2 * v2).max())
    supRho = float(np.abs(rho).max())
    constant = grid.area * (supM + supRho * supV) + psiNorm

    clean *= area
    slack = tol.eqTol * max(grid.dx, grid.dy)
    bound = max(0.0, clean) + abs(fluxIntegral) + constant * (violation + curlResidual) + slack

    gradient = field.horizontalDensityGradient()
    chain = ChainTerms(upperCone=upper * area,
                       lowerCone=lower * area,
                       rigid=rigid * area,
                       stagnant=stagnant * area,
                       fluxIntegral=fluxIntegral,
                       proportionality=proportionality * area,
                       gravityWork=gravityWork,
                       cleanSum=clean,
                       chainUpper=(upper - lower - rigid + stagnant) * area)
    report = AuditReport(hullViolationMeasure=violation,
                         curlResidual=curlResidual,
                         chainTerms=chain,
                         vEnergy=vEnergy,
                         certifiedBound=bound,
                         stabilityConstant=constant,
                         powerDefect=powerDefect,
                         maxDivergenceV=float(np.abs(field.velocityDivergence()).max()),
                         maxDivergenceM=float(np.abs(field.fluxDivergence()).max()),
                         horizontalDensityGradient=math.sqrt(
                             float(np.sum(gradient * gradient)) * area),
                         regionCounts=counts,
                         passed=vEnergy <= bound)
    logger.info("audit on %d x %d cells: v_energy %g, bound %g, %d cells outside",
                grid.nx,
                grid.ny,
                vEnergy,
                bound,
                counts[RegionTag.OUTSIDE])
    return report
