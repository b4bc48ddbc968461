import math

import numpy as np
import pytest

from ipmhull.core.states import ToleranceConfig
from ipmhull.hull.regions import RegionTag
from ipmhull.subsolution.audit import auditStationary
from ipmhull.subsolution.discreteField import BoundaryMode
from ipmhull.subsolution.discreteField import Grid
from ipmhull.subsolution.discreteField import buildField

from tests.fieldSamples import bump
from tests.fieldSamples import heightDensity
from tests.fieldSamples import layers
from tests.fieldSamples import trivialField


class TestTrivialFamily:
    @pytest.mark.parametrize("n", [32, 64])
    def test_passes(self, n, tol):
        report = auditStationary(trivialField(n), tol)
        assert report.passed
        assert report.vEnergy == 0.0
        assert report.hullViolationMeasure == 0.0
        assert report.curlResidual == 0.0
        assert report.regionCounts[RegionTag.X1] == n * n
        assert report.chainTerms.signsConsistent()
        assert report.chainTerms.cleanSum <= report.chainTerms.chainUpper + 1e-12

    def test_hydrostatic_bound_is_the_mesh_slack(self, tol):
        for n in (32, 64):
            field = trivialField(n)
            report = auditStationary(field, tol)
            assert report.certifiedBound == pytest.approx(tol.eqTol * field.grid.dx)
        loose = ToleranceConfig(eqTol=1e-6)
        assert auditStationary(trivialField(32), loose).certifiedBound == pytest.approx(1e-6 / 32)

    def test_wire_format(self, tol):
        dumped = auditStationary(trivialField(8), tol).model_dump(by_alias=True, mode="json")
        assert dumped["pass"] is True
        assert dumped["region_counts"]["X1"] == 64
        assert dumped["chain_terms"]["flux_integral"] == 0.0


class TestDefects:
    def test_unbalanced_velocity_leaves_a_curl(self, tol):
        grid = Grid(16, 16)
        psi = bump(grid)
        report = auditStationary(buildField(psi, psi, np.ones(grid.cellShape())), tol)
        assert report.curlResidual > 0.0
        assert report.vEnergy > 0.0
        assert report.hullViolationMeasure == 0.0
        assert report.regionCounts[RegionTag.ON_K] == 256

    def test_shear_flux_leaves_the_hull(self, tol):
        grid = Grid(16, 16)
        field = buildField(np.zeros(grid.nodeShape()),
                           layers(grid),
                           np.zeros(grid.cellShape()),
                           BoundaryMode.HORIZONTAL_PERIODIC)
        report = auditStationary(field, tol)
        assert report.hullViolationMeasure > 0.0
        assert report.regionCounts[RegionTag.OUTSIDE] > 0

    @pytest.mark.parametrize("mode", list(BoundaryMode))
    def test_power_defect_is_controlled_by_the_curl(self, mode, tol):
        grid = Grid(24, 24)
        psi = layers(grid) if mode == BoundaryMode.HORIZONTAL_PERIODIC else bump(grid)
        field = buildField(0.3 * psi, np.zeros(grid.nodeShape()), heightDensity(grid) - 0.5, mode)
        report = auditStationary(field, tol)
        nodes = field.curlNodeStream()
        psiNorm = math.sqrt(float(np.sum(nodes * nodes)) * grid.cellArea)
        assert report.curlResidual > 0.0
        assert abs(report.powerDefect) <= psiNorm * report.curlResidual + 1e-10

    def test_divergences(self, tol):
        grid = Grid(16, 16)
        psi = bump(grid)
        report = auditStationary(buildField(psi, 0.2 * psi, heightDensity(grid)), tol)
        assert report.maxDivergenceV <= 1e-12
        assert report.maxDivergenceM <= 1e-12
        assert report.stabilityConstant > 0.0
        assert report.certifiedBound >= 0.0
