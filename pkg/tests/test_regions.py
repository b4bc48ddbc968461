import math

import numpy as np
import pytest

from ipmhull.core.errors import PreconditionError
from ipmhull.core.states import State
from ipmhull.hull.regions import ConeSide
from ipmhull.hull.regions import KRangeKind
from ipmhull.hull.regions import RegionTag
from ipmhull.hull.regions import classify
from ipmhull.hull.regions import classifyArray
from ipmhull.hull.regions import inCone
from ipmhull.hull.regions import isFlexible
from ipmhull.hull.regions import isRigid
from ipmhull.hull.regions import kRange
from ipmhull.hull.regions import powerBalance
from ipmhull.hull.separators import SeparatorId
from ipmhull.hull.separators import evalG
from ipmhull.hull.separators import inNonStationaryHull

from tests.hullSamples import sampleAnnulus
from tests.hullSamples import sampleCone
from tests.hullSamples import sampleHullPoint
from tests.hullSamples import sampleK
from tests.hullSamples import sampleX1
from tests.hullSamples import sampleX3


def _state(rho, v, m) -> State:
    return State(rho=rho, v=v, m=m)


class TestClassifyExamples:
    def test_stagnant(self, tol):
        region = classify(_state(0.5, (0.0, 0.0), (0.0, -0.75)), tol)
        assert region.tag == RegionTag.X1
        assert region.e == pytest.approx((0.0, -1.0))
        assert region.k is None

    def test_upper_cone(self, tol):
        region = classify(_state(0.0, (0.0, -0.5), (0.0, -0.75)), tol)
        assert region.tag == RegionTag.X2
        assert region.k == pytest.approx(1.5)
        assert region.kBound == pytest.approx(2.0)

    def test_rigid(self, tol):
        region = classify(_state(0.0, (1.0, 0.0), (0.0, 0.0)), tol)
        assert region.tag == RegionTag.X3
        assert region.k == 0.0

    def test_lower_cone(self, tol):
        region = classify(_state(0.0, (0.0, 0.5), (0.0, -0.5)), tol)
        assert region.tag == RegionTag.X4
        assert region.k == pytest.approx(-1.0)
        assert region.kBound == pytest.approx(-2.0)

    def test_not_parallel(self, tol):
        region = classify(_state(0.0, (1.0, 0.0), (0.0, 1.0)), tol)
        assert region.tag == RegionTag.OUTSIDE
        assert not region.inHull()

    def test_density_out_of_range(self, tol):
        assert classify(_state(1.5, (1.0, 0.0), (0.0, 0.0)), tol).tag == RegionTag.OUTSIDE

    def test_outside_the_disc(self, tol):
        assert classify(_state(0.0, (0.0, 0.0), (1.0, 0.0)), tol).tag == RegionTag.OUTSIDE

    def test_k_beyond_the_bound(self, tol):
        assert classify(_state(0.0, (0.0, -0.5), (0.0, -1.5)), tol).tag == RegionTag.OUTSIDE

    def test_wire_format(self, tol):
        dumped = classify(_state(0.0, (0.0, -0.5), (0.0, -0.75)), tol).model_dump(by_alias=True,
                                                                                  mode="json")
        assert dumped["tag"] == "X2"
        assert dumped["k_bound"] == pytest.approx(2.0)


class TestPrecedence:
    def test_k_points_are_on_k(self, rng, tol):
        for _ in range(500):
            assert classify(sampleK(rng), tol).tag == RegionTag.ON_K

    def test_cone_edges_go_to_the_cones(self, tol):
        # kBound = 1 exactly at rho = 0, v = (0, -1)
        assert classify(_state(0.0, (0.0, -1.0), (0.0, -1.0)), tol).tag == RegionTag.X2
        assert classify(_state(0.0, (0.0, 1.0), (0.0, -1.0)), tol).tag == RegionTag.X4

    def test_rigid_is_strict(self, tol):
        # k = kBound = 1 - 1e-12 sits on the closed cone edge
        rho = 0.0
        v = (0.0, -1.0 / (1.0 - 1e-12))
        b = -v[1] / (v[1] * v[1])
        region = classify(_state(rho, v, (b * v[0], b * v[1])), tol)
        assert region.tag == RegionTag.X2

    def test_stagnant_at_unit_density(self, tol):
        assert classify(_state(1.0, (0.0, 0.0), (0.0, 0.0)), tol).tag == RegionTag.ON_K
        assert classify(_state(1.0, (0.0, 0.0), (0.0, -0.1)), tol).tag == RegionTag.OUTSIDE


class TestKRange:
    def test_upper(self, tol):
        r = kRange(0.0, (0.0, -0.5), tol)
        assert r.kind == KRangeKind.FLEXIBLE
        assert (r.lo, r.hi) == pytest.approx((1.0, 2.0))

    def test_rigid(self, tol):
        r = kRange(0.0, (1.0, 0.0), tol)
        assert r.kind == KRangeKind.RIGID
        assert (r.lo, r.hi) == (0.0, 0.0)

    def test_lower(self, tol):
        r = kRange(0.0, (0.0, 0.5), tol)
        assert r.kind == KRangeKind.FLEXIBLE
        assert (r.lo, r.hi) == pytest.approx((-2.0, -1.0))

    def test_pure_fluid(self, tol):
        r = kRange(1.0, (1.0, 0.0), tol)
        assert (r.lo, r.hi) == (1.0, 1.0)

    def test_empty(self, tol):
        r = kRange(1.5, (1.0, 0.0), tol)
        assert r.kind == KRangeKind.EMPTY
        assert not r.contains(0.0, tol)

    def test_needs_velocity(self, tol):
        with pytest.raises(PreconditionError):
            kRange(0.0, (0.0, 0.0), tol)

    def test_classified_k_is_admissible(self, rng, tol):
        for _ in range(2000):
            z = sampleHullPoint(rng)
            region = classify(z, tol)
            if region.tag in (RegionTag.X2, RegionTag.X3, RegionTag.X4):
                assert kRange(z.rho, z.v, tol).contains(region.k, tol)


class TestCones:
    @pytest.mark.parametrize("balance, v, expected", [
        (1.0, (0.0, -1.0), 0.0),
        (0.0, (1.0, 0.0), 1.0),
        (0.5, (0.0, -0.5), 0.0),
    ])
    def test_power_balance(self, balance, v, expected):
        assert powerBalance(_state(balance, v, (7.0, -3.0))) == pytest.approx(expected)

    def test_examples(self, tol):
        assert inCone(_state(0.0, (0.0, -0.5), (0.0, 0.0)), ConeSide.UPPER, tol)
        assert inCone(_state(0.0, (0.0, 0.5), (0.0, 0.0)), ConeSide.LOWER, tol)
        assert not inCone(_state(0.0, (1.0, 0.0), (0.0, 0.0)), ConeSide.UPPER, tol)

    def test_cone_matches_k_range(self, rng, tol):
        for _ in range(5000):
            rho = rng.uniform(-0.99, 0.99)
            v = sampleAnnulus(rng)
            z = _state(rho, v, (0.0, 0.0))
            r = kRange(rho, v, tol)
            upper = r.kind == KRangeKind.FLEXIBLE and r.lo == 1.0
            lower = r.kind == KRangeKind.FLEXIBLE and r.hi == -1.0
            assert upper == inCone(z, ConeSide.UPPER, tol)
            assert lower == inCone(z, ConeSide.LOWER, tol)
            assert isFlexible(z, tol) == (upper or lower)
            assert isRigid(z, tol) == (r.kind == KRangeKind.RIGID)

    def test_stagnant_densities_lie_in_both_cones(self, tol):
        for rho in np.linspace(-1.0, 1.0, 21):
            z = _state(float(rho), (0.0, 0.0), (0.0, 0.0))
            assert inCone(z, ConeSide.UPPER, tol)
            assert inCone(z, ConeSide.LOWER, tol)


class TestSamplers:
    @pytest.mark.parametrize("sampler, tag", [
        (sampleX1, RegionTag.X1),
        (lambda rng: sampleCone(rng, True), RegionTag.X2),
        (sampleX3, RegionTag.X3),
        (lambda rng: sampleCone(rng, False), RegionTag.X4),
    ])
    def test_samples_classify_as_drawn(self, sampler, tag, rng, tol):
        for _ in range(500):
            assert classify(sampler(rng), tol).tag == tag

    def test_hull_points_satisfy_the_time_dependent_bound(self, rng, tol):
        for _ in range(2000):
            z = sampleHullPoint(rng)
            assert evalG(SeparatorId.G1, z) <= tol.eqTol
            assert inNonStationaryHull(z, tol)
            if math.hypot(*z.v) > tol.eqTol:
                assert abs(evalG(SeparatorId.G2, z)) <= 1e-12

    def test_array_classification_matches(self, rng, tol):
        states = [sampleHullPoint(rng) for _ in range(200)]
        states.append(_state(0.0, (1.0, 0.0), (0.0, 1.0)))
        tags = classifyArray(np.array([z.toArray() for z in states]), tol)
        assert tags == [classify(z, tol).tag for z in states]
