import numpy as np
import pytest

from ipmhull.core.errors import PreconditionError
from ipmhull.core.states import State
from ipmhull.core.states import WaveDirection
from ipmhull.core.states import WaveForm
from ipmhull.core.states import ZERO_STATE
from ipmhull.core.states import realizeWaveDirection
from ipmhull.core.states import sampleWaveCone
from ipmhull.hull.separators import SeparatorId
from ipmhull.hull.separators import checkAlong
from ipmhull.hull.separators import checkConvexAlong
from ipmhull.hull.separators import evalG
from ipmhull.hull.separators import lambdaAffineQuadratics
from ipmhull.hull.separators import separationBound

from tests.hullSamples import sampleHullPoint
from tests.hullSamples import sampleK


def _state(rho, v, m) -> State:
    return State(rho=rho, v=v, m=m)


def _randomState(rng: np.random.Generator) -> State:
    return State.fromArray(rng.uniform(-2.0, 2.0, size=5))


class TestEvaluate:
    @pytest.mark.parametrize("which, z, expected", [
        (SeparatorId.G1, _state(1.0, (3.0, -2.0), (3.0, -2.0)), 0.0),
        (SeparatorId.G2, _state(0.0, (1.0, 0.0), (0.0, 1.0)), 1.0),
        (SeparatorId.G3, _state(1.0, (5.0, 7.0), (5.0, 7.0)), 0.0),
        (SeparatorId.G4, _state(-1.0, (2.0, 2.0), (-2.0, -2.0)), 0.0),
    ])
    def test_examples(self, which, z, expected):
        assert evalG(which, z) == pytest.approx(expected, abs=1e-12)

    def test_vanish_on_k(self, rng):
        for _ in range(10000):
            z = sampleK(rng)
            for which in SeparatorId:
                assert abs(evalG(which, z)) <= 1e-12


class TestSeparation:
    def test_k_beyond_the_time_dependent_bound(self, tol):
        report = separationBound(_state(0.0, (0.0, -0.5), (0.0, -1.5)), tol)
        assert report.values[SeparatorId.G1].value > 0.0
        assert SeparatorId.G1 in report.firing()

    def test_k_below_the_upper_cone(self, tol):
        report = separationBound(_state(0.0, (0.0, -0.5), (0.0, -0.25)), tol)
        assert report.values[SeparatorId.G3].separates
        assert report.separated()

    def test_two_sided_affine_separator(self, tol):
        for sign in (1.0, -1.0):
            report = separationBound(_state(0.0, (1.0, 0.0), (0.0, sign)), tol)
            assert report.values[SeparatorId.G2].separates

    def test_k_is_never_separated(self, rng, tol):
        for _ in range(1000):
            assert not separationBound(sampleK(rng), tol).separated()

    def test_hull_points_are_never_separated(self, rng, tol):
        for _ in range(2000):
            z = sampleHullPoint(rng)
            assert separationBound(z, tol).firing() == []

    def test_report_wire_format(self, tol):
        dumped = separationBound(_state(0.0, (1.0, 0.0), (0.0, 1.0)), tol).model_dump(mode="json")
        assert set(dumped["values"]) == {"G1", "G2", "G3", "G4"}
        assert dumped["values"]["G2"] == {"value": 1.0, "separates": True}


class TestConvexity:
    @pytest.mark.parametrize("which", list(SeparatorId))
    def test_along_sampled_lines(self, which, rng, tol):
        for direction in sampleWaveCone(17, 500):
            report = checkConvexAlong(which, _randomState(rng), direction, tol=tol)
            assert report.passed
            assert report.minSecondDifference >= -1e-9
            if which == SeparatorId.G2:
                assert report.maxAbsSecondDifference <= 1e-12

    @pytest.mark.slow
    def test_large_sample(self, rng, tol):
        for direction in sampleWaveCone(19, 10000):
            z0 = _randomState(rng)
            for which in SeparatorId:
                report = checkConvexAlong(which, z0, direction, tol=tol)
                assert report.passed
                if which == SeparatorId.G2:
                    assert report.maxAbsSecondDifference <= 1e-12

    def test_pure_flux_from_the_origin(self, tol):
        direction = realizeWaveDirection(WaveDirection(form=WaveForm.PURE_FLUX, m=(1.0, 0.0)))
        report = checkConvexAlong(SeparatorId.G1,
                                  ZERO_STATE,
                                  direction,
                                  np.array([-1.0, 0.0, 1.0]),
                                  tol)
        assert report.passed

    def test_uneven_samples(self, rng, tol):
        ts = np.sort(rng.uniform(-1.0, 1.0, size=15))
        for direction in sampleWaveCone(23, 100):
            report = checkConvexAlong(SeparatorId.G3, _randomState(rng), direction, ts, tol)
            assert report.passed

    def test_needs_a_wave_cone_direction(self, tol):
        with pytest.raises(PreconditionError):
            checkConvexAlong(SeparatorId.G1, ZERO_STATE, _state(0.0, (1.0, 0.0), (0.0, 0.0)),
                             tol=tol)

    def test_needs_three_samples(self, tol):
        direction = _state(0.0, (0.0, 0.0), (1.0, 0.0))
        with pytest.raises(PreconditionError):
            checkConvexAlong(SeparatorId.G1, ZERO_STATE, direction, np.array([0.0, 1.0]), tol)

    def test_non_convex_function_fails(self, tol):
        direction = _state(0.0, (0.0, 0.0), (1.0, 0.0))
        report = checkAlong(lambda z: -z.m[0] * z.m[0], False, ZERO_STATE, direction, tol=tol)
        assert not report.passed
        assert report.minSecondDifference < 0.0

    @pytest.mark.parametrize("index", [0, 1, 2])
    def test_affine_quadratics(self, index, rng, tol):
        for direction in sampleWaveCone(29, 300):
            report = checkAlong(lambda z: lambdaAffineQuadratics(z)[index],
                                True,
                                _randomState(rng),
                                direction,
                                tol=tol)
            assert report.passed
