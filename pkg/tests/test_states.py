import numpy as np
import numpy.testing as npt
import pytest

from pydantic import ValidationError

from ipmhull.core.errors import InvalidWaveDirectionError
from ipmhull.core.states import BoundaryPolicy
from ipmhull.core.states import State
from ipmhull.core.states import ToleranceConfig
from ipmhull.core.states import WaveDirection
from ipmhull.core.states import WaveForm
from ipmhull.core.states import ZERO_STATE
from ipmhull.core.states import inK
from ipmhull.core.states import inWaveCone
from ipmhull.core.states import planeWaveResiduals
from ipmhull.core.states import realizeWaveDirection
from ipmhull.core.states import recoverCovector
from ipmhull.core.states import sampleWaveCone
from ipmhull.core.states import sampleWaveDirection
from ipmhull.core.states import waveConeResidualArray
from ipmhull.core.states import waveConeResiduals


def _state(rho, v, m) -> State:
    return State(rho=rho, v=v, m=m)


class TestTolerance:
    def test_defaults(self):
        tol = ToleranceConfig()
        assert tol.eqTol == 1e-9
        assert tol.boundaryPolicy == BoundaryPolicy.CLOSED

    def test_wire_names(self):
        tol = ToleranceConfig.model_validate({"eq_tol": 1e-6, "boundary_policy": "strict"})
        assert tol.eqTol == 1e-6
        assert tol.boundaryPolicy == BoundaryPolicy.STRICT

    def test_rejects_non_positive(self):
        with pytest.raises(ValidationError):
            ToleranceConfig(eqTol=0.0)

    def test_closed_policy_widens(self):
        tol = ToleranceConfig(eqTol=1e-6)
        assert tol.le(1.0 + 5e-7, 1.0)
        assert not tol.lt(1.0 - 5e-7, 1.0)

    def test_strict_policy_is_exact(self):
        tol = ToleranceConfig(eqTol=1e-6, boundaryPolicy=BoundaryPolicy.STRICT)
        assert not tol.le(1.0 + 5e-7, 1.0)
        assert tol.lt(1.0 - 5e-7, 1.0)


class TestStateArithmetic:
    def test_array_round_trip(self):
        z = _state(0.5, (1.0, -2.0), (3.0, 4.0))
        npt.assert_array_equal(z.toArray(), [0.5, 1.0, -2.0, 3.0, 4.0])
        assert State.fromArray(z.toArray()) == z

    def test_combination(self):
        a = _state(1.0, (2.0, 0.0), (2.0, 0.0))
        b = _state(-1.0, (0.0, 2.0), (0.0, -2.0))
        mixed = 0.5 * a + 0.5 * b
        npt.assert_allclose(mixed.toArray(), [0.0, 1.0, 1.0, 1.0, -1.0])
        npt.assert_allclose((a - a).toArray(), ZERO_STATE.toArray())

    def test_rejects_nan(self):
        with pytest.raises(ValidationError):
            State(rho=float("nan"), v=(0.0, 0.0), m=(0.0, 0.0))

    def test_numpy_pairs(self):
        z = State(rho=0.0, v=np.array([1.0, 2.0]), m=np.array([3.0, 4.0]))
        assert z.v == (1.0, 2.0)
        assert type(z.m[0]) is float
        with pytest.raises(ValidationError):
            State(rho=0.0, v=np.array([1.0, 2.0, 3.0]), m=(0.0, 0.0))

    def test_json_schema(self):
        z = State.model_validate_json('{"rho": 1, "v": [2, 3], "m": [2, 3]}')
        assert z == _state(1.0, (2.0, 3.0), (2.0, 3.0))


class TestInK:
    @pytest.mark.parametrize("z, expected", [
        (_state(1.0, (2.0, 3.0), (2.0, 3.0)), True),
        (_state(-1.0, (0.0, 1.0), (0.0, -1.0)), True),
        (_state(0.0, (1.0, 0.0), (0.0, 0.0)), False),
        (_state(1.0, (1.0, 0.0), (0.5, 0.0)), False),
    ])
    def test_examples(self, z, expected, tol):
        assert inK(z, tol) is expected

    def test_within_tolerance(self, tol):
        assert inK(_state(1.0 + 1e-10, (1.0, 1.0), (1.0, 1.0 - 1e-10)), tol)


class TestWaveCone:
    @pytest.mark.parametrize("z, expected", [
        (_state(2.0, (0.0, 0.0), (5.0, 0.0)), True),
        (_state(0.0, (0.0, 0.0), (3.0, 4.0)), True),
        (_state(0.0, (1.0, 0.0), (0.0, 0.0)), False),
        (_state(2.0, (1.0, -1.0), (3.0, -3.0)), True),
    ])
    def test_examples(self, z, expected, tol):
        assert inWaveCone(z, tol) is expected

    def test_residuals(self):
        assert waveConeResiduals(_state(0.0, (1.0, 0.0), (0.0, 0.0))) == (1.0, 0.0, 0.0)
        assert waveConeResiduals(_state(0.0, (1.0, 0.0), (0.0, 1.0))) == (1.0, 1.0, 0.0)

    def test_residual_array_matches(self, rng):
        values = rng.uniform(-2.0, 2.0, size=(50, 5))
        expected = [waveConeResiduals(State.fromArray(row)) for row in values]
        npt.assert_allclose(waveConeResidualArray(values), expected, atol=1e-14)

    def test_is_a_cone(self, tol):
        for z in sampleWaveCone(3, 200):
            for scale in (-3.0, -0.5, 0.0, 0.25, 2.0):
                assert inWaveCone(scale * z, tol)


class TestRealize:
    def test_sheared(self, tol):
        w = WaveDirection(form=WaveForm.SHEARED, rho=2.0, e=(1.0, 0.0), ell=3.0)
        assert realizeWaveDirection(w, tol) == _state(2.0, (1.0, -1.0), (3.0, -3.0))

    def test_horizontal_flux(self, tol):
        w = WaveDirection(form=WaveForm.HORIZONTAL_FLUX, rho=-1.0, m1=0.5)
        assert realizeWaveDirection(w, tol) == _state(-1.0, (0.0, 0.0), (0.5, 0.0))

    def test_pure_flux_zero(self, tol):
        w = WaveDirection(form=WaveForm.PURE_FLUX, m=(0.0, 0.0))
        assert realizeWaveDirection(w, tol) == ZERO_STATE

    @pytest.mark.parametrize("w", [
        WaveDirection(form=WaveForm.SHEARED, rho=1.0, e=(2.0, 0.0), ell=1.0),
        WaveDirection(form=WaveForm.SHEARED, rho=0.0, e=(1.0, 0.0), ell=1.0),
        WaveDirection(form=WaveForm.SHEARED, rho=1.0, e=(0.0, 1.0), ell=1.0),
        WaveDirection(form=WaveForm.SHEARED, rho=1.0, ell=1.0),
        WaveDirection(form=WaveForm.HORIZONTAL_FLUX, rho=0.0, m1=1.0),
        WaveDirection(form=WaveForm.PURE_FLUX),
    ])
    def test_invalid_parameters(self, w, tol):
        with pytest.raises(InvalidWaveDirectionError):
            realizeWaveDirection(w, tol)

    def test_every_sampled_direction_is_in_the_cone(self, rng, tol):
        forms = set()
        for _ in range(2000):
            w = sampleWaveDirection(rng)
            forms.add(w.form)
            z = realizeWaveDirection(w, tol)
            assert max(abs(r) for r in waveConeResiduals(z)) <= 1e-12
        assert forms == set(WaveForm)


class TestSampling:
    def test_empty(self):
        assert sampleWaveCone(7, 0) == []

    def test_all_in_cone(self, tol):
        states = sampleWaveCone(7, 100)
        assert len(states) == 100
        assert all(inWaveCone(z, tol) for z in states)

    def test_deterministic(self):
        assert sampleWaveCone(7, 100) == sampleWaveCone(7, 100)

    def test_negative_count(self):
        with pytest.raises(ValueError):
            sampleWaveCone(7, -1)

    @pytest.mark.slow
    def test_large_sample_residuals(self):
        states = sampleWaveCone(11, 100000)
        values = np.array([z.toArray() for z in states])
        assert np.abs(waveConeResidualArray(values)).max() <= 1e-12


class TestCovector:
    def test_plane_wave_conditions_hold(self, tol):
        for z in sampleWaveCone(5, 500):
            xi = recoverCovector(z, tol)
            assert np.hypot(*xi) > 0.0
            assert max(abs(r) for r in planeWaveResiduals(z, xi)) <= 1e-12

    def test_case_order(self, tol):
        assert recoverCovector(_state(2.0, (0.0, -2.0), (0.0, 0.0)), tol) == (2.0, 0.0)
        assert recoverCovector(_state(0.0, (0.0, 0.0), (3.0, 4.0)), tol) == (-4.0, 3.0)
        assert recoverCovector(ZERO_STATE, tol) == (1.0, 1.0)
