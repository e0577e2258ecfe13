"""Unit tests for the oscillator model derivatives and mode checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscseg import (BzParams, BzState, MemsParams, MemsState, NeuralParams,
                    NeuralState, bz_derivative, bz_sigmoid,
                    fixed_point_check_inactive, mems_derivative,
                    neural_derivative)

FIG1 = dict(rho=0.02, epsilon=0.1, gamma=4.0, beta=0.1,
            stimulus_lo=-2.0, stimulus_hi=2.0)


class TestNeuralDerivative:
    def test_origin_with_stimulus(self):
        p = NeuralParams()
        dx, dy = neural_derivative(NeuralState(0.0, 0.0), p, stimulus_I=2.0)
        assert dx == pytest.approx(4.02, abs=1e-12)

    def test_dy_vanishes_on_nullcline(self):
        p = NeuralParams(**FIG1)
        _, dy = neural_derivative(NeuralState(0.0, p.gamma), p, stimulus_I=1.0)
        assert dy == 0.0

    def test_dy_at_origin(self):
        p = NeuralParams(**FIG1)
        _, dy = neural_derivative(NeuralState(0.0, 0.0), p, stimulus_I=1.0)
        assert dy == pytest.approx(0.4, abs=1e-12)

    def test_pure_function_bitwise(self):
        p = NeuralParams()
        state = NeuralState(0.37, -1.2)
        first = neural_derivative(state, p, 3.1, 0.05)
        second = neural_derivative(state, p, 3.1, 0.05)
        assert first == second

    def test_accepts_arrays(self):
        p = NeuralParams()
        x = np.array([0.0, 1.0])
        y = np.array([0.0, 0.5])
        dx, dy = neural_derivative(NeuralState(x, y), p, np.array([2.0, 4.0]))
        assert dx.shape == (2,)
        assert dx[0] == pytest.approx(4.02)

    def test_invariant_validation(self):
        with pytest.raises(ValueError):
            NeuralParams(epsilon=0.0)
        with pytest.raises(ValueError):
            NeuralParams(beta=-1.0)
        with pytest.raises(ValueError):
            NeuralParams(stimulus_lo=4.0, stimulus_hi=2.0)


class TestBzSigmoid:
    def test_midpoint(self):
        assert bz_sigmoid(0.0, 5.0) == 0.5

    def test_saturation(self):
        assert bz_sigmoid(1e6, 3.0) == pytest.approx(1.0)
        assert bz_sigmoid(-1e6, 3.0) == pytest.approx(0.0)

    def test_closed_form_value(self):
        expected = (1.0 + math.tanh(-5.0)) / 2.0
        assert bz_sigmoid(-0.5, 10.0) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(4.54e-5, rel=1e-2)

    @given(x=st.floats(-50, 50), beta=st.floats(0.01, 50))
    @settings(max_examples=200, deadline=None)
    def test_bounded_and_monotone(self, x, beta):
        value = bz_sigmoid(x, beta)
        assert 0.0 <= value <= 1.0
        step = bz_sigmoid(x + 1e-3, beta)
        assert step >= value


class TestBzDerivative:
    def test_origin(self):
        p = BzParams(theta=0.5, beta1=5.0, beta2=10.0)
        dx1, dx2 = bz_derivative(BzState(0.0, 0.0), p, tau=0.06)
        assert dx1 == pytest.approx(0.5 / 0.06, rel=1e-12)
        assert dx2 == pytest.approx((1 + math.tanh(-5.0)) / 2, rel=1e-12)

    def test_inhibitor_nullcline(self):
        p = BzParams()
        x1 = 0.37
        x2 = bz_sigmoid(x1 - p.theta, p.beta2)
        _, dx2 = bz_derivative(BzState(x1, x2), p, tau=0.06)
        assert dx2 == 0.0

    def test_invariant_validation(self):
        with pytest.raises(ValueError):
            BzParams(tau_lo=0.0)
        with pytest.raises(ValueError):
            BzParams(tau_lo=0.2, tau_hi=0.1)
        with pytest.raises(ValueError):
            BzParams(beta1=-1.0)


class TestMemsDerivative:
    def test_origin_fixed_point(self):
        p = MemsParams()
        dre, dim = mems_derivative(MemsState(0.0, 0.0), p, omega=2 * math.pi)
        assert dre == 0.0 and dim == 0.0

    def test_unit_circle_rotation(self):
        p = MemsParams(damping_c=1.0, nonlinear_d=-1.0)
        dre, dim = mems_derivative(MemsState(1.0, 0.0), p, omega=2 * math.pi)
        # real parts cancel at |z| = 1; remaining motion is i*omega*z
        assert dre == pytest.approx(0.0, abs=1e-15)
        assert dim == pytest.approx(2 * math.pi, rel=1e-12)

    def test_limit_cycle_radius_is_invariant(self):
        p = MemsParams(damping_c=1.0, nonlinear_d=-1.0)
        rng = np.random.default_rng(7)
        for _ in range(20):
            phi = rng.uniform(0, 2 * math.pi)
            re, im = math.cos(phi), math.sin(phi)
            dre, dim = mems_derivative(MemsState(re, im), p, omega=5.0)
            radial = 2 * (re * dre + im * dim)    # d|z|^2/dt
            assert radial == pytest.approx(0.0, abs=1e-12)

    def test_amplitude_attracts_to_unit_circle(self):
        p = MemsParams(damping_c=1.0, nonlinear_d=-1.0)
        rng = np.random.default_rng(11)
        for _ in range(100):
            re, im = rng.uniform(-3, 3, size=2)
            if re == 0 and im == 0:
                continue
            dre, dim = mems_derivative(MemsState(re, im), p, omega=3.0)
            radial = 2 * (re * dre + im * dim)
            r2 = re * re + im * im
            assert np.sign(radial) == np.sign(1.0 - r2) or radial == 0

    def test_complex_coupling_forms_agree(self):
        p = MemsParams()
        s = 0.3 - 0.7j
        via_complex = mems_derivative(MemsState(0.5, -0.2), p, 6.0, s)
        via_pair = mems_derivative(MemsState(0.5, -0.2), p, 6.0,
                                   (s.real, s.imag))
        assert via_complex == via_pair

    def test_invariant_validation(self):
        with pytest.raises(ValueError):
            MemsParams(damping_c=1.0, nonlinear_d=0.5)
        with pytest.raises(ValueError):
            MemsParams(omega_lo=7.0, omega_hi=6.0)


class TestHighPrecisionOracle:
    """Guard against transcription slips in the cubic/sigmoid terms."""

    def test_neural_matches_mpmath(self):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 50
        p = NeuralParams()
        rng = np.random.default_rng(3)
        for _ in range(100):
            x, y = rng.uniform(-2.5, 2.5, size=2)
            stim = rng.uniform(2.0, 4.0)
            s = rng.uniform(-0.5, 0.5)
            dx, dy = neural_derivative(NeuralState(x, y), p, stim, s)
            ex = 3 * mp.mpf(x) - mp.mpf(x) ** 3 - mp.mpf(y) + 2 \
                + mp.mpf(p.rho) + mp.mpf(stim) + mp.mpf(s)
            ey = mp.mpf(p.epsilon) * (mp.mpf(p.gamma)
                                      * (1 + mp.tanh(mp.mpf(x) / mp.mpf(p.beta)))
                                      - mp.mpf(y))
            assert abs(dx - float(ex)) <= 1e-12 * max(1.0, abs(float(ex)))
            assert abs(dy - float(ey)) <= 1e-12 * max(1.0, abs(float(ey)))

    def test_bz_matches_mpmath(self):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 50
        p = BzParams()
        rng = np.random.default_rng(5)
        for _ in range(100):
            x1, x2 = rng.uniform(-1.0, 2.0, size=2)
            tau = rng.uniform(0.01, 0.11)
            s = rng.uniform(-0.5, 0.5)
            dx1, dx2 = bz_derivative(BzState(x1, x2), p, tau, s)
            f1 = (1 + mp.tanh(mp.mpf(p.beta1) * (mp.mpf(x1) - mp.mpf(x2)))) / 2
            f2 = (1 + mp.tanh(mp.mpf(p.beta2) * (mp.mpf(x1) - mp.mpf(p.theta)))) / 2
            ex1 = (-mp.mpf(x1) + f1) / mp.mpf(tau) + mp.mpf(s)
            ex2 = -mp.mpf(x2) + f2
            assert abs(dx1 - float(ex1)) <= 1e-12 * max(1.0, abs(float(ex1)))
            assert abs(dx2 - float(ex2)) <= 1e-12 * max(1.0, abs(float(ex2)))


class TestInactiveMode:
    def test_negative_stimulus_is_stable(self):
        p = NeuralParams(**FIG1)
        assert fixed_point_check_inactive(p, -1.0) is True

    def test_positive_stimulus_oscillates(self):
        p = NeuralParams(**FIG1)
        assert fixed_point_check_inactive(p, 1.0) is False

    def test_strongly_negative_stimulus_is_stable(self):
        p = NeuralParams(**FIG1)
        assert fixed_point_check_inactive(p, -10.0) is True
