"""The three oscillator models driving the segmentation network.

Each model is a two-component ODE with one per-node control parameter that
sets its natural frequency, plus an additive coupling input:

* ``neural`` -- relaxation oscillator with a cubic fast nullcline and a
  sigmoid slow nullcline.  Control parameter: external stimulus I.
  Spikes for I > 0, sits at a stable fixed point for I < 0.
* ``bz`` -- two-sigmoid relaxation oscillator modeling an oscillating
  chemical redox reaction.  Control parameter: time constant tau of the
  activator (larger tau, slower oscillation).
* ``mems`` -- harmonic oscillator in Hopf normal form on a complex
  amplitude z.  Control parameter: natural angular frequency omega; the
  locked frequency is omega/2pi exactly when uncoupled.

All derivative functions are pure and accept scalars or numpy arrays
(broadcasting elementwise), so the same code serves single-oscillator
analysis and the vectorized grid integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class NeuralParams:
    """Parameters of the spiking relaxation oscillator.

    ``rho`` is a small constant offset (a fixed stand-in for a noise term),
    ``epsilon`` the slow-variable rate, ``gamma`` and ``beta`` the gain and
    width of the sigmoid nullcline.  ``stimulus_lo``/``stimulus_hi`` bound
    the stimulus I that pixel intensity is mapped onto.
    """

    rho: float = 0.02
    epsilon: float = 0.15
    gamma: float = 10.0
    beta: float = 0.1
    stimulus_lo: float = 2.0
    stimulus_hi: float = 4.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not self.stimulus_lo < self.stimulus_hi:
            raise ValueError("stimulus_lo must be < stimulus_hi")


@dataclass(frozen=True)
class NeuralState:
    """Excitatory (x) and inhibitory (y) variables of one neural oscillator."""

    x: float
    y: float


@dataclass(frozen=True)
class BzParams:
    """Parameters of the chemical relaxation oscillator.

    ``beta1``/``beta2`` are the sigmoid gains of the activator and inhibitor
    equations, ``theta`` the offset that selects oscillating vs quiescent
    mode, and ``tau_lo``/``tau_hi`` bound the activator time constant that
    pixel intensity is mapped onto.
    """

    beta1: float = 5.0
    beta2: float = 10.0
    theta: float = 0.5
    tau_lo: float = 0.01
    tau_hi: float = 0.11

    def __post_init__(self):
        if not self.beta1 > 0 or not self.beta2 > 0:
            raise ValueError("beta1 and beta2 must be > 0")
        if not self.tau_lo > 0:
            raise ValueError(f"tau_lo must be > 0, got {self.tau_lo}")
        if not self.tau_lo < self.tau_hi:
            raise ValueError("tau_lo must be < tau_hi")


@dataclass(frozen=True)
class BzState:
    """Activator (x1) and inhibitor (x2) concentrations of one oscillator."""

    x1: float
    x2: float


@dataclass(frozen=True)
class MemsParams:
    """Parameters of the harmonic (Hopf normal form) oscillator.

    ``damping_c`` is the linear growth rate, ``nonlinear_d`` the amplitude
    saturation coefficient (must be negative when damping_c is positive so
    a stable limit cycle of radius sqrt(-c/d) exists), and
    ``omega_lo``/``omega_hi`` bound the natural angular frequency that
    pixel intensity is mapped onto.
    """

    damping_c: float = 1.0
    nonlinear_d: float = -1.0
    omega_lo: float = 2.0 * math.pi
    omega_hi: float = 2.2 * math.pi

    def __post_init__(self):
        if self.damping_c > 0 and not self.nonlinear_d < 0:
            raise ValueError("nonlinear_d must be < 0 when damping_c > 0")
        if not self.omega_lo < self.omega_hi:
            raise ValueError("omega_lo must be < omega_hi")


@dataclass(frozen=True)
class MemsState:
    """Real and imaginary parts of the complex amplitude z."""

    z_re: float
    z_im: float


ModelParams = NeuralParams | BzParams | MemsParams


def neural_derivative(state: NeuralState, p: NeuralParams, stimulus_I,
                      coupling_S=0.0):
    """Time derivative of the neural oscillator.

    dx/dt = 3x - x^3 - y + 2 + rho + I + S
    dy/dt = epsilon * (gamma * (1 + tanh(x / beta)) - y)

    Returns ``(dx, dy)``.  Scalars or arrays; pure.
    """
    x, y = state.x, state.y
    dx = 3.0 * x - x ** 3 - y + 2.0 + p.rho + stimulus_I + coupling_S
    dy = p.epsilon * (p.gamma * (1.0 + np.tanh(x / p.beta)) - y)
    return dx, dy


def bz_sigmoid(x, beta):
    """Sigmoid nonlinearity (1 + tanh(beta * x)) / 2, bounded in (0, 1)."""
    return 0.5 * (1.0 + np.tanh(beta * x))


def bz_derivative(state: BzState, p: BzParams, tau, coupling_S=0.0):
    """Time derivative of the chemical oscillator.

    dx1/dt = (1/tau) * (-x1 + f(x1 - x2, beta1)) + S
    dx2/dt = -x2 + f(x1 - theta, beta2)

    where f is :func:`bz_sigmoid`.  The coupling enters outside the 1/tau
    factor.  Returns ``(dx1, dx2)``.
    """
    x1, x2 = state.x1, state.x2
    dx1 = (-x1 + bz_sigmoid(x1 - x2, p.beta1)) / tau + coupling_S
    dx2 = -x2 + bz_sigmoid(x1 - p.theta, p.beta2)
    return dx1, dx2


def mems_derivative(state: MemsState, p: MemsParams, omega, coupling_S=0.0):
    """Time derivative of the harmonic oscillator, in real/imaginary parts.

    dz/dt = (c + i*omega) * z + d * z * |z|^2 + S

    ``coupling_S`` may be a complex scalar/array or an ``(s_re, s_im)``
    pair (the grid integrator passes the pair to avoid complex temporaries).
    Returns ``(dz_re, dz_im)``.
    """
    re, im = state.z_re, state.z_im
    if isinstance(coupling_S, tuple):
        s_re, s_im = coupling_S
    elif isinstance(coupling_S, np.ndarray):
        s_re, s_im = coupling_S.real, coupling_S.imag
    else:
        s = complex(coupling_S)
        s_re, s_im = s.real, s.imag
    r2 = re * re + im * im
    dz_re = p.damping_c * re - omega * im + p.nonlinear_d * re * r2 + s_re
    dz_im = p.damping_c * im + omega * re + p.nonlinear_d * im * r2 + s_im
    return dz_re, dz_im


def fixed_point_check_inactive(p: NeuralParams, stimulus_I: float,
                               total_time: float = 300.0,
                               dt: float = 0.02,
                               tol: float = 1e-4) -> bool:
    """Whether the uncoupled neural oscillator settles to a fixed point.

    Integrates from a perturbed start and reports True when the state
    change per unit time over the final quarter of the run stays below
    ``tol`` (quiescent), False when it keeps oscillating.  Test utility;
    the segmentation pipeline only ever runs oscillators in their active
    mode.
    """
    y = np.array([0.1, 0.1])
    n = int(round(total_time / dt))
    tail_start = (3 * n) // 4
    max_rate = 0.0

    def f(s):
        dx, dy = neural_derivative(NeuralState(s[0], s[1]), p, stimulus_I)
        return np.array([dx, dy])

    for i in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        step = (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        y = y + step
        if i >= tail_start:
            rate = float(np.max(np.abs(step))) / dt
            if rate > max_rate:
                max_rate = rate
    return max_rate < tol


@dataclass(frozen=True)
class ModelInfo:
    """Everything the grid integrator needs to know about one model.

    ``derivative`` maps (state pair, params, control grid, coupling) to the
    pair of component derivatives.  ``event_level`` is the level whose
    upward crossings by component 0 define one oscillation cycle.
    ``complex_coupling`` marks models whose coupling input sums both state
    components (the harmonic model couples the full complex amplitude).
    ``coupling_style`` names how the neighbor signals combine into the
    coupling input (see network.COUPLING_STYLES).
    ``default_dt``/``default_window``/``default_total_time`` are the
    integration defaults sized off each model's frequency band.
    """

    name: str
    params_type: type
    event_level: float
    complex_coupling: bool
    control_bounds: Callable[[ModelParams], tuple[float, float]]
    derivative: Callable
    default_dt: float
    default_window: float
    default_total_time: float
    coupling_style: str = "sum"

    def initial_state(self, shape: tuple[int, int], jitter: float,
                      rng: np.random.Generator) -> np.ndarray:
        """Seeded initial condition of shape (2, H, W).

        Relaxation models start at the origin with uniform jitter of
        ``+-jitter`` on the fast component; the harmonic model starts on
        the circle |z| = 0.1 with seeded random phases (zero jitter means
        a common phase of 0, preserving grid symmetries).
        """
        state = np.zeros((2,) + shape)
        if self.name == "mems":
            if jitter > 0:
                phase = rng.uniform(0.0, 2.0 * np.pi, size=shape)
            else:
                phase = np.zeros(shape)
            state[0] = 0.1 * np.cos(phase)
            state[1] = 0.1 * np.sin(phase)
        elif jitter > 0:
            state[0] = rng.uniform(-jitter, jitter, size=shape)
        return state


def _neural_grid_derivative(state, params, control, coupling):
    return neural_derivative(NeuralState(state[0], state[1]), params,
                             control, coupling)


def _bz_grid_derivative(state, params, control, coupling):
    return bz_derivative(BzState(state[0], state[1]), params, control,
                         coupling)


def _mems_grid_derivative(state, params, control, coupling):
    return mems_derivative(MemsState(state[0], state[1]), params, control,
                           coupling)


MODELS: dict[str, ModelInfo] = {
    "neural": ModelInfo(
        name="neural",
        params_type=NeuralParams,
        event_level=0.0,
        complex_coupling=False,
        control_bounds=lambda p: (p.stimulus_lo, p.stimulus_hi),
        derivative=_neural_grid_derivative,
        default_dt=0.02,
        default_window=75.0,
        default_total_time=560.0,
    ),
    "bz": ModelInfo(
        name="bz",
        params_type=BzParams,
        event_level=0.5,
        complex_coupling=False,
        control_bounds=lambda p: (p.tau_lo, p.tau_hi),
        derivative=_bz_grid_derivative,
        default_dt=0.002,
        default_window=15.0,
        default_total_time=125.0,
    ),
    "mems": ModelInfo(
        name="mems",
        params_type=MemsParams,
        event_level=0.0,
        complex_coupling=True,
        control_bounds=lambda p: (p.omega_lo, p.omega_hi),
        derivative=_mems_grid_derivative,
        default_dt=0.002,
        default_window=5.0,
        default_total_time=40.0,
    ),
}


def model_for_params(params: ModelParams) -> ModelInfo:
    """Look up the ModelInfo matching a params instance."""
    for info in MODELS.values():
        if isinstance(params, info.params_type):
            return info
    raise TypeError(f"unknown parameter type {type(params).__name__}")
