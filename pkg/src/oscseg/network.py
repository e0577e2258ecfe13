"""Oscillator grid construction, neighbor coupling, and time integration.

One oscillator per pixel.  Each node is coupled to every in-bounds node
within Chebyshev distance ``radius`` (radius 1 is the 8-cell Moore
neighborhood): its coupling input is the coupling coefficient times the
plain sum of the neighbors' output signals, with no normalization, so
boundary nodes simply receive fewer contributions.  The whole network is
advanced synchronously with classical fixed-step RK4; within a substage
every node sees the same intermediate state snapshot.

``simulate`` integrates until the per-node frequency estimates (taken on
trailing windows every ``window`` time units) stop changing by more than
``convergence_tol``, or until ``total_time`` elapses.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import _fast
from .errors import NumericalBlowup
from .frequency import FrequencyMap, NodeFlag
from .images import GrayImage
from .models import MODELS, ModelInfo, ModelParams, NeuralParams, \
    model_for_params


# how neighbor outputs combine into one node's coupling input:
#   sum             c * sum(neighbor outputs)
#   laplacian       c * sum(neighbor outputs - own output)
#   sum-rate        like sum, divided by the node's time constant
#   laplacian-rate  like laplacian, divided by the node's time constant
# The -rate forms only make sense for the chemical model, whose control
# parameter is a time constant; they put the coupling on the same rate
# scale as the activator kinetics, the way a diffusing species would be.
COUPLING_STYLES = ("sum", "laplacian", "sum-rate", "laplacian-rate")


def _style_flags(style: str) -> tuple[bool, bool]:
    if style not in COUPLING_STYLES:
        raise ValueError(f"unknown coupling style {style!r}; "
                         f"known: {COUPLING_STYLES}")
    return ("laplacian" in style, style.endswith("-rate"))


@dataclass(frozen=True)
class CouplingSpec:
    """Neighborhood radius and strength of the nearest-neighbor coupling.

    ``style`` overrides the model's default combination rule (see
    COUPLING_STYLES); None keeps the model default.
    """

    coefficient: float
    radius: int = 1
    include_self: bool = False
    style: str | None = None

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")
        if not self.coefficient >= 0:
            raise ValueError(f"coefficient must be >= 0, "
                             f"got {self.coefficient}")
        if self.style is not None:
            _style_flags(self.style)


@dataclass(frozen=True)
class SimConfig:
    """Integration and frequency-readout settings.

    The trace before ``transient_fraction * total_time`` is never used for
    estimation.  ``jitter`` is the amplitude of the seeded initial-state
    perturbation that lets a symmetric network desynchronize (0 disables
    it, making mirror-image inputs produce mirror-image outputs).
    ``rho_jitter`` redraws the neural offset term per node, uniform in
    [-rho, +rho]; off by default.  ``event_level`` overrides the model's
    crossing level when set.
    """

    dt: float
    total_time: float
    window: float
    transient_fraction: float = 0.0
    convergence_tol: float = 1e-3
    seed: int = 0
    jitter: float = 0.01
    rho_jitter: bool = False
    event_level: float | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.window >= self.dt:
            raise ValueError("window must be at least one step long")
        if not 0.0 <= self.transient_fraction < 1.0:
            raise ValueError("transient_fraction must lie in [0, 1)")
        if self.transient_fraction * self.total_time + self.window \
                > self.total_time:
            raise ValueError("total_time leaves no room for one "
                             "estimation window after the transient")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be > 0")
        if not self.jitter >= 0:
            raise ValueError("jitter must be >= 0")


def default_sim_config(model: str | ModelInfo, seed: int = 0,
                       **overrides) -> SimConfig:
    """Per-model SimConfig defaults (dt sized to the model's fast branch)."""
    info = MODELS[model] if isinstance(model, str) else model
    settings = dict(dt=info.default_dt, window=info.default_window,
                    total_time=info.default_total_time, seed=seed)
    settings.update(overrides)
    return SimConfig(**settings)


@dataclass
class NetworkState:
    """Whole-grid dynamical state at one time instant.

    ``per_node_param`` holds the mapped control parameter (stimulus I,
    time constant tau, or angular frequency omega) per node;
    ``states`` is the (2, H, W) stack of model state components.
    """

    model: str
    params: ModelParams
    per_node_param: np.ndarray
    states: np.ndarray
    time: float = 0.0

    @property
    def shape(self) -> tuple[int, int]:
        return self.per_node_param.shape


def neighborhood(pos: tuple[int, int], dims: tuple[int, int],
                 spec: CouplingSpec) -> list[tuple[int, int]]:
    """In-bounds coordinates within Chebyshev distance ``radius`` of pos."""
    r0, c0 = pos
    height, width = dims
    if not (0 <= r0 < height and 0 <= c0 < width):
        raise ValueError(f"position {pos} outside grid {dims}")
    rad = spec.radius
    cells = []
    for r in range(max(0, r0 - rad), min(height, r0 + rad + 1)):
        for c in range(max(0, c0 - rad), min(width, c0 + rad + 1)):
            if (r, c) == pos and not spec.include_self:
                continue
            cells.append((r, c))
    return cells


def coupling_term(node: tuple[int, int], outputs: np.ndarray,
                  spec: CouplingSpec):
    """Coupling input of one node: coefficient * sum of neighbor outputs.

    Reference implementation used by tests; the integrator computes the
    same quantity for all nodes at once with shifted-sum arithmetic.
    """
    total = sum(outputs[rc] for rc in neighborhood(node, outputs.shape, spec))
    return spec.coefficient * total


def map_intensity(image: GrayImage, params: ModelParams) -> np.ndarray:
    """Affine map of intensities [0, 1] onto the model's control range."""
    lo, hi = model_for_params(params).control_bounds(params)
    return lo + image.pixels * (hi - lo)


class _BoxSum:
    """Neighbor-sum workspace: zero-padded buffer plus shifted adds."""

    def __init__(self, shape: tuple[int, int], radius: int):
        self._shape = shape
        self._radius = radius
        h, w = shape
        self._padded = np.zeros((h + 2 * radius, w + 2 * radius))
        self._acc = np.empty(shape)

    def __call__(self, values: np.ndarray, include_self: bool) -> np.ndarray:
        h, w = self._shape
        r = self._radius
        padded = self._padded
        padded[r:r + h, r:r + w] = values
        acc = self._acc
        acc[:] = padded[0:h, 0:w]
        for dy in range(2 * r + 1):
            for dx in range(2 * r + 1):
                if dy == 0 and dx == 0:
                    continue
                acc += padded[dy:dy + h, dx:dx + w]
        if not include_self:
            acc -= values
        return acc                           # reused buffer; consume at once


class _NetworkRHS:
    """Vectorized network derivative y -> dy/dt for one configuration."""

    def __init__(self, info: ModelInfo, params: ModelParams,
                 per_node_param: np.ndarray, spec: CouplingSpec):
        self.info = info
        self.params = params
        self.control = per_node_param
        self.coefficient = spec.coefficient
        self.include_self = spec.include_self
        self.style = spec.style or info.coupling_style
        self.diffusive, self.rate_scaled = _style_flags(self.style)
        shape = per_node_param.shape
        self._box0 = _BoxSum(shape, spec.radius)
        self._box1 = _BoxSum(shape, spec.radius) if info.complex_coupling \
            else None
        if self.diffusive:
            counter = _BoxSum(shape, spec.radius)
            self._counts = counter(np.ones(shape), spec.include_self).copy()
        else:
            self._counts = None

    def _combine(self, box: _BoxSum, values: np.ndarray) -> np.ndarray:
        total = box(values, self.include_self)
        if self.diffusive:
            total = total - self._counts * values
        signal = self.coefficient * total
        if self.rate_scaled:
            signal = signal / self.control
        return signal

    def __call__(self, state: np.ndarray, out: np.ndarray) -> np.ndarray:
        if self.coefficient == 0.0:
            coupling = (0.0, 0.0) if self.info.complex_coupling else 0.0
        elif self.info.complex_coupling:
            coupling = (self._combine(self._box0, state[0]),
                        self._combine(self._box1, state[1]))
        else:
            coupling = self._combine(self._box0, state[0])
        d0, d1 = self.info.derivative(state, self.params, self.control,
                                      coupling)
        out[0] = d0
        out[1] = d1
        return out


def rk4_update(f, y, dt: float):
    """One classical RK4 step of y' = f(y) for any array-like state."""
    y = np.asarray(y, dtype=float)
    k1 = np.asarray(f(y), dtype=float)
    k2 = np.asarray(f(y + 0.5 * dt * k1), dtype=float)
    k3 = np.asarray(f(y + 0.5 * dt * k2), dtype=float)
    k4 = np.asarray(f(y + dt * k3), dtype=float)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step(state: NetworkState, dt: float,
             spec: CouplingSpec) -> NetworkState:
    """Advance the whole network by one synchronous RK4 step.

    Coupling terms inside each substage are evaluated from that substage's
    intermediate states, so no node ever sees a mixture of old and new
    values.  Raises NumericalBlowup if any component leaves the finite
    range.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    info = MODELS[state.model]
    rhs = _NetworkRHS(info, state.params, state.per_node_param, spec)
    new = _rk4_network_step(rhs, state.states, dt)
    if not np.isfinite(new).all():
        raise NumericalBlowup(f"non-finite state at t={state.time + dt:g}")
    return NetworkState(model=state.model, params=state.params,
                        per_node_param=state.per_node_param,
                        states=new, time=state.time + dt)


def _rk4_network_step(rhs: _NetworkRHS, y: np.ndarray, dt: float,
                      work: list[np.ndarray] | None = None) -> np.ndarray:
    if work is None:
        work = [np.empty_like(y) for _ in range(4)]
    k1, k2, k3, k4 = work
    rhs(y, k1)
    rhs(y + (0.5 * dt) * k1, k2)
    rhs(y + (0.5 * dt) * k2, k3)
    rhs(y + dt * k3, k4)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def build_network(image: GrayImage, params: ModelParams,
                  cfg: SimConfig) -> NetworkState:
    """Map an image onto a grid of oscillators with seeded initial states."""
    info = model_for_params(params)
    control = map_intensity(image, params)
    rng = np.random.default_rng(cfg.seed)
    if cfg.rho_jitter and isinstance(params, NeuralParams):
        rho = rng.uniform(-params.rho, params.rho, size=image.shape)
        params = dataclasses.replace(params, rho=rho)
    states = info.initial_state(image.shape, cfg.jitter, rng)
    return NetworkState(model=info.name, params=params,
                        per_node_param=control, states=states)


def simulate(image: GrayImage, params: ModelParams, spec: CouplingSpec,
             cfg: SimConfig) -> tuple[FrequencyMap, bool]:
    """Integrate the network and read out the locked frequency map.

    Every ``cfg.window`` time units (after the transient skip) each node's
    frequency is estimated from its upward crossings in the trailing
    window.  The run stops early once the largest per-node change between
    consecutive estimates is at most ``cfg.convergence_tol`` (nodes with
    a low-confidence estimate in either window are excluded from the
    check), else at ``cfg.total_time``.  Returns the final map and whether
    convergence was reached.  Deterministic for a fixed seed, independent
    of thread count.
    """
    network = build_network(image, params, cfg)
    return _run(network, spec, cfg)


def simulate_single(params: ModelParams, control_value: float,
                    cfg: SimConfig):
    """Uncoupled single-oscillator run at an explicit control value.

    Bypasses the intensity mapping, so control values outside the mapped
    band (e.g. a negative stimulus) can be probed directly.  Returns
    ``(freq, NodeFlag, converged)``.
    """
    info = model_for_params(params)
    rng = np.random.default_rng(cfg.seed)
    network = NetworkState(
        model=info.name, params=params,
        per_node_param=np.full((1, 1), float(control_value)),
        states=info.initial_state((1, 1), cfg.jitter, rng))
    fmap, converged = _run(network, CouplingSpec(coefficient=0.0), cfg)
    return float(fmap.freqs[0, 0]), NodeFlag(int(fmap.flags[0, 0])), converged


class _ChunkRunner:
    """Advances the network one estimation window at a time.

    Tracks, per node and per chunk, the first and last upward crossing of
    the event level plus the crossing count: all the mean inter-event
    estimator needs.  Uses the compiled kernels when numba is importable,
    else the vectorized numpy path (same arithmetic, same results up to
    floating-point summation order).
    """

    def __init__(self, info: ModelInfo, params: ModelParams,
                 per_node_param: np.ndarray, spec: CouplingSpec,
                 level: float, dt: float):
        self.info = info
        self.params = params
        self.control = np.ascontiguousarray(per_node_param, dtype=float)
        self.level = level
        self.dt = dt
        self.first_t = np.zeros(per_node_param.shape)
        self.last_t = np.zeros(per_node_param.shape)
        self.counts = np.zeros(per_node_param.shape, dtype=np.int64)
        style = spec.style or info.coupling_style
        self.diffusive, self.rate_scaled = _style_flags(style)
        self.spec = spec
        self.use_fast = _fast.available
        if not self.use_fast:
            self._rhs = _NetworkRHS(info, params, per_node_param, spec)
            self._work = None

    def reset_stats(self):
        self.counts.fill(0)

    def run(self, y: np.ndarray, start_step: int, steps: int) -> np.ndarray:
        """Integrate `steps` steps from absolute step index `start_step`."""
        if self.use_fast:
            bad = _fast.run_chunk(
                self.info.name, y, self.control, self.params,
                self.spec.coefficient, self.spec.radius,
                self.spec.include_self, self.diffusive, self.rate_scaled,
                self.dt, steps, start_step * self.dt, self.level,
                self.first_t, self.last_t, self.counts)
            if bad >= 0:
                t_bad = (start_step + bad + 1) * self.dt
                raise NumericalBlowup(f"non-finite state at t={t_bad:g} "
                                      f"({self.info.name} model)")
            return y
        if self._work is None:
            self._work = [np.empty_like(y) for _ in range(4)]
        dt = self.dt
        level = self.level
        for local in range(steps):
            prev_out = y[0]
            y = _rk4_network_step(self._rhs, y, dt, self._work)
            if not np.isfinite(y).all():
                t_bad = (start_step + local + 1) * dt
                raise NumericalBlowup(f"non-finite state at t={t_bad:g} "
                                      f"({self.info.name} model)")
            out = y[0]
            crossed = (prev_out < level) & (out >= level)
            if crossed.any():
                idx = np.flatnonzero(crossed)
                pv = prev_out.ravel()[idx]
                nv = out.ravel()[idx]
                t_prev = (start_step + local) * dt
                t_cross = t_prev + (level - pv) / (nv - pv) * dt
                fresh = self.counts.ravel()[idx] == 0
                flat_first = self.first_t.ravel()
                flat_first[idx[fresh]] = t_cross[fresh]
                self.last_t.ravel()[idx] = t_cross
                self.counts.ravel()[idx] += 1
        return y

    def estimates(self) -> tuple[np.ndarray, np.ndarray]:
        """Frequency map of the current chunk from the crossing stats."""
        counts = self.counts
        freqs = np.zeros(counts.shape)
        multi = counts >= 2
        if multi.any():
            spans = self.last_t[multi] - self.first_t[multi]
            freqs[multi] = (counts[multi] - 1) / spans
        flags = np.where(
            counts >= 3, int(NodeFlag.OK),
            np.where(counts == 2, int(NodeFlag.LOW_CONFIDENCE),
                     int(NodeFlag.NON_OSCILLATING))).astype(np.uint8)
        return freqs, flags


def _run(network: NetworkState, spec: CouplingSpec,
         cfg: SimConfig) -> tuple[FrequencyMap, bool]:
    info = MODELS[network.model]
    level = info.event_level if cfg.event_level is None else cfg.event_level
    dt = cfg.dt

    steps_total = int(round(cfg.total_time / dt))
    window_steps = max(1, int(round(cfg.window / dt)))
    skip_steps = int(round(cfg.transient_fraction * cfg.total_time / dt))
    skip_steps = min(skip_steps, max(steps_total - window_steps, 0))

    runner = _ChunkRunner(info, network.params, network.per_node_param,
                          spec, level, dt)
    y = np.ascontiguousarray(network.states, dtype=float)

    freqs = np.zeros(network.shape)
    flags = np.full(network.shape, int(NodeFlag.NON_OSCILLATING),
                    dtype=np.uint8)
    prev_freqs = None
    prev_flags = None
    converged = False

    step = 0
    if skip_steps > 0:
        y = runner.run(y, 0, skip_steps)
        runner.reset_stats()
        step = skip_steps

    while step < steps_total:
        chunk = min(window_steps, steps_total - step)
        y = runner.run(y, step, chunk)
        step += chunk
        freqs, flags = runner.estimates()
        runner.reset_stats()
        if prev_freqs is not None:
            usable = (flags != NodeFlag.LOW_CONFIDENCE) \
                & (prev_flags != NodeFlag.LOW_CONFIDENCE)
            if usable.any():
                delta = np.abs(freqs - prev_freqs)[usable].max()
                if delta <= cfg.convergence_tol:
                    converged = True
                    break
        prev_freqs = freqs
        prev_flags = flags

    network.states = y
    network.time = step * dt
    return FrequencyMap(freqs.copy(), flags.copy()), converged
