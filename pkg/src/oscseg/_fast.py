"""Optional numba-compiled integrator kernels.

Each kernel advances one model's grid by a whole estimation window
(``steps`` RK4 steps), recording for every node the first and last upward
crossing time of the event level plus the crossing count, which is exactly
what the mean inter-event frequency estimator consumes.  The pure-numpy
path in :mod:`oscseg.network` computes the same quantities and is the
reference implementation; an equivalence test keeps the two in lockstep.

Set ``OSCSEG_NO_NUMBA=1`` to force the numpy path.

Kernel return value: -1 on success, else the 0-based step index at which
a state component became non-finite.
"""

from __future__ import annotations

import os

import numpy as np

try:
    if os.environ.get("OSCSEG_NO_NUMBA"):
        raise ImportError("disabled via OSCSEG_NO_NUMBA")
    from numba import njit
    available = True
except ImportError:          # pragma: no cover - exercised via env flag
    available = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap


@njit(cache=True)
def _couple_sum(src, comp, i, j, radius, include_self, diffusive):
    h, w = src.shape[1], src.shape[2]
    acc = 0.0
    count = 0
    for ii in range(max(0, i - radius), min(h, i + radius + 1)):
        for jj in range(max(0, j - radius), min(w, j + radius + 1)):
            if ii == i and jj == j and not include_self:
                continue
            acc += src[comp, ii, jj]
            count += 1
    if diffusive:
        acc -= count * src[comp, i, j]
    return acc


@njit(cache=True)
def _neural_deriv(src, out, control, rho, epsilon, gamma, inv_beta,
                  coeff, radius, include_self, diffusive, rate_scaled):
    h, w = control.shape
    for i in range(h):
        for j in range(w):
            x = src[0, i, j]
            y = src[1, i, j]
            s = 0.0
            if coeff != 0.0:
                s = coeff * _couple_sum(src, 0, i, j, radius, include_self,
                                        diffusive)
            out[0, i, j] = 3.0 * x - x ** 3 - y + 2.0 + rho[i, j] \
                + control[i, j] + s
            out[1, i, j] = epsilon * (gamma * (1.0 + np.tanh(x * inv_beta))
                                      - y)


@njit(cache=True)
def _bz_deriv(src, out, control, beta1, beta2, theta,
              coeff, radius, include_self, diffusive, rate_scaled):
    h, w = control.shape
    for i in range(h):
        for j in range(w):
            x1 = src[0, i, j]
            x2 = src[1, i, j]
            tau = control[i, j]
            s = 0.0
            if coeff != 0.0:
                s = coeff * _couple_sum(src, 0, i, j, radius, include_self,
                                        diffusive)
                if rate_scaled:
                    s /= tau
            f1 = 0.5 * (1.0 + np.tanh(beta1 * (x1 - x2)))
            out[0, i, j] = (-x1 + f1) / tau + s
            out[1, i, j] = -x2 + 0.5 * (1.0 + np.tanh(beta2 * (x1 - theta)))


@njit(cache=True)
def _mems_deriv(src, out, control, damping_c, nonlinear_d,
                coeff, radius, include_self, diffusive, rate_scaled):
    h, w = control.shape
    for i in range(h):
        for j in range(w):
            re = src[0, i, j]
            im = src[1, i, j]
            s_re = 0.0
            s_im = 0.0
            if coeff != 0.0:
                s_re = coeff * _couple_sum(src, 0, i, j, radius,
                                           include_self, diffusive)
                s_im = coeff * _couple_sum(src, 1, i, j, radius,
                                           include_self, diffusive)
            r2 = re * re + im * im
            omega = control[i, j]
            out[0, i, j] = damping_c * re - omega * im \
                + nonlinear_d * re * r2 + s_re
            out[1, i, j] = damping_c * im + omega * re \
                + nonlinear_d * im * r2 + s_im


@njit(cache=True)
def _stage(base, k, factor, out):
    n = base.shape[0] * base.shape[1] * base.shape[2]
    bf = base.reshape(n)
    kf = k.reshape(n)
    of = out.reshape(n)
    for idx in range(n):
        of[idx] = bf[idx] + factor * kf[idx]


@njit(cache=True)
def _advance_and_detect(y, k1, k2, k3, k4, prev0, dt, t_prev, level,
                        first_t, last_t, counts):
    h, w = y.shape[1], y.shape[2]
    sixth = dt / 6.0
    for i in range(h):
        for j in range(w):
            v0 = y[0, i, j] + sixth * (k1[0, i, j] + 2.0 * k2[0, i, j]
                                       + 2.0 * k3[0, i, j] + k4[0, i, j])
            v1 = y[1, i, j] + sixth * (k1[1, i, j] + 2.0 * k2[1, i, j]
                                       + 2.0 * k3[1, i, j] + k4[1, i, j])
            y[0, i, j] = v0
            y[1, i, j] = v1
            if not (np.isfinite(v0) and np.isfinite(v1)):
                return 1
            p = prev0[i, j]
            if p < level <= v0:
                tc = t_prev + (level - p) / (v0 - p) * dt
                if counts[i, j] == 0:
                    first_t[i, j] = tc
                last_t[i, j] = tc
                counts[i, j] += 1
    return 0


def _make_chunk_kernel(deriv):
    # no cache=True: closure-made dispatchers cannot be disk-cached
    @njit
    def chunk(y, control, p0, p1, p2, p3, coeff, radius, include_self,
              diffusive, rate_scaled, dt, steps, t_start, level,
              first_t, last_t, counts):
        k1 = np.empty_like(y)
        k2 = np.empty_like(y)
        k3 = np.empty_like(y)
        k4 = np.empty_like(y)
        stage = np.empty_like(y)
        prev0 = np.empty_like(y[0])
        for step in range(steps):
            prev0[:, :] = y[0]
            deriv(y, k1, control, p0, p1, p2, p3, coeff, radius,
                  include_self, diffusive, rate_scaled)
            _stage(y, k1, 0.5 * dt, stage)
            deriv(stage, k2, control, p0, p1, p2, p3, coeff, radius,
                  include_self, diffusive, rate_scaled)
            _stage(y, k2, 0.5 * dt, stage)
            deriv(stage, k3, control, p0, p1, p2, p3, coeff, radius,
                  include_self, diffusive, rate_scaled)
            _stage(y, k3, dt, stage)
            deriv(stage, k4, control, p0, p1, p2, p3, coeff, radius,
                  include_self, diffusive, rate_scaled)
            t_prev = t_start + step * dt
            if _advance_and_detect(y, k1, k2, k3, k4, prev0, dt, t_prev,
                                   level, first_t, last_t, counts):
                return step
        return -1
    return chunk


if available:
    # parameter packing: neural (rho_grid via p0-slot trick is not possible;
    # rho is a grid, so the neural kernel takes it in place of p0)
    @njit(cache=True)
    def _neural_deriv_packed(src, out, control, rho, p1, p2, p3, coeff,
                             radius, include_self, diffusive, rate_scaled):
        _neural_deriv(src, out, control, rho, p1, p2, p3, coeff, radius,
                      include_self, diffusive, rate_scaled)

    @njit(cache=True)
    def _bz_deriv_packed(src, out, control, p0, p1, p2, p3, coeff,
                         radius, include_self, diffusive, rate_scaled):
        # p0 unused placeholder grid to keep one chunk signature
        _bz_deriv(src, out, control, p1, p2, p3, coeff, radius,
                  include_self, diffusive, rate_scaled)

    @njit(cache=True)
    def _mems_deriv_packed(src, out, control, p0, p1, p2, p3, coeff,
                           radius, include_self, diffusive, rate_scaled):
        _mems_deriv(src, out, control, p1, p2, coeff, radius,
                    include_self, diffusive, rate_scaled)

    _CHUNKS = {
        "neural": _make_chunk_kernel(_neural_deriv_packed),
        "bz": _make_chunk_kernel(_bz_deriv_packed),
        "mems": _make_chunk_kernel(_mems_deriv_packed),
    }
else:
    _CHUNKS = {}


def run_chunk(model: str, y, control, params, coeff, radius, include_self,
              diffusive, rate_scaled, dt, steps, t_start, level,
              first_t, last_t, counts) -> int:
    """Advance `steps` RK4 steps in compiled code; see module docstring."""
    shape = control.shape
    if model == "neural":
        rho = params.rho if isinstance(params.rho, np.ndarray) \
            else np.full(shape, float(params.rho))
        args = (rho, params.epsilon, params.gamma, 1.0 / params.beta)
    elif model == "bz":
        args = (np.empty((0, 0)), params.beta1, params.beta2, params.theta)
    else:
        args = (np.empty((0, 0)), params.damping_c, params.nonlinear_d, 0.0)
    return int(_CHUNKS[model](y, control, *args, coeff, radius,
                              include_self, diffusive, rate_scaled, dt,
                              steps, t_start, level, first_t, last_t,
                              counts))
