"""Explicit Runge-Kutta integrators for matrix-valued ODEs.

``dopri5`` is the Dormand-Prince 5(4) pair with a PI step-size controller and
the standard fourth-order continuous extension, after Hairer, Norsett & Wanner
(Solving ODEs I, DOPRI5). ``rk4`` is a fixed-step fallback. Both report the
solution only at requested output times, via a callback.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import IntegrationFailure

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40
D1 = -12715105075 / 11282082432
D3 = 87487479700 / 32700410799
D4 = -10690763975 / 1880347072
D5 = 701980252875 / 199316789632
D6 = -1453857185 / 822651844
D7 = 69997945 / 29380423

NODES = np.array([0.0, C2, C3, C4, C5, 1.0])
TABLEAU = np.zeros((6, 5))
TABLEAU[1, :1] = [A21]
TABLEAU[2, :2] = [A31, A32]
TABLEAU[3, :3] = [A41, A42, A43]
TABLEAU[4, :4] = [A51, A52, A53, A54]
TABLEAU[5, :5] = [A61, A62, A63, A64, A65]
B5 = np.array([A71, 0.0, A73, A74, A75, A76])
ERR = np.array([E1, 0.0, E3, E4, E5, E6, E7])
DENSE = np.array([D1, 0.0, D3, D4, D5, D6, D7])

SAFETY = 0.9
FAC_MIN = 0.2  # largest shrink per step
FAC_MAX = 10.0  # largest growth per step
BETA = 0.04
EXPO = 0.2 - 0.75 * BETA

Rhs = Callable[[float, np.ndarray], np.ndarray]
Sink = Callable[[float, np.ndarray], None]


def _error_norm(delta, y0, y1, rtol, atol):
    r = (np.abs(delta) / (atol + rtol * np.maximum(np.abs(y0), np.abs(y1)))).ravel()
    return math.sqrt(float(r @ r) / r.size)


def initial_step(f: Rhs, t0, y0, f0, direction_span, rtol, atol, max_step):
    """Starting step from Hairer's HINIT heuristic (order 5)."""
    scale = atol + rtol * np.abs(y0)
    d0 = math.sqrt(float(np.mean(np.abs(y0 / scale) ** 2)))
    d1 = math.sqrt(float(np.mean(np.abs(f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, direction_span, max_step)
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = math.sqrt(float(np.mean(np.abs((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, direction_span, max_step)


class Dopri5:
    """Adaptive Dormand-Prince stepper over one smooth segment [t0, t1].

    ``h`` and the controller memory persist between segments so that a
    breakpoint (pulse switch-off) does not reset the step size.
    """

    def __init__(self, rtol=1e-8, abs_tol=1e-10, max_step=math.inf, post_step=None, min_step_ratio=1e-14,
                 max_steps=None):
        if not (rtol > 0 and abs_tol > 0):
            raise ValueError("tolerances must be positive")
        self.rtol = rtol
        self.atol = abs_tol
        self.max_step = max_step
        self.post_step = post_step
        self.min_step_ratio = min_step_ratio
        self.max_steps = max_steps
        self.h = None
        self.err_old = 1e-4
        self.n_accepted = 0
        self.n_rejected = 0
        self.n_rhs = 0

    def integrate(self, f: Rhs, t0: float, y0: np.ndarray, t1: float, outputs, sink: Sink) -> np.ndarray:
        """Advance y from t0 to t1, calling ``sink(t, y)`` at each output time in (t0, t1]."""
        outputs = [t for t in outputs if t0 < t <= t1]
        k = 0
        t = t0
        y = y0
        f1 = f(t, y)
        self.n_rhs += 1
        span = t1 - t0
        if span <= 0:
            return y
        if self.h is None:
            self.h = initial_step(f, t, y, f1, span, self.rtol, self.atol, self.max_step)
            self.n_rhs += 1
        h = min(self.h, self.max_step)
        shape = y.shape
        K = np.empty((7,) + shape, dtype=np.result_type(y, f1))
        Kf = K.reshape(7, -1)
        K[0] = f1
        rejected_last = False
        while t < t1:
            floor = self.min_step_ratio * max(1.0, abs(t))
            if h < floor:
                raise IntegrationFailure("step size underflow", t)
            if self.max_steps is not None and self.n_accepted + self.n_rejected >= self.max_steps:
                raise IntegrationFailure(f"step budget of {self.max_steps} exhausted", t)
            last = t + h >= t1 - floor
            if last:
                h = t1 - t
            for stage in range(1, 6):
                K[stage] = f(t + NODES[stage] * h, y + h * (TABLEAU[stage, :stage] @ Kf[:stage]).reshape(shape))
            y_new = y + h * (B5 @ Kf[:6]).reshape(shape)
            K[6] = f(t + h, y_new)
            self.n_rhs += 6
            delta = h * (ERR @ Kf).reshape(shape)
            err = _error_norm(delta, y, y_new, self.rtol, self.atol)
            if not math.isfinite(err):
                raise IntegrationFailure("non-finite error estimate", t)
            fac11 = err**EXPO
            if err <= 1.0:
                fac = fac11 / self.err_old**BETA
                fac = min(1 / FAC_MIN, max(1 / FAC_MAX, fac / SAFETY))
                h_next = h / fac
                if rejected_last:
                    h_next = min(h_next, h)
                t_new = t1 if last else t + h
                while k < len(outputs) and outputs[k] <= t_new:
                    theta = (outputs[k] - t) / h
                    sink(outputs[k], _dense(theta, h, y, y_new, K, Kf, shape))
                    k += 1
                if self.post_step is not None:
                    y_new = self.post_step(y_new)
                t, y = t_new, y_new
                K[0] = K[6]  # first-same-as-last
                self.err_old = max(err, 1e-4)
                self.n_accepted += 1
                rejected_last = False
                h = min(h_next, self.max_step)
                if not last:
                    self.h = h
            else:
                h = h / min(1 / FAC_MIN, fac11 / SAFETY)
                self.n_rejected += 1
                rejected_last = True
        return y


def _dense(theta, h, y0, y1, K, Kf, shape):
    ydiff = y1 - y0
    bspl = h * K[0] - ydiff
    r4 = ydiff - h * K[6] - bspl
    r5 = h * (DENSE @ Kf).reshape(shape)
    s1 = 1.0 - theta
    return y0 + theta * (ydiff + s1 * (bspl + theta * (r4 + s1 * r5)))


class RK4:
    """Classic fixed-step RK4; every output time is hit exactly."""

    def __init__(self, step: float, post_step=None, max_steps=None):
        if not step > 0:
            raise ValueError("RK4 step must be positive")
        self.step = step
        self.max_steps = max_steps
        self.post_step = post_step
        self.n_rhs = 0
        self.n_accepted = 0
        self.n_rejected = 0

    def integrate(self, f: Rhs, t0, y0, t1, outputs, sink):
        marks = [t for t in outputs if t0 < t < t1] + [t1]
        t, y = t0, y0
        for mark in marks:
            n = max(1, math.ceil((mark - t) / self.step - 1e-9))
            h = (mark - t) / n
            if self.max_steps is not None and self.n_accepted + n > self.max_steps:
                raise IntegrationFailure(f"step budget of {self.max_steps} exhausted", t)
            for i in range(n):
                k1 = f(t, y)
                k2 = f(t + h / 2, y + (h / 2) * k1)
                k3 = f(t + h / 2, y + (h / 2) * k2)
                k4 = f(t + h, y + h * k3)
                y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
                t = mark if i == n - 1 else t + h
                if self.post_step is not None:
                    y = self.post_step(y)
                self.n_rhs += 4
                self.n_accepted += 1
            if mark in outputs:
                sink(mark, y)
        return y
