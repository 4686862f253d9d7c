"""Method-of-steps integrator for the linear delay equations of the emitter pair.

Every equation handled here has the form

    dy/dt = -(1/2) [y(t) + B y(t - tau)] + s(t)

in units where gamma = 1, with zero history for t < 0.  The step must divide
tau exactly.  Each RK4 stage of step j then needs the delayed state at the
matching stage of step j - tau/h, which was computed earlier and is stored, so
the scheme is classical RK4 applied to the chain of delay segments and keeps
fourth order with no interpolation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import InitialState, SystemParams, _sign, phase_factor

DEFAULT_SEGMENT_STEPS = 200
DEFAULT_ODE_STEP = 1e-3


@dataclass(frozen=True)
class DdeRun:
    """Grid solution.  ``times`` and ``step`` are in units of 1/gamma of the params."""

    times: np.ndarray
    values: np.ndarray
    step: float

    def index_of(self, t: float) -> int:
        k = int(round(t / self.step))
        if k < 0 or k >= len(self.times) or abs(self.times[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t={t} is not a grid time of this run")
        return k

    def value_at(self, t: float) -> complex:
        return complex(self.values[self.index_of(t)])

    def log_derivative(self, t: float, side: int = +1) -> complex:
        """One-sided 5-point estimate of d/dt log y at grid time ``t``.

        ``side=+1`` uses points at and after ``t`` (right derivative across a kink).
        """
        k = self.index_of(t)
        idx = k + side * np.arange(5)
        if idx.min() < 0 or idx.max() >= len(self.values):
            raise ValueError("not enough grid points for a one-sided stencil")
        y = self.values[idx]
        dy = side * (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * self.step)
        return complex(dy / y[0])


def default_step(params: SystemParams) -> float:
    if params.eta == 0:
        return DEFAULT_ODE_STEP / params.gamma
    return params.delay / DEFAULT_SEGMENT_STEPS


def _grid(t_max, step, gamma, eta):
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    h = step * gamma
    lag = 0
    if eta > 0:
        ratio = eta / h
        lag = int(round(ratio))
        if lag < 1 or abs(ratio - lag) > 1e-9 * ratio:
            raise ValueError(f"step {step} does not divide the delay {eta / gamma} exactly")
        h = eta / lag
    n = t_max * gamma / h
    nsteps = int(round(n)) if abs(n - round(n)) < 1e-9 * max(1.0, n) else int(math.ceil(n))
    return h, lag, nsteps


def integrate_linear(coupling, y0, h, lag, nsteps, source=None):
    """Core RK4 loop in dimensionless time.  Returns values of shape (nsteps+1, m)."""
    B = np.atleast_2d(np.asarray(coupling, dtype=complex))
    y = np.array(y0, dtype=complex).reshape(-1)
    m = y.size
    out = np.empty((nsteps + 1, m), dtype=complex)
    out[0] = y
    # stage values of every step, needed as delayed inputs one segment later
    stages = np.empty((nsteps, 4, m), dtype=complex) if lag else None
    zero = np.zeros(m, dtype=complex)

    def rhs(t, yy, delayed):
        f = -0.5 * (yy + B @ delayed)
        if source is not None:
            f = f + source(t)
        return f

    for j in range(nsteps):
        t = j * h
        if lag == 0:
            d = (None,) * 4
        elif j >= lag:
            d = stages[j - lag]
        else:
            d = (zero,) * 4
        y1 = y
        k1 = rhs(t, y1, y1 if lag == 0 else d[0])
        y2 = y + 0.5 * h * k1
        k2 = rhs(t + 0.5 * h, y2, y2 if lag == 0 else d[1])
        y3 = y + 0.5 * h * k2
        k3 = rhs(t + 0.5 * h, y3, y3 if lag == 0 else d[2])
        y4 = y + h * k3
        k4 = rhs(t + h, y4, y4 if lag == 0 else d[3])
        if lag:
            stages[j] = (y1, y2, y3, y4)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[j + 1] = y
    return out


def integrate_pm(params: SystemParams, sign, t_max: float, step: float | None = None) -> DdeRun:
    """Symmetric (+) or antisymmetric (-) amplitude with c(0) = 1/sqrt(2)."""
    sign = _sign(sign)
    step = default_step(params) if step is None else step
    h, lag, nsteps = _grid(t_max, step, params.gamma, params.eta)
    b = params.coupling(sign)
    vals = integrate_linear([[b]], [1 / math.sqrt(2)], h, lag, nsteps)
    times = np.arange(nsteps + 1) * h / params.gamma
    return DdeRun(times, vals[:, 0], h / params.gamma)


def integrate_pair(params: SystemParams, initial: InitialState, t_max: float,
                   step: float | None = None) -> tuple[DdeRun, DdeRun]:
    """Atomic amplitudes c1, c2 with mutual delayed coupling."""
    step = default_step(params) if step is None else step
    h, lag, nsteps = _grid(t_max, step, params.gamma, params.eta)
    b = params.coupling(+1)
    y0 = [math.cos(initial.theta),
          math.sin(initial.theta) * phase_factor(initial.phi_s)]
    vals = integrate_linear([[0, b], [b, 0]], y0, h, lag, nsteps)
    times = np.arange(nsteps + 1) * h / params.gamma
    dt = h / params.gamma
    return DdeRun(times, vals[:, 0], dt), DdeRun(times, vals[:, 1], dt)
