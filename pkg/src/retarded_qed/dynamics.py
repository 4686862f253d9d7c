"""Closed-form atomic dynamics of the undriven emitter pair.

Two exact representations of the symmetric/antisymmetric amplitudes c_+/-:

* the finite reflection series, one term per round of delayed feedback that
  has arrived by time t (default production path, no truncation);
* the branch-mode series over Lambert-W roots, with tails summed in closed
  form (see :mod:`retarded_qed.modes`).

Times are in units of 1/gamma of the supplied parameters, rates and shifts in
the same units as gamma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .lambertw import lambert_w
from .modes import DEFAULT_N_MAX, INITIAL_TOL, MAX_N_MAX, BranchSeries, branch_modes
from .params import InitialState, SystemParams, _sign

SQRT_HALF = 1.0 / math.sqrt(2.0)
POLE_THRESHOLD = 1e-12

__all__ = [
    "branch_modes", "c_pm_lambert", "lambert_series", "c_pm_reflection", "atomic_amplitudes",
    "effective_rate", "effective_rate_pm", "zeroth_mode_rate", "rate_jump",
    "effective_shift", "effective_shift_pm", "shift_jump", "critical_eta", "RatePole",
]


class RatePole(ArithmeticError):
    """The instantaneous rate is undefined because the amplitude vanishes."""

    def __init__(self, t, amplitude):
        super().__init__(f"amplitude {abs(amplitude):.2e} at t={t}: rate has a pole")
        self.t = t
        self.amplitude = amplitude


@dataclass(frozen=True)
class LambertSum:
    values: np.ndarray
    shell: np.ndarray  # magnitude of the outermost explicit branch pair
    n_max: int


def _check_times(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValueError("times must be finite and non-negative")
    return t


def lambert_series(params: SystemParams, sign, t, n_max: int = DEFAULT_N_MAX,
                   tail_correction: bool = True) -> LambertSum:
    """Branch-series amplitude with diagnostics.

    With ``tail_correction`` the branches beyond ``n_max`` are summed
    analytically and ``n_max`` is doubled until the series reproduces
    c(0) = 1/sqrt(2) to 1e-8.  Without it the plain truncated sum is returned.
    """
    t = _check_times(t)
    series = BranchSeries(params, sign, n_max)
    if tail_correction:
        while True:
            c0, _ = series.evaluate(np.array([0.0]))
            if abs(c0[0] - 1.0) <= INITIAL_TOL:
                break
            if 2 * series.n_max > MAX_N_MAX:
                raise ArithmeticError(f"branch series does not reproduce c(0) (error {abs(c0[0] - 1):.2e})")
            series._extend(2 * series.n_max)
    vals, shell = series.evaluate(params.gamma * t, tail=tail_correction)
    return LambertSum(SQRT_HALF * vals, SQRT_HALF * shell, series.n_max)


def c_pm_lambert(params: SystemParams, sign, t, n_max: int = DEFAULT_N_MAX,
                 tail_correction: bool = True):
    """c_+/-(t) from the branch-mode series."""
    out = lambert_series(params, sign, t, n_max, tail_correction).values
    return complex(out) if np.ndim(out) == 0 else out


def _reflection(params, sign, tau):
    """Reflection series at dimensionless times (zero for tau < 0)."""
    tau = np.asarray(tau, dtype=float)
    b = -params.coupling(sign)
    if params.eta == 0:
        return np.where(tau >= 0, SQRT_HALF * np.exp(-0.5 * (1.0 - b) * tau), 0.0)
    out = np.zeros(tau.shape, dtype=complex)
    rounds = np.floor(np.maximum(tau, 0) / params.eta + 1e-12).astype(int)
    if tau.size == 0:
        return out
    log_b = np.log(b) if b != 0 else None
    for n in range(int(rounds.max()) + 1):
        x = 0.5 * (tau - n * params.eta)
        on = x >= 0
        if n == 0:
            out[on] += np.exp(-x[on])
            continue
        if log_b is None:
            break
        on &= x > 0
        xs = x[on]
        out[on] += np.exp(n * log_b + n * np.log(xs) - gammaln(n + 1) - xs)
    return SQRT_HALF * out


def c_pm_reflection(params: SystemParams, sign, t):
    """c_+/-(t) as the finite sum over delayed feedback rounds."""
    t = _check_times(t)
    _sign(sign)
    out = _reflection(params, sign, params.gamma * t)
    return complex(out) if np.ndim(out) == 0 else out


def atomic_amplitudes(params: SystemParams, initial: InitialState, t):
    """(c_1, c_2) for a general single-excitation initial state."""
    t = _check_times(t)
    cp = _reflection(params, +1, params.gamma * t)
    cm = _reflection(params, -1, params.gamma * t)
    c1 = initial.k_plus * cp + initial.k_minus * cm
    c2 = initial.k_plus * cp - initial.k_minus * cm
    if np.ndim(t) == 0:
        return complex(c1), complex(c2)
    return c1, c2


def _delayed_pair(params, initial, tau):
    cp = _reflection(params, +1, tau)
    cm = _reflection(params, -1, tau)
    return initial.k_plus * cp + initial.k_minus * cm, initial.k_plus * cp - initial.k_minus * cm


def effective_rate(params: SystemParams, initial: InitialState, t: float, atom: int = 1) -> float:
    """Instantaneous decay rate of atom 1 or 2, -d/dt log|c_m|^2.

    Raises :class:`RatePole` where the amplitude vanishes.
    """
    if atom not in (1, 2):
        raise ValueError("atom must be 1 or 2")
    tau = params.gamma * float(_check_times(t))
    now = _delayed_pair(params, initial, tau)
    past = _delayed_pair(params, initial, tau - params.eta)
    mine, other = (now[0], past[1]) if atom == 1 else (now[1], past[0])
    if abs(mine) < POLE_THRESHOLD:
        raise RatePole(t, mine)
    b = params.coupling(+1)
    return params.gamma * (1.0 + float(np.real(b * other / mine)))


def effective_rate_pm(params: SystemParams, sign, t: float) -> float:
    """Instantaneous decay rate of the symmetric (+) or antisymmetric (-) state."""
    tau = params.gamma * float(_check_times(t))
    now = complex(_reflection(params, sign, tau))
    past = complex(_reflection(params, sign, tau - params.eta))
    if abs(now) < POLE_THRESHOLD:
        raise RatePole(t, now)
    return params.gamma * (1.0 + (params.coupling(sign) * past / now).real)


def zeroth_mode_rate(params: SystemParams, sign) -> float:
    """Decay rate kept by a single-root (n = 0) description: Re gamma_0."""
    if params.eta == 0:
        return params.gamma * (1.0 + params.coupling(sign).real)
    w0 = lambert_w(0, params.lambert_arg(sign)).w
    return params.gamma * (1.0 - 2.0 * w0.real / params.eta)


def rate_jump(params: SystemParams, sign) -> float:
    """Rate just after the first delayed return, gamma (1 +/- beta cos(phi_p) e^{eta/2})."""
    return params.gamma * (1.0 + params.coupling(sign).real * math.exp(0.5 * params.eta))


def effective_shift(params: SystemParams, initial: InitialState, t: float, atom: int = 1) -> float:
    """Retarded exchange shift gamma beta Im[e^{i phi_p} c_m^*(t) c_other(t - eta)].

    Kept without the 1/|c_m|^2 normalisation used for the rate.
    """
    if atom not in (1, 2):
        raise ValueError("atom must be 1 or 2")
    tau = params.gamma * float(_check_times(t))
    now = _delayed_pair(params, initial, tau)
    past = _delayed_pair(params, initial, tau - params.eta)
    mine, other = (now[0], past[1]) if atom == 1 else (now[1], past[0])
    return params.gamma * float(np.imag(params.coupling(+1) * np.conj(mine) * other))


def effective_shift_pm(params: SystemParams, sign, t: float) -> float:
    tau = params.gamma * float(_check_times(t))
    now = complex(_reflection(params, sign, tau))
    past = complex(_reflection(params, sign, tau - params.eta))
    return params.gamma * (params.coupling(sign) * now.conjugate() * past).imag


def shift_jump(params: SystemParams, sign) -> float:
    """Shift just after the first delayed return, +/- (gamma/2) beta e^{-eta/2} sin(phi_p)."""
    return 0.5 * params.gamma * params.coupling(sign).imag * math.exp(-0.5 * params.eta)


def critical_eta(beta: float) -> float:
    """Largest eta with a non-oscillating symmetric decay, 2 W_0(1/(beta e))."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    if beta == 0:
        return math.inf
    return 2.0 * lambert_w(0, 1.0 / (beta * math.e)).w.real
