"""Weak coherent drive of the emitter pair, to first order in the Rabi frequency.

Conventions: ``detuning_d`` is Delta_D = omega0 - omega_D in units of gamma.
With g(t) = conj(sqrt(2) c_+(t)) the driven symmetric amplitude is

    c_D(t) = -i Omega int_0^t e^{i Delta_D s} g(s) ds,

whose branch expansion is the transient formula and whose t -> inf limit is
Omega / ([Delta_D + (beta/2) sin(omega_D eta)] + (i/2)[1 + beta cos(omega_D eta)]).
The antisymmetric amplitude vanishes identically at this order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cqed import nearest_commensurate_eta
from .dde import _grid, integrate_linear
from .lambertw import w_grid
from .modes import DEFAULT_N_MAX, BranchSeries
from .params import DriveParams, SystemParams, phase_factor
from .spectrum import FrequencyGrid, ResonancePeak, SpectrumResult, resonance_peaks


def _check_eta(params):
    if not params.eta > 0:
        raise ValueError("branch expansion needs eta > 0; use c_plus_steady_closed")


def _drive_coupling(params):
    """conj(beta e^{i phi_p}): the feedback coefficient seen by the driven amplitude."""
    return params.coupling(+1).conjugate()


def _steady_sum(params, y):
    """S(y) = sum_n conj(alpha_n) / (y + i conj(gamma_n)/2), closed form (gamma = 1)."""
    b = _drive_coupling(params)
    return 1.0 / (y + 0.5j * (1.0 + b * np.exp(1j * y * params.eta)))


def _steady_sum_derivative(params, y):
    b = _drive_coupling(params)
    e = np.exp(1j * y * params.eta)
    den = y + 0.5j * (1.0 + b * e)
    return -(1.0 - 0.5 * b * params.eta * e) / den**2


def c_plus_steady_closed(params: SystemParams, drive: DriveParams) -> complex:
    """Late-time driven symmetric amplitude in closed form."""
    delta = drive.detuning_d
    b = _drive_coupling(params)
    den = delta + 0.5j * (1.0 + b * np.exp(1j * delta * params.eta))
    if abs(den) < 1e-300:
        raise ZeroDivisionError("degenerate denominator: unbounded steady response")
    return complex(drive.rabi / den)


def c_plus_steady_modes(params: SystemParams, drive: DriveParams, n_max: int = DEFAULT_N_MAX) -> complex:
    """Late-time amplitude as the branch sum Omega sum conj(alpha_n)/(Delta_D + i conj(gamma_n)/2)."""
    _check_eta(params)
    series = BranchSeries(params, +1, n_max)
    # sum alpha/(i Delta + gamma/2), then conjugate and rotate
    q = params.eta * (1j * drive.detuning_d + 0.5)
    lap, _ = series.evaluate(0.0, q=q)
    return complex(drive.rabi * (-1j) * np.conj(lap))


def c_plus_steady_literal(params: SystemParams, drive: DriveParams, n_max: int = DEFAULT_N_MAX):
    """Branch sum with the alternative denominator (omega_D - omega0 + Delta_n) + i gamma_res,n.

    Plain truncation at |n| <= n_max; returns (value, last-shell magnitude).
    Kept to quantify its difference from :func:`c_plus_steady_modes`.
    """
    _check_eta(params)
    vals = w_grid(-n_max, n_max, params.lambert_arg(+1))
    total, shell = 0j, 0.0
    for wv in vals:
        alpha = 1.0 / (1.0 + wv.w)
        shift = -wv.w.imag / params.eta
        width = 1.0 - 2.0 * wv.w.real / params.eta
        term = drive.rabi * alpha.conjugate() / ((-drive.detuning_d + shift) + 1j * width)
        total += term
        if abs(wv.branch) == n_max:
            shell += abs(term)
    return total, shell


def c_plus_transient(params: SystemParams, drive: DriveParams, t, n_max: int = DEFAULT_N_MAX):
    """Driven symmetric amplitude at time t (drive switched on at t = 0)."""
    _check_eta(params)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    delta = drive.detuning_d
    tau = params.gamma * t
    series = BranchSeries(params, +1, n_max)
    q = params.eta * (1j * delta + 0.5)
    decay, _ = series.evaluate(tau, q=q)
    steady = -1j * np.conj(series.evaluate(0.0, q=q)[0])
    out = drive.rabi * (steady - np.exp(1j * delta * tau) * (-1j) * np.conj(decay))
    out = np.where(tau == 0, 0j, out)
    return complex(out) if out.ndim == 0 else out


def c_minus_driven(params: SystemParams, drive: DriveParams, t=0.0):
    """Antisymmetric driven amplitude: zero at first order for a symmetric drive."""
    return 0j if np.ndim(t) == 0 else np.zeros(np.shape(t), dtype=complex)


def c_plus_transient_oracle(params: SystemParams, drive: DriveParams, t_max: float,
                            step: float | None = None):
    """Driven amplitude from the delay equation with a source, integrated by RK4.

    w' = -(1/2)[w + conj(b) w(t - eta)] + e^{-i Delta t},  c_D = -i Omega e^{i Delta t} w.
    Returns (times, amplitudes).
    """
    from .dde import default_step

    step = default_step(params) if step is None else step
    h, lag, nsteps = _grid(t_max, step, params.gamma, params.eta)
    delta = drive.detuning_d
    src = lambda s: np.array([np.exp(-1j * delta * s)])
    w = integrate_linear([[_drive_coupling(params)]], [0.0], h, lag, nsteps, source=src)[:, 0]
    tau = np.arange(nsteps + 1) * h
    return tau / params.gamma, -1j * drive.rabi * np.exp(1j * delta * tau) * w


def c_plus_first_order(params: SystemParams, drive: DriveParams, t: float) -> complex:
    """Literal first-order amplitude -2 i Omega int_0^t e^{i Delta s} c_+(s) ds.

    Differs from the transient formula by a factor sqrt(2) in magnitude and by
    phi_p -> -phi_p; the two coincide in modulus / sqrt(2) when phi_p is a
    multiple of pi.
    """
    from .spectrum import f_pm_finite

    return complex(-2j * drive.rabi * params.gamma * f_pm_finite(params, +1, drive.detuning_d, t))


# -- excitation maps --------------------------------------------------------

@dataclass
class ExcitationMap:
    etas: np.ndarray
    orders: np.ndarray  # p with phi_p = 2p pi (even) or (2p+1) pi (odd)
    detunings: np.ndarray
    population: np.ndarray  # |c_D|^2, shape (len(etas), len(detunings))
    ridges: list  # per eta: array of Delta_D positions of the resonances
    rabi: float


def excitation_map(beta: float, rabi: float, eta_grid, detuning_grid, parity: str = "even",
                   omega0_over_gamma: float = 500.0, n_ridges: int = 10) -> ExcitationMap:
    """Late-time |c_D|^2 over (eta, Delta_D), eta snapped to the requested parity."""
    etas, orders, rows, ridges = [], [], [], []
    det = np.asarray(detuning_grid, dtype=float)
    for target in np.asarray(eta_grid, dtype=float):
        eta, p = nearest_commensurate_eta(float(target), omega0_over_gamma, parity)
        params = SystemParams(beta, eta, omega0_over_gamma=omega0_over_gamma)
        b = _drive_coupling(params)
        den = det + 0.5j * (1.0 + b * np.exp(1j * det * eta))
        rows.append(np.abs(rabi / den) ** 2)
        etas.append(eta)
        orders.append(p)
        if eta > 0:
            ridges.append(np.array([pk.delta_omega_res for pk in resonance_peaks(params, +1, n_ridges)]))
        else:
            ridges.append(np.array([0.0]))
    return ExcitationMap(np.array(etas), np.array(orders), det, np.array(rows), ridges, rabi)


# -- scattered field --------------------------------------------------------

@dataclass(frozen=True)
class SingularComponent:
    """Elastic line at omega = omega0: amplitude A with |c(omega)|^2 -> 2 pi t |A|^2 delta(omega - omega0)."""

    detuning: float
    amplitude_right: complex
    amplitude_left: complex

    @property
    def weight_rate(self) -> float:
        return 2.0 * math.pi * (abs(self.amplitude_right) ** 2 + abs(self.amplitude_left) ** 2)


@dataclass
class ScatteredSpectrum(SpectrumResult):
    singular: list = field(default_factory=list)


def scattered_spectrum(params: SystemParams, drive: DriveParams, grid: FrequencyGrid,
                       filter_resonant: bool = True, n_max: int = DEFAULT_N_MAX) -> ScatteredSpectrum:
    """Steady-state scattered field over omega - omega0 (units of gamma).

    The smooth part is the transient-sourced term; the elastic line at omega0
    is returned separately as a :class:`SingularComponent`.  With
    ``filter_resonant=False`` the elastic line is still never binned into the
    grid, only reported.
    """
    delta_d = drive.detuning_d
    x = grid.detunings + delta_d  # omega - omega_D
    s_drive = _steady_sum(params, delta_d)
    close = np.abs(x - delta_d) < 1e-7
    with np.errstate(invalid="ignore", divide="ignore"):
        pair = (s_drive - _steady_sum(params, x)) / (x - delta_d)
    pair = np.where(close, -_steady_sum_derivative(params, x), pair)
    half = phase_factor(0.5 * params.phi_p) * np.exp(0.5j * grid.detunings * params.eta)
    cos_h = half.real
    pref = -drive.rabi * math.sqrt(params.beta * params.gamma / math.pi) / params.gamma
    amp = pref * cos_h * pair
    density = 2.0 * np.abs(amp) ** 2
    peaks = []
    if params.eta > 0:
        for pk in resonance_peaks(params, +1, n_max):
            pos = pk.delta_omega_res - delta_d
            if grid.detunings[0] <= pos <= grid.detunings[-1]:
                peaks.append(ResonancePeak(pk.n, pos, pk.gamma_res, pk.residual))
    elastic = pref * math.cos(0.5 * params.phi_p) * (-1j) * s_drive
    singular = [SingularComponent(0.0, elastic, elastic)]
    return ScatteredSpectrum(grid, amp, amp.copy(), density, peaks, None, singular)
