"""Guided-field amplitudes and spectra of the emitted radiation.

Detunings are (omega - omega0) in units of gamma; field amplitudes F carry a
factor 1/gamma and the spectral density |c_a|^2 + |c_b|^2 a factor 1/gamma, so
that integrating the density over the detuning axis gives a probability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .dynamics import _reflection
from .lambertw import lambert_w, w_grid
from .modes import DEFAULT_N_MAX, BranchSeries
from .params import InitialState, SystemParams, _sign, phase_factor

SQRT_HALF = 1.0 / math.sqrt(2.0)
CHAR_TOL = 1e-9


@dataclass(frozen=True)
class ResonancePeak:
    n: int
    delta_omega_res: float
    gamma_res: float
    residual: float = 0.0

    @property
    def complex_frequency(self) -> complex:
        """Root of the characteristic equation, relative to omega0."""
        return complex(self.delta_omega_res, -0.5 * self.gamma_res)


@dataclass
class FrequencyGrid:
    """Sorted detuning samples, optionally densified around known peaks."""

    detunings: np.ndarray
    windows: list = field(default_factory=list)

    def __post_init__(self):
        d = np.asarray(self.detunings, dtype=float)
        if d.ndim != 1 or d.size < 2 or np.any(np.diff(d) <= 0):
            raise ValueError("detunings must be a strictly increasing 1-D array")
        self.detunings = d

    @classmethod
    def uniform(cls, lo: float = -50.0, hi: float = 50.0, n: int = 20001):
        return cls(np.linspace(lo, hi, n))

    def refined(self, peaks, span: float = 10.0, per_width: int = 20) -> "FrequencyGrid":
        """Add windows of ``span`` widths around each peak, ``per_width`` samples per width."""
        lo, hi = self.detunings[0], self.detunings[-1]
        parts = [self.detunings]
        windows = list(self.windows)
        for pk in peaks:
            width = abs(pk.gamma_res)
            if width == 0 or not lo <= pk.delta_omega_res <= hi:
                continue
            a = max(lo, pk.delta_omega_res - 0.5 * span * width)
            b = min(hi, pk.delta_omega_res + 0.5 * span * width)
            parts.append(np.linspace(a, b, int(span * per_width) + 1))
            windows.append((a, b))
        return FrequencyGrid(np.unique(np.concatenate(parts)), windows)

    def __len__(self):
        return self.detunings.size


@dataclass
class SpectrumResult:
    grid: FrequencyGrid
    amplitude_right: np.ndarray
    amplitude_left: np.ndarray
    density: np.ndarray
    peaks: list
    fwhm: float | None = None


# -- field amplitudes -------------------------------------------------------

def _late_denominator(params, sign, delta):
    """(omega - omega0) + (i/2)(1 +/- beta e^{i omega eta}) in units of gamma."""
    b = params.coupling(sign) * np.exp(1j * delta * params.eta)
    return delta + 0.5j * (1.0 + b)


def f_pm_late_closed(params: SystemParams, sign, detuning):
    """Late-time amplitude F_+/-(omega) from the summed feedback series."""
    if params.beta >= 1:
        raise ValueError("the closed late-time form needs beta < 1")
    delta = np.asarray(detuning, dtype=float)
    out = 1j * SQRT_HALF / _late_denominator(params, _sign(sign), delta) / params.gamma
    return complex(out) if out.ndim == 0 else out


def _trapped(params, sign):
    return params.beta >= 1 and params.coupling(sign).real <= -1 + 1e-15


def f_pm_late_lambert(params: SystemParams, sign, detuning, n_max: int = DEFAULT_N_MAX,
                      tail_correction: bool = True):
    """Late-time amplitude as a sum of branch resonances."""
    if _trapped(params, sign):
        raise ValueError("lossless trapped mode: the late-time amplitude diverges on resonance")
    delta = np.asarray(detuning, dtype=float)
    series = BranchSeries(params, sign, n_max)
    q = params.eta * (-1j * delta + 0.5)
    vals, _ = series.evaluate(0.0, q=q, tail=tail_correction)
    out = SQRT_HALF * vals / params.gamma
    return complex(out) if out.ndim == 0 else out


def f_pm_finite(params: SystemParams, sign, detuning, t: float):
    """F_+/-(omega, t) = int_0^t c_+/-(s) e^{i(omega-omega0)s} ds.

    Exact: integrating the delay equation against e^{i delta s} gives
    F(T) = [c(T) e^{i delta T} - c(0) + (b/2) e^{i delta eta} F(T - eta)] / (i delta - 1/2),
    applied once per feedback round that has arrived by T.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    sign = _sign(sign)
    delta = np.asarray(detuning, dtype=float)
    tau = params.gamma * t
    b = params.coupling(sign)
    c0 = SQRT_HALF
    if params.eta == 0:
        k = 1j * delta - 0.5 * (1.0 + b)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(k == 0, c0 * tau, c0 * np.expm1(k * tau) / k)
        out = out / params.gamma
        return complex(out) if out.ndim == 0 else out
    rounds = int(math.floor(tau / params.eta + 1e-12))
    k = 1j * delta - 0.5
    feedback = 0.5 * b * np.exp(1j * delta * params.eta)
    out = np.zeros(delta.shape, dtype=complex)
    for j in range(rounds, -1, -1):
        tj = tau - j * params.eta
        cj = complex(_reflection(params, sign, tj))
        out = (cj * np.exp(1j * delta * tj) - c0 + feedback * out) / k
    out = out / params.gamma
    return complex(out) if out.ndim == 0 else out


def _half_phase(params, delta):
    """(cos, sin) of kd/2 = (phi_p + delta eta)/2."""
    ph = phase_factor(0.5 * params.phi_p) * np.exp(0.5j * delta * params.eta)
    return ph.real, ph.imag


def _amplitudes(params, initial, delta, f_plus, f_minus):
    cos_h, sin_h = _half_phase(params, delta)
    pref = -1j * math.sqrt(params.beta * params.gamma / math.pi)
    sym = initial.k_plus * cos_h * f_plus
    anti = initial.k_minus * sin_h * f_minus
    return pref * (sym - 1j * anti), pref * (sym + 1j * anti)


def _late(params, sign, delta, method, n_max):
    if method == "closed":
        return f_pm_late_closed(params, sign, delta)
    return f_pm_late_lambert(params, sign, delta, n_max)


def field_amplitudes(params: SystemParams, initial: InitialState, detuning, t: float = math.inf,
                     method: str = "closed", n_max: int = DEFAULT_N_MAX):
    """Right- and left-moving amplitudes (c_a, c_b) at time t (inf for late time)."""
    delta = np.asarray(detuning, dtype=float)
    fp = np.zeros(delta.shape, dtype=complex)
    fm = np.zeros(delta.shape, dtype=complex)
    for sign, weight in ((+1, initial.k_plus), (-1, initial.k_minus)):
        if abs(weight) < 1e-15:
            continue
        if math.isinf(t):
            val = _late(params, sign, delta, method, n_max)
        else:
            val = f_pm_finite(params, sign, delta, t)
        if sign > 0:
            fp = np.asarray(val)
        else:
            fm = np.asarray(val)
    ca, cb = _amplitudes(params, initial, delta, fp, fm)
    if ca.ndim == 0:
        return complex(ca), complex(cb)
    return ca, cb


def spectral_density(params, initial, detuning, t=math.inf, method="closed", n_max=DEFAULT_N_MAX):
    ca, cb = field_amplitudes(params, initial, detuning, t, method, n_max)
    return np.abs(ca) ** 2 + np.abs(cb) ** 2


# -- resonances -------------------------------------------------------------

def characteristic_residual(params: SystemParams, sign, x: complex) -> float:
    """|x + i/2 + (i/2) b e^{i x eta}| for a complex detuning x (units of gamma)."""
    b = params.coupling(sign)
    return abs(x + 0.5j + 0.5j * b * np.exp(1j * x * params.eta))


def resonance_peaks(params: SystemParams, sign, n_max: int = DEFAULT_N_MAX) -> list[ResonancePeak]:
    """Resonances omega0 + Delta_n - i gamma_n/2 for |n| <= n_max, each checked
    against the characteristic equation."""
    if not params.eta > 0:
        raise ValueError("resonance ladder needs eta > 0")
    z = params.lambert_arg(sign)
    if z == 0:
        vals = [(0, 0j)]
    else:
        vals = [(wv.branch, wv.w) for wv in w_grid(-n_max, n_max, z)]
    out = []
    for n, w in vals:
        shift = -w.imag / params.eta
        width = 1.0 - 2.0 * w.real / params.eta
        x = complex(shift, -0.5 * width)
        res = characteristic_residual(params, sign, x)
        # far branches cancel terms of size |x|; allow their rounding floor
        feedback = 0.5 * abs(params.coupling(sign) * np.exp(1j * x * params.eta))
        floor = 8 * np.finfo(float).eps * (abs(x) + feedback * (1 + abs(x * params.eta)))
        if res > max(CHAR_TOL, floor):
            raise ArithmeticError(f"branch {n}: characteristic residual {res:.2e}")
        out.append(ResonancePeak(n, shift * params.gamma, width * params.gamma, res * params.gamma))
    return out


def comb_spacing(params: SystemParams) -> float:
    """Spacing of the central teeth for the even-parity symmetric configuration."""
    if not params.eta > 0:
        raise ValueError("comb spacing needs eta > 0")
    eta = params.eta
    w0 = lambert_w(0, -params.beta * 0.5 * eta * math.exp(0.5 * eta)).w
    return 2.0 * params.gamma / eta * w0.imag


# -- spectra and widths ------------------------------------------------------

def fwhm(density_fn, grid: np.ndarray, values: np.ndarray, tol: float = 1e-10):
    """Full width at half maximum of the lobe around the global maximum.

    Returns None when a half-maximum crossing lies outside the grid or when a
    separate lobe also rises above half maximum.
    """
    i = int(np.argmax(values))
    lo_b = grid[max(i - 1, 0)]
    hi_b = grid[min(i + 1, grid.size - 1)]
    peak_val = values[i]
    if hi_b > lo_b:
        opt = minimize_scalar(lambda x: -float(density_fn(x)), bounds=(lo_b, hi_b),
                              method="bounded", options={"xatol": 1e-12})
        peak_val = max(peak_val, -opt.fun)
    half = 0.5 * peak_val
    below = values < half
    left = np.flatnonzero(below[:i])
    right = np.flatnonzero(below[i:])
    if left.size == 0 or right.size == 0:
        return None
    li, ri = left[-1], i + right[0]
    if np.any(values[:li] >= half) or np.any(values[ri:] >= half):
        return None
    g = lambda x: float(density_fn(x)) - half
    x_lo = brentq(g, grid[li], grid[li + 1], xtol=tol, rtol=1e-15)
    x_hi = brentq(g, grid[ri - 1], grid[ri], xtol=tol, rtol=1e-15)
    return x_hi - x_lo


def waveguide_spectrum(params: SystemParams, initial: InitialState, grid: FrequencyGrid,
                       t: float = math.inf, method: str = "closed", n_max: int = DEFAULT_N_MAX,
                       with_fwhm: bool = True) -> SpectrumResult:
    """Guided-mode excitation density over a detuning grid."""
    delta = grid.detunings
    ca, cb = field_amplitudes(params, initial, delta, t, method, n_max)
    density = np.abs(ca) ** 2 + np.abs(cb) ** 2
    peaks = []
    if params.eta > 0:
        for sign, weight in ((+1, initial.k_plus), (-1, initial.k_minus)):
            if abs(weight) > 1e-15:
                peaks += [pk for pk in resonance_peaks(params, sign, n_max)
                          if delta[0] <= pk.delta_omega_res <= delta[-1]]
    width = None
    if with_fwhm:
        fn = lambda x: spectral_density(params, initial, x, t, method, n_max)
        width = fwhm(fn, delta, density)
    return SpectrumResult(grid, ca, cb, density, peaks, width)


@dataclass(frozen=True)
class ProbabilityBudget:
    atomic: float
    field_grid: float
    field_tail: float

    @property
    def total(self) -> float:
        return self.atomic + self.field_grid + self.field_tail


def probability_budget(params: SystemParams, initial: InitialState, t: float,
                       half_width: float = 200.0, spacing: float = 0.005) -> ProbabilityBudget:
    """Atomic population plus guided-field probability at time t.

    The field integral is trapezoidal on [-half_width, half_width]; beyond it
    the density falls as A/delta^2, with A averaged over the outer tenth of
    the grid, and the two tails add 2A/half_width.
    """
    from .dynamics import atomic_amplitudes

    n = int(round(2 * half_width / spacing)) + 1
    delta = np.linspace(-half_width, half_width, n)
    dens = spectral_density(params, initial, delta, t)
    field_grid = float(np.trapezoid(dens, delta) if hasattr(np, "trapezoid") else np.trapz(dens, delta))
    outer = np.abs(delta) >= 0.9 * half_width
    amp = float(np.mean(dens[outer] * delta[outer] ** 2))
    c1, c2 = atomic_amplitudes(params, initial, t)
    g = params.gamma  # density is per unit angular frequency
    return ProbabilityBudget(abs(c1) ** 2 + abs(c2) ** 2, g * field_grid, g * 2.0 * amp / half_width)
