"""Oracle and equivalence checks run by ``retarded-qed validate``.

Each check pits two independent routes against each other and returns the
largest discrepancy next to its tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import lambertw as scipy_lambertw

from .dde import integrate_pm
from .driven import c_plus_steady_closed, c_plus_steady_modes, c_plus_transient, c_plus_transient_oracle
from .dynamics import c_pm_lambert, c_pm_reflection, effective_rate_pm, rate_jump
from .lambertw import lambert_w_array
from .modes import BranchSeries, laplace_weight
from .params import DriveParams, InitialState, SystemParams
from .spectrum import f_pm_late_closed, f_pm_late_lambert, probability_budget, resonance_peaks


@dataclass(frozen=True)
class CheckResult:
    name: str
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tolerance)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name}: error {self.error:.3e} (tolerance {self.tolerance:.1e})"


def _matrix():
    out = []
    for beta in (0.5, 0.95):
        for eta in (0.3, 1.0, 3.0):
            for phi in (0.0, math.pi / 3, math.pi):
                out.append(SystemParams(beta, eta, phi_p=phi))
    return out


def check_lambert_roundtrip(rng):
    z = rng.uniform(-5, 5, 2000) + 1j * rng.uniform(-5, 5, 2000)
    n = rng.integers(-10, 11, z.size)
    worst = 0.0
    for k in np.unique(n):
        zk = z[n == k]
        w = lambert_w_array(int(k), zk)
        worst = max(worst, float(np.max(np.abs(w * np.exp(w) - zk) / np.abs(zk))))
    return worst


def check_lambert_scipy(rng):
    z = rng.uniform(-5, 5, 500) + 1j * rng.uniform(-5, 5, 500)
    worst = 0.0
    for k in range(-5, 6):
        w = lambert_w_array(k, z)
        ref = scipy_lambertw(z, k)
        worst = max(worst, float(np.max(np.abs(w - ref) / np.maximum(1.0, np.abs(ref)))))
    return worst


def check_series_vs_reflection(rng):
    t = np.linspace(0.0, 10.0, 201)
    return max(float(np.max(np.abs(c_pm_lambert(p, s, t) - c_pm_reflection(p, s, t))))
               for p in _matrix() for s in (+1, -1))


def check_reflection_vs_oracle(rng):
    worst = 0.0
    for p in _matrix()[::3]:
        for s in (+1, -1):
            run = integrate_pm(p, s, 10.0)
            worst = max(worst, float(np.max(np.abs(run.values - c_pm_reflection(p, s, run.times)))))
    return worst


def check_late_field(rng):
    det = np.linspace(-10, 10, 2001)
    worst = 0.0
    for eta in (0.5655, 5.0, 20.0):
        p = SystemParams(0.95, eta)
        for s in (+1, -1):
            diff = f_pm_late_lambert(p, s, det) - f_pm_late_closed(p, s, det)
            worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def check_characteristic(rng):
    worst = 0.0
    for p in _matrix():
        for s in (+1, -1):
            worst = max(worst, max(pk.residual for pk in resonance_peaks(p, s, 40)))
    return worst


def check_laplace(rng):
    worst = 0.0
    for p in _matrix()[::2]:
        series = BranchSeries(p, +1)
        x = rng.uniform(0.0, 3.0, 20) + 1j * rng.uniform(-5, 5, 20)
        vals, _ = series.evaluate(np.zeros(x.size), q=p.eta * (x + 0.5))
        worst = max(worst, float(np.max(np.abs(vals - laplace_weight(p, +1, x)))))
    return worst


def check_steady_state(rng):
    worst = 0.0
    for _ in range(30):
        p = SystemParams(rng.uniform(0.05, 0.99), rng.uniform(0.05, 10.0), phi_p=rng.uniform(0, 2 * math.pi))
        d = DriveParams(0.1, rng.uniform(-5, 5))
        worst = max(worst, abs(c_plus_steady_modes(p, d) - c_plus_steady_closed(p, d)))
    return worst


def check_driven_transient(rng):
    p = SystemParams(0.95, 1.0, phi_p=0.7)
    d = DriveParams(0.1, 0.4)
    times, amps = c_plus_transient_oracle(p, d, 10.0)
    sel = slice(None, None, 50)
    return float(np.max(np.abs(c_plus_transient(p, d, times[sel]) - amps[sel])))


def check_norm(rng):
    p = SystemParams(1.0, 1.0, phi_p=0.0)
    return max(abs(probability_budget(p, InitialState(), t).total - 1.0) for t in (1.0, 5.0))


def check_rate_jump(rng):
    p = SystemParams(0.95, 1.0, phi_p=0.0)
    run = integrate_pm(p, +1, 2.0, step=p.eta / 2000)
    numeric = -2.0 * run.log_derivative(p.eta, side=+1).real
    closed = effective_rate_pm(p, +1, p.eta)
    return max(abs(numeric - rate_jump(p, +1)) / rate_jump(p, +1),
               abs(closed - rate_jump(p, +1)) / rate_jump(p, +1))


CHECKS = [
    ("lambert round-trip", check_lambert_roundtrip, 1e-12),
    ("lambert vs scipy", check_lambert_scipy, 1e-12),
    ("branch series vs reflection series", check_series_vs_reflection, 1e-8),
    ("reflection series vs delay-equation integrator", check_reflection_vs_oracle, 1e-6),
    ("late field: branch sum vs closed form", check_late_field, 1e-8),
    ("characteristic-equation residual", check_characteristic, 1e-9),
    ("laplace weights: branch sum vs closed form", check_laplace, 1e-10),
    ("driven steady state: branch sum vs closed form", check_steady_state, 1e-8),
    ("driven transient vs delay-equation integrator", check_driven_transient, 1e-6),
    ("probability budget", check_norm, 1e-3),
    ("rate jump after first return", check_rate_jump, 1e-4),
]


def run_checks(tolerance: float | None = None, seed: int = 20240607) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    for name, fn, tol in CHECKS:
        out.append(CheckResult(name, float(fn(rng)), tol if tolerance is None else tolerance))
    return out
