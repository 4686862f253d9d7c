"""Josephson-junction-array waveguide and the map from hardware to dimensionless parameters.

All quantities here are SI (henry, farad, metre, rad/s).  This is the only
module that sees physical units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .params import SystemParams


@dataclass(frozen=True)
class JJArrayParams:
    l_j: float
    c_j: float
    c_g: float
    a: float
    n_cells: int = 2000

    def __post_init__(self):
        for name in ("l_j", "c_j", "c_g", "a"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.n_cells < 2:
            raise ValueError("n_cells must be at least 2")

    @property
    def plasma_frequency(self) -> float:
        return 1.0 / math.sqrt(self.l_j * self.c_j)

    @property
    def band_top(self) -> float:
        """omega at ka = pi."""
        return dispersion(self, math.pi)

    def mode_phases(self):
        """Discrete ka = n pi / N of a finite array."""
        return [n * math.pi / self.n_cells for n in range(1, self.n_cells + 1)]


@dataclass(frozen=True)
class PhysicalSetup:
    """omega0 and gamma in rad/s, separation d in metres.

    The phase velocity comes from ``jj`` unless ``velocity`` is given.
    """

    omega0: float
    gamma: float
    beta: float
    d: float
    jj: JJArrayParams | None = None
    velocity: float | None = None

    def phase_velocity(self) -> float:
        if self.velocity is not None:
            return self.velocity
        if self.jj is None:
            raise ValueError("setup needs either a junction array or an explicit velocity")
        return phase_velocity(self.jj, self.omega0)


def dispersion(jj: JJArrayParams, ka: float) -> float:
    """Angular frequency of the array mode with phase advance ka per cell."""
    if not 0 < ka <= math.pi:
        raise ValueError(f"ka must lie in (0, pi], got {ka}")
    s = 2.0 * math.sin(0.5 * ka) ** 2  # 1 - cos(ka) without cancellation
    return jj.plasma_frequency * math.sqrt(s / (jj.c_g / (2.0 * jj.c_j) + s))


def wavenumber(jj: JJArrayParams, omega: float) -> float:
    """ka solving dispersion(ka) = omega, by bisection on the monotone branch."""
    top = jj.band_top
    if not 0 < omega < top:
        if omega == top:
            return math.pi
        raise ValueError(f"omega={omega:.6e} rad/s outside the band (0, {top:.6e})")
    # relative tolerance only: ka can be tiny deep in the linear part of the band
    return brentq(lambda ka: dispersion(jj, ka) - omega, 1e-300, math.pi,
                  xtol=1e-300, rtol=4 * 2.0**-52, maxiter=2000)


def phase_velocity(jj: JJArrayParams, omega: float) -> float:
    """v = omega / k at angular frequency omega (m/s)."""
    ka = wavenumber(jj, omega)
    return omega * jj.a / ka


def to_system_params(setup: PhysicalSetup) -> SystemParams:
    """eta = gamma d / v, phi_p = omega0 d / v, ratio omega0/gamma."""
    if setup.d < 0:
        raise ValueError("separation must be non-negative")
    v = setup.phase_velocity()
    delay = setup.d / v
    return SystemParams(beta=setup.beta, eta=setup.gamma * delay, phi_p=setup.omega0 * delay,
                        omega0_over_gamma=setup.omega0 / setup.gamma, gamma=1.0)


def nearest_commensurate_eta(target_eta: float, omega0_over_gamma: float, parity: str = "even"):
    """eta closest to target with eta * omega0/gamma an even (2p pi) or odd ((2p+1) pi) multiple of pi.

    Returns (eta, p).
    """
    if target_eta < 0:
        raise ValueError("target eta must be non-negative")
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    offset = 0.0 if parity == "even" else 1.0
    eta_of = lambda p: (2 * p + offset) * math.pi / omega0_over_gamma
    guess = round((target_eta * omega0_over_gamma / math.pi - offset) / 2.0)
    cands = [p for p in (guess - 1, guess, guess + 1) if p >= 0]
    best = min(cands, key=lambda p: (abs(eta_of(p) - target_eta), p))
    return eta_of(best), best
