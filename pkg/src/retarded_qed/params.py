"""Parameter containers shared by every solver.

All solvers work in units of the total decay rate: a time ``t`` enters only
through ``gamma * t`` and a frequency offset through ``delta / gamma``.  With
the default ``gamma = 1`` the inputs are already dimensionless.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TABLE_I_RATIO = 500.0  # omega0 / gamma for 5 GHz qubits decaying at 10 MHz


def phase_factor(phi: float) -> complex:
    """exp(i phi), snapped to the exact value at multiples of pi/2.

    Propagation phases built as eta * omega0/gamma land within rounding of
    multiples of pi; snapping keeps the Lambert-W argument exactly on the real
    axis so that branch labels do not depend on the sign of a 1e-15 residue.
    """
    quarter = phi / (0.5 * math.pi)
    q = round(quarter)
    if abs(quarter - q) <= 1e-12 * max(1.0, abs(quarter)):
        return (1.0 + 0j, 1j, -1.0 + 0j, -1j)[q % 4]
    return complex(math.cos(phi), math.sin(phi))


@dataclass(frozen=True)
class SystemParams:
    """Dimensionless emitter-pair configuration.

    ``phi_p`` defaults to ``eta * omega0_over_gamma``; it is stored unreduced.
    """

    beta: float
    eta: float
    phi_p: float | None = None
    omega0_over_gamma: float = TABLE_I_RATIO
    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if not self.eta >= 0.0:
            raise ValueError(f"eta must be non-negative, got {self.eta}")
        if not self.omega0_over_gamma > 0:
            raise ValueError("omega0_over_gamma must be positive")
        if self.phi_p is None:
            object.__setattr__(self, "phi_p", self.eta * self.omega0_over_gamma)

    @property
    def delay(self) -> float:
        """Propagation delay d/v in the same time unit as 1/gamma."""
        return self.eta / self.gamma

    def coupling(self, sign: int) -> complex:
        """Delayed-feedback coefficient +/- beta exp(i phi_p)."""
        return _sign(sign) * self.beta * phase_factor(self.phi_p)

    def lambert_arg(self, sign: int) -> complex:
        """Argument -/+ (eta/2) e^{eta/2} beta e^{i phi_p} of the branch functions."""
        z = -self.coupling(sign) * 0.5 * self.eta * math.exp(0.5 * self.eta)
        # a negative real z must sit on the upper side of the cut for every consumer
        return complex(z.real, 0.0) if z.imag == 0 else z

    def propagation_phase(self, detuning):
        """omega * d / v for a field at detuning (omega - omega0)/gamma."""
        return (np.asarray(detuning, dtype=float) + self.omega0_over_gamma) * self.eta

    def with_(self, **changes) -> "SystemParams":
        values = dict(beta=self.beta, eta=self.eta, phi_p=self.phi_p,
                      omega0_over_gamma=self.omega0_over_gamma, gamma=self.gamma)
        if "eta" in changes and "phi_p" not in changes:
            values["phi_p"] = None
        values.update(changes)
        return SystemParams(**values)

    @classmethod
    def commensurate(cls, eta: float, beta: float, parity: str = "even",
                     omega0_over_gamma: float = TABLE_I_RATIO, gamma: float = 1.0):
        """Nearest eta whose propagation phase is an even/odd multiple of pi."""
        from .cqed import nearest_commensurate_eta

        eta_c, _ = nearest_commensurate_eta(eta, omega0_over_gamma, parity)
        return cls(beta=beta, eta=eta_c, omega0_over_gamma=omega0_over_gamma, gamma=gamma)


@dataclass(frozen=True)
class InitialState:
    """cos(theta)|eg> + sin(theta) e^{i phi_s}|ge>."""

    theta: float = 0.25 * math.pi
    phi_s: float = 0.0

    @property
    def k_plus(self) -> complex:
        return (math.cos(self.theta) + phase_factor(self.phi_s) * math.sin(self.theta)) / math.sqrt(2)

    @property
    def k_minus(self) -> complex:
        return (math.cos(self.theta) - phase_factor(self.phi_s) * math.sin(self.theta)) / math.sqrt(2)

    @classmethod
    def symmetric(cls):
        return cls(0.25 * math.pi, 0.0)

    @classmethod
    def antisymmetric(cls):
        return cls(0.25 * math.pi, math.pi)

    @classmethod
    def atom1(cls):
        return cls(0.0, 0.0)


@dataclass(frozen=True)
class DriveParams:
    """Weak coherent drive: Rabi frequency and detuning omega0 - omega_D (units of gamma)."""

    rabi: float
    detuning_d: float = 0.0
    perturbative: bool = field(init=False)

    def __post_init__(self):
        if self.rabi < 0:
            raise ValueError("rabi frequency must be non-negative")
        object.__setattr__(self, "perturbative", self.rabi <= 1.0)


def _sign(sign) -> int:
    if sign in (1, "+", "plus", "symmetric"):
        return 1
    if sign in (-1, "-", "minus", "antisymmetric"):
        return -1
    raise ValueError(f"sign must be +1 or -1, got {sign!r}")
