"""Named scenarios reproducing the data behind each published figure.

All use beta = 0.95 and omega0/gamma = 500 (5 GHz qubits, 10 MHz decay);
separations are snapped to commensurate values.
"""
from __future__ import annotations

from .config import GridSpec, Scenario
from .cqed import nearest_commensurate_eta
from .params import TABLE_I_RATIO, DriveParams, InitialState, SystemParams

BETA = 0.95


def _system(eta, parity="even"):
    eta, _ = nearest_commensurate_eta(eta, TABLE_I_RATIO, parity)
    return SystemParams(BETA, eta, omega0_over_gamma=TABLE_I_RATIO)


def _shift_ladder(initial):
    # resonance shifts of the low branches against separation
    return Scenario(mode="rates", system=_system(1.0), initial=initial,
                    grids={"eta": GridSpec(0.05, 10.0, 200)},
                    options={"table": "ladder", "branches": 3, "parity": "even"})


def _spectra(initial):
    return Scenario(mode="spectrum", system=_system(0.0), initial=initial,
                    grids={"detuning": GridSpec(-10.0, 10.0, 4001)},
                    options={"etas": "0,0.56,1,2,5", "parity": "even"})


def _map(parity):
    return Scenario(mode="driven", system=_system(1.0, parity), drive=DriveParams(0.1, 0.0),
                    grids={"eta": GridSpec(0.05, 10.0, 100), "detuning": GridSpec(-3.0, 3.0, 601)},
                    options={"table": "map", "parity": parity, "ridges": 20})


PRESETS = {
    "fig2a": lambda: _shift_ladder(InitialState.symmetric()),
    "fig2b": lambda: _shift_ladder(InitialState.antisymmetric()),
    "fig3a": lambda: _spectra(InitialState.symmetric()),
    "fig3b": lambda: _spectra(InitialState.antisymmetric()),
    "fig3c": lambda: Scenario(mode="spectrum", system=_system(20.0), initial=InitialState.symmetric(),
                              grids={"detuning": GridSpec(-1.0, 1.0, 8001)},
                              options={"etas": "0,20", "parity": "even", "refine": 1}),
    "fig4a": lambda: _map("even"),
    "fig4b": lambda: _map("odd"),
    "fig5": lambda: Scenario(mode="driven", system=_system(1.0), drive=DriveParams(0.1, 0.0),
                             grids={"detuning": GridSpec(-5.0, 5.0, 2001)},
                             options={"table": "scattering", "etas": "1,5,10", "parity": "even"}),
}


def preset(name: str) -> Scenario:
    try:
        sc = PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}") from None
    sc.source = f"preset:{name}"
    return sc
