import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.signal import argrelmax

from retarded_qed.driven import (
    c_minus_driven, c_plus_first_order, c_plus_steady_closed, c_plus_steady_literal,
    c_plus_steady_modes, c_plus_transient, c_plus_transient_oracle, excitation_map, scattered_spectrum,
)
from retarded_qed.dynamics import branch_modes, critical_eta
from retarded_qed.params import DriveParams, SystemParams
from retarded_qed.spectrum import FrequencyGrid, resonance_peaks

EVEN_1 = SystemParams(0.95, 1.0, phi_p=0.0)
ODD_1 = SystemParams(0.95, 1.0, phi_p=math.pi)
WEAK = DriveParams(0.1, 0.0)


def test_drive_params_flag():
    assert DriveParams(1.0).perturbative and not DriveParams(1.5).perturbative
    with pytest.raises(ValueError):
        DriveParams(-0.1)


def test_transient_trivial():
    assert c_plus_transient(EVEN_1, WEAK, 0.0) == 0
    t = np.linspace(0, 10, 11)
    assert np.all(c_plus_transient(EVEN_1, DriveParams(0.0, 0.4), t) == 0)


def test_transient_reaches_steady():
    steady = c_plus_steady_closed(EVEN_1, WEAK)
    assert abs(c_plus_transient(EVEN_1, WEAK, 20.0) - steady) < 1e-4
    times, amps = c_plus_transient_oracle(EVEN_1, WEAK, 20.0)
    assert abs(amps[-1] - steady) < 1e-4


@pytest.mark.parametrize("params,drive", [
    (SystemParams(0.95, 1.0, phi_p=0.7), DriveParams(0.1, 0.4)),
    (SystemParams(0.5, 2.5, phi_p=-1.2), DriveParams(0.3, -1.0)),
    (ODD_1, DriveParams(0.1, 0.0)),
])
def test_transient_against_oracle(params, drive):
    times, amps = c_plus_transient_oracle(params, drive, 8.0)
    sel = slice(None, None, 40)
    assert np.max(np.abs(c_plus_transient(params, drive, times[sel]) - amps[sel])) < 1e-6


def test_transient_envelope():
    drive = DriveParams(0.1, 0.3)
    slowest = min(m.gamma_n.real for m in branch_modes(EVEN_1, +1, 40))
    steady = c_plus_steady_modes(EVEN_1, drive)
    t = np.linspace(4, 30, 27)
    scaled = np.abs(c_plus_transient(EVEN_1, drive, t) - steady) * np.exp(slowest * t / 2)
    assert np.max(scaled[len(t) // 2:]) <= 1.05 * np.max(scaled[: len(t) // 2])


def test_antisymmetric_not_driven():
    assert c_minus_driven(EVEN_1, WEAK, 3.0) == 0
    assert np.all(c_minus_driven(EVEN_1, WEAK, np.linspace(0, 5, 6)) == 0)


@given(st.floats(0.01, 0.99), st.floats(0.01, 30), st.sampled_from(["even", "odd"]), st.floats(-5, 5))
def test_steady_forms_agree(beta, eta, parity, detuning):
    p = SystemParams.commensurate(eta, beta, parity)
    if p.eta == 0:
        return
    d = DriveParams(0.1, detuning)
    assert abs(c_plus_steady_modes(p, d) - c_plus_steady_closed(p, d)) <= 1e-8


def test_coincident_lorentzian():
    p = SystemParams(0.95, 0.0, phi_p=0.0)
    for det in (-2.0, 0.0, 0.7):
        expected = 0.1 / (det + 0.5j * 1.95)
        assert abs(c_plus_steady_closed(p, DriveParams(0.1, det)) - expected) <= 1e-10
    near = SystemParams(0.95, 1e-6, phi_p=0.0)
    assert abs(c_plus_steady_modes(near, WEAK) - 0.1 / (0.5j * 1.95)) < 1e-5


def test_far_detuned():
    for det in (1e3, -1e4):
        amp = c_plus_steady_modes(EVEN_1, DriveParams(0.1, det))
        assert abs(abs(amp) * abs(det) / 0.1 - 1) < 1e-2


def test_odd_parity_enhanced():
    assert abs(c_plus_steady_closed(ODD_1, WEAK)) > abs(c_plus_steady_closed(EVEN_1, WEAK))


@given(st.floats(0, 3), st.floats(0.1, 5), st.floats(-3, 3))
def test_linearity(rabi, eta, det):
    p = SystemParams(0.9, eta, phi_p=0.4)
    one, k = DriveParams(rabi, det), 2.75
    many = DriveParams(k * rabi, det)
    assert abs(c_plus_steady_closed(p, many) - k * c_plus_steady_closed(p, one)) <= 1e-14 * (1 + abs(c_plus_steady_closed(p, many)))
    assert abs(c_plus_steady_modes(p, many) - k * c_plus_steady_modes(p, one)) <= 1e-13
    assert abs(c_plus_transient(p, many, 2.0) - k * c_plus_transient(p, one, 2.0)) <= 1e-13


def test_literal_form_differs():
    literal, shell = c_plus_steady_literal(EVEN_1, DriveParams(0.1, 0.3))
    canonical = c_plus_steady_modes(EVEN_1, DriveParams(0.1, 0.3))
    assert abs(literal - canonical) > 1e-2 * abs(canonical)
    assert shell < abs(literal)


@pytest.mark.parametrize("phi", [0.0, math.pi])
def test_first_order_relation(phi):
    p = SystemParams(0.95, 1.0, phi_p=phi)
    d = DriveParams(0.1, 0.4)
    assert abs(abs(c_plus_first_order(p, d, 6.0)) / math.sqrt(2) - abs(c_plus_transient(p, d, 6.0))) < 1e-12


def test_steady_peaks_at_resonances():
    p = SystemParams.commensurate(10.0, 0.95)
    det = np.linspace(-2, 2, 8001)
    pop = np.array([abs(c_plus_steady_closed(p, DriveParams(0.1, x))) ** 2 for x in det])
    maxima = det[argrelmax(pop)[0]]
    cell = det[1] - det[0]
    for pk in resonance_peaks(p, +1, 10):
        if abs(pk.delta_omega_res) < 1.9 and pk.gamma_res <= 0.1:
            assert np.min(np.abs(maxima - pk.delta_omega_res)) <= cell


# -- excitation maps ---------------------------------------------------------

def test_map_single_ridge_below_critical():
    eta_c = critical_eta(0.95)
    emap = excitation_map(0.95, 0.1, [0.3, 0.5], np.linspace(-3, 3, 601), "even")
    assert np.all(emap.etas < eta_c)
    for row in emap.population:
        peaks = argrelmax(row)[0]
        assert len(peaks) == 1 and abs(emap.detunings[peaks[0]]) < 1e-12


def test_map_quadratic_in_rabi():
    det = np.linspace(-3, 3, 61)
    a = excitation_map(0.95, 0.1, [1.0, 4.0], det)
    b = excitation_map(0.95, 0.2, [1.0, 4.0], det)
    assert np.allclose(b.population, 4 * a.population, rtol=1e-14, atol=0)


def test_map_parity_snapping():
    emap = excitation_map(0.95, 0.1, [1.0, 2.0], [0.0], "odd")
    phases = emap.etas * 500 / math.pi
    assert np.allclose(phases, 2 * emap.orders + 1, atol=1e-9)


def test_map_narrow_ridges_match_maxima():
    det = np.linspace(-3, 3, 1201)
    cell = det[1] - det[0]
    for parity in ("even", "odd"):
        emap = excitation_map(0.95, 0.1, np.linspace(1.0, 10.0, 19), det, parity, n_ridges=20)
        for eta, row in zip(emap.etas, emap.population):
            maxima = det[argrelmax(row)[0]]
            p = SystemParams(0.95, eta)
            for pk in resonance_peaks(p, +1, 20):
                if abs(pk.delta_omega_res) < 2.9 and pk.gamma_res <= 0.1:
                    assert np.min(np.abs(maxima - pk.delta_omega_res)) <= cell


# -- scattered spectrum --------------------------------------------------------

def test_scattered_peaks_follow_drive():
    p = SystemParams.commensurate(10.0, 0.95)
    drive = DriveParams(0.1, 0.3)
    grid = FrequencyGrid(np.linspace(-2, 2, 8001))
    scattered = scattered_spectrum(p, drive, grid)
    maxima = grid.detunings[argrelmax(scattered.density)[0]]
    expected = [pk for pk in resonance_peaks(p, +1, 10) if abs(pk.delta_omega_res - 0.3) <= 2]
    assert [pk.delta_omega_res for pk in scattered.peaks] == [pk.delta_omega_res - 0.3 for pk in expected]
    narrow = [pk for pk in scattered.peaks if pk.gamma_res <= 0.05]
    assert len(narrow) == 2
    for pk in narrow:
        # the emission factor cos^2(kd/2) drags the maxima slightly off the poles
        assert np.min(np.abs(maxima - pk.delta_omega_res)) <= 0.2 * pk.gamma_res


def test_scattered_single_lobe_markov():
    p = SystemParams(0.95, 1e-3, phi_p=0.0)
    grid = FrequencyGrid(np.linspace(-5, 5, 2001))
    scattered = scattered_spectrum(p, DriveParams(0.1, 0.0), grid)
    assert len(argrelmax(scattered.density)[0]) == 1


def test_scattered_scales_with_rabi_squared():
    grid = FrequencyGrid(np.linspace(-5, 5, 501))
    a = scattered_spectrum(EVEN_1, DriveParams(0.1, 0.2), grid)
    b = scattered_spectrum(EVEN_1, DriveParams(0.2, 0.2), grid)
    assert np.allclose(b.density, 4 * a.density, rtol=1e-13, atol=0)
    assert abs(b.singular[0].weight_rate - 4 * a.singular[0].weight_rate) < 1e-15


def test_scattered_elastic_line_kept_separate():
    grid = FrequencyGrid(np.linspace(-1, 1, 201))
    scattered = scattered_spectrum(EVEN_1, DriveParams(0.1, 0.0), grid)
    assert len(scattered.singular) == 1 and scattered.singular[0].detuning == 0.0
    assert np.all(np.isfinite(scattered.density))
    assert scattered.singular[0].weight_rate > 0
