import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ppcqed import calibration as cal
from ppcqed.constants import TWO_PI

P = dict(omega_q=TWO_PI * 6.10e9, omega_b=TWO_PI * 4.347e9, alpha=-TWO_PI * 388e6)
OMEGA_D = P["omega_q"] - P["omega_b"]
CAL = cal.StarkCalibration.from_frequencies(P["alpha"], P["omega_q"], OMEGA_D)


def test_zero_drive():
    ss = cal.kerr_steady_state(CAL.detuning_q, CAL.alpha, 0.0)
    assert ss.n_photons == 0 and not ss.bistable


def test_linear_limit():
    # alpha -> 0 gives the driven harmonic oscillator n = eps^2 / Delta^2
    ss = cal.kerr_steady_state(-1e9, 0.0, 1e6)
    assert ss.n_photons == pytest.approx(1e-6, rel=1e-12)


def test_resonant_drive():
    ss = cal.kerr_steady_state(0.0, -2.0, 4.0)
    assert ss.n_photons == pytest.approx((16 / 4) ** (1 / 3))
    with pytest.raises(cal.CalibrationError):
        cal.kerr_steady_state(0.0, 0.0, 1.0)


def test_positive_anharmonicity_rejected():
    with pytest.raises(cal.CalibrationError):
        cal.kerr_steady_state(-1.0, 1.0, 1.0)


@settings(max_examples=300)
@given(st.floats(-8, 0.5), st.floats(0.1, 10), st.floats(-3, 3))
def test_root_solves_cubic(log_eps, ratio, sign):
    detuning = -1e10 if sign < 0 else 1e10
    alpha = -ratio * 1e9
    eps = 1e10 * 10**log_eps
    ss = cal.kerr_steady_state(detuning, alpha, eps)
    for n in ss.roots:
        assert n >= 0
        scale = max(eps**2, n * detuning**2)
        assert abs(cal.kerr_residual(n, detuning, alpha, eps)) <= 1e-10 * scale
    assert ss.n_photons == min(ss.roots)
    assert ss.bistable == (len(ss.roots) == 3)


def test_bistability_semantics():
    # blue detuning with negative alpha: monotone cubic, single root
    assert not cal.kerr_steady_state(1e9, -1e8, 1e7).bistable
    # red detuning: the undamped cubic also has the pair near Delta/alpha
    ss = cal.kerr_steady_state(CAL.detuning_q, CAL.alpha, 1e6)
    assert ss.bistable
    assert ss.roots[1] == pytest.approx(CAL.detuning_q / CAL.alpha, rel=0.01)


def test_n_increases_with_drive():
    eps = np.logspace(5, 9, 50)
    n = [cal.kerr_steady_state(CAL.detuning_q, CAL.alpha, e).n_photons for e in eps]
    assert np.all(np.diff(n) > 0)


def test_bloch_siegert_ratio():
    # full / rotating-wave shift = (1 + |Delta|/Sigma)^2 on the red sideband
    delta = abs(CAL.detuning_q)
    sigma = CAL.sum_frequency
    expected = (1 + delta / sigma) ** 2
    full = cal.ac_stark_shift(1e8, CAL.alpha, CAL.detuning_q, sigma)
    rwa = cal.rwa_stark_shift(1e8, CAL.alpha, CAL.detuning_q)
    assert full / rwa == pytest.approx(expected, rel=1e-14)
    assert full / rwa == pytest.approx(2.41352, rel=1e-5)


def test_stark_shift_sign():
    assert cal.ac_stark_shift(1e8, CAL.alpha, CAL.detuning_q, CAL.sum_frequency) < 0
    with pytest.raises(cal.CalibrationError):
        cal.drive_from_stark(+1e5, CAL)
    with pytest.raises(cal.CalibrationError):
        cal.ac_stark_shift(1.0, CAL.alpha, 0.0, CAL.sum_frequency)


def test_stark_closed_loop():
    for eps in np.logspace(6, 10, 50):
        shift = cal.ac_stark_shift(eps, CAL.alpha, CAL.detuning_q, CAL.sum_frequency)
        n_direct = cal.kerr_steady_state(CAL.detuning_q, CAL.alpha, eps).n_photons
        n_inv = cal.photon_number_from_stark(shift, CAL)
        assert n_inv == pytest.approx(n_direct, rel=1e-8)


def test_calibration_validation():
    with pytest.raises(cal.CalibrationError):
        cal.StarkCalibration(1.0, -1.0, 1.0)
    with pytest.raises(cal.CalibrationError):
        cal.StarkCalibration(-1.0, 0.0, 1.0)
    with pytest.raises(cal.CalibrationError):
        cal.StarkCalibration(-1.0, -1.0, 0.0)


def test_effective_kerr_correction():
    g0 = TWO_PI * 11.9e6
    a_eff = cal.effective_kerr(P["alpha"], g0, P["omega_b"], TWO_PI * 116.6e3)
    correction = P["alpha"] - a_eff
    assert correction == pytest.approx(2 * g0**2 / P["omega_b"], rel=1e-9)
    assert correction / TWO_PI == pytest.approx(65.15e3, rel=1e-3)


def test_critical_photon_number():
    assert cal.critical_photon_number(TWO_PI * 1.75e9, TWO_PI * 2.5e6) == pytest.approx(122500, rel=1e-12)
    with pytest.raises(cal.CalibrationError):
        cal.critical_photon_number(1.0, 0.0)
