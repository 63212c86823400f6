import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ppcqed import quantum as q
from ppcqed import spectroscopy as sp
from ppcqed.constants import TWO_PI
from ppcqed.fitting import DegenerateDataError

WB = TWO_PI * 4.347e9
KI, KE = TWO_PI * 28.0e3, TWO_PI * 88.6e3
TRUE = sp.NotchParams(WB, KI, KE, 0.0)
G_SPEC = TWO_PI * 2.81e6


def notch_grid(n=401, span=5):
    return WB + np.linspace(-span, span, n) * (KI + KE)


def test_notch_resonance_and_baseline():
    s = sp.s21_notch([WB, WB + 1e6 * TRUE.kappa], TRUE)
    assert s[0] == pytest.approx(1 - KE / (KI + KE))
    assert abs(s[0]) == pytest.approx(28.0 / 116.6, rel=1e-12)
    assert abs(s[1] - 1) < 1e-6


def test_notch_params_validation():
    with pytest.raises(ValueError):
        sp.NotchParams(WB, -1.0, KE)
    with pytest.raises(ValueError):
        sp.NotchParams(WB, KI, KE, 4.0)


def test_wrap_phase():
    assert sp.wrap_phase(math.pi) == pytest.approx(math.pi)
    assert sp.wrap_phase(-math.pi) == pytest.approx(math.pi)
    assert sp.wrap_phase(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


@pytest.mark.parametrize("theta", [0.0, 0.3, -0.5])
def test_notch_fit_noiseless(theta):
    truth = sp.NotchParams(WB, KI, KE, theta)
    w = notch_grid()
    init = sp.NotchParams(WB + 0.2 * truth.kappa, 1.3 * KI, 0.7 * KE, 0.0)
    fit = sp.fit_notch(w, sp.s21_notch(w, truth), init)
    assert fit["omega_b"] == pytest.approx(WB, rel=1e-12)
    assert fit["kappa_int"] == pytest.approx(KI, rel=1e-6)
    assert fit["kappa_ext"] == pytest.approx(KE, rel=1e-6)
    assert fit["theta"] == pytest.approx(theta, abs=1e-6)


def test_notch_fit_basin():
    w = notch_grid()
    data = sp.s21_notch(w, TRUE)
    fits = [sp.fit_notch(w, data, sp.NotchParams(WB * (1 + 0), KI * f1, KE * f2, 0.0))
            for f1, f2 in [(0.7, 1.3), (1.3, 0.7), (1.3, 1.3), (0.7, 0.7)]]
    norms = [f.residual_norm for f in fits]
    assert max(norms) - min(norms) < 1e-9


def test_notch_fit_noisy():
    w = notch_grid()
    clean = sp.s21_notch(w, TRUE)
    for seed in range(20):
        rng = np.random.default_rng(seed)
        data = clean + 0.01 * (rng.normal(size=w.size) + 1j * rng.normal(size=w.size))
        fit = sp.fit_notch(w, data, TRUE, seed=seed)
        assert abs(fit["omega_b"] - WB) < 0.1 * TRUE.kappa
        assert fit["kappa_int"] == pytest.approx(KI, rel=0.05)
        assert fit["kappa_ext"] == pytest.approx(KE, rel=0.05)


def test_notch_fit_degenerate():
    w = notch_grid()
    with pytest.raises(DegenerateDataError):
        sp.fit_notch(w, np.ones(w.size, dtype=complex), TRUE)
    with pytest.raises(DegenerateDataError):
        sp.fit_notch(w[:5], sp.s21_notch(w[:5], TRUE), TRUE)
    narrow = WB + np.linspace(-1, 1, 50) * TRUE.kappa
    with pytest.raises(DegenerateDataError):
        sp.fit_notch(narrow, sp.s21_notch(narrow, TRUE), TRUE)


def test_remove_background():
    w = notch_grid(n=2001, span=100)
    baseline = (0.8 + 0.1j) * (1 + 2e-3 * (w - WB) / TRUE.kappa)
    data = sp.s21_notch(w, TRUE) * baseline
    cleaned = sp.remove_background(w, data)
    fit = sp.fit_notch(w, cleaned, TRUE)
    assert fit["kappa_int"] == pytest.approx(KI, rel=0.02)


def test_normal_modes_limits():
    pair = sp.normal_mode_frequencies(WB, -WB, G_SPEC)
    assert pair.splitting == pytest.approx(2 * G_SPEC, rel=1e-15)
    bare = sp.normal_mode_frequencies(WB, -WB + 1e7, 0.0)
    assert sorted([bare.upper, bare.lower]) == pytest.approx(sorted([WB, WB - 1e7]))
    with pytest.raises(ValueError):
        sp.normal_mode_frequencies(WB, -WB, -1.0)


@settings(max_examples=100)
@given(st.floats(-1e8, 1e8), st.floats(0, 1e8), st.floats(1e6, 1e8))
def test_splitting_increases_with_g(delta, g, dg):
    a = sp.normal_mode_frequencies(WB, -WB + delta, g).splitting
    b = sp.normal_mode_frequencies(WB, -WB + delta, g + dg).splitting
    assert b > a
    assert a >= 2 * g * (1 - 1e-12)


def test_normal_modes_random_block_draws():
    rng = np.random.default_rng(0)
    space = q.HilbertSpace(2, 3)
    for _ in range(1000):
        omega_b = rng.uniform(1, 10)
        det = rng.uniform(-10, 0)
        g = rng.uniform(0, 2)
        h = q.linearized_jc_hamiltonian(g, det, omega_b, space)
        e0 = h.matrix[0, 0].real
        ev = np.linalg.eigvalsh(q.jc_block(h, space, 1)) - e0
        pair = sp.normal_mode_frequencies(omega_b, det, g)
        assert np.allclose(ev, [pair.lower, pair.upper], rtol=0, atol=1e-13)


def test_hybridized_weights():
    pair, wu, wl = sp.hybridized_modes(WB, -WB, G_SPEC)
    assert wu == pytest.approx(0.5) and wl == pytest.approx(0.5)
    _, wu, _ = sp.hybridized_modes(WB, -WB + 100 * G_SPEC, G_SPEC)
    # far from resonance the upper branch is the bare resonator when the qubit line sits below
    assert wu > 0.99
    _, wu0, wl0 = sp.hybridized_modes(WB, -WB + 1.0, 0.0)
    assert (wu0, wl0) == (1.0, 0.0)


def test_hybridized_s21_reduces_to_notch():
    w = notch_grid()
    far = sp.hybridized_s21(w, WB, -WB + 1e6 * G_SPEC, G_SPEC, KI, KE, TWO_PI * 677e3)
    assert np.max(np.abs(far - sp.s21_notch(w, TRUE))) < 1e-3


def branches(g, drive_res=TWO_PI * 1.753e9, n=41):
    drive = drive_res + np.linspace(-4, 4, n) * g
    up, dn = sp.branch_model(drive, WB, g, drive_res)
    return drive, up, dn, drive_res


def test_branch_model_matches_normal_modes():
    drive, up, dn, res = branches(G_SPEC)
    omega_q = res + WB
    for d, u, l in zip(drive, up, dn):
        pair = sp.normal_mode_frequencies(WB, d - omega_q, G_SPEC)
        assert u == pytest.approx(pair.upper, rel=1e-14)
        assert l == pytest.approx(pair.lower, rel=1e-14)


def test_crossing_fit_noiseless():
    drive, up, dn, res = branches(G_SPEC)
    minima = [np.array([l, u]) for l, u in zip(dn, up)]
    fit = sp.fit_avoided_crossing(drive, minima, (WB + 1e5, 1.3 * G_SPEC, res - 0.5 * G_SPEC))
    assert fit["g"] == pytest.approx(G_SPEC, rel=1e-6)
    assert fit["omega_b"] == pytest.approx(WB, rel=1e-12)
    assert fit["drive_resonance"] == pytest.approx(res, rel=1e-9)


def test_crossing_fit_with_single_branches():
    drive, up, dn, res = branches(G_SPEC)
    minima = [np.array([l, u]) if abs(d - res) < 2 * G_SPEC else np.array([u if d > res else l])
              for d, l, u in zip(drive, dn, up)]
    fit = sp.fit_avoided_crossing(drive, minima, (WB, 0.8 * G_SPEC, res))
    assert fit["g"] == pytest.approx(G_SPEC, rel=1e-6)


def test_crossing_fit_rejects_single_branch_data():
    drive, up, dn, res = branches(G_SPEC)
    with pytest.raises(DegenerateDataError):
        sp.fit_avoided_crossing(drive, [np.array([u]) for u in up], (WB, G_SPEC, res))


def test_crossing_fit_noisy():
    drive, up, dn, res = branches(G_SPEC)
    errs = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        minima = [np.array([l, u]) + 0.05 * G_SPEC * rng.normal(size=2) for l, u in zip(dn, up)]
        errs.append(sp.fit_avoided_crossing(drive, minima, (WB, G_SPEC, res), seed=seed)["g"] / G_SPEC - 1)
    assert np.max(np.abs(errs)) < 0.03


def test_extract_minima_two_dips():
    drive, up, dn, res = branches(G_SPEC, n=5)
    probe = WB + np.linspace(-6, 6, 2401) * G_SPEC
    s21 = sp.hybridized_s21(probe, WB, res - (res + WB), G_SPEC, KI, KE, TWO_PI * 677e3)
    mins = sp.extract_minima(probe, s21, 0.5 * (KI + KE + TWO_PI * 677e3), 0.02)
    assert mins.size == 2
    assert mins == pytest.approx([WB - G_SPEC, WB + G_SPEC], abs=0.01 * G_SPEC)


def test_extract_minima_flat():
    probe = WB + np.linspace(-1, 1, 101) * G_SPEC
    assert sp.extract_minima(probe, np.ones(101), 1.0, 0.02).size == 0


def test_fit_g0_exact():
    n = np.array([0.004, 0.013, 0.034, 0.056])
    g0 = TWO_PI * 11.9e6
    fit = sp.fit_g0(n, g0 * np.sqrt(n))
    assert fit["g0"] == pytest.approx(g0, rel=1e-14)
    assert fit.parameter_uncertainties["g0"] < 1e-8 * g0


def test_fit_g0_weighted_matches_closed_form():
    n = np.array([0.01, 0.02, 0.05])
    g = np.array([1.0, 1.5, 2.1])
    err = np.array([0.1, 0.2, 0.1])
    fit = sp.fit_g0(n, g, err)
    x, w = np.sqrt(n), 1 / err**2
    assert fit["g0"] == pytest.approx(np.sum(w * x * g) / np.sum(w * x * x))
    assert fit.parameter_uncertainties["g0"] == pytest.approx(1 / np.sqrt(np.sum(w * x * x)))


def test_fit_g0_error_scaling():
    # 5% multiplicative noise: the spread of g0 falls as 1/sqrt(count)
    g0 = 11.9
    spreads = []
    for count in (4, 16, 64):
        n = np.linspace(0.01, 0.06, count)
        est = []
        for seed in range(400):
            rng = np.random.default_rng(seed)
            g = g0 * np.sqrt(n) * (1 + 0.05 * rng.normal(size=count))
            est.append(sp.fit_g0(n, g)["g0"])
        spreads.append(np.std(est))
    assert spreads[0] / spreads[1] == pytest.approx(2, rel=0.15)
    assert spreads[1] / spreads[2] == pytest.approx(2, rel=0.15)


def test_fit_g0_degenerate():
    with pytest.raises(DegenerateDataError):
        sp.fit_g0([0.1, 0.1], [1.0, 1.0])
    with pytest.raises(DegenerateDataError):
        sp.fit_g0([0.1], [1.0])
    with pytest.raises(DegenerateDataError):
        sp.fit_g0([0.0, 0.1], [0.0, 1.0])
