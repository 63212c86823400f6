import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize, special

from ppcqed import circuit as c
from ppcqed.constants import FLUX_QUANTUM, HBAR, TWO_PI

IDC = c.IdcGeometry(44, 10e-6, 6e-6, 400e-6, 11.8)
SQUID = c.SquidGeometry(120e-6, 1.8e-6, 5.3e-6)
OMEGA_B = TWO_PI * 4.347e9


def ellipk_quad(k):
    val, _ = integrate.quad(lambda t: 1 / math.sqrt(1 - (k * math.sin(t)) ** 2), 0, math.pi / 2,
                            epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def test_elliptic_k_zero_modulus():
    assert c.complete_elliptic_k(0.0) == pytest.approx(math.pi / 2, rel=1e-15)


@given(st.floats(0.0, 0.999))
def test_elliptic_k_matches_scipy_parameter_convention(k):
    # scipy takes m = k^2
    assert c.complete_elliptic_k(k) == pytest.approx(special.ellipk(k * k), rel=1e-13)


@pytest.mark.parametrize("k", [0.1, 0.5, 0.9, 0.99])
def test_elliptic_k_matches_quadrature(k):
    assert c.complete_elliptic_k(k) == pytest.approx(ellipk_quad(k), rel=1e-12)


@pytest.mark.parametrize("k", [1.0, 1.5, -0.1])
def test_elliptic_k_domain(k):
    with pytest.raises(c.DomainError):
        c.complete_elliptic_k(k)


def test_idc_capacitance_oracle():
    # independent evaluation with scipy's elliptic integral
    a, b, l, er = 10e-6, 6e-6, 400e-6, 11.8
    eps0 = 8.8541878128e-12

    def unit(k):
        return 2 * eps0 * (er + 1) / 2 * l * special.ellipk(k**2) / special.ellipk(1 - k**2)

    c1 = unit(math.sin(math.pi * a / (2 * (a + b))))
    c2 = unit(2 * math.sqrt(a * (a + b)) / (2 * a + b))
    expected = 41 * c1 / 2 + 2 * c1 * c2 / (c1 + c2)
    assert c.idc_capacitance(IDC) == pytest.approx(expected, rel=1e-12)
    # frozen value of the formula on the device geometry
    assert c.idc_capacitance(IDC) == pytest.approx(1.18057e-12, rel=1e-4)


def test_idc_capacitance_grows_with_fingers():
    caps = [c.idc_capacitance(c.IdcGeometry(n, 10e-6, 6e-6, 400e-6)) for n in range(4, 60)]
    assert np.all(np.diff(caps) > 0)


@pytest.mark.parametrize("kwargs", [
    dict(finger_count=3, finger_width=1e-6, finger_gap=1e-6, finger_length=1e-4),
    dict(finger_count=10, finger_width=-1e-6, finger_gap=1e-6, finger_length=1e-4),
    dict(finger_count=10, finger_width=1e-6, finger_gap=0.0, finger_length=1e-4),
])
def test_idc_geometry_validation(kwargs):
    with pytest.raises(c.DomainError):
        c.IdcGeometry(**kwargs)


def test_squid_geometry_validation():
    with pytest.raises(c.DomainError):
        c.SquidGeometry(120e-6, 5.3e-6, 1.8e-6)


def test_mutual_inductance_value():
    # mu0 l / 2pi ln(d2/d1) = 2e-7 * 120e-6 * ln(5.3/1.8)
    assert c.mutual_inductance(SQUID) == pytest.approx(2e-7 * 120e-6 * math.log(5.3 / 1.8), rel=1e-9)
    assert c.mutual_inductance(SQUID) == pytest.approx(25.918e-12, rel=1e-4)


def test_mutual_inductance_matches_flux_integral():
    # flux of a unit current wire through the loop, integrated numerically
    mu0 = 4e-7 * math.pi * 1.00000000055
    val, _ = integrate.quad(lambda r: mu0 / (2 * math.pi * r), 1.8e-6, 5.3e-6)
    assert c.mutual_inductance(SQUID) == pytest.approx(val * 120e-6, rel=1e-8)


def test_lc_consistency():
    cap = 1.26e-12
    res = c.ResonatorParams.from_frequency(OMEGA_B, cap)
    assert res.frequency * math.sqrt(res.inductance * res.capacitance) == pytest.approx(1, abs=1e-12)
    with pytest.raises(c.DomainError):
        c.ResonatorParams(OMEGA_B, cap, 2 * res.inductance)


def test_chain_from_quoted_capacitance():
    # feeding the quoted capacitance reproduces the quoted downstream numbers
    l = c.inductance_from_frequency(OMEGA_B, 1.26e-12)
    i = c.zero_point_current(OMEGA_B, l)
    phi = c.zero_point_flux(25.9e-12, i)
    g0 = c.single_photon_coupling(TWO_PI * 26.0e9, phi)
    assert l == pytest.approx(1.06e-9, rel=0.01)
    assert i == pytest.approx(36.8e-9, rel=0.01)
    assert phi == pytest.approx(461e-6, rel=0.01)
    assert g0 / TWO_PI == pytest.approx(12.0e6, rel=0.01)


def test_zero_point_current_energy():
    # L I_zpf^2 equals half the zero-point energy hbar w / 2
    l = 1e-9
    i = c.zero_point_current(OMEGA_B, l)
    assert l * i**2 == pytest.approx(HBAR * OMEGA_B / 2, rel=1e-12)


def test_zero_point_flux_units():
    assert c.zero_point_flux(FLUX_QUANTUM, 1.0) == pytest.approx(1.0)


def test_operating_flux_root():
    wmax, wq = TWO_PI * 10.2e9, TWO_PI * 6.10e9
    root = optimize.brentq(lambda f: wmax * math.sqrt(math.cos(math.pi * f)) - wq, 0.0, 0.499, xtol=1e-15)
    arc = c.FluxArc.at_frequency(wmax, -TWO_PI * 388e6, wq)
    assert arc.operating_flux == pytest.approx(root, abs=1e-12)
    assert arc.operating_flux == pytest.approx(0.38358, abs=1e-5)
    assert arc.operating_frequency == pytest.approx(wq, rel=1e-12)


@given(st.floats(-0.45, 0.45).filter(lambda x: abs(x) > 1e-3))
def test_flux_sensitivity_is_derivative(flux):
    arc = c.FluxArc(TWO_PI * 10.2e9, -TWO_PI * 388e6)
    h = 1e-6
    num = (c.flux_arc_frequency(arc, flux + h) - c.flux_arc_frequency(arc, flux - h)) / (2 * h)
    assert c.flux_sensitivity(arc, flux) == pytest.approx(abs(num), rel=1e-6)


def test_flux_arc_rejects_zero():
    arc = c.FluxArc(TWO_PI * 10.2e9, -TWO_PI * 388e6)
    with pytest.raises(c.DomainError):
        c.flux_arc_frequency(arc, 0.5)
    with pytest.raises(c.DomainError):
        c.FluxArc(TWO_PI * 10.2e9, -TWO_PI * 388e6, 0.5)


def test_operating_sensitivity_vs_measured_slope():
    # the symmetric arc gives 25.0 GHz/Phi0 at the operating point, 4% below 26.0
    arc = c.FluxArc.at_frequency(TWO_PI * 10.2e9, -TWO_PI * 388e6, TWO_PI * 6.10e9)
    assert arc.operating_sensitivity / TWO_PI == pytest.approx(25.02e9, rel=1e-3)


def test_estimate_chain_consistency():
    est = c.estimate_chain(IDC, SQUID, OMEGA_B, TWO_PI * 26.0e9)
    assert est.inductance == pytest.approx(1 / (OMEGA_B**2 * est.capacitance))
    assert est.zero_point_flux == pytest.approx(est.mutual_inductance * est.zero_point_current / FLUX_QUANTUM)
    assert est.single_photon_coupling == pytest.approx(TWO_PI * 26.0e9 * est.zero_point_flux)
