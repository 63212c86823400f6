"""Synthetic end-to-end g0 extraction.

For each sideband drive amplitude: Kerr steady state -> enhanced coupling
g = g0 sqrt(n) -> simulated transmission maps vs drive frequency -> branch
minima -> avoided-crossing fit for g; in parallel the AC-Stark shift (with
measurement noise) is inverted for the photon number. Finally g vs sqrt(n)
is fitted through the origin.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import calibration as cal
from . import spectroscopy as sp
from .fitting import DegenerateDataError
from .quantum import SystemParams


@dataclass
class PipelineSetup:
    params: SystemParams  # g0 is the injected truth
    drive_amplitudes: np.ndarray  # rad/s
    kappa_int: float
    kappa_ext: float
    spectrum_noise: float = 0.0  # std of complex S21 noise per quadrature
    stark_noise: float = 0.0  # relative std of the measured Stark shift
    drive_points: int = 41
    drive_span: float = 4.0  # half-span in units of the expected g
    probe_points: int = 1201
    probe_span: float = 6.0  # half-span in units of the expected g
    stark_pull: bool = True  # shift the qubit by the true Stark shift in the spectra

    @property
    def kappa_b(self):
        return self.kappa_int + self.kappa_ext


@dataclass
class PowerPoint:
    drive_amplitude: float
    n_true: float
    n_calibrated: float
    stark_shift: float
    g_true: float
    g_fit: float
    g_err: float
    bistable: bool


@dataclass
class PipelineResult:
    points: list
    g0_fit: object
    maps: list = field(default_factory=list)

    @property
    def g0(self):
        return self.g0_fit.parameters["g0"]

    @property
    def g0_err(self):
        return self.g0_fit.parameter_uncertainties["g0"]


def sideband_drive(params):
    """Drive frequency on the red sideband, omega_q - omega_b."""
    return params.omega_q - params.omega_b


def crossing_map(setup, g, omega_q_eff, rng, g_scale):
    """Transmission vs (drive, probe) around the sideband resonance."""
    p = setup.params
    centre = omega_q_eff - p.omega_b
    drives = centre + np.linspace(-1, 1, setup.drive_points) * setup.drive_span * g_scale
    probe = p.omega_b + np.linspace(-1, 1, setup.probe_points) * setup.probe_span * g_scale
    rows = []
    for wd in drives:
        s21 = sp.hybridized_s21(probe, p.omega_b, wd - omega_q_eff, g, setup.kappa_int,
                                setup.kappa_ext, p.gamma_q)
        if setup.spectrum_noise:
            s21 = s21 + setup.spectrum_noise * (rng.normal(size=probe.size)
                                                + 1j * rng.normal(size=probe.size))
        rows.append(s21)
    return drives, probe, np.array(rows)


def extract_branches(drives, probe, s21_map, setup):
    # hybrid modes near resonance are about (kappa_b + gamma_q)/2 wide
    linewidth = 0.5 * (setup.kappa_b + setup.params.gamma_q)
    smooth = 0.5 * setup.kappa_b if setup.spectrum_noise else 0.0
    threshold = max(0.02, 3 * setup.spectrum_noise)
    minima = [sp.extract_minima(probe, row, linewidth, threshold, smooth) for row in s21_map]
    keep = [m.size > 0 for m in minima]
    return drives[keep], [m for m, k in zip(minima, keep) if k]


def _initial_g(drives, minima):
    pairs = [m[-1] - m[0] for m in minima if m.size >= 2]
    if not pairs:
        raise DegenerateDataError("no drive frequency shows both branches")
    return 0.5 * min(pairs)


def run_power(setup, drive_amplitude, rng, seed=0, keep_map=False):
    p = setup.params
    wd = sideband_drive(p)
    detuning = wd - p.omega_q
    sigma = p.omega_q + wd
    steady = cal.kerr_steady_state(detuning, p.alpha, drive_amplitude)
    n_true = steady.n_photons
    g_true = p.g0 * math.sqrt(n_true)

    shift_true = cal.ac_stark_shift(drive_amplitude, p.alpha, detuning, sigma)
    shift = shift_true * (1 + setup.stark_noise * rng.normal()) if setup.stark_noise else shift_true
    calib = cal.StarkCalibration(p.alpha, detuning, sigma)
    n_cal = cal.photon_number_from_stark(shift, calib)

    omega_q_eff = p.omega_q + (shift_true if setup.stark_pull else 0.0)
    g_scale = max(g_true, setup.kappa_b)
    drives, probe, s21_map = crossing_map(setup, g_true, omega_q_eff, rng, g_scale)
    d_used, minima = extract_branches(drives, probe, s21_map, setup)
    init = (p.omega_b, _initial_g(d_used, minima), omega_q_eff - p.omega_b)
    fit = sp.fit_avoided_crossing(d_used, minima, init, seed=seed)
    point = PowerPoint(drive_amplitude, n_true, n_cal, shift, g_true, fit.parameters["g"],
                       fit.parameter_uncertainties["g"], steady.bistable)
    return point, ((drives, probe, s21_map) if keep_map else None)


def run_pipeline(setup, seed=0, keep_maps=False):
    rng = np.random.default_rng(seed)
    points, maps = [], []
    for amp in np.asarray(setup.drive_amplitudes, dtype=float):
        pt, m = run_power(setup, amp, rng, seed=seed, keep_map=keep_maps)
        points.append(pt)
        if keep_maps:
            maps.append(m)
    errs = np.array([pt.g_err for pt in points])
    # relative error s on n shows up as s/2 on the inferred sqrt(n)
    errs = np.hypot(errs, 0.5 * setup.stark_noise * np.array([pt.g_fit for pt in points]))
    weighted = setup.spectrum_noise > 0 and np.all(np.isfinite(errs)) and np.all(errs > 0)
    fit = sp.fit_g0([pt.n_calibrated for pt in points], [pt.g_fit for pt in points],
                    errs if weighted else None)
    return PipelineResult(points, fit, maps)


def amplitudes_for_powers(powers_dbm, reference_dbm, reference_amplitude):
    """Drive amplitudes scaling as sqrt(power) from one reference point."""
    powers = np.asarray(powers_dbm, dtype=float)
    return reference_amplitude * 10 ** ((powers - reference_dbm) / 20)


def amplitude_for_photons(params, n_photons):
    """Drive amplitude that yields ``n_photons`` on the physical Kerr branch."""
    detuning = sideband_drive(params) - params.omega_q
    return math.sqrt(n_photons) * abs(-detuning + params.alpha * n_photons)
