"""Kerr-oscillator steady state and AC-Stark photon-number calibration.

Sign conventions: Delta_q = omega_d - omega_q (negative for a red-sideband
drive), alpha < 0, and the Stark shift carries the sign of alpha. The
Bloch-Siegert bracket below is only validated for red-detuned drives.
"""

from dataclasses import dataclass

import numpy as np


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class KerrSteadyState:
    n_photons: float
    root_multiplicity: int
    bistable: bool
    roots: tuple = ()


@dataclass(frozen=True)
class StarkCalibration:
    alpha: float
    detuning_q: float
    sum_frequency: float
    shift: float = 0.0

    def __post_init__(self):
        if not self.alpha < 0:
            raise CalibrationError("anharmonicity must be negative")
        if self.detuning_q == 0:
            raise CalibrationError("drive detuning must be non-zero")
        if not self.sum_frequency > 0:
            raise CalibrationError("sum frequency must be positive")

    @classmethod
    def from_frequencies(cls, alpha, omega_q, omega_d, shift=0.0):
        return cls(alpha, omega_d - omega_q, omega_q + omega_d, shift)


def _real_roots(coeffs):
    roots = np.roots(coeffs)
    real = roots[np.abs(roots.imag) < 1e-9 * (1 + np.abs(roots.real))].real
    return np.sort(real)


def _polish(n, detuning, alpha, eps2):
    # Newton steps on the unscaled cubic, kept only while they reduce |f|
    f = n * (-detuning + alpha * n) ** 2 - eps2
    for _ in range(3):
        u = -detuning + alpha * n
        df = u * u + 2 * alpha * n * u
        if df == 0:
            break
        trial = n - f / df
        f_trial = trial * (-detuning + alpha * trial) ** 2 - eps2
        if abs(f_trial) >= abs(f):
            break
        n, f = trial, f_trial
    return n


def kerr_residual(n, detuning, alpha, drive):
    return n * (-detuning + alpha * n) ** 2 - drive**2


def _solve_cubic(detuning, alpha, eps2):
    if eps2 == 0:
        return KerrSteadyState(0.0, 1, False, (0.0,))
    if detuning == 0 and alpha == 0:
        raise CalibrationError("cubic is degenerate for zero detuning and zero anharmonicity")
    if detuning == 0:
        # alpha^2 n^3 = eps^2
        n = (eps2 / alpha**2) ** (1 / 3)
        return KerrSteadyState(n, 1, False, (n,))
    # Scaled by Delta^2: (alpha/Delta)^2 n^3 - 2 (alpha/Delta) n^2 + n - eps^2/Delta^2
    r = alpha / detuning
    coeffs = [r * r, -2 * r, 1.0, -eps2 / detuning**2]
    roots = _real_roots(coeffs)
    nonneg = roots[roots >= 0]
    if nonneg.size == 0:
        raise CalibrationError("Kerr cubic has no non-negative real root")
    polished = tuple(float(_polish(x, detuning, alpha, eps2)) for x in nonneg)
    count = len(polished)
    return KerrSteadyState(polished[0], count, count == 3, polished)


def kerr_steady_state(detuning_q, alpha, drive):
    """Steady-state occupation of a driven Kerr oscillator.

    Solves n (-Delta_q + alpha n)^2 = eps_d^2 and returns the smallest
    non-negative root, the branch continuously connected to n = 0. ``bistable``
    reports that three non-negative roots exist; without damping in the cubic
    this is the case for any weak drive with Delta_q / alpha > 0, where the
    additional pair sits near n = Delta_q / alpha.
    """
    if alpha > 0:
        raise CalibrationError("anharmonicity must be <= 0")
    return _solve_cubic(detuning_q, alpha, float(drive) ** 2)


def _stark_bracket(detuning_q, sum_frequency):
    return 1 / detuning_q**2 + 2 / (abs(detuning_q) * sum_frequency) + 1 / sum_frequency**2


def ac_stark_shift(drive, alpha, detuning_q, sum_frequency):
    """Drive-induced qubit shift including the Bloch-Siegert counter-rotating terms."""
    if detuning_q == 0 or not sum_frequency > 0:
        raise CalibrationError("need non-zero detuning and positive sum frequency")
    return 0.5 * drive**2 * alpha * _stark_bracket(detuning_q, sum_frequency)


def rwa_stark_shift(drive, alpha, detuning_q):
    """Co-rotating part of :func:`ac_stark_shift` only."""
    return 0.5 * drive**2 * alpha / detuning_q**2


def drive_from_stark(shift, cal):
    """eps_d^2 implied by a measured shift."""
    if shift != 0 and not (shift / cal.alpha) > 0:
        raise CalibrationError("Stark shift must have the sign of the anharmonicity")
    return 2 * shift / cal.alpha / _stark_bracket(cal.detuning_q, cal.sum_frequency)


def photon_number_from_stark(shift, cal):
    """Qubit sideband population calibrated from its AC-Stark shift."""
    eps2 = drive_from_stark(shift, cal)
    return _solve_cubic(cal.detuning_q, cal.alpha, eps2).n_photons


def effective_kerr(alpha, g0, omega_b, gamma_b):
    """Kerr nonlinearity renormalised by the photon-pressure coupling."""
    if not omega_b > 0:
        raise CalibrationError("omega_b must be positive")
    return alpha - 2 * g0**2 * omega_b / (omega_b**2 + gamma_b**2 / 4)


def critical_photon_number(detuning, g_ab):
    if not g_ab > 0:
        raise CalibrationError("g_ab must be positive")
    return detuning**2 / (4 * g_ab**2)
