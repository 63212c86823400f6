"""Frequency-domain response models and fitters.

Notch transmission of the linear resonator, the single-excitation normal
modes of the photon-pressure JC Hamiltonian, branch extraction from
transmission maps and the g vs sqrt(n) fit that yields g0.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .fitting import DegenerateDataError, FitResult, least_squares_simplex


@dataclass(frozen=True)
class NotchParams:
    omega_b: float
    kappa_int: float
    kappa_ext: float
    theta: float = 0.0

    def __post_init__(self):
        if self.kappa_int < 0 or self.kappa_ext < 0:
            raise ValueError("decay rates must be non-negative")
        if not -math.pi < self.theta <= math.pi:
            raise ValueError("theta must lie in (-pi, pi]")

    @property
    def kappa(self):
        return self.kappa_int + self.kappa_ext


@dataclass(frozen=True)
class NormalModePair:
    upper: float
    lower: float
    splitting: float = None  # stored directly to avoid cancellation against a large centre

    def __post_init__(self):
        if self.upper < self.lower:
            raise ValueError("upper branch below lower branch")
        if self.splitting is None:
            object.__setattr__(self, "splitting", self.upper - self.lower)


def wrap_phase(theta):
    """Map an angle into (-pi, pi]."""
    w = math.remainder(theta, 2 * math.pi)
    return math.pi if w == -math.pi else w


def s21_notch(omega, p):
    omega = np.asarray(omega, dtype=float)
    return 1 - p.kappa_ext * np.exp(1j * p.theta) / (p.kappa + 2j * (omega - p.omega_b))


def normal_mode_frequencies(omega_b, detuning_q, g):
    """Single-excitation eigenfrequencies of the photon-pressure JC Hamiltonian.

    omega_pm = (omega_b - Delta_q)/2 pm sqrt(Delta_qb^2 + 4 g^2)/2 with
    Delta_qb = omega_b + Delta_q, the sideband detuning in the drive frame.
    """
    if g < 0:
        raise ValueError("g must be non-negative")
    center = (omega_b - detuning_q) / 2
    split = math.hypot(omega_b + detuning_q, 2 * g)
    return NormalModePair(center + split / 2, center - split / 2, split)


def hybridized_modes(omega_b, detuning_q, g):
    """Normal modes plus the resonator weight |<g,1|mode>|^2 of each branch."""
    pair = normal_mode_frequencies(omega_b, detuning_q, g)
    delta = omega_b + detuning_q
    if g == 0:
        w_upper = 0.5 if delta == 0 else float(delta > 0)
    else:
        # mixing angle of the 2x2 block [[omega_b, g], [g, omega_b - delta]]
        w_upper = 0.5 * (1 + delta / math.hypot(delta, 2 * g))
    return pair, w_upper, 1 - w_upper


def hybridized_s21(omega, omega_b, detuning_q, g, kappa_int, kappa_ext, gamma_q):
    """Resonator transmission with the two hybrid modes as independent notches.

    Each mode inherits resonator-weighted external coupling and a linewidth
    interpolated between kappa_b and the qubit linewidth gamma_q.
    """
    omega = np.asarray(omega, dtype=float)
    pair, w_up, w_lo = hybridized_modes(omega_b, detuning_q, g)
    kappa = kappa_int + kappa_ext
    out = np.ones_like(omega, dtype=complex)
    for freq, w in ((pair.upper, w_up), (pair.lower, w_lo)):
        if w <= 0:
            continue
        lw = w * kappa + (1 - w) * gamma_q
        out -= w * kappa_ext / (lw + 2j * (omega - freq))
    return out


def remove_background(omega, s21, wing_fraction=0.2):
    """Divide out a complex affine baseline fitted on the outer wings."""
    omega = np.asarray(omega, dtype=float)
    s21 = np.asarray(s21, dtype=complex)
    n = omega.size
    k = max(2, int(round(wing_fraction * n)))
    idx = np.r_[0:k, n - k:n]
    x = omega[idx] - omega.mean()
    a = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(a, s21[idx], rcond=None)
    baseline = coef[0] + coef[1] * (omega - omega.mean())
    return s21 / baseline


def fit_notch(omega, s21, init, seed=0):
    """Least-squares notch fit over (omega_b, kappa_int, kappa_ext, theta)."""
    omega = np.asarray(omega, dtype=float)
    s21 = np.asarray(s21, dtype=complex)
    if omega.size < 8:
        raise DegenerateDataError("need at least 8 points")
    kappa0 = max(init.kappa, 1e-30)
    if np.ptp(omega) < 3 * kappa0:
        raise DegenerateDataError("data must span at least three linewidths")
    if np.max(np.abs(s21 - s21.mean())) < 1e-12:
        raise DegenerateDataError("flat response, no resonance to fit")

    def residuals(x):
        wb, ki, ke, th = x
        model = 1 - ke * np.exp(1j * th) / ((ki + ke) + 2j * (omega - wb))
        d = model - s21
        return np.concatenate([d.real, d.imag])

    x0 = [init.omega_b, init.kappa_int, init.kappa_ext, init.theta]
    scale = [kappa0, kappa0, kappa0, 1.0]
    fit = least_squares_simplex(residuals, x0, scale, ["omega_b", "kappa_int", "kappa_ext", "theta"],
                                seed=seed)
    fit.parameters["theta"] = wrap_phase(fit.parameters["theta"])
    return fit


def branch_model(drive, omega_b, g, drive_resonance):
    """Branch positions vs sideband drive frequency.

    ``drive_resonance`` is the drive frequency omega_q - omega_b at which the
    sideband is resonant; it absorbs any static frame offset (e.g. Stark pull).
    """
    delta = np.asarray(drive, dtype=float) - drive_resonance
    half = 0.5 * np.hypot(delta, 2 * g)
    center = omega_b - delta / 2
    return center + half, center - half


def fit_avoided_crossing(drive, minima, init, seed=0):
    """Fit branch positions to observed transmission minima.

    ``minima`` holds, per drive frequency, one or two observed dip positions.
    Two dips map to (lower, upper); a lone dip is assigned to the nearer model
    branch. ``init`` is (omega_b, g, drive_resonance).
    """
    drive = np.asarray(drive, dtype=float)
    mins = [np.sort(np.atleast_1d(np.asarray(m, dtype=float))) for m in minima]
    if len(mins) != drive.size:
        raise ValueError("one minima entry per drive frequency required")
    if not any(m.size >= 2 for m in mins):
        raise DegenerateDataError("both branches must be present for at least one drive frequency")
    pairs = np.array([m.size >= 2 for m in mins])
    lo = np.array([m[0] if m.size >= 2 else np.nan for m in mins])
    hi = np.array([m[-1] if m.size >= 2 else np.nan for m in mins])
    single = np.array([m[0] if m.size == 1 else np.nan for m in mins])
    singles = np.array([m.size == 1 for m in mins])

    def residuals(x):
        wb, g, wr = x
        up, dn = branch_model(drive, wb, abs(g), wr)
        r = [(lo - dn)[pairs], (hi - up)[pairs]]
        if singles.any():
            s = single[singles]
            du, dd = s - up[singles], s - dn[singles]
            r.append(np.where(np.abs(du) < np.abs(dd), du, dd))
        return np.concatenate(r)

    wb0, g0, wr0 = init
    scale = [max(abs(g0), 1.0)] * 3
    fit = least_squares_simplex(residuals, [wb0, g0, wr0], scale, ["omega_b", "g", "drive_resonance"],
                                seed=seed)
    fit.parameters["g"] = abs(fit.parameters["g"])
    return fit


def extract_minima(omega, s21, linewidth, threshold, smooth=0.0):
    """Transmission dips deeper than ``threshold`` below unity.

    ``s21`` may be complex or magnitude data. With ``smooth`` > 0 it is first
    convolved with a Gaussian of that width (in rad/s). Local minima closer
    than one linewidth are merged, keeping the deeper one; positions are
    refined by a three-point parabola. Returns at most two positions (the
    deepest), sorted ascending.
    """
    omega = np.asarray(omega, dtype=float)
    s21 = np.asarray(s21)
    if smooth > 0:
        step = float(np.mean(np.diff(omega)))
        s21 = gaussian_filter1d(s21.real, smooth / step, mode="nearest") + (
            1j * gaussian_filter1d(s21.imag, smooth / step, mode="nearest") if np.iscomplexobj(s21) else 0)
    y = np.abs(s21)
    inner = np.where((y[1:-1] <= y[:-2]) & (y[1:-1] < y[2:]) & (1 - y[1:-1] > threshold))[0] + 1
    cand = sorted(inner.tolist(), key=lambda i: y[i])
    kept = []
    for i in cand:
        if all(abs(omega[i] - omega[j]) >= linewidth for j in kept):
            kept.append(i)
    kept = kept[:2]
    out = []
    for i in kept:
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        denom = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom > 0 else 0.0
        step = 0.5 * (omega[i + 1] - omega[i - 1])
        out.append(omega[i] + shift * step)
    return np.sort(np.array(out))


def fit_g0(n_photons, g, g_err=None):
    """Weighted least-squares slope of g = g0 sqrt(n) through the origin.

    Without ``g_err`` the standard error is scaled by the residual scatter;
    with it, the weights are 1/g_err^2 and the error is the formal one.
    """
    n = np.asarray(n_photons, dtype=float)
    y = np.asarray(g, dtype=float)
    if n.size < 2 or n.size != y.size:
        raise DegenerateDataError("need at least two (n, g) points")
    if np.any(n <= 0):
        raise DegenerateDataError("photon numbers must be positive")
    if np.ptp(n) == 0:
        raise DegenerateDataError("all photon numbers are equal")
    x = np.sqrt(n)
    w = np.ones_like(x) if g_err is None else 1 / np.asarray(g_err, dtype=float) ** 2
    sxx = float(np.sum(w * x * x))
    slope = float(np.sum(w * x * y)) / sxx
    r = y - slope * x
    if g_err is None:
        s2 = float(np.sum(w * r * r)) / (x.size - 1)
        err = math.sqrt(s2 / sxx)
    else:
        err = math.sqrt(1 / sxx)
    return FitResult(
        parameters={"g0": slope},
        residual_norm=float(np.sqrt(np.sum(w * r * r))),
        iterations=1,
        converged=True,
        parameter_uncertainties={"g0": err},
        gradient_norm=abs(float(np.sum(w * x * r))),
        n_data=int(x.size),
    )
