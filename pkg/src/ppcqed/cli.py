"""Batch experiment runner.

    ppcqed <experiment> --config <path> [--out <dir>] [--seed <int>] [--threads <int>]

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

import argparse
import math
import os
from pathlib import Path
import sys
import time

import numpy as np

from . import __version__
from . import calibration as cal
from . import circuit
from . import dynamics as dyn
from . import io
from . import pipeline as pl
from . import quantum as q
from . import spectroscopy as sp
from .config import EXPERIMENTS, ConfigError, load_config
from .constants import hz, to_hz
from .fitting import FitError

THREADS_ENV = "PPCQED_THREADS"


class Run:
    """Collects outputs, diagnostics and invariant checks for the manifest."""

    def __init__(self, config, out_dir, threads):
        self.config = config
        self.out = Path(out_dir)
        self.threads = threads
        self.steps = []
        self.invariants = {}
        self.outputs = []
        self.summary = []

    def step(self, name, started, **diagnostics):
        self.steps.append({"name": name, "duration_s": time.perf_counter() - started,
                           "diagnostics": diagnostics})

    def invariant(self, name, value, limit, passed):
        self.invariants[name] = {"value": value, "limit": limit, "passed": bool(passed)}

    def table(self, name, columns, rows):
        io.write_table(self.out / name, columns, list(rows))
        self.outputs.append(name)

    def line(self, text):
        self.summary.append(text)


def _system(p, kappa_b_hz=0.0, t1_s=math.inf):
    return q.SystemParams(
        omega_q=hz(p.qubit_frequency_hz), alpha=hz(p.anharmonicity_hz),
        omega_b=hz(p.resonator_frequency_hz), kappa_b=hz(kappa_b_hz),
        gamma_1=0.0 if math.isinf(t1_s) else 1.0 / t1_s,
    )


def run_estimate(run):
    p = run.config.parameters
    t0 = time.perf_counter()
    try:
        idc = circuit.IdcGeometry(p.finger_count, p.finger_width_m, p.finger_gap_m,
                                  p.finger_length_m, p.relative_permittivity)
        squid = circuit.SquidGeometry(p.squid_loop_length_m, p.squid_near_distance_m,
                                      p.squid_far_distance_m)
        arc = circuit.FluxArc.at_frequency(hz(p.sweet_spot_frequency_hz), hz(p.anharmonicity_hz),
                                           hz(p.qubit_frequency_hz))
    except circuit.DomainError as exc:
        raise ConfigError(str(exc)) from None
    est = circuit.estimate_chain(idc, squid, hz(p.resonator_frequency_hz),
                                 hz(p.flux_sensitivity_hz_per_phi0))
    arc_sens = arc.operating_sensitivity
    rows = [
        ("capacitance", est.capacitance, "F"),
        ("inductance", est.inductance, "H"),
        ("zero_point_current", est.zero_point_current, "A"),
        ("mutual_inductance", est.mutual_inductance, "H"),
        ("zero_point_flux", est.zero_point_flux, "Phi0"),
        ("flux_sensitivity", to_hz(est.flux_sensitivity), "Hz/Phi0"),
        ("g0", to_hz(est.single_photon_coupling), "Hz"),
        ("arc_operating_flux", arc.operating_flux, "Phi0"),
        ("arc_flux_sensitivity", to_hz(arc_sens), "Hz/Phi0"),
        ("arc_g0", to_hz(circuit.single_photon_coupling(arc_sens, est.zero_point_flux)), "Hz"),
    ]
    run.table("estimate.csv", ("quantity", "value", "unit"), rows)
    run.step("estimate", t0)
    run.line(f"C_IDC      = {est.capacitance * 1e12:.3f} pF")
    run.line(f"L_b        = {est.inductance * 1e9:.3f} nH")
    run.line(f"I_zpf      = {est.zero_point_current * 1e9:.1f} nA")
    run.line(f"M          = {est.mutual_inductance * 1e12:.1f} pH")
    run.line(f"Phi_zpf    = {est.zero_point_flux * 1e6:.0f} uPhi0")
    run.line(f"g0/2pi     = {to_hz(est.single_photon_coupling) / 1e6:.2f} MHz")
    run.line(f"arc sensitivity/2pi = {to_hz(arc_sens) / 1e9:.2f} GHz/Phi0 at Phi = {arc.operating_flux:.4f}")


def _first_minimum(times, trace):
    """Parabola-refined time of the first local minimum of ``trace``."""
    for i in range(1, len(trace) - 1):
        if trace[i] <= trace[i - 1] and trace[i] < trace[i + 1]:
            y0, y1, y2 = trace[i - 1], trace[i], trace[i + 1]
            denom = y0 - 2 * y1 + y2
            shift = 0.5 * (y0 - y2) / denom if denom > 0 else 0.0
            return float(times[i] + shift * (times[i + 1] - times[i]))
    return float("nan")


def run_chevron(run):
    p = run.config.parameters
    tr = run.config.truncation
    if tr.qubit_dim != 2:
        raise ConfigError("key 'truncation.qubit_dim' must be 2 for chevron simulations")
    if p.preparation not in dyn.PREPARATIONS:
        raise ConfigError(f"key 'parameters.preparation' must be one of {dyn.PREPARATIONS}")
    if p.detuning_points < 1 or p.time_points < 2:
        raise ConfigError("key 'parameters.time_points' must be >= 2 and detuning_points >= 1")
    space = q.HilbertSpace(2, tr.resonator_dim)
    params = _system(p, p.kappa_b_hz, p.t1_s)
    det = hz(np.linspace(p.detuning_min_hz, p.detuning_max_hz, p.detuning_points))
    times = np.linspace(0.0, p.time_max_s, p.time_points)
    t0 = time.perf_counter()
    res = dyn.chevron_experiment(params, hz(p.coupling_hz), det, times, p.preparation,
                                 dt_max=p.dt_max_s, space=space, threads=run.threads,
                                 pi_pulse=p.pi_pulse_s or None, counter_rotating=p.counter_rotating)
    run.step("chevron", t0, **res.diagnostics)
    run.invariant("trace", res.diagnostics["max_trace_error"], dyn.TRACE_TOL,
                  res.diagnostics["max_trace_error"] < dyn.TRACE_TOL)
    run.invariant("hermiticity", res.diagnostics["max_hermiticity_error"], dyn.HERMITIAN_TOL,
                  res.diagnostics["max_hermiticity_error"] < dyn.HERMITIAN_TOL)
    run.invariant("positivity", res.diagnostics["min_eigenvalue"], -dyn.POSITIVITY_TOL,
                  res.diagnostics["min_eigenvalue"] > -dyn.POSITIVITY_TOL)
    run.table("chevron.csv", io.CHEVRON_COLUMNS, io.chevron_rows(res))
    centre = int(np.argmin(np.abs(det)))
    t_min = _first_minimum(times, res.p_excited[centre])
    run.line(f"grid {p.detuning_points} x {p.time_points}, step {res.diagnostics['step'] * 1e9:.3f} ns")
    run.line(f"first P_e minimum at detuning {to_hz(det[centre]) / 1e6:.3f} MHz: {t_min * 1e9:.2f} ns")


def run_spectrum(run, rng):
    p = run.config.parameters
    if p.probe_points < 2:
        raise ConfigError("key 'parameters.probe_points' must be >= 2")
    probe = hz(np.linspace(p.probe_min_hz, p.probe_max_hz, p.probe_points))
    t0 = time.perf_counter()
    if p.coupling_hz == 0 and p.drive_frequency_hz is None:
        try:
            notch = sp.NotchParams(hz(p.resonator_frequency_hz), hz(p.kappa_int_hz),
                                   hz(p.kappa_ext_hz), p.theta_rad)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        s21 = sp.s21_notch(probe, notch)
    else:
        wb = hz(p.resonator_frequency_hz)
        wq = hz(p.qubit_frequency_hz)
        wd = wq - wb if p.drive_frequency_hz is None else hz(p.drive_frequency_hz)
        s21 = sp.hybridized_s21(probe, wb, wd - wq, hz(p.coupling_hz), hz(p.kappa_int_hz),
                                hz(p.kappa_ext_hz), hz(p.qubit_linewidth_hz))
        s21 = s21 * np.exp(1j * p.theta_rad)
    if p.noise:
        s21 = s21 + p.noise * (rng.normal(size=probe.size) + 1j * rng.normal(size=probe.size))
    run.table("spectrum.csv", io.SPECTRUM_COLUMNS, io.spectrum_rows(probe, s21))
    run.step("spectrum", t0)
    run.line(f"{p.probe_points} probe points, min |S21| = {np.min(np.abs(s21)):.4f}")


def run_calibrate(run):
    p = run.config.parameters
    wq, wb = hz(p.qubit_frequency_hz), hz(p.resonator_frequency_hz)
    wd = wq - wb if p.drive_frequency_hz is None else hz(p.drive_frequency_hz)
    try:
        calib = cal.StarkCalibration.from_frequencies(hz(p.anharmonicity_hz), wq, wd)
    except cal.CalibrationError as exc:
        raise ConfigError(str(exc)) from None
    if p.stark_shifts_hz and p.drive_amplitudes_hz:
        raise ConfigError("give either 'parameters.stark_shifts_hz' or 'parameters.drive_amplitudes_hz'")
    t0 = time.perf_counter()
    rows = []
    if p.drive_amplitudes_hz:
        for amp in p.drive_amplitudes_hz:
            eps = hz(amp)
            shift = cal.ac_stark_shift(eps, calib.alpha, calib.detuning_q, calib.sum_frequency)
            ss = cal.kerr_steady_state(calib.detuning_q, calib.alpha, eps)
            rows.append((amp, to_hz(shift), ss.n_photons, ss.bistable))
    else:
        for shift_hz in p.stark_shifts_hz:
            shift = hz(shift_hz)
            try:
                eps2 = cal.drive_from_stark(shift, calib)
            except cal.CalibrationError as exc:
                raise ConfigError(f"key 'parameters.stark_shifts_hz': {exc}") from None
            ss = cal.kerr_steady_state(calib.detuning_q, calib.alpha, math.sqrt(eps2))
            rows.append((to_hz(math.sqrt(eps2)), shift_hz, ss.n_photons, ss.bistable))
    run.table("calibration.csv", ("drive_amplitude_hz", "stark_shift_hz", "n_photons", "bistable"), rows)
    a_eff = cal.effective_kerr(calib.alpha, hz(p.g0_hz), wb, hz(p.resonator_linewidth_hz))
    n_crit = cal.critical_photon_number(abs(wq - wb), hz(p.g_ab_hz))
    run.step("calibrate", t0, effective_kerr_hz=to_hz(a_eff), critical_photon_number=n_crit)
    bs = (calib.detuning_q**2 * cal._stark_bracket(calib.detuning_q, calib.sum_frequency))
    run.line(f"Bloch-Siegert enhancement of the Stark shift: x{bs:.4f}")
    run.line(f"effective Kerr/2pi = {to_hz(a_eff) / 1e6:.4f} MHz (bare {p.anharmonicity_hz / 1e6:.1f} MHz)")
    run.line(f"critical photon number = {n_crit:.0f}")
    for amp, shift, n, bist in rows:
        run.line(f"eps/2pi = {amp / 1e6:10.3f} MHz  shift/2pi = {shift / 1e6:9.4f} MHz  n = {n:.5f}")


def _fit_rows(fit, names):
    for key, label, conv in names:
        yield (label, conv(fit.parameters[key]), conv(fit.parameter_uncertainties[key]))


def _data_path(run, path):
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"key 'parameters.data': file not found: {path}")
    return p


def run_fit_notch(run):
    p = run.config.parameters
    cols = io.read_columns(_data_path(run, p.data), io.SPECTRUM_COLUMNS)
    omega = hz(cols["probe_hz"])
    s21 = cols["s21_re"] + 1j * cols["s21_im"]
    if p.remove_background:
        s21 = sp.remove_background(omega, s21)
    try:
        init = sp.NotchParams(hz(p.resonator_frequency_hz), hz(p.kappa_int_hz), hz(p.kappa_ext_hz),
                              p.theta_rad)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    t0 = time.perf_counter()
    fit = sp.fit_notch(omega, s21, init, seed=run.config.seed or 0)
    run.step("fit-notch", t0, residual_norm=fit.residual_norm, iterations=fit.iterations,
             converged=fit.converged, gradient_norm=fit.gradient_norm)
    rows = list(_fit_rows(fit, [("omega_b", "resonator_frequency_hz", to_hz),
                                ("kappa_int", "kappa_int_hz", to_hz),
                                ("kappa_ext", "kappa_ext_hz", to_hz),
                                ("theta", "theta_rad", float)]))
    run.table("fit.csv", io.FIT_COLUMNS, rows)
    for label, v, e in rows:
        run.line(f"{label:24s} {v:.9g} +- {e:.3g}")


def run_fit_crossing(run):
    p = run.config.parameters
    cols = io.read_columns(_data_path(run, p.data), io.MINIMA_COLUMNS)
    drives, minima = [], []
    for d in np.unique(cols["drive_hz"]):
        drives.append(hz(d))
        minima.append(hz(cols["minimum_hz"][cols["drive_hz"] == d]))
    t0 = time.perf_counter()
    fit = sp.fit_avoided_crossing(drives, minima, (hz(p.resonator_frequency_hz), hz(p.coupling_hz),
                                                   hz(p.drive_resonance_hz)), seed=run.config.seed or 0)
    run.step("fit-crossing", t0, residual_norm=fit.residual_norm, iterations=fit.iterations,
             converged=fit.converged)
    rows = list(_fit_rows(fit, [("omega_b", "resonator_frequency_hz", to_hz),
                                ("g", "coupling_hz", to_hz),
                                ("drive_resonance", "drive_resonance_hz", to_hz)]))
    run.table("fit.csv", io.FIT_COLUMNS, rows)
    for label, v, e in rows:
        run.line(f"{label:24s} {v:.9g} +- {e:.3g}")


def run_extract_g0(run):
    p = run.config.parameters
    cols = io.read_columns(_data_path(run, p.data), io.G0_POINT_COLUMNS)
    err = cols["g_err_hz"]
    t0 = time.perf_counter()
    fit = sp.fit_g0(cols["n_photons"], hz(cols["g_hz"]), hz(err) if np.all(err > 0) else None)
    run.step("extract-g0", t0, residual_norm=fit.residual_norm)
    rows = list(_fit_rows(fit, [("g0", "g0_hz", to_hz)]))
    run.table("fit.csv", io.FIT_COLUMNS, rows)
    run.line(f"g0/2pi = {rows[0][1] / 1e6:.4f} +- {rows[0][2] / 1e6:.4f} MHz")


def pipeline_setup(p):
    params = q.SystemParams(omega_q=hz(p.qubit_frequency_hz), alpha=hz(p.anharmonicity_hz),
                            omega_b=hz(p.resonator_frequency_hz), g0=hz(p.g0_hz),
                            gamma_q=hz(p.qubit_linewidth_hz))
    if p.drive_amplitudes_hz:
        amps = hz(np.asarray(p.drive_amplitudes_hz))
    else:
        if not p.powers_dbm:
            raise ConfigError("key 'parameters.powers_dbm' or 'parameters.drive_amplitudes_hz' required")
        n_ref = (p.reference_coupling_hz / p.g0_hz) ** 2
        amps = pl.amplitudes_for_powers(p.powers_dbm, p.reference_dbm,
                                        pl.amplitude_for_photons(params, n_ref))
    return pl.PipelineSetup(params, amps, hz(p.kappa_int_hz), hz(p.kappa_ext_hz),
                            spectrum_noise=p.spectrum_noise, stark_noise=p.stark_noise,
                            drive_points=p.drive_points, probe_points=p.probe_points)


def pipeline_g0(run):
    p = run.config.parameters
    setup = pipeline_setup(p)
    t0 = time.perf_counter()
    res = pl.run_pipeline(setup, seed=run.config.seed or 0)
    run.step("pipeline", t0, n_powers=len(res.points))
    rows = [(to_hz(pt.drive_amplitude), pt.n_true, pt.n_calibrated, to_hz(pt.stark_shift),
             to_hz(pt.g_true), to_hz(pt.g_fit), to_hz(pt.g_err)) for pt in res.points]
    run.table("pipeline.csv", ("drive_amplitude_hz", "n_true", "n_calibrated", "stark_shift_hz",
                               "g_true_hz", "g_fit_hz", "g_err_hz"), rows)
    run.table("fit.csv", io.FIT_COLUMNS, [("g0_hz", to_hz(res.g0), to_hz(res.g0_err))])
    run.invariant("sub_single_photon", max(pt.n_calibrated for pt in res.points), 1.0,
                  all(pt.n_calibrated < 1 for pt in res.points))
    for r in rows:
        run.line(f"n = {r[2]:.5f}  g/2pi = {r[5] / 1e6:.4f} MHz (true {r[4] / 1e6:.4f})")
    run.line(f"g0/2pi = {to_hz(res.g0) / 1e6:.4f} +- {to_hz(res.g0_err) / 1e6:.4f} MHz"
             f" (injected {p.g0_hz / 1e6:.4f})")
    return res


def _threads(arg):
    if arg is not None:
        return arg
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"environment variable {THREADS_ENV} must be an integer") from None
    return 1


def execute(experiment, config_path, out=None, seed=None, threads=None):
    """Run one experiment; returns the output directory. Raises on failure."""
    config = load_config(config_path, experiment)
    if seed is not None:
        config.seed = seed
    if threads is not None:
        config.threads = threads
    if config.stochastic and config.seed is None:
        raise ConfigError("key 'seed' is required for stochastic runs")
    out_dir = out or config.output or os.path.join("ppcqed-out", experiment)
    run = Run(config, out_dir, _threads(config.threads))
    started = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    {
        "estimate": run_estimate,
        "chevron": run_chevron,
        "spectrum": lambda r: run_spectrum(r, rng),
        "calibrate": run_calibrate,
        "fit-notch": run_fit_notch,
        "fit-crossing": run_fit_crossing,
        "extract-g0": run_extract_g0,
        "pipeline": pipeline_g0,
    }[experiment](run)
    manifest = {
        "experiment": experiment,
        "config_hash": config.hash(),
        "config": config.to_dict(),
        "toolkit_version": __version__,
        "wall_clock_s": time.perf_counter() - started,
        "steps": run.steps,
        "invariants": run.invariants,
        "outputs": run.outputs,
    }
    io.write_json(Path(out_dir) / "manifest.json", manifest)
    io.atomic_write_text(Path(out_dir) / "summary.txt", "\n".join(run.summary) + "\n")
    print("\n".join(run.summary))
    failed = [k for k, v in run.invariants.items() if not v["passed"]]
    if failed:
        raise dyn.NumericalError(f"invariant check failed: {', '.join(failed)}; see manifest.json")
    return out_dir


def build_parser():
    parser = argparse.ArgumentParser(prog="ppcqed", description=__doc__.splitlines()[0])
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True)
    parser.add_argument("--out")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--threads", type=int)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        execute(args.experiment, args.config, args.out, args.seed, args.threads)
    except (ConfigError, io.TableError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (dyn.NumericalError, FitError, cal.CalibrationError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
