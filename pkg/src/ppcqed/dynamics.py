"""Lindblad master-equation integration and photon-pressure Rabi experiments.

The integrator is a fixed-step classic RK4 in the co-rotating interaction
frame (see :func:`ppcqed.quantum.driven_chevron_hamiltonian`). Segment
boundaries and requested sample times are always step boundaries. The
collapse channels are resonator loss sqrt(kappa_b) b and qubit relaxation
sqrt(gamma_1) sigma_-; dephasing is not modelled.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from . import quantum as q
from .fitting import least_squares_simplex


class NumericalError(RuntimeError):
    """An integrator invariant (trace, hermiticity, positivity) was violated."""


class ScheduleError(ValueError):
    pass


TRACE_TOL = 1e-8
HERMITIAN_TOL = 1e-10
POSITIVITY_TOL = 1e-8
MIN_STEP = 1e-18  # s


@dataclass(frozen=True)
class DensityMatrix:
    space: q.HilbertSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (self.space.dim, self.space.dim):
            raise q.DimensionError("density matrix does not match space")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def pure(cls, space, n_q, n_b):
        v = space.basis(n_q, n_b)
        return cls(space, np.outer(v, v.conj()))

    @classmethod
    def from_vector(cls, space, psi):
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(space, np.outer(psi, psi.conj()))

    def check(self):
        """Return (trace_error, hermiticity_error, min_eigenvalue)."""
        return state_diagnostics(self.matrix)

    def validate(self):
        check_state(self.matrix)
        return self

    def expect(self, op):
        return float(np.real(np.trace(op.matrix @ self.matrix)))


def state_diagnostics(rho):
    rho = np.asarray(rho)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    trace = float(abs(np.trace(rho) - 1))
    min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    return trace, herm, min_eig


def check_state(rho, where=""):
    trace, herm, min_eig = state_diagnostics(rho)
    if trace > TRACE_TOL:
        raise NumericalError(f"trace drift {trace:.3g} {where}")
    if herm > HERMITIAN_TOL:
        raise NumericalError(f"hermiticity error {herm:.3g} {where}")
    if min_eig < -POSITIVITY_TOL:
        raise NumericalError(f"negative eigenvalue {min_eig:.3g} {where}")
    return trace, herm, min_eig


@dataclass(frozen=True)
class Segment:
    duration: float
    coupling_g: float = 0.0
    qubit_drive_amp: float = 0.0
    qubit_drive_on: bool = False

    def __post_init__(self):
        if not self.duration > 0 or not math.isfinite(self.duration):
            raise ScheduleError(f"segment duration must be positive and finite, got {self.duration}")


@dataclass(frozen=True)
class PulseSchedule:
    segments: tuple

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @classmethod
    def square(cls, duration, coupling_g):
        return cls((Segment(duration, coupling_g),))

    @property
    def horizon(self):
        return float(sum(s.duration for s in self.segments))

    @property
    def boundaries(self):
        return np.concatenate([[0.0], np.cumsum([s.duration for s in self.segments])])

    def segment_at(self, t):
        """Segment active at ``t``; right-continuous, the final edge belongs to the last segment."""
        edges = self.boundaries
        if t < 0 or t > edges[-1] or not self.segments:
            raise ScheduleError(f"t={t} outside schedule horizon [0, {edges[-1]}]")
        idx = int(np.searchsorted(edges, t, side="right")) - 1
        return self.segments[min(idx, len(self.segments) - 1)]

    def coupling(self, t):
        return self.segment_at(t).coupling_g

    def drive(self, t):
        seg = self.segment_at(t)
        return seg.qubit_drive_amp if seg.qubit_drive_on else 0.0

    def then(self, other):
        return PulseSchedule(self.segments + other.segments)


def collapse_operators(params, space):
    """[(L, rate)] for resonator loss and qubit relaxation."""
    ops = []
    if params.kappa_b > 0:
        ops.append((q.annihilation(space, "resonator"), params.kappa_b))
    if params.gamma_1 > 0:
        ops.append((q.sigma_minus(space), params.gamma_1))
    return ops


def lindblad_rhs(h, rho, collapse=()):
    """-i[H, rho] + sum_k r_k (L rho L^dag - {L^dag L, rho}/2)."""
    hm = h.matrix if isinstance(h, q.Operator) else np.asarray(h)
    rm = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if hm.shape != rm.shape:
        raise q.DimensionError(f"Hamiltonian {hm.shape} and state {rm.shape} differ")
    out = -1j * (hm @ rm - rm @ hm)
    for op, rate in collapse:
        lm = op.matrix if isinstance(op, q.Operator) else np.asarray(op)
        if lm.shape != rm.shape:
            raise q.DimensionError("collapse operator dimension mismatch")
        if rate < 0:
            raise ValueError("collapse rates must be non-negative")
        ld = lm.conj().T
        out = out + rate * (lm @ rm @ ld - 0.5 * (ld @ lm @ rm + rm @ ld @ lm))
    return out


class _Generator:
    """Lindbladian with the anticommutator folded into a non-Hermitian H_eff."""

    def __init__(self, collapse):
        self.jumps = [np.sqrt(rate) * op.matrix for op, rate in collapse if rate > 0]
        self.loss = sum(j.conj().T @ j for j in self.jumps) if self.jumps else None

    def __call__(self, h, rho):
        heff = h if self.loss is None else h - 0.5j * self.loss
        out = -1j * (heff @ rho - rho @ heff.conj().swapaxes(-1, -2))
        for j in self.jumps:
            out = out + j @ rho @ j.conj().T
        return out


def liouvillian(h, collapse=()):
    """Superoperator matrix acting on row-major vec(rho)."""
    hm = h.matrix if isinstance(h, q.Operator) else np.asarray(h)
    d = hm.shape[0]
    eye = np.eye(d)
    lv = -1j * (np.kron(hm, eye) - np.kron(eye, hm.T))
    for op, rate in collapse:
        lm = op.matrix
        ld = lm.conj().T
        ll = ld @ lm
        lv = lv + rate * (np.kron(lm, lm.conj()) - 0.5 * np.kron(ll, eye) - 0.5 * np.kron(eye, ll.T))
    return lv


def max_frequency_scale(schedule, params, detunings, counter_rotating=False):
    """Largest angular rate in the frame, for the step-size rule."""
    rates = [float(np.max(np.abs(np.atleast_1d(detunings)))) if np.size(detunings) else 0.0,
             params.kappa_b, params.gamma_1]
    for s in schedule.segments:
        rates.append(abs(s.coupling_g))
        if s.qubit_drive_on:
            rates.append(abs(s.qubit_drive_amp))
        if counter_rotating and s.coupling_g:
            rates.append(float(np.max(np.abs(q.counter_rotating_frequency(params, np.atleast_1d(detunings))))))
    return max(rates)


def step_limit(dt_max, omega_max):
    if not dt_max > 0:
        raise ValueError("dt_max must be positive")
    if omega_max <= 0:
        return dt_max
    f_max = omega_max / (2 * math.pi)
    return min(dt_max, 1 / (50 * f_max))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (..., n_times, D, D)
    space: q.HilbertSpace
    step: float
    diagnostics: dict = field(default_factory=dict)

    def density(self, i):
        return DensityMatrix(self.space, self.states[i])

    def expect(self, op):
        return np.real(np.einsum("ij,...tji->...t", op.matrix, self.states))


def _rk4(gen, h_at, rho, t, dt):
    k1 = gen(h_at(t), rho)
    hm = h_at(t + dt / 2)
    k2 = gen(hm, rho + 0.5 * dt * k1)
    k3 = gen(hm, rho + 0.5 * dt * k2)
    k4 = gen(h_at(t + dt), rho + dt * k3)
    return rho + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def _batched_hamiltonians(params, detunings, seg, space, counter_rotating):
    sz, exchange, drive, cr = q._chevron_parts(space)
    det = np.asarray(detunings, dtype=float).reshape(-1, 1, 1)
    static = np.zeros((det.shape[0], space.dim, space.dim), dtype=complex)
    if not seg.qubit_drive_on:
        static = static + (det / 2) * sz
    if seg.coupling_g:
        static = static + seg.coupling_g * exchange
    if seg.qubit_drive_on and seg.qubit_drive_amp:
        static = static + seg.qubit_drive_amp * drive
    if not (counter_rotating and seg.coupling_g):
        return lambda t: static
    w = q.counter_rotating_frequency(params, det)
    g = seg.coupling_g

    def h_at(t):
        term = g * np.exp(1j * w * t) * cr
        return static + term + term.conj().swapaxes(-1, -2)

    return h_at


def _integrate(rho0, schedule, params, detunings, dt_max, space, sample_times=None,
               counter_rotating=False, check=True):
    """Batched RK4 over a stack of detunings; rho0 has shape (B, D, D)."""
    collapse = collapse_operators(params, space)
    gen = _Generator(collapse)
    h_max = step_limit(dt_max, max_frequency_scale(schedule, params, detunings, counter_rotating))
    if h_max < MIN_STEP:
        raise NumericalError(f"step size {h_max:.3g} s underflows")
    edges = schedule.boundaries
    times = set(edges.tolist())
    if sample_times is not None:
        st = np.asarray(sample_times, dtype=float)
        if np.any(st < 0) or np.any(st > edges[-1] * (1 + 1e-12)):
            raise ScheduleError("sample times outside schedule horizon")
        times.update(np.minimum(st, edges[-1]).tolist())
    grid = np.array(sorted(times))
    rho = np.array(rho0, dtype=complex)
    out = np.empty(rho.shape[:1] + (grid.size,) + rho.shape[1:], dtype=complex)
    out[:, 0] = rho
    worst = [0.0, 0.0, 0.0]
    seg_idx = 0
    h_at = None
    for i in range(1, grid.size):
        t0, t1 = grid[i - 1], grid[i]
        while seg_idx < len(schedule.segments) - 1 and t0 >= edges[seg_idx + 1]:
            seg_idx += 1
            h_at = None
        if h_at is None:
            h_at = _batched_hamiltonians(params, detunings, schedule.segments[seg_idx], space,
                                         counter_rotating)
        n = max(1, math.ceil((t1 - t0) / h_max - 1e-9))
        dt = (t1 - t0) / n
        t = t0
        for _ in range(n):
            rho = _rk4(gen, h_at, rho, t, dt)
            t += dt
        out[:, i] = rho
        if check:
            for b in range(rho.shape[0]):
                diag = check_state(rho[b], where=f"at t={t1:.6g} s")
                worst = [max(worst[0], diag[0]), max(worst[1], diag[1]), min(worst[2], diag[2])]
    diagnostics = {"max_trace_error": worst[0], "max_hermiticity_error": worst[1],
                   "min_eigenvalue": worst[2], "step": h_max, "n_points": int(grid.size)}
    return grid, out, h_max, diagnostics


def evolve(rho0, schedule, params, detuning, dt_max, sample_times=None,
           counter_rotating=False, check=True):
    """Integrate the master equation over ``schedule`` at sideband detuning ``detuning``.

    Step size is min(dt_max, 1/(50 f_max)) with f_max the largest rate in the
    frame over 2 pi. The returned trajectory stores the state at segment edges
    and at ``sample_times``; trace, hermiticity and positivity are verified at
    each stored point and a :class:`NumericalError` is raised on violation.
    """
    space = rho0.space
    grid, states, step, diag = _integrate(rho0.matrix[None], schedule, params, [detuning], dt_max,
                                          space, sample_times, counter_rotating, check)
    return Trajectory(grid, states[0], space, step, diag)


@dataclass
class ChevronResult:
    detunings: np.ndarray  # rad/s
    times: np.ndarray  # s
    p_excited: np.ndarray  # (n_detunings, n_times)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.p_excited.shape != (len(self.detunings), len(self.times)):
            raise ValueError("probability grid does not match axes")
        lo, hi = float(np.min(self.p_excited)), float(np.max(self.p_excited))
        if lo < -1e-8 or hi > 1 + 1e-8:
            raise NumericalError(f"excited-state probability outside [0, 1]: [{lo}, {hi}]")


PREPARATIONS = ("ground", "excited_qubit", "fock1_resonator")


def _monotone(x, name):
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError(f"{name} must be non-empty")
    d = np.diff(x)
    if x.size > 1 and not (np.all(d > 0) or np.all(d < 0)):
        raise ValueError(f"{name} must be strictly monotone")
    return x


def _apply_pi(rho, space, pi_pulse, params, dt_max, check):
    """Qubit pi-pulse: ideal unitary, or a resonant square drive of the given duration."""
    if pi_pulse is None:
        x = q.pi_pulse_unitary(space)
        return x @ rho @ x.conj().T
    sched = PulseSchedule((Segment(pi_pulse, 0.0, math.pi / (2 * pi_pulse), True),))
    _, states, _, _ = _integrate(rho, sched, params, np.zeros(rho.shape[0]), dt_max, space,
                                 check=check)
    return states[:, -1]


def prepare_states(prep, params, g_pulse, n_batch, space, dt_max=0.1e-9, pi_pulse=None,
                   check=True):
    """Initial states for a chevron, stacked n_batch times."""
    if prep not in PREPARATIONS:
        raise ValueError(f"unknown preparation {prep!r}; expected one of {PREPARATIONS}")
    ground = DensityMatrix.pure(space, 0, 0).matrix
    rho = np.repeat(ground[None], n_batch, axis=0)
    if prep == "ground":
        return rho
    rho = _apply_pi(rho, space, pi_pulse, params, dt_max, check)
    if prep == "excited_qubit":
        return rho
    # photon-pressure pi-swap |e,0> -> |g,1>, then re-excite the qubit
    swap = PulseSchedule.square(q.rabi_pi_time(g_pulse), g_pulse)
    _, states, _, _ = _integrate(rho, swap, params, np.zeros(n_batch), dt_max, space, check=check)
    return _apply_pi(states[:, -1], space, pi_pulse, params, dt_max, check)


def chevron_experiment(params, g_pulse, detunings, durations, prep="excited_qubit", dt_max=0.1e-9,
                       space=None, threads=1, pi_pulse=None, counter_rotating=False, check=True):
    """Excited-state probability vs sideband detuning and pulse duration.

    For each detuning the state is prepared, a square sideband pulse of
    strength ``g_pulse`` is applied, and P_e is read out at every duration in
    ``durations`` (one integration per detuning, sampled along the way).
    ``pi_pulse`` is None for ideal instantaneous qubit flips, or the duration
    in seconds of a resonant square qubit drive.
    """
    space = space or q.HilbertSpace(2, 5)
    det = _monotone(detunings, "detunings")
    taus = _monotone(durations, "durations")
    if np.any(taus < 0):
        raise ValueError("durations must be non-negative")
    order = np.argsort(taus)
    sorted_taus = taus[order]
    horizon = float(sorted_taus[-1])
    p_op = q.excited_population_operator(space).matrix

    def run(chunk):
        rho0 = prepare_states(prep, params, g_pulse, chunk.size, space, dt_max, pi_pulse, check)
        if horizon == 0:
            return np.real(np.einsum("ij,bji->b", p_op, rho0))[:, None], {}
        sched = PulseSchedule.square(horizon, g_pulse)
        grid, states, _, diag = _integrate(rho0, sched, params, chunk, dt_max, space, sorted_taus,
                                           counter_rotating, check)
        idx = np.searchsorted(grid, np.minimum(sorted_taus, horizon))
        p = np.real(np.einsum("ij,btji->bt", p_op, states[:, idx]))
        return p, diag

    threads = max(1, int(threads))
    chunks = np.array_split(det, min(threads, det.size))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(c) for c in chunks]
    p_sorted = np.concatenate([r[0] for r in results], axis=0)
    p = np.empty_like(p_sorted)
    p[:, order] = p_sorted
    diag = {}
    for _, d in results:
        for k, v in d.items():
            if k == "min_eigenvalue":
                diag[k] = min(diag.get(k, 0.0), v)
            else:
                diag[k] = max(diag.get(k, 0.0), v)
    return ChevronResult(det, taus, p, diag)


@dataclass
class RabiFit:
    g: float
    decay: float
    amplitude: float
    offset: float
    fit: object


def _fft_frequency(t, y):
    """Dominant angular frequency of a uniformly resampled, mean-subtracted trace."""
    n = max(len(t), 256) * 8
    tu = np.linspace(t[0], t[-1], len(t))
    yu = np.interp(tu, t, y) - np.mean(y)
    spec = np.abs(np.fft.rfft(yu * np.hanning(len(yu)), n=n))
    freqs = np.fft.rfftfreq(n, d=tu[1] - tu[0])
    spec[0] = 0
    return 2 * math.pi * freqs[int(np.argmax(spec))]


def rabi_frequency_fit(t, p_excited, seed=0):
    """Fit A exp(-Gamma t) cos(2 g t) + C and return g and Gamma.

    Initialised from the FFT peak; both amplitude signs are tried and the
    lower-residual fit is kept.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(p_excited, dtype=float)
    if t.size < 10:
        raise ValueError("need at least 10 samples")
    # one full period crosses the mean at least twice
    signs = np.sign(y - np.mean(y))
    signs = signs[signs != 0]
    if np.count_nonzero(np.diff(signs)) < 2:
        raise ValueError("trace must span at least one oscillation")
    w0 = _fft_frequency(t, y)
    g0 = w0 / 2
    span = t[-1] - t[0]
    amp = 0.5 * (np.max(y) - np.min(y))

    def residuals(x):
        a, gamma, g, c = x
        return a * np.exp(-gamma * t) * np.cos(2 * g * t) + c - y

    best = None
    for sign in (1.0, -1.0):
        x0 = [sign * amp, 0.1 / span, g0, float(np.mean(y))]
        scale = [max(amp, 1e-3), 1 / span, g0 * 0.05, max(amp, 1e-3)]
        fit = least_squares_simplex(residuals, x0, scale, ["amplitude", "decay", "g", "offset"],
                                    seed=seed)
        if best is None or fit.residual_norm < best.residual_norm:
            best = fit
    p = best.parameters
    return RabiFit(abs(p["g"]), p["decay"], p["amplitude"], p["offset"], best)
