"""Dense operators on a truncated qubit (x) resonator space and Hamiltonian builders.

Ordering convention: the qubit is the first tensor factor, so basis index
``i = n_q * D_b + n_b``. For a two-level qubit, level 0 is |g> and level 1
is |e>; sigma_z = |e><e| - |g><g|. All Hamiltonians are returned as H/hbar
in rad/s.
"""

from dataclasses import dataclass, field
import math

import numpy as np

DEFAULT_DIM_CAP = 4096


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class HilbertSpace:
    qubit_dim: int = 2
    resonator_dim: int = 5
    cap: int = DEFAULT_DIM_CAP

    def __post_init__(self):
        if self.qubit_dim < 2 or self.resonator_dim < 2:
            raise DimensionError("both subsystem dimensions must be >= 2")
        if self.dim > self.cap:
            raise DimensionError(f"total dimension {self.dim} exceeds cap {self.cap}")

    @property
    def dim(self):
        return self.qubit_dim * self.resonator_dim

    def index(self, n_q, n_b):
        return n_q * self.resonator_dim + n_b

    def basis(self, n_q, n_b):
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(n_q, n_b)] = 1.0
        return v


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters, all angular frequencies/rates in rad/s."""

    omega_q: float
    alpha: float
    omega_b: float
    g0: float = 0.0
    g_ab: float = 0.0
    kappa_b: float = 0.0
    gamma_1: float = 0.0
    gamma_q: float = 0.0

    def __post_init__(self):
        if not (self.omega_q > 0 and self.omega_b > 0):
            raise ValueError("omega_q and omega_b must be positive")
        if self.alpha > 0:
            raise ValueError("anharmonicity must be <= 0")
        for name in ("kappa_b", "gamma_1", "gamma_q"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def reference_device(cls):
        """Operating-point parameters of the measured photon-pressure device."""
        tp = 2 * math.pi
        return cls(
            omega_q=tp * 6.10e9,
            alpha=-tp * 388e6,
            omega_b=tp * 4.347e9,
            g0=tp * 11.9e6,
            g_ab=tp * 2.5e6,
            kappa_b=tp * 116.6e3,
            gamma_1=1 / 664e-9,
            gamma_q=tp * 677e3,
        )


@dataclass(frozen=True)
class DriveParams:
    """Sideband drive; detuning and sum frequency are derived on access."""

    omega_d: float
    amplitude: float
    omega_q: float

    @property
    def detuning_q(self):
        return self.omega_d - self.omega_q

    @property
    def sum_frequency(self):
        return self.omega_q + self.omega_d


@dataclass(frozen=True, eq=False)
class Operator:
    """Immutable dense matrix tied to a :class:`HilbertSpace`."""

    space: HilbertSpace
    matrix: np.ndarray = field(repr=False)
    hermitian: bool = False

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (self.space.dim, self.space.dim):
            raise DimensionError(f"matrix shape {m.shape} does not match space dimension {self.space.dim}")
        if self.hermitian:
            scale = max(1.0, float(np.max(np.abs(m))))
            if np.max(np.abs(m - m.conj().T)) > 1e-12 * scale:
                raise ValueError("operator flagged hermitian but is not")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def _coerce(self, other):
        if isinstance(other, Operator):
            if other.space != self.space:
                raise DimensionError("operators live on different spaces")
            return other.matrix
        return None

    def __add__(self, other):
        m = self._coerce(other)
        if m is None:
            return NotImplemented
        return Operator(self.space, self.matrix + m)

    def __sub__(self, other):
        m = self._coerce(other)
        if m is None:
            return NotImplemented
        return Operator(self.space, self.matrix - m)

    def __matmul__(self, other):
        m = self._coerce(other)
        if m is None:
            return NotImplemented
        return Operator(self.space, self.matrix @ m)

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            return NotImplemented
        return Operator(self.space, self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return Operator(self.space, -self.matrix)

    def dag(self):
        return Operator(self.space, self.matrix.conj().T)

    def is_hermitian(self, rtol=1e-12):
        scale = max(1.0, float(np.max(np.abs(self.matrix))))
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= rtol * scale)

    def as_hermitian(self):
        return Operator(self.space, self.matrix, hermitian=True)

    def commutator(self, other):
        return self @ other - other @ self

    def expect(self, rho):
        return complex(np.trace(self.matrix @ np.asarray(rho)))


def _ladder(dim):
    return np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)


def _embed(space, qubit_part=None, resonator_part=None):
    q = np.eye(space.qubit_dim) if qubit_part is None else qubit_part
    b = np.eye(space.resonator_dim) if resonator_part is None else resonator_part
    return np.kron(q, b)


def annihilation(space, subsystem):
    if subsystem == "qubit":
        return Operator(space, _embed(space, qubit_part=_ladder(space.qubit_dim)))
    if subsystem == "resonator":
        return Operator(space, _embed(space, resonator_part=_ladder(space.resonator_dim)))
    raise ValueError(f"unknown subsystem {subsystem!r}")


def identity(space):
    return Operator(space, np.eye(space.dim), hermitian=True)


def number(space, subsystem):
    a = annihilation(space, subsystem)
    return (a.dag() @ a).as_hermitian()


def _require_two_level(space):
    if space.qubit_dim != 2:
        raise DimensionError(f"two-level qubit required, got qubit_dim={space.qubit_dim}")


def sigma_minus(space):
    """|g><e| on the lowest two qubit levels."""
    s = np.zeros((space.qubit_dim, space.qubit_dim), dtype=complex)
    s[0, 1] = 1.0
    return Operator(space, _embed(space, qubit_part=s))


def sigma_plus(space):
    return sigma_minus(space).dag()


def sigma_z(space):
    _require_two_level(space)
    return Operator(space, _embed(space, qubit_part=np.diag([-1.0, 1.0])), hermitian=True)


def sigma_x(space):
    return (sigma_plus(space) + sigma_minus(space)).as_hermitian()


def excitation_number(space):
    """Total excitation number b^dag b + sigma_+ sigma_- (conserved by JC)."""
    sp = sigma_plus(space)
    return (number(space, "resonator") + sp @ sp.dag()).as_hermitian()


def kerr_hamiltonian(params, space):
    """omega_q a^dag a + (alpha/2) a^dag a^dag a a + omega_b b^dag b."""
    a = annihilation(space, "qubit")
    b = annihilation(space, "resonator")
    ad = a.dag()
    h = params.omega_q * (ad @ a) + (params.alpha / 2) * (ad @ ad @ a @ a) + params.omega_b * (b.dag() @ b)
    return h.as_hermitian()


def photon_pressure_interaction(g0, space):
    """g0 a^dag a (b + b^dag)."""
    a = annihilation(space, "qubit")
    b = annihilation(space, "resonator")
    return (g0 * ((a.dag() @ a) @ (b + b.dag()))).as_hermitian()


def displaced_frame_hamiltonian(g0, amplitude, detuning_q, omega_b, space, include_nonlinear=False):
    """Photon-pressure Hamiltonian in the drive frame, displaced by the qubit amplitude.

    -Delta_q a^dag a + omega_b b^dag b + g0 (A* a + A a^dag)(b + b^dag), with the
    residual g0 a^dag a (b + b^dag) only when ``include_nonlinear``. No RWA is
    applied, so counter-rotating terms are kept.
    """
    a = annihilation(space, "qubit")
    b = annihilation(space, "resonator")
    amp = complex(amplitude)
    h = -detuning_q * (a.dag() @ a) + omega_b * (b.dag() @ b)
    h = h + g0 * ((amp.conjugate() * a + amp * a.dag()) @ (b + b.dag()))
    if include_nonlinear:
        h = h + photon_pressure_interaction(g0, space)
    return h.as_hermitian()


def linearized_jc_hamiltonian(g, detuning_q, omega_b, space):
    """-(Delta_q/2) sigma_z + omega_b b^dag b + g (sigma_+ b + sigma_- b^dag)."""
    _require_two_level(space)
    b = annihilation(space, "resonator")
    sp, sm = sigma_plus(space), sigma_minus(space)
    h = (-detuning_q / 2) * sigma_z(space) + omega_b * (b.dag() @ b) + g * (sp @ b + sm @ b.dag())
    return h.as_hermitian()


def jc_block(h, space, n):
    """2x2 block of ``h`` on {|e, n-1>, |g, n>} (n >= 1)."""
    idx = [space.index(1, n - 1), space.index(0, n)]
    return np.asarray(h.matrix)[np.ix_(idx, idx)]


def driven_chevron_hamiltonian(params, detuning, schedule, t, space, counter_rotating=False):
    """Instantaneous chevron Hamiltonian in the co-rotating interaction frame.

    (delta/2) sigma_z + g(t)(sigma_+ b + sigma_- b^dag) + eps(t)(sigma_+ + sigma_-),
    where delta is the sideband-drive detuning from omega_q - omega_b. While a
    qubit drive segment is active the drive is taken to be exactly resonant
    with the qubit, so the detuning term is absent during that segment.

    With ``counter_rotating`` the terms g(t)(sigma_+ b^dag e^{i W t} + h.c.)
    are added, rotating at W = omega_q - omega_d + omega_b (about 2 omega_b).
    """
    _require_two_level(space)
    seg = schedule.segment_at(t)
    return _chevron_matrix(params, detuning, seg, t, space, counter_rotating)


def _chevron_parts(space):
    b = annihilation(space, "resonator").matrix
    sp = sigma_plus(space).matrix
    sm = sigma_minus(space).matrix
    sz = sigma_z(space).matrix
    return sz, sp @ b + sm @ b.conj().T, sp + sm, sp @ b.conj().T


def counter_rotating_frequency(params, detuning):
    # omega_d = omega_q - omega_b + delta  =>  W = omega_q - omega_d + omega_b
    return 2 * params.omega_b - detuning


def _chevron_matrix(params, detuning, seg, t, space, counter_rotating=False):
    sz, exchange, drive, cr = _chevron_parts(space)
    h = np.zeros((space.dim, space.dim), dtype=complex)
    if not seg.qubit_drive_on:
        h += (detuning / 2) * sz
    if seg.coupling_g:
        h += seg.coupling_g * exchange
        if counter_rotating:
            phase = np.exp(1j * counter_rotating_frequency(params, detuning) * t)
            term = seg.coupling_g * phase * cr
            h += term + term.conj().T
    if seg.qubit_drive_on and seg.qubit_drive_amp:
        h += seg.qubit_drive_amp * drive
    return Operator(space, h, hermitian=True)


def projector(space, n_q, n_b):
    v = space.basis(n_q, n_b)
    return Operator(space, np.outer(v, v.conj()), hermitian=True)


def excited_population_operator(space):
    """Projector on qubit level >= 1 (|e> for a two-level qubit)."""
    p = np.diag((np.arange(space.qubit_dim) >= 1).astype(float))
    return Operator(space, _embed(space, qubit_part=p), hermitian=True)


def pi_pulse_unitary(space):
    """Ideal instantaneous qubit pi-pulse (sigma_x on the lowest two levels)."""
    x = np.eye(space.qubit_dim, dtype=complex)
    x[:2, :2] = [[0, 1], [1, 0]]
    return _embed(space, qubit_part=x)


def rabi_pi_time(g, manifold=1):
    """First P_e minimum of a resonant n-excitation JC oscillation, pi/(2 sqrt(n) g)."""
    return math.pi / (2 * math.sqrt(manifold) * g)
