"""Analytic circuit-parameter estimates from device geometry.

Chain: IDC geometry -> capacitance -> inductance (from the measured
resonance) -> zero-point current; SQUID geometry -> mutual inductance ->
zero-point flux; flux arc -> flux sensitivity -> single-photon coupling.
"""

from dataclasses import dataclass
import math

from .constants import EPSILON_0, FLUX_QUANTUM, HBAR, MU_0


class DomainError(ValueError):
    """Input outside the domain where an estimator is defined."""


@dataclass(frozen=True)
class IdcGeometry:
    """Interdigitated capacitor. Lengths in meters."""

    finger_count: int
    finger_width: float
    finger_gap: float
    finger_length: float
    relative_permittivity: float = 11.8

    def __post_init__(self):
        if int(self.finger_count) != self.finger_count or self.finger_count < 4:
            raise DomainError(f"finger_count must be an integer >= 4, got {self.finger_count}")
        for name in ("finger_width", "finger_gap", "finger_length"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.relative_permittivity >= 1:
            raise DomainError(f"relative_permittivity must be >= 1, got {self.relative_permittivity}")


@dataclass(frozen=True)
class SquidGeometry:
    """SQUID loop next to a straight inductor wire. Lengths in meters."""

    loop_length: float
    near_distance: float
    far_distance: float

    def __post_init__(self):
        if not self.loop_length > 0:
            raise DomainError(f"loop_length must be positive, got {self.loop_length}")
        if not 0 < self.near_distance < self.far_distance:
            raise DomainError(
                f"need 0 < near_distance < far_distance, got {self.near_distance}, {self.far_distance}"
            )


@dataclass(frozen=True)
class ResonatorParams:
    frequency: float  # rad/s
    capacitance: float  # F
    inductance: float  # H
    internal_rate: float = 0.0  # rad/s
    external_rate: float = 0.0  # rad/s
    consistency_tol: float = 1e-6

    def __post_init__(self):
        if not (self.frequency > 0 and self.capacitance > 0 and self.inductance > 0):
            raise DomainError("frequency, capacitance and inductance must be positive")
        if self.internal_rate < 0 or self.external_rate < 0:
            raise DomainError("decay rates must be non-negative")
        mismatch = abs(self.frequency * math.sqrt(self.inductance * self.capacitance) - 1)
        if mismatch > self.consistency_tol:
            raise DomainError(f"omega*sqrt(LC) deviates from 1 by {mismatch:.3g}")

    @classmethod
    def from_frequency(cls, frequency, capacitance, **rates):
        return cls(frequency, capacitance, inductance_from_frequency(frequency, capacitance), **rates)

    @property
    def total_rate(self):
        return self.internal_rate + self.external_rate


@dataclass(frozen=True)
class FluxArc:
    """Symmetric-SQUID transmon arc, omega_q = omega_max * sqrt|cos(pi Phi)|."""

    sweet_spot_frequency: float  # rad/s
    anharmonicity: float  # rad/s, negative
    operating_flux: float = 0.0  # units of Phi_0

    def __post_init__(self):
        if not self.sweet_spot_frequency > 0:
            raise DomainError("sweet_spot_frequency must be positive")
        if not self.anharmonicity < 0:
            raise DomainError("anharmonicity must be negative")
        if not abs(self.operating_flux) < 0.5:
            raise DomainError(f"|operating_flux| must be < 0.5, got {self.operating_flux}")

    @classmethod
    def at_frequency(cls, sweet_spot_frequency, anharmonicity, frequency):
        """Arc biased so that the qubit sits at ``frequency`` (positive flux branch)."""
        return cls(sweet_spot_frequency, anharmonicity,
                   flux_for_frequency(sweet_spot_frequency, frequency))

    @property
    def operating_frequency(self):
        return flux_arc_frequency(self, self.operating_flux)

    @property
    def operating_sensitivity(self):
        return flux_sensitivity(self, self.operating_flux)


def complete_elliptic_k(k):
    """Complete elliptic integral of the first kind K(k), modulus convention.

    Uses the arithmetic-geometric mean, K(k) = pi / (2 AGM(1, sqrt(1 - k^2))).
    """
    if not 0 <= k < 1:
        raise DomainError(f"elliptic modulus must satisfy 0 <= k < 1, got {k}")
    a, b = 1.0, math.sqrt((1 - k) * (1 + k))
    for _ in range(64):
        if abs(a - b) < 1e-15 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2 * a)


def _idc_unit_capacitance(k, geom):
    if not 0 <= k < 1:
        raise DomainError(f"IDC modulus {k} outside [0, 1)")
    eps_eff = (geom.relative_permittivity + 1) / 2
    k_prime = math.sqrt((1 - k) * (1 + k))
    return 2 * EPSILON_0 * eps_eff * geom.finger_length * complete_elliptic_k(k) / complete_elliptic_k(k_prime)


def idc_partial_capacitances(geom):
    """Return (C1, C2): interior-finger and edge-finger pair capacitances."""
    a, b = geom.finger_width, geom.finger_gap
    k1 = math.sin(math.pi * a / (2 * (a + b)))
    k2 = 2 * math.sqrt(a * (a + b)) / (2 * a + b)
    return _idc_unit_capacitance(k1, geom), _idc_unit_capacitance(k2, geom)


def idc_capacitance(geom):
    """Capacitance of an interdigitated capacitor (conformal-mapping model).

    C = (N - 3) C1 / 2 + 2 C1 C2 / (C1 + C2), where C1 counts the interior
    cells and C2 the two outermost cells.
    """
    c1, c2 = idc_partial_capacitances(geom)
    return (geom.finger_count - 3) * c1 / 2 + 2 * c1 * c2 / (c1 + c2)


def inductance_from_frequency(omega_b, capacitance):
    if not (omega_b > 0 and capacitance > 0):
        raise DomainError("frequency and capacitance must be positive")
    return 1.0 / (omega_b**2 * capacitance)


def zero_point_current(omega_b, inductance):
    """RMS vacuum current through the resonator inductor, sqrt(hbar w / 2L)."""
    if not (omega_b > 0 and inductance > 0):
        raise DomainError("frequency and inductance must be positive")
    return math.sqrt(HBAR * omega_b / (2 * inductance))


def mutual_inductance(geom):
    """Flux linkage between a straight wire and a rectangular loop parallel to it."""
    return MU_0 * geom.loop_length / (2 * math.pi) * math.log(geom.far_distance / geom.near_distance)


def zero_point_flux(mutual, current):
    """Zero-point flux M * I_zpf in units of the flux quantum."""
    if mutual < 0 or current < 0:
        raise DomainError("mutual inductance and current must be non-negative")
    return mutual * current / FLUX_QUANTUM


def _check_arc_flux(flux):
    c = math.cos(math.pi * flux)
    if abs(c) < 1e-15:
        raise DomainError(f"flux {flux} sits on the arc zero")
    return c


def flux_arc_frequency(arc, flux):
    c = _check_arc_flux(flux)
    return arc.sweet_spot_frequency * math.sqrt(abs(c))


def flux_sensitivity(arc, flux):
    """|d omega_q / d Phi| in rad/s per flux quantum."""
    c = _check_arc_flux(flux)
    return arc.sweet_spot_frequency * (math.pi / 2) * abs(math.sin(math.pi * flux)) / math.sqrt(abs(c))


def flux_for_frequency(sweet_spot_frequency, frequency):
    """Smallest non-negative flux bias at which the arc reaches ``frequency``."""
    ratio = frequency / sweet_spot_frequency
    if not 0 < ratio <= 1:
        raise DomainError("frequency must lie in (0, sweet_spot_frequency]")
    return math.acos(ratio**2) / math.pi


def single_photon_coupling(sensitivity, phi_zpf):
    if sensitivity < 0 or phi_zpf < 0:
        raise DomainError("sensitivity and zero-point flux must be non-negative")
    return sensitivity * phi_zpf


@dataclass(frozen=True)
class CircuitEstimate:
    capacitance: float
    inductance: float
    zero_point_current: float
    mutual_inductance: float
    zero_point_flux: float  # Phi_0
    flux_sensitivity: float  # rad/s per Phi_0
    single_photon_coupling: float  # rad/s


def estimate_chain(idc, squid, omega_b, flux_sensitivity_value):
    """Run the full estimator chain.

    ``flux_sensitivity_value`` is taken as given (a measured number or the
    output of :func:`flux_sensitivity` on a fitted arc).
    """
    c = idc_capacitance(idc)
    l = inductance_from_frequency(omega_b, c)
    i_zpf = zero_point_current(omega_b, l)
    m = mutual_inductance(squid)
    phi = zero_point_flux(m, i_zpf)
    return CircuitEstimate(c, l, i_zpf, m, phi, flux_sensitivity_value,
                           single_photon_coupling(flux_sensitivity_value, phi))
