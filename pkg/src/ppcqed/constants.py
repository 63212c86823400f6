"""CODATA 2018 physical constants (SI) and unit helpers.

Everything inside the package works in angular frequency (rad/s). The
``hz``/``to_hz`` helpers are the only place the 2*pi factor should appear.
"""

import math

HBAR = 1.054571817e-34  # J s
H_PLANCK = 6.62607015e-34  # J s
E_CHARGE = 1.602176634e-19  # C
MU_0 = 1.25663706212e-6  # N / A^2
EPSILON_0 = 8.8541878128e-12  # F / m
FLUX_QUANTUM = H_PLANCK / (2 * E_CHARGE)  # Wb

TWO_PI = 2 * math.pi


def hz(f):
    """Convert an ordinary frequency in Hz to angular frequency in rad/s."""
    return TWO_PI * f


def to_hz(omega):
    """Convert an angular frequency in rad/s to Hz."""
    return omega / TWO_PI
