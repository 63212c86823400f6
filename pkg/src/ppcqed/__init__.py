"""Photon-pressure circuit QED toolkit.

Circuit-parameter estimation, Lindblad dynamics of the photon-pressure
Jaynes-Cummings interaction, AC-Stark photon-number calibration and
spectroscopic fitting.
"""

__version__ = "0.1.0"
