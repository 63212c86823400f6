"""Device-parameter estimator chain, plus the capacitance-formula variants.

The quoted device numbers (C = 1.26 pF and everything downstream) do not
follow from the stated geometry with the two-cell IDC model; this script
prints the chain and a few alternative cell counts so the gap can be seen.
"""

from dataclasses import dataclass
import argparse

from ppcqed import circuit
from ppcqed.constants import TWO_PI


@dataclass
class EstimateConfig:
    finger_count: int = 44
    finger_width: float = 10e-6
    finger_gap: float = 6e-6
    finger_length: float = 400e-6
    relative_permittivity: float = 11.8
    loop_length: float = 120e-6
    near_distance: float = 1.8e-6
    far_distance: float = 5.3e-6
    resonator_hz: float = 4.347e9
    sensitivity_hz_per_phi0: float = 26.0e9


QUOTED = {"C [pF]": 1.26, "L [nH]": 1.06, "I_zpf [nA]": 36.8, "M [pH]": 25.9,
          "Phi_zpf [uPhi0]": 461, "g0/2pi [MHz]": 12.0}


def chain(cfg, capacitance=None):
    idc = circuit.IdcGeometry(cfg.finger_count, cfg.finger_width, cfg.finger_gap, cfg.finger_length,
                              cfg.relative_permittivity)
    squid = circuit.SquidGeometry(cfg.loop_length, cfg.near_distance, cfg.far_distance)
    wb = TWO_PI * cfg.resonator_hz
    c = circuit.idc_capacitance(idc) if capacitance is None else capacitance
    l = circuit.inductance_from_frequency(wb, c)
    i = circuit.zero_point_current(wb, l)
    m = circuit.mutual_inductance(squid)
    phi = circuit.zero_point_flux(m, i)
    g0 = circuit.single_photon_coupling(TWO_PI * cfg.sensitivity_hz_per_phi0, phi)
    return {"C [pF]": c * 1e12, "L [nH]": l * 1e9, "I_zpf [nA]": i * 1e9, "M [pH]": m * 1e12,
            "Phi_zpf [uPhi0]": phi * 1e6, "g0/2pi [MHz]": g0 / TWO_PI / 1e6}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fingers", type=int, default=EstimateConfig.finger_count)
    cfg = EstimateConfig(finger_count=parser.parse_args().fingers)
    idc = circuit.IdcGeometry(cfg.finger_count, cfg.finger_width, cfg.finger_gap, cfg.finger_length,
                              cfg.relative_permittivity)
    c1, c2 = circuit.idc_partial_capacitances(idc)
    n = cfg.finger_count
    variants = {
        "(N-3) C1/2 + 2 C1 C2/(C1+C2)": (n - 3) * c1 / 2 + 2 * c1 * c2 / (c1 + c2),
        "(N-3) C1/2": (n - 3) * c1 / 2,
        "N C1/2 + 2 C1 C2/(C1+C2)": n * c1 / 2 + 2 * c1 * c2 / (c1 + c2),
    }
    print(f"C1 = {c1 * 1e12:.5f} pF, C2 = {c2 * 1e12:.5f} pF")
    for name, value in variants.items():
        print(f"{name:32s} {value * 1e12:.4f} pF")
    print()
    computed = chain(cfg)
    fed = chain(cfg, capacitance=1.26e-12)
    print(f"{'quantity':18s} {'geometry':>10s} {'from 1.26pF':>12s} {'quoted':>8s} {'dev':>8s}")
    for key, quoted in QUOTED.items():
        print(f"{key:18s} {computed[key]:10.4g} {fed[key]:12.4g} {quoted:8.4g} "
              f"{computed[key] / quoted - 1:+8.2%}")
    arc = circuit.FluxArc.at_frequency(TWO_PI * 10.2e9, -TWO_PI * 388e6, TWO_PI * 6.10e9)
    print(f"\nsymmetric arc: Phi = {arc.operating_flux:.5f}, "
          f"d(omega)/dPhi / 2pi = {arc.operating_sensitivity / TWO_PI / 1e9:.2f} GHz/Phi0")


if __name__ == "__main__":
    main()
