"""Chevron maps for both preparations and the sqrt(n) ladder.

Writes chevron CSVs into --out and prints the pi-times and fitted Rabi rates.
"""

from dataclasses import dataclass
import argparse
from pathlib import Path
import time

import numpy as np

from ppcqed import dynamics as dyn
from ppcqed import io
from ppcqed import quantum as q
from ppcqed.constants import TWO_PI


@dataclass
class ChevronConfig:
    coupling_hz: float = 2.76e6
    detuning_span_hz: float = 10e6
    detuning_points: int = 41
    time_max_s: float = 500e-9
    time_points: int = 101
    resonator_dim: int = 5
    open_system: bool = True


def first_minimum(t, y):
    i = next(i for i in range(1, len(y) - 1) if y[i] <= y[i - 1] and y[i] < y[i + 1])
    y0, y1, y2 = y[i - 1:i + 2]
    return t[i] + 0.5 * (y0 - y2) / (y0 - 2 * y1 + y2) * (t[1] - t[0])


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/chevron_script")
    parser.add_argument("--closed", action="store_true", help="drop resonator loss and qubit T1")
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()
    cfg = ChevronConfig(open_system=not args.closed)
    out = Path(args.out)

    params = q.SystemParams.reference_device()
    if not cfg.open_system:
        params = q.SystemParams(omega_q=params.omega_q, alpha=params.alpha, omega_b=params.omega_b)
    g = TWO_PI * cfg.coupling_hz
    det = TWO_PI * np.linspace(-cfg.detuning_span_hz, cfg.detuning_span_hz, cfg.detuning_points)
    taus = np.linspace(0, cfg.time_max_s, cfg.time_points)
    space = q.HilbertSpace(2, cfg.resonator_dim)
    centre = cfg.detuning_points // 2
    for prep in ("excited_qubit", "fock1_resonator"):
        t0 = time.perf_counter()
        res = dyn.chevron_experiment(params, g, det, taus, prep, space=space, threads=args.threads)
        io.write_table(out / f"chevron_{prep}.csv", io.CHEVRON_COLUMNS, io.chevron_rows(res))
        fit = dyn.rabi_frequency_fit(taus, res.p_excited[centre])
        print(f"{prep:16s} first minimum {first_minimum(taus, res.p_excited[centre]) * 1e9:6.2f} ns, "
              f"fitted g/2pi {fit.g / TWO_PI / 1e6:.4f} MHz, decay {fit.decay * 1e-6:.3f} /us, "
              f"{time.perf_counter() - t0:.2f} s")

    t = np.linspace(0, 400e-9, 401)
    sched = dyn.PulseSchedule.square(t[-1], g)
    rates = []
    ladder = q.HilbertSpace(2, 6)
    # damping would bias the ladder fit, so it runs on the closed system
    closed = q.SystemParams(omega_q=params.omega_q, alpha=params.alpha, omega_b=params.omega_b)
    for n in (1, 2, 3):
        traj = dyn.evolve(dyn.DensityMatrix.pure(ladder, 1, n - 1), sched, closed, 0.0, 0.1e-9, t)
        rates.append(dyn.rabi_frequency_fit(t, traj.expect(q.excited_population_operator(ladder))).g)
    print("ladder ratios", " : ".join(f"{r / rates[0]:.4f}" for r in rates))


if __name__ == "__main__":
    main()
