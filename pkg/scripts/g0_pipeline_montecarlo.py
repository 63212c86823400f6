"""Monte-Carlo study of the synthetic g0 extraction over noise levels and seeds."""

from dataclasses import dataclass, field
import argparse
from pathlib import Path

import numpy as np

from ppcqed import io
from ppcqed import pipeline as pl
from ppcqed.cli import pipeline_setup
from ppcqed.config import PipelineParameters
from ppcqed.fitting import FitError


@dataclass
class StudyConfig:
    seeds: int = 25
    spectrum_noise: list = field(default_factory=lambda: [0.0, 0.005, 0.01, 0.02])
    stark_noise: float = 0.03


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=StudyConfig.seeds)
    parser.add_argument("--out", default="runs/g0_montecarlo")
    args = parser.parse_args()
    cfg = StudyConfig(seeds=args.seeds)
    rows = []
    for noise in cfg.spectrum_noise:
        stark = cfg.stark_noise if noise else 0.0
        setup = pipeline_setup(PipelineParameters(spectrum_noise=noise, stark_noise=stark))
        errs, pulls, failures = [], [], 0
        for seed in range(cfg.seeds if noise else 1):
            try:
                res = pl.run_pipeline(setup, seed=seed)
            except FitError:
                failures += 1
                continue
            errs.append(res.g0 / setup.params.g0 - 1)
            pulls.append((res.g0 - setup.params.g0) / res.g0_err if res.g0_err > 0 else 0.0)
        errs = np.array(errs)
        rows.append((noise, stark, len(errs), failures, float(np.mean(errs)), float(np.std(errs)),
                     float(np.max(np.abs(errs))), float(np.std(pulls))))
        print(f"noise {noise:.3f} stark {stark:.2f}: mean {np.mean(errs):+.3%} std {np.std(errs):.3%} "
              f"max {np.max(np.abs(errs)):.3%} pull std {np.std(pulls):.2f} failures {failures}")
    io.write_table(Path(args.out) / "montecarlo.csv",
                   ("spectrum_noise", "stark_noise", "runs", "failures", "mean_error", "std_error",
                    "max_abs_error", "pull_std"), rows)


if __name__ == "__main__":
    main()
