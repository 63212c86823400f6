"""Strict TOML experiment configuration.

A config document looks like::

    experiment = "chevron"      # optional, must match the CLI subcommand
    seed = 1                    # required when the run is stochastic
    output = "runs/chevron"     # optional, overridden by --out

    [parameters]                # kind-specific, frequencies in Hz
    coupling_hz = 2.76e6

    [truncation]                # optional
    resonator_dim = 5

Unknown keys and wrongly typed values raise :class:`ConfigError` naming the
offending key. Conversion to rad/s happens in :mod:`ppcqed.cli`, nowhere else.
"""

from dataclasses import MISSING, asdict, dataclass, field, fields
import hashlib
import json
import math
import sys
import types
import typing

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    pass


EXPERIMENTS = ("estimate", "chevron", "spectrum", "calibrate", "fit-notch", "fit-crossing",
               "extract-g0", "pipeline")


@dataclass
class EstimateParameters:
    finger_count: int = 44
    finger_width_m: float = 10e-6
    finger_gap_m: float = 6e-6
    finger_length_m: float = 400e-6
    relative_permittivity: float = 11.8
    squid_loop_length_m: float = 120e-6
    squid_near_distance_m: float = 1.8e-6
    squid_far_distance_m: float = 5.3e-6
    resonator_frequency_hz: float = 4.347e9
    flux_sensitivity_hz_per_phi0: float = 26.0e9
    sweet_spot_frequency_hz: float = 10.2e9
    qubit_frequency_hz: float = 6.10e9
    anharmonicity_hz: float = -388e6


@dataclass
class ChevronParameters:
    coupling_hz: float = 2.76e6
    detuning_min_hz: float = -10e6
    detuning_max_hz: float = 10e6
    detuning_points: int = 41
    time_max_s: float = 500e-9
    time_points: int = 101
    preparation: str = "excited_qubit"
    dt_max_s: float = 0.1e-9
    kappa_b_hz: float = 116.6e3
    t1_s: float = 664e-9  # inf disables qubit relaxation
    pi_pulse_s: float = 0.0  # 0 means ideal instantaneous pi-pulses
    counter_rotating: bool = False
    qubit_frequency_hz: float = 6.10e9
    resonator_frequency_hz: float = 4.347e9
    anharmonicity_hz: float = -388e6


@dataclass
class SpectrumParameters:
    probe_min_hz: float = 4.347e9 - 10e6
    probe_max_hz: float = 4.347e9 + 10e6
    probe_points: int = 2001
    resonator_frequency_hz: float = 4.347e9
    kappa_int_hz: float = 28.0e3
    kappa_ext_hz: float = 88.6e3
    theta_rad: float = 0.0
    coupling_hz: float = 0.0
    drive_frequency_hz: typing.Optional[float] = None  # default: red sideband
    qubit_frequency_hz: float = 6.10e9
    qubit_linewidth_hz: float = 677e3
    noise: float = 0.0


@dataclass
class CalibrateParameters:
    qubit_frequency_hz: float = 6.10e9
    anharmonicity_hz: float = -388e6
    resonator_frequency_hz: float = 4.347e9
    drive_frequency_hz: typing.Optional[float] = None  # default: red sideband
    stark_shifts_hz: list = field(default_factory=list)
    drive_amplitudes_hz: list = field(default_factory=list)
    g0_hz: float = 11.9e6
    resonator_linewidth_hz: float = 116.6e3
    g_ab_hz: float = 2.5e6


@dataclass
class FitNotchParameters:
    data: str = ""
    resonator_frequency_hz: float = 0.0
    kappa_int_hz: float = 0.0
    kappa_ext_hz: float = 0.0
    theta_rad: float = 0.0
    remove_background: bool = False


@dataclass
class FitCrossingParameters:
    data: str = ""
    resonator_frequency_hz: float = 0.0
    coupling_hz: float = 0.0
    drive_resonance_hz: float = 0.0


@dataclass
class ExtractG0Parameters:
    data: str = ""


@dataclass
class PipelineParameters:
    g0_hz: float = 11.9e6
    drive_amplitudes_hz: list = field(default_factory=list)
    powers_dbm: list = field(default_factory=lambda: [3.3, 8.3, 12.3, 14.4])
    reference_dbm: float = 14.4
    reference_coupling_hz: float = 2.81e6
    qubit_frequency_hz: float = 6.10e9
    resonator_frequency_hz: float = 4.347e9
    anharmonicity_hz: float = -388e6
    kappa_int_hz: float = 28.0e3
    kappa_ext_hz: float = 88.6e3
    qubit_linewidth_hz: float = 677e3
    spectrum_noise: float = 0.0
    stark_noise: float = 0.0
    drive_points: int = 41
    probe_points: int = 1201


@dataclass
class Truncation:
    qubit_dim: int = 2
    resonator_dim: int = 5


PARAMETER_TYPES = {
    "estimate": EstimateParameters,
    "chevron": ChevronParameters,
    "spectrum": SpectrumParameters,
    "calibrate": CalibrateParameters,
    "fit-notch": FitNotchParameters,
    "fit-crossing": FitCrossingParameters,
    "extract-g0": ExtractG0Parameters,
    "pipeline": PipelineParameters,
}

REQUIRED = {
    "fit-notch": ("data", "resonator_frequency_hz", "kappa_int_hz", "kappa_ext_hz"),
    "fit-crossing": ("data", "resonator_frequency_hz", "coupling_hz", "drive_resonance_hz"),
    "extract-g0": ("data",),
}


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: object
    output: typing.Optional[str] = None
    seed: typing.Optional[int] = None
    threads: typing.Optional[int] = None
    truncation: Truncation = field(default_factory=Truncation)

    @property
    def stochastic(self):
        p = self.parameters
        if self.experiment == "pipeline":
            return p.spectrum_noise > 0 or p.stark_noise > 0
        if self.experiment == "spectrum":
            return p.noise > 0
        return False

    def to_dict(self):
        return {"experiment": self.experiment, "output": self.output, "seed": self.seed,
                "threads": self.threads, "parameters": asdict(self.parameters),
                "truncation": asdict(self.truncation)}

    def hash(self):
        """SHA-256 of the canonical JSON form (threads excluded: it does not change results)."""
        d = self.to_dict()
        d.pop("threads")
        d.pop("output")
        text = json.dumps(d, sort_keys=True, separators=(",", ":"), default=_canonical)
        return hashlib.sha256(text.encode()).hexdigest()


def _canonical(o):
    raise TypeError(f"cannot hash {type(o).__name__}")


def _check_value(value, hint, key):
    origin = typing.get_origin(hint)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(hint) if a is not type(None)]
        if value is None:
            return None
        return _check_value(value, args[0], key)
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"key '{key}' must be a boolean, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"key '{key}' must be an integer, got {value!r}")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"key '{key}' must be a number, got {value!r}")
        if math.isnan(value):
            raise ConfigError(f"key '{key}' must not be NaN")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"key '{key}' must be a string, got {value!r}")
        return value
    if hint is list or origin is list:
        if not isinstance(value, list):
            raise ConfigError(f"key '{key}' must be a list of numbers, got {value!r}")
        return [_check_value(v, float, f"{key}[{i}]") for i, v in enumerate(value)]
    raise ConfigError(f"key '{key}' has unsupported type")


def build(cls, mapping, prefix):
    """Instantiate dataclass ``cls`` from ``mapping``, rejecting unknown keys."""
    if not isinstance(mapping, dict):
        raise ConfigError(f"key '{prefix}' must be a table")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in fields(cls)}
    for key in mapping:
        if key not in names:
            raise ConfigError(f"unknown key '{prefix}.{key}'")
    kwargs = {}
    for f in fields(cls):
        if f.name in mapping:
            kwargs[f.name] = _check_value(mapping[f.name], hints[f.name], f"{prefix}.{f.name}")
        elif f.default is MISSING and f.default_factory is MISSING:
            raise ConfigError(f"missing key '{prefix}.{f.name}'")
    return cls(**kwargs)


TOP_LEVEL = {"experiment", "seed", "output", "threads", "parameters", "truncation"}


def parse_config(doc, experiment):
    """Validate a parsed TOML mapping for the given experiment kind."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment '{experiment}'")
    for key in doc:
        if key not in TOP_LEVEL:
            raise ConfigError(f"unknown key '{key}'")
    declared = doc.get("experiment", experiment)
    if declared != experiment:
        raise ConfigError(f"key 'experiment' is '{declared}' but the command is '{experiment}'")
    seed = _check_value(doc.get("seed"), typing.Optional[int], "seed")
    threads = _check_value(doc.get("threads"), typing.Optional[int], "threads")
    output = _check_value(doc.get("output"), typing.Optional[str], "output")
    params = build(PARAMETER_TYPES[experiment], doc.get("parameters", {}), "parameters")
    for name in REQUIRED.get(experiment, ()):
        if name not in doc.get("parameters", {}):
            raise ConfigError(f"missing key 'parameters.{name}'")
    trunc = build(Truncation, doc.get("truncation", {}), "truncation")
    return ExperimentConfig(experiment, params, output, seed, threads, trunc)


def load_config(path, experiment):
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(doc, experiment)
