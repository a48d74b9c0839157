"""Experiment configuration: a flat key = value text format with defaults.

Configurations are deliberately plain: one ``key = value`` per line, ``#``
comments, no nesting.  Values stay strings until an experiment asks for them
typed, so serialize(parse(serialize(c))) == serialize(c) holds exactly.
Command-line ``--set key=value`` pairs override file values.  A run is fully
determined by its canonical configuration, including the seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError

DEFAULT_SEED = 12345

#: key -> (required-by, defaults) are declared per experiment below.
EXPERIMENTS: dict[str, dict] = {
    "micro-path": {
        "required": ["n", "c1", "c2", "c3", "t_end"],
        "defaults": {"init": "er:0.3", "seed": str(DEFAULT_SEED)},
        "optional": ["record_dt", "record_every", "out", "threads"],
    },
    "micro-spy": {
        "required": ["n", "c1", "c2", "c3", "snapshot_times"],
        "defaults": {"init": "er:0.3", "seed": str(DEFAULT_SEED)},
        "optional": ["out", "threads"],
    },
    "micro-pij": {
        "required": ["n", "c1", "c2", "c3", "t_end", "n_paths"],
        "defaults": {"init": "half", "seed": str(DEFAULT_SEED)},
        "optional": ["record_dt", "out", "threads"],
    },
    "macro-path": {
        "required": ["n", "c1", "c2", "c3", "t_end"],
        "defaults": {"init": "density:0.3", "seed": str(DEFAULT_SEED)},
        "optional": ["record_dt", "record_every", "out", "threads"],
    },
    "macro-steady": {
        "required": ["n", "c1", "c2", "c3"],
        "defaults": {},
        "optional": ["out", "threads", "seed"],
    },
    "macro-exit": {
        "required": ["c1", "c2", "c3", "n_values"],
        "defaults": {},
        "optional": ["out", "threads", "seed"],
    },
    "sde-path": {
        "required": ["n", "c1", "c2", "c3", "t_end"],
        "defaults": {"y0": "0.2", "dt": "0.01", "seed": str(DEFAULT_SEED), "record_every": "1"},
        "optional": ["out", "threads"],
    },
    "sde-mfpt": {
        "required": ["c1", "c2", "c3"],
        "defaults": {"grid_points": "4097"},
        "optional": ["n", "n_values", "out", "threads", "seed"],
    },
    "ode-trace": {
        "required": ["n", "c1", "c2", "c3", "t_end"],
        "defaults": {"y0": "0.2", "step": "0.01"},
        "optional": ["out", "threads", "seed"],
    },
    "mean-field": {
        "required": ["n", "c1", "c2", "c3", "n_steps"],
        "defaults": {"y0": "0.2"},
        "optional": ["out", "threads", "seed"],
    },
    "compare-models": {
        "required": ["n", "c1", "c2", "c3", "t_end"],
        "defaults": {"init": "er:0.2", "seed": str(DEFAULT_SEED), "n_paths": "100",
                     "dt": "0.01", "step": "0.05"},
        "optional": ["record_dt", "out", "threads"],
    },
}


@dataclass
class ExperimentConfig:
    """An experiment tag plus its flat key -> value table (strings)."""

    experiment: str
    values: dict[str, str] = field(default_factory=dict)

    # -- text format --------------------------------------------------------

    @classmethod
    def parse(cls, experiment: str, text: str) -> "ExperimentConfig":
        values: dict[str, str] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError([f"line {lineno}: expected 'key = value', got {raw!r}"])
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
        declared = values.pop("experiment", None)
        if declared is not None and declared != experiment:
            raise ConfigError(
                [f"config declares experiment {declared!r} but {experiment!r} was requested"]
            )
        return cls(experiment=experiment, values=values)

    def serialize(self) -> str:
        lines = [f"experiment = {self.experiment}"]
        lines += [f"{k} = {self.values[k]}" for k in sorted(self.values)]
        return "\n".join(lines) + "\n"

    def with_overrides(self, pairs: dict[str, str]) -> "ExperimentConfig":
        merged = dict(self.values)
        merged.update({k: str(v) for k, v in pairs.items()})
        return ExperimentConfig(self.experiment, merged)

    # -- typed access (only call for keys that validated) -------------------

    def get_int(self, key: str) -> int:
        return int(self.values[key])

    def get_float(self, key: str) -> float:
        return float(self.values[key])

    def get_str(self, key: str) -> str:
        return self.values[key]

    def get_float_list(self, key: str) -> list[float]:
        return [float(tok) for tok in self.values[key].split(",") if tok.strip()]

    def get_int_list(self, key: str) -> list[int]:
        return [int(tok) for tok in self.values[key].split(",") if tok.strip()]

    def has(self, key: str) -> bool:
        return key in self.values


def _check_init(value: str, errors: list[str]) -> None:
    kind, _, arg = value.partition(":")
    if kind == "half":
        if arg:
            errors.append("init 'half' takes no argument")
        return
    if kind == "er":
        try:
            p = float(arg)
        except ValueError:
            errors.append(f"init er:{arg!r}: probability is not a number")
            return
        if not 0.0 <= p <= 1.0:
            errors.append(f"init er:{arg}: probability must lie in [0, 1]")
        return
    if kind == "density":
        try:
            d = float(arg)
        except ValueError:
            errors.append(f"init density:{arg!r}: density is not a number")
            return
        if not 0.0 <= d <= 1.0:
            errors.append(f"init density:{arg}: density must lie in [0, 1]")
        return
    if kind == "edges":
        try:
            m = int(arg)
        except ValueError:
            errors.append(f"init edges:{arg!r}: count is not an integer")
            return
        if m < 0:
            errors.append(f"init edges:{arg}: count must be nonnegative")
        return
    errors.append(f"unknown init {value!r} (use er:p, edges:m, density:x, or half)")


def _check_number(cfg: ExperimentConfig, key: str, kind, low=None, high=None,
                  strict_low=False) -> list[str]:
    try:
        value = kind(cfg.values[key])
    except ValueError:
        return [f"{key} = {cfg.values[key]!r} is not a valid {kind.__name__}"]
    if low is not None and (value <= low if strict_low else value < low):
        op = ">" if strict_low else ">="
        return [f"{key} must be {op} {low}, got {value}"]
    if high is not None and value > high:
        return [f"{key} must be <= {high}, got {value}"]
    return []


def validate(config: ExperimentConfig) -> list[str]:
    """Every violation in the configuration, not just the first."""
    errors: list[str] = []
    if config.experiment not in EXPERIMENTS:
        return [f"unknown experiment {config.experiment!r}"]
    schema = EXPERIMENTS[config.experiment]
    known = set(schema["required"]) | set(schema["defaults"]) | set(schema["optional"])
    known |= {"out", "threads"}
    for key in config.values:
        if key not in known:
            errors.append(f"unknown key {key!r} for experiment {config.experiment}")
    for key in schema["required"]:
        if key not in config.values:
            errors.append(f"missing required key {key!r}")

    c = config.values
    if "n" in c:
        errors += _check_number(config, "n", int, low=3)
    if "c1" in c:
        errors += _check_number(config, "c1", float, low=0.0, strict_low=True)
    if "c2" in c:
        errors += _check_number(config, "c2", float, low=0.0, strict_low=True)
    if "c3" in c:
        errors += _check_number(config, "c3", float, low=0.0)
    if "t_end" in c:
        errors += _check_number(config, "t_end", float, low=0.0, strict_low=True)
    if "seed" in c:
        errors += _check_number(config, "seed", int, low=0)
    if "threads" in c:
        errors += _check_number(config, "threads", int, low=1)
    if "n_paths" in c:
        errors += _check_number(config, "n_paths", int, low=1)
    if "dt" in c:
        errors += _check_number(config, "dt", float, low=0.0, strict_low=True)
    if "step" in c:
        errors += _check_number(config, "step", float, low=0.0, strict_low=True)
    if "y0" in c:
        errors += _check_number(config, "y0", float, low=0.0, high=1.0)
    if "grid_points" in c:
        errors += _check_number(config, "grid_points", int, low=3)
    if "n_steps" in c:
        errors += _check_number(config, "n_steps", int, low=1)
    if "record_dt" in c:
        errors += _check_number(config, "record_dt", float, low=0.0, strict_low=True)
    if "record_every" in c:
        errors += _check_number(config, "record_every", int, low=1)
    if "record_dt" in c and "record_every" in c:
        errors.append("give at most one of record_dt and record_every")
    if "init" in c:
        _check_init(c["init"], errors)
    if "snapshot_times" in c:
        try:
            times = config.get_float_list("snapshot_times")
            if not times:
                errors.append("snapshot_times must list at least one time")
            elif any(t < 0 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
                errors.append("snapshot_times must be nonnegative and strictly increasing")
        except ValueError:
            errors.append(f"snapshot_times = {c['snapshot_times']!r} is not a comma list of numbers")
    if "n_values" in c:
        try:
            ns = config.get_int_list("n_values")
            if len(ns) < 2:
                errors.append("n_values must list at least two node counts")
            elif any(v < 3 for v in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
                errors.append("n_values must be >= 3 and strictly increasing")
        except ValueError:
            errors.append(f"n_values = {c['n_values']!r} is not a comma list of integers")

    if config.experiment == "sde-mfpt":
        if ("n" in c) == ("n_values" in c):
            errors.append("sde-mfpt needs exactly one of n (table) or n_values (curve)")
    if config.experiment == "compare-models" and not errors and "record_dt" in c:
        ratio = float(c["record_dt"]) / float(c.get("dt", "0.01"))
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            errors.append("record_dt must be a whole multiple of dt for compare-models")
    return errors


def canonicalize(config: ExperimentConfig) -> ExperimentConfig:
    """Validated copy with defaults filled in; raises ConfigError otherwise."""
    errors = validate(config)
    if errors:
        raise ConfigError(errors)
    schema = EXPERIMENTS[config.experiment]
    values = dict(schema["defaults"])
    values.setdefault("threads", "1")
    if config.experiment == "compare-models" and "record_dt" not in config.values:
        # Default sampling grid: ~400 points, snapped to a whole number of EM steps.
        dt = float(config.values.get("dt", schema["defaults"]["dt"]))
        t_end = float(config.values["t_end"])
        values["record_dt"] = repr(dt * max(1, round(t_end / (400 * dt))))
    values.update(config.values)
    return ExperimentConfig(config.experiment, values)
