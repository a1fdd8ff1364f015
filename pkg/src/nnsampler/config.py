"""Flat key=value run configuration with dotted section prefixes.

A config file is plain text: one ``section.key = value`` per line, ``#``
or ``;`` starts a comment, blank lines ignored.  Command-line overrides
are applied on top of the file, defaults fill the rest; unknown keys are
rejected.  The fully resolved mapping is logged before every run.
"""

import sys
from dataclasses import dataclass

from .loss import COMPARE_MODES, JSD_MODES, KdeConfig
from .trainer import TrainConfig


class ConfigError(ValueError):
    """Bad key, bad value, or unparseable config line."""


def _parse_bandwidth(text):
    if text == "silverman":
        return None
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(
            f"kde.bandwidth must be 'silverman' or a positive number, got {text!r}"
        ) from None
    if not value > 0:
        raise ConfigError(f"kde.bandwidth must be positive, got {value}")
    return value


def _choice(options):
    def convert(text):
        if text not in options:
            raise ConfigError(f"expected one of {options}, got {text!r}")
        return text

    return convert


# key -> (converter, default)
SCHEMA = {
    "seed": (int, 0),
    "model.input_dim": (int, 1),
    "model.layers": (int, 5),
    "model.units": (int, 64),
    "target.name": (str, "laplace"),
    "target.b": (float, 1.0),
    "grid.lo": (float, -10.0),
    "grid.hi": (float, 10.0),
    "grid.points": (int, 401),
    "kde.bandwidth": (_parse_bandwidth, None),
    "kde.eps": (float, 1e-12),
    "jsd.mode": (_choice(JSD_MODES), "symmetric"),
    "loss.compare": (_choice(COMPARE_MODES), "jsd"),
    "well.slope": (float, 1.0),
    "adam.lr": (float, 1e-3),
    "adam.beta1": (float, 0.9),
    "adam.beta2": (float, 0.999),
    "adam.eps": (float, 1e-8),
    "train.batch_rows": (int, 32),
    "train.total_inputs": (int, 100_000),
    "train.log_every": (int, 1),
    "eval.bins": (int, 100),
}


def parse_config_text(text, source="<config>"):
    """key -> raw string values from a config document."""
    values = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{line_no}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"{source}:{line_no}: expected key = value, got {raw!r}")
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{line_no}: unknown key {key!r}")
        values[key] = value
    return values


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved, typed configuration."""

    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def kde_config(self):
        return KdeConfig(
            bandwidth=self.values["kde.bandwidth"],
            eps=self.values["kde.eps"],
            jsd_mode=self.values["jsd.mode"],
            compare=self.values["loss.compare"],
        )

    def target_params(self):
        if self.values["target.name"] == "y2exp":
            return {"b": self.values["target.b"]}
        return {}

    def train_config(self, checkpoint_path=None):
        return TrainConfig(
            input_dim=self.values["model.input_dim"],
            layer_count=self.values["model.layers"],
            units=self.values["model.units"],
            target_name=self.values["target.name"],
            target_params=self.target_params(),
            batch_rows=self.values["train.batch_rows"],
            total_inputs=self.values["train.total_inputs"],
            seed=self.values["seed"],
            grid_lo=self.values["grid.lo"],
            grid_hi=self.values["grid.hi"],
            grid_points=self.values["grid.points"],
            kde=self.kde_config(),
            well_slope=self.values["well.slope"],
            adam_lr=self.values["adam.lr"],
            adam_beta1=self.values["adam.beta1"],
            adam_beta2=self.values["adam.beta2"],
            adam_eps=self.values["adam.eps"],
            checkpoint_path=checkpoint_path,
            log_every=self.values["train.log_every"],
        )


def resolve_config(file_values=None, overrides=None, log=None):
    """Apply overrides on top of file values, fill defaults, convert types.

    `file_values` and `overrides` map keys to raw strings.  Defaulted keys
    and overridden keys are reported through `log` (one line each).
    """
    if log is None:
        log = lambda msg: print(msg, file=sys.stderr)
    file_values = dict(file_values or {})
    overrides = dict(overrides or {})
    for key in overrides:
        if key not in SCHEMA:
            raise ConfigError(f"unknown override key {key!r}")
        if key in file_values:
            log(f"config: override {key} = {overrides[key]} (file value beaten)")
    merged = {**file_values, **overrides}
    resolved = {}
    defaulted = []
    for key, (convert, default) in SCHEMA.items():
        if key in merged:
            raw = merged[key]
            try:
                resolved[key] = convert(raw)
            except ConfigError:
                raise
            except ValueError:
                raise ConfigError(f"bad value for {key}: {raw!r}") from None
        else:
            resolved[key] = default
            defaulted.append(key)
    if defaulted:
        log(f"config: defaults applied for {', '.join(sorted(defaulted))}")
    for key in sorted(resolved):
        log(f"config: {key} = {_show(resolved[key])}")
    return RunConfig(resolved)


def _show(value):
    if value is None:
        return "silverman"
    return str(value)


def load_config(path, overrides=None, log=None):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return resolve_config(parse_config_text(text, source=str(path)), overrides, log)
