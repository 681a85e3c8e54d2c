"""Experiment configuration: INI files with dotted ``section.key`` overrides.

Defaults live in ``configs/<experiment>.cfg`` inside the package. Every value
can be overridden by name, e.g. ``grid.n1=300``; unknown names are rejected.
"""
import configparser
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError

EXPERIMENTS = ("klein_step", "linear_quantum", "table1_sweep", "sh_vs_dirac_series",
               "models_comparison", "beta_sweep")

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def default_config_path(name):
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    return resources.files("dirachop") / "configs" / f"{name}.cfg"


def read_flat(text):
    """Parse INI text into ``{"section.key": raw_string}`` preserving file order."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return {f"{sec}.{key}": val.strip() for sec in cp.sections() for key, val in cp[sec].items()}


def load_defaults(name):
    return read_flat(default_config_path(name).read_text())


@dataclass
class ExperimentConfig:
    name: str
    values: dict
    out_dir: Path = Path("out")
    seed: int = 0  # reserved; every method here is deterministic
    overridden: tuple = ()
    _bad: list = field(default_factory=list, repr=False)

    @classmethod
    def from_defaults(cls, name, overrides=None, out_dir=None, config_file=None):
        values = load_defaults(name)
        if config_file is not None:
            extra = read_flat(Path(config_file).read_text())
            unknown = sorted(set(extra) - set(values))
            if unknown:
                raise ConfigError(f"unknown keys in {config_file}: {', '.join(unknown)}")
            values.update(extra)
        overrides = dict(overrides or {})
        unknown = sorted(set(overrides) - set(values))
        if unknown:
            raise ConfigError(f"unknown keys for {name}: {', '.join(unknown)}")
        values.update({k: str(v) for k, v in overrides.items()})
        return cls(name, values, Path(out_dir) if out_dir else Path("out") / name, overridden=tuple(overrides))

    # typed access; conversion failures are collected so one error can list them all

    def _raw(self, key):
        try:
            return self.values[key]
        except KeyError:
            raise ConfigError(f"missing config key {key!r}") from None

    def _fail(self, key, kind):
        self._bad.append(f"{key}={self.values.get(key)!r} (expected {kind})")

    def float(self, key, default=None):
        try:
            return float(self._raw(key))
        except ValueError:
            self._fail(key, "a number")
            return default

    def int(self, key, default=None):
        try:
            return int(self._raw(key))
        except ValueError:
            self._fail(key, "an integer")
            return default

    def bool(self, key, default=None):
        v = self._raw(key).lower()
        if v in _TRUE:
            return True
        if v in _FALSE:
            return False
        self._fail(key, "a boolean")
        return default

    def str(self, key):
        return self._raw(key)

    def floats(self, key):
        raw = self._raw(key)
        if not raw:
            return []
        try:
            return [float(p) for p in raw.split(",")]
        except ValueError:
            self._fail(key, "a comma-separated list of numbers")
            return []

    def ints(self, key):
        raw = self._raw(key)
        try:
            return [int(p) for p in raw.split(",")] if raw else []
        except ValueError:
            self._fail(key, "a comma-separated list of integers")
            return []

    def require(self, cond, key, message):
        if not cond:
            self._bad.append(f"{key}: {message}")

    def check(self):
        """Raise a single ConfigError listing every invalid field seen so far."""
        if self._bad:
            bad, self._bad = self._bad, []
            raise ConfigError(f"invalid configuration for {self.name}: " + "; ".join(bad))
