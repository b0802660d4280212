"""Run configuration: ``key = value`` files merged with command-line values.

Keys are the long flag names with dashes or underscores, e.g.::

    # heating plus strong cooling
    gamma_heat_inv_ms = 23
    gamma-cool-inv-ms = 2
    nbar = 10
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from .model import PRESETS, S_PER_MS, TrapModel, rate_from_inverse_ms

__all__ = ["ConfigError", "RunConfig", "RATE_PAIRS", "parse_config_text", "load_config", "merge"]

MODES = ("master", "ssa", "both")
DEFAULT_HEAT_INV_MS = PRESETS["axial"]
DEFAULT_SNAPSHOTS_MS = (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 60.0)

#: Each rate may be given directly (1/s) or as an inverse rate (ms), not both.
RATE_PAIRS = {"heat": ("gamma_heat", "gamma_heat_inv_ms"), "cool": ("gamma_cool", "gamma_cool_inv_ms")}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    levels: int = 100
    gamma_heat: float | None = None
    gamma_heat_inv_ms: float | None = None
    gamma_cool: float | None = None
    gamma_cool_inv_ms: float | None = None
    nbar: float = 10.0
    n0: int = 45
    horizon_ms: float = 60.0
    samples: int = 121
    seed: int = 12345
    n_traj: int = 10000
    mode: str = "master"
    out: str | None = None
    snapshots: str | None = None
    snapshot_times_ms: tuple = DEFAULT_SNAPSHOTS_MS
    lifetimes: str | None = None

    def __post_init__(self):
        for direct, inverse in RATE_PAIRS.values():
            if getattr(self, direct) is not None and getattr(self, inverse) is not None:
                raise ConfigError(f"give either {direct} or {inverse}, not both")
        if not (self.horizon_ms > 0 and math.isfinite(self.horizon_ms)):
            raise ConfigError(f"horizon_ms must be positive, got {self.horizon_ms}")
        if self.samples < 2:
            raise ConfigError(f"samples must be >= 2, got {self.samples}")
        if self.n_traj < 1:
            raise ConfigError(f"n_traj must be >= 1, got {self.n_traj}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        try:
            self.model()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def horizon(self):
        """Horizon in seconds."""
        return self.horizon_ms * S_PER_MS

    def model(self) -> TrapModel:
        """Model with defaults applied: heating at the axial rate, no cooling."""
        if self.gamma_heat is not None:
            heat = self.gamma_heat
        else:
            inv = DEFAULT_HEAT_INV_MS if self.gamma_heat_inv_ms is None else self.gamma_heat_inv_ms
            heat = rate_from_inverse_ms(inv)
        if self.gamma_cool is not None:
            cool = self.gamma_cool
        else:
            cool = rate_from_inverse_ms(self.gamma_cool_inv_ms)
        return TrapModel(self.levels, heat, cool, self.nbar)

    def to_text(self):
        """Serialize every field; :func:`parse_config_text` reads it back."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if isinstance(value, tuple):
                value = ",".join(repr(float(v)) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


_FIELDS = {f.name: f for f in fields(RunConfig)}
_INTS = {"levels", "n0", "samples", "seed", "n_traj"}
_STRS = {"mode", "out", "snapshots", "lifetimes"}


def _coerce(key, raw):
    raw = raw.strip()
    try:
        if key in _INTS:
            return int(raw)
        if key in _STRS:
            return raw
        if key == "snapshot_times_ms":
            return tuple(float(v) for v in raw.replace(",", " ").split())
        return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_config_text(text, source="<config>"):
    """Parse ``key = value`` lines into a dict of typed values.

    ``#`` starts a comment.  A ``preset = axial|radial`` line expands to the
    corresponding inverse heating rate.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {line!r}")
        key, raw = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if key == "preset":
            values["gamma_heat_inv_ms"] = preset_inverse_ms(raw.strip())
            continue
        if key not in _FIELDS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw)
    return values


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, str(path))


def preset_inverse_ms(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def merge(file_values, flag_values, base=None):
    """Combine config-file values with flag values; flags win.

    Setting one form of a rate clears the other form, so a flag replaces
    whatever the file (or ``base``) said about that rate.
    """
    merged = {}
    for layer in (file_values, flag_values):
        for direct, inverse in RATE_PAIRS.values():
            if direct in layer and inverse not in layer:
                merged[inverse] = None
            elif inverse in layer and direct not in layer:
                merged[direct] = None
        merged.update(layer)
    try:
        return replace(base or RunConfig(), **merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
