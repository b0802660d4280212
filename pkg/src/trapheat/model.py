"""Trap model parameters, level distributions and master-equation generators.

The state of a trapped atom is a probability vector ``P(n)`` over the bound
levels ``n = 0 .. L-1`` of a truncated harmonic ladder.  Probability that
leaves the top of the ladder never returns, so distributions are
sub-normalized and the missing mass is the escaped fraction.

Two jump processes act on the ladder:

* parametric heating from spring-constant noise, ``n -> n +/- 2`` with rates
  ``(gamma_heat / 8) (n + 2)(n + 1)`` (up) and ``(gamma_heat / 8) n (n - 1)``
  (down);
* coupling to a thermal bath with mean excitation ``nbar``, ``n -> n +/- 1``
  with rates ``gamma_cool * nbar * (n + 1)`` (up) and
  ``gamma_cool * (nbar + 1) * n`` (down).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "OFFSETS",
    "S_PER_MS",
    "rate_from_inverse_ms",
    "NEG_TOLERANCE",
    "MASS_TOLERANCE",
    "PRESETS",
    "TrapModel",
    "LevelDistribution",
    "RateGenerator",
    "build_heating_generator",
    "build_cooling_generator",
    "build_generator",
    "combine_generators",
    "initial_distribution",
    "point_distribution",
]

#: Row offsets stored in :attr:`RateGenerator.bands`, in band order.
OFFSETS = (-2, -1, 0, 1, 2)

#: Seconds per millisecond; the only ms <-> s conversion factor in the package.
S_PER_MS = 1e-3

NEG_TOLERANCE = 1e-12
MASS_TOLERANCE = 1e-9

#: Measured inverse heating rates of the two trap axes, in milliseconds.
PRESETS = {"axial": 23.0, "radial": 830.0}


def _check_rate(name, value):
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a finite non-negative number, got {value!r}")


@dataclass(frozen=True)
class TrapModel:
    """Parameters of the truncated trap.

    Rates are in 1/s.  ``gamma_cool = 0`` disables the bath.
    """

    levels: int = 100
    gamma_heat: float = 0.0
    gamma_cool: float = 0.0
    nbar: float = 0.0

    def __post_init__(self):
        if isinstance(self.levels, bool) or int(self.levels) != self.levels:
            raise ValueError(f"levels must be an integer, got {self.levels!r}")
        if self.levels < 3:
            raise ValueError(f"levels must be >= 3, got {self.levels}")
        object.__setattr__(self, "levels", int(self.levels))
        for name in ("gamma_heat", "gamma_cool", "nbar"):
            value = float(getattr(self, name))
            _check_rate(name, value)
            object.__setattr__(self, name, value)

    @classmethod
    def from_inverse_ms(cls, levels=100, heat_ms=None, cool_ms=None, nbar=0.0):
        """Build a model from time constants ``1/gamma`` given in ms.

        ``None`` or ``inf`` switches the corresponding process off.
        """
        return cls(
            levels=levels,
            gamma_heat=rate_from_inverse_ms(heat_ms),
            gamma_cool=rate_from_inverse_ms(cool_ms),
            nbar=nbar,
        )

    @classmethod
    def preset(cls, name, levels=100, **kwargs):
        """Heating-only model for one of the measured trap axes."""
        try:
            heat_ms = PRESETS[name]
        except KeyError:
            raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
        return cls.from_inverse_ms(levels=levels, heat_ms=heat_ms, **kwargs)


def rate_from_inverse_ms(inv_ms):
    """Rate in 1/s from a time constant in ms; ``None`` or ``inf`` gives 0."""
    if inv_ms is None or inv_ms == math.inf:
        return 0.0
    if not inv_ms > 0:
        raise ValueError(f"inverse rate must be positive, got {inv_ms!r} ms")
    return 1.0 / (inv_ms * S_PER_MS)


@dataclass(frozen=True)
class LevelDistribution:
    """Snapshot ``P(n)`` of the level populations at ``time`` (seconds)."""

    probs: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("probs must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(probs)):
            raise ValueError("probs contains non-finite entries")
        if probs.min() < -NEG_TOLERANCE:
            raise ValueError(f"negative probability {probs.min():.3e} below tolerance")
        if probs.sum() > 1 + MASS_TOLERANCE:
            raise ValueError(f"total probability {probs.sum():.15g} exceeds 1")
        if not self.time >= 0:
            raise ValueError(f"time must be non-negative, got {self.time!r}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "time", float(self.time))

    @property
    def size(self):
        return self.probs.size

    def clamped(self):
        """Probabilities with tolerated negative round-off set to zero."""
        return np.clip(self.probs, 0.0, None)


@dataclass(frozen=True)
class RateGenerator:
    """Banded generator ``A`` of ``dP/dt = A P``.

    ``bands[k, j]`` is the entry ``A[j + OFFSETS[k], j]``, i.e. the rate from
    level ``j`` into level ``j + OFFSETS[k]`` (the diagonal band holds the
    negative total exit rate).  Entries whose destination falls outside the
    ladder are kept at zero; that flux is lost from the ladder.

    Invariants are not enforced on construction so that damaged generators
    can be inspected, see :meth:`violations`.
    """

    bands: np.ndarray = field(repr=False)

    def __post_init__(self):
        bands = np.array(self.bands, dtype=float)
        if bands.ndim != 2 or bands.shape[0] != len(OFFSETS):
            raise ValueError(f"bands must have shape ({len(OFFSETS)}, L), got {bands.shape}")
        size = bands.shape[1]
        for k, off in enumerate(OFFSETS):
            rows = np.arange(size) + off
            if np.any(bands[k, (rows < 0) | (rows >= size)] != 0):
                raise ValueError(f"band {off:+d} has entries outside the ladder")
        bands.setflags(write=False)
        object.__setattr__(self, "bands", bands)

    @classmethod
    def zeros(cls, size):
        return cls(np.zeros((len(OFFSETS), size)))

    @property
    def size(self):
        return self.bands.shape[1]

    def band(self, offset):
        return self.bands[OFFSETS.index(offset)]

    @property
    def diagonal(self):
        return self.band(0)

    def column_sums(self):
        """Net rate of change of total probability contributed by each level.

        Zero for conservative columns, negative where flux leaves the ladder.
        """
        return self.bands.sum(axis=0)

    def matvec(self, p):
        p = np.asarray(p, dtype=float)
        out = np.zeros_like(p)
        size = self.size
        for k, off in enumerate(OFFSETS):
            if off >= 0:
                out[off:] += self.bands[k, : size - off] * p[: size - off]
            else:
                out[:off] += self.bands[k, -off:] * p[-off:]
        return out

    def to_dense(self):
        size = self.size
        dense = np.zeros((size, size))
        cols = np.arange(size)
        for k, off in enumerate(OFFSETS):
            rows = cols + off
            ok = (rows >= 0) & (rows < size)
            dense[rows[ok], cols[ok]] = self.bands[k, ok]
        return dense

    def violations(self, atol=0.0):
        """Return a list of human-readable invariant violations (empty if valid)."""
        problems = []
        off_diag = np.delete(self.bands, OFFSETS.index(0), axis=0)
        if off_diag.min(initial=0.0) < -atol:
            problems.append(f"negative off-diagonal rate {off_diag.min():.6g}")
        if self.diagonal.max(initial=0.0) > atol:
            problems.append(f"positive diagonal entry {self.diagonal.max():.6g}")
        scale = np.abs(self.bands).sum(axis=0)
        sums = self.column_sums()
        bad = sums > atol + 1e-12 * scale
        if np.any(bad):
            j = int(np.argmax(bad))
            problems.append(f"column {j} sums to {sums[j]:.6g} > 0")
        return problems

    def __add__(self, other):
        return combine_generators(self, other)


def _ladder(model):
    n = np.arange(model.levels, dtype=float)
    return n, model.levels


def build_heating_generator(model: TrapModel) -> RateGenerator:
    """Generator of intensity-noise heating on the truncated ladder.

    The upward jumps out of the two top levels have no destination inside
    the ladder; their flux escapes.
    """
    n, size = _ladder(model)
    up = model.gamma_heat / 8.0 * (n + 2) * (n + 1)
    down = model.gamma_heat / 8.0 * n * (n - 1)
    bands = np.zeros((len(OFFSETS), size))
    bands[OFFSETS.index(0)] = -(up + down)
    bands[OFFSETS.index(2), : size - 2] = up[: size - 2]
    # n(n-1) vanishes for n = 0, 1 so nothing is lost below the ladder
    bands[OFFSETS.index(-2), 2:] = down[2:]
    return RateGenerator(bands)


def build_cooling_generator(model: TrapModel) -> RateGenerator:
    """Generator of the thermal-bath coupling; top-level upward flux escapes."""
    n, size = _ladder(model)
    up = model.gamma_cool * model.nbar * (n + 1)
    down = model.gamma_cool * (model.nbar + 1) * n
    bands = np.zeros((len(OFFSETS), size))
    bands[OFFSETS.index(0)] = -(up + down)
    bands[OFFSETS.index(1), : size - 1] = up[: size - 1]
    bands[OFFSETS.index(-1), 1:] = down[1:]
    return RateGenerator(bands)


def combine_generators(a: RateGenerator, b: RateGenerator) -> RateGenerator:
    if a.size != b.size:
        raise ValueError(f"generator sizes differ: {a.size} != {b.size}")
    return RateGenerator(a.bands + b.bands)


def build_generator(model: TrapModel) -> RateGenerator:
    """Heating plus cooling generator for ``model``."""
    return combine_generators(build_heating_generator(model), build_cooling_generator(model))


def initial_distribution(model: TrapModel, n0: int) -> LevelDistribution:
    """Atom shared evenly between levels ``n0`` and ``n0 + 1`` at ``t = 0``."""
    if not 0 <= n0 <= model.levels - 2:
        raise ValueError(f"n0 must lie in [0, {model.levels - 2}], got {n0}")
    probs = np.zeros(model.levels)
    probs[n0] = probs[n0 + 1] = 0.5
    return LevelDistribution(probs, 0.0)


def point_distribution(model: TrapModel, n: int) -> LevelDistribution:
    """Atom with certainty in level ``n`` at ``t = 0``."""
    if not 0 <= n <= model.levels - 1:
        raise ValueError(f"level must lie in [0, {model.levels - 1}], got {n}")
    probs = np.zeros(model.levels)
    probs[n] = 1.0
    return LevelDistribution(probs, 0.0)
