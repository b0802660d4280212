"""Time propagation of level distributions, stationary states and moment ODEs.

Propagation uses classical fourth-order Runge-Kutta with a fixed step.  For a
constant generator ``A`` one RK4 step of size ``h`` is the linear map

    M(h) = I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24,

so ``2**j`` consecutive steps equal ``M(h)**(2**j)``.  The sample-to-sample
propagator is formed once by repeated squaring and then applied per output
sample, which keeps large stiff ladders (thousands of levels, steps of a few
nanoseconds) affordable without changing the numerical scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .model import LevelDistribution, RateGenerator, TrapModel

__all__ = [
    "IntegrationError",
    "StationaryError",
    "TimeGrid",
    "IntegratorConfig",
    "StationaryState",
    "rk4_step",
    "rk4_propagator",
    "evolve",
    "evolve_times",
    "stationary_distribution",
    "moment_oracle",
    "moment_rhs",
]

#: Largest number of RK4 sub-steps per output interval, as a power of two.
MAX_DOUBLINGS = 48

# propagator entries below this are flushed to zero; subnormals stall BLAS
_FLUSH = 1e-200


class IntegrationError(RuntimeError):
    """Propagation failed; ``time`` is the sample time (s) at which it did."""

    def __init__(self, message, time=None):
        super().__init__(message if time is None else f"{message} (t = {time:.9g} s)")
        self.time = time


class StationaryError(RuntimeError):
    pass


@dataclass(frozen=True)
class TimeGrid:
    """Uniform output times ``linspace(t_start, t_end, n_samples)`` in seconds."""

    t_start: float
    t_end: float
    n_samples: int

    def __post_init__(self):
        if not (self.t_start >= 0 and self.t_end > self.t_start):
            raise ValueError(f"need t_end > t_start >= 0, got [{self.t_start}, {self.t_end}]")
        if int(self.n_samples) != self.n_samples or self.n_samples < 2:
            raise ValueError(f"n_samples must be an integer >= 2, got {self.n_samples!r}")

    @property
    def times(self):
        return np.linspace(self.t_start, self.t_end, int(self.n_samples))

    @property
    def spacing(self):
        return (self.t_end - self.t_start) / (self.n_samples - 1)


@dataclass(frozen=True)
class IntegratorConfig:
    """``max_step=None`` means ``0.1 / max|diag|`` of the generator."""

    max_step: float | None = None
    neg_tolerance: float = 1e-12
    mass_tolerance: float = 1e-9

    def __post_init__(self):
        for name in ("max_step", "neg_tolerance", "mass_tolerance"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    def step_limit(self, gen: RateGenerator):
        if self.max_step is not None:
            return self.max_step
        # equals max|diag| for valid generators; also bounds damaged ones
        outflow = np.abs(gen.bands).sum(axis=0) - np.abs(gen.diagonal)
        scale = max(np.abs(gen.diagonal).max(initial=0.0), outflow.max(initial=0.0))
        return math.inf if scale < 1e-300 else 0.1 / float(scale)


def rk4_step(gen: RateGenerator, p, h):
    """One classical RK4 step of ``dP/dt = A P`` using banded products."""
    k1 = gen.matvec(p)
    k2 = gen.matvec(p + 0.5 * h * k1)
    k3 = gen.matvec(p + 0.5 * h * k2)
    k4 = gen.matvec(p + h * k3)
    return p + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _rk4_matrix(dense, h):
    size = dense.shape[0]
    ha = h * dense
    eye = np.eye(size)
    # Horner form of I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24
    m = eye + ha / 4.0
    m = eye + ha @ m / 3.0
    m = eye + ha @ m / 2.0
    return eye + ha @ m


def _blocks(gen: RateGenerator):
    """Index sets that the generator never couples (even/odd for pure heating)."""
    odd_free = not np.any(gen.band(1)) and not np.any(gen.band(-1))
    idx = np.arange(gen.size)
    if odd_free:
        return [idx[0::2], idx[1::2]]
    return [idx]


def _substeps(interval, limit):
    if limit == math.inf:
        return 0
    doublings = max(0, math.ceil(math.log2(interval / limit)))
    if doublings > MAX_DOUBLINGS:
        raise IntegrationError(
            f"step size underflow: interval {interval:.3g} s needs more than "
            f"2**{MAX_DOUBLINGS} steps of at most {limit:.3g} s"
        )
    return doublings


def rk4_propagator(gen: RateGenerator, interval, max_step):
    """Dense matrix of ``2**j`` RK4 steps covering ``interval`` seconds.

    ``j`` is the smallest integer with ``interval / 2**j <= max_step``.
    """
    doublings = _substeps(interval, max_step)
    h = interval / 2.0**doublings
    dense = gen.to_dense()
    prop = np.zeros_like(dense)
    for block in _blocks(gen):
        sub = _rk4_matrix(dense[np.ix_(block, block)], h)
        for _ in range(doublings):
            sub = sub @ sub
            sub[np.abs(sub) < _FLUSH] = 0.0
        prop[np.ix_(block, block)] = sub
    return prop


def evolve_times(gen: RateGenerator, init: LevelDistribution, times, cfg: IntegratorConfig | None = None):
    """Propagate ``init`` to each of the increasing ``times`` (seconds).

    Returns one :class:`LevelDistribution` per entry of ``times``.  The first
    time may equal ``init.time``.
    """
    cfg = cfg or IntegratorConfig()
    times = np.asarray(times, dtype=float)
    if gen.size != init.size:
        raise ValueError(f"generator size {gen.size} != distribution size {init.size}")
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-d sequence")
    if times[0] < init.time or np.any(np.diff(times) < 0):
        raise ValueError("times must be non-decreasing and start at or after init.time")

    limit = cfg.step_limit(gen)
    cache = {}
    p = np.array(init.probs)
    t_prev = init.time
    mass_prev = p.sum()
    out = []
    for t in times:
        interval = t - t_prev
        if interval > 0 and limit != math.inf:
            # uniform grids differ in the last bits of their spacings
            key = float(f"{interval:.12g}")
            if key not in cache:
                cache[key] = rk4_propagator(gen, key, limit)
            p = cache[key] @ p
        low = p.min()
        mass = p.sum()
        if not np.isfinite(mass):
            raise IntegrationError("non-finite probabilities", t)
        if low < -cfg.neg_tolerance:
            raise IntegrationError(f"negative probability {low:.3e}", t)
        if mass > mass_prev + cfg.mass_tolerance:
            raise IntegrationError(f"total probability grew from {mass_prev:.15g} to {mass:.15g}", t)
        out.append(LevelDistribution(p.copy(), t))
        t_prev, mass_prev = t, mass
    return out


def evolve(gen: RateGenerator, init: LevelDistribution, grid: TimeGrid, cfg: IntegratorConfig | None = None):
    """Snapshots of ``init`` propagated to every sample of ``grid``."""
    return evolve_times(gen, init, grid.times, cfg)


class StationaryState(NamedTuple):
    distribution: LevelDistribution
    leak_rate: float
    """Probability per second leaving the ladder when in this state."""
    leaked_mass: float
    """Leak rate times the slowest relaxation time of the closed ladder."""

    @property
    def leaky(self):
        return self.leaked_mass > 1e-6


def stationary_distribution(gen: RateGenerator) -> StationaryState:
    """Normalized equilibrium of ``gen`` with the boundary leak closed off.

    The outgoing flux at the top of the ladder is folded back into the
    diagonal so that every column sums to zero, and the one-dimensional
    kernel of that conservative generator is returned.  The leak of the
    original generator in that state is reported alongside; ``leaky`` is set
    when the mass lost during one relaxation time exceeds ``1e-6``.
    """
    closed = gen.to_dense()
    closed[np.diag_indices_from(closed)] -= gen.column_sums()
    kernel = scipy.linalg.null_space(closed, rcond=1e-12)
    if kernel.shape[1] != 1:
        raise StationaryError(f"no unique stationary state: kernel dimension {kernel.shape[1]}")
    vec = kernel[:, 0]
    vec = vec / vec.sum()
    if vec.min() < -1e-10:
        raise StationaryError(f"stationary vector has negative entry {vec.min():.3e}")
    vec = np.clip(vec, 0.0, None)
    vec /= vec.sum()

    leak_rate = float(-(gen.column_sums() @ vec))
    eig = np.sort(np.abs(np.linalg.eigvals(closed).real))
    gap = eig[1] if eig.size > 1 else 0.0
    leaked = leak_rate / gap if gap > 0 else (math.inf if leak_rate > 0 else 0.0)
    return StationaryState(LevelDistribution(vec, 0.0), leak_rate, leaked)


def moment_rhs(model: TrapModel):
    """Affine system ``d/dt (m1, m2, 1) = B (m1, m2, 1)`` on the open ladder.

    ``m1 = <n>`` and ``m2 = <n^2>``; no truncation is applied.
    """
    gh, gc, nb = model.gamma_heat, model.gamma_cool, model.nbar
    return np.array(
        [
            [gh - gc, 0.0, gh / 2 + gc * nb],
            [2 * gh + gc * (4 * nb + 1), 3 * gh - 2 * gc, gh + gc * nb],
            [0.0, 0.0, 0.0],
        ]
    )


def moment_oracle(model: TrapModel, n0_mean, n0_var, grid: TimeGrid):
    """Mean and variance of the level number on the untruncated ladder.

    Returns a list of ``(mean, variance)`` pairs, one per grid sample.
    """
    b = moment_rhs(model)
    z0 = np.array([n0_mean, n0_var + n0_mean**2, 1.0])
    out = []
    for t in grid.times:
        z = scipy.linalg.expm(b * (t - grid.t_start)) @ z0
        out.append((float(z[0]), float(z[1] - z[0] ** 2)))
    return out
