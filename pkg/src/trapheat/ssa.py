"""Gillespie simulation of single-atom trajectories on the level ladder.

Each trajectory runs the jump process behind the master equation directly:
an exponential waiting time from the total exit rate of the current level,
then one of the four jumps (heating +/-2, bath +/-1) chosen in proportion to
its rate.  Reaching any level ``>= L`` counts as escape.

Trajectory ``i`` of an ensemble with base seed ``s`` is driven by the seed
:func:`trajectory_seed` ``(s, i)``, so every trajectory is reproducible on its
own and ensemble results do not depend on the order (or thread) in which
trajectories are run.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numba
import numpy as np

from .model import TrapModel

__all__ = [
    "TrajectoryResult",
    "EnsembleSummary",
    "trajectory_seed",
    "simulate_trajectory",
    "run_ensemble",
    "survival_z_scores",
    "write_lifetimes",
]


@numba.njit(cache=True, nogil=True)
def _trajectory(levels, gh, gc, nb, n0, mirror, horizon, seed, path):
    np.random.seed(seed)
    n = n0
    if mirror and np.random.random() < 0.5:
        n += 1
    count = 0
    if path.size > 0:
        path[0] = n
        count = 1
    t = 0.0
    while True:
        up2 = gh / 8.0 * (n + 2) * (n + 1)
        down2 = gh / 8.0 * n * (n - 1)
        up1 = gc * nb * (n + 1)
        down1 = gc * (nb + 1.0) * n
        total = up2 + down2 + up1 + down1
        if total <= 0.0:
            return False, math.inf, n, count
        t += -math.log(1.0 - np.random.random()) / total
        if t > horizon:
            return False, math.inf, n, count
        u = np.random.random() * total
        if u < up2:
            n += 2
        elif u < up2 + down2:
            n -= 2
        elif u < up2 + down2 + up1:
            n += 1
        else:
            n -= 1
        if n >= levels:
            return True, t, n, count
        if count < path.size:
            path[count] = n
            count += 1


@numba.njit(cache=True, nogil=True)
def _batch(levels, gh, gc, nb, n0, mirror, horizon, seeds, escaped, times, finals):
    empty = np.empty(0, dtype=np.int64)
    for i in range(seeds.size):
        e, t, n, _ = _trajectory(levels, gh, gc, nb, n0, mirror, horizon, seeds[i], empty)
        escaped[i] = e
        times[i] = t
        finals[i] = n


class TrajectoryResult(NamedTuple):
    escaped: bool
    escape_time: float | None
    """Seconds; ``None`` unless ``escaped``."""
    final_level: int | None
    """Level at the horizon; ``None`` if ``escaped``."""
    path: np.ndarray | None = None
    """Visited levels in order, when recorded."""


class EnsembleSummary(NamedTuple):
    n_traj: int
    times: np.ndarray
    survival: np.ndarray
    std_error: np.ndarray
    lifetime_samples: np.ndarray
    """Escape times (s) of the escaped trajectories, sorted."""
    final_levels: np.ndarray
    """Level at the horizon by trajectory index, -1 where escaped."""

    @property
    def survival_curve(self):
        return list(zip(self.times.tolist(), self.survival.tolist(), self.std_error.tolist()))


def trajectory_seed(base_seed: int, index: int) -> int:
    """32-bit seed of trajectory ``index``; hashes ``(base_seed, index)`` with numpy's SeedSequence."""
    return int(np.random.SeedSequence([int(base_seed), int(index)]).generate_state(1, np.uint32)[0])


def _check_start(model, n0, mirror):
    top = model.levels - 2 if mirror else model.levels - 1
    if not 0 <= n0 <= top:
        raise ValueError(f"n0 must lie in [0, {top}], got {n0}")


def simulate_trajectory(model: TrapModel, n0: int, horizon: float, seed: int, mirror=False, record_path=False):
    """Run one trajectory from level ``n0`` up to ``horizon`` seconds.

    With ``mirror`` the start level is ``n0`` or ``n0 + 1`` with equal
    probability, matching :func:`trapheat.model.initial_distribution`.
    ``seed`` must fit in 32 bits.
    """
    _check_start(model, n0, mirror)
    if not 0 <= seed < 2**32:
        raise ValueError(f"seed must lie in [0, 2**32), got {seed}")
    path = np.zeros(1_000_000 if record_path else 0, dtype=np.int64)
    escaped, t, n, count = _trajectory(
        model.levels, model.gamma_heat, model.gamma_cool, model.nbar, n0, mirror, horizon, seed, path
    )
    return TrajectoryResult(
        bool(escaped),
        float(t) if escaped else None,
        None if escaped else int(n),
        path[:count].copy() if record_path else None,
    )


def run_ensemble(
    model: TrapModel,
    n0: int,
    horizon: float,
    n_traj: int,
    base_seed: int,
    times=None,
    mirror=False,
    workers=1,
) -> EnsembleSummary:
    """Survival statistics of ``n_traj`` independent trajectories.

    ``times`` are the reporting times (s) of the survival curve; the default
    is 61 evenly spaced points on ``[0, horizon]``.  ``workers > 1`` splits
    the trajectories over threads without changing any result.
    """
    _check_start(model, n0, mirror)
    if n_traj < 1:
        raise ValueError(f"n_traj must be >= 1, got {n_traj}")
    times = np.linspace(0.0, horizon, 61) if times is None else np.asarray(times, dtype=float)

    seeds = np.array([trajectory_seed(base_seed, i) for i in range(n_traj)], dtype=np.uint32)
    escaped = np.zeros(n_traj, dtype=np.bool_)
    esc_times = np.full(n_traj, np.inf)
    finals = np.zeros(n_traj, dtype=np.int64)
    args = (model.levels, model.gamma_heat, model.gamma_cool, model.nbar, n0, mirror, horizon)

    chunks = np.array_split(np.arange(n_traj), max(1, int(workers)))

    def work(idx):
        e, t, f = np.zeros(idx.size, np.bool_), np.zeros(idx.size), np.zeros(idx.size, np.int64)
        _batch(*args, seeds[idx], e, t, f)
        escaped[idx], esc_times[idx], finals[idx] = e, t, f

    if len(chunks) == 1:
        work(chunks[0])
    else:
        with ThreadPoolExecutor(len(chunks)) as pool:
            list(pool.map(work, chunks))

    # a trajectory survives to t if it escapes strictly later than t
    lifetimes = np.sort(esc_times[escaped])
    alive = n_traj - np.searchsorted(lifetimes, times, side="right")
    frac = alive / n_traj
    se = np.sqrt(frac * (1.0 - frac) / n_traj)
    return EnsembleSummary(n_traj, times, frac, se, lifetimes, np.where(escaped, -1, finals))


def survival_z_scores(summary: EnsembleSummary, reference):
    """Deviation of the ensemble survival from ``reference`` in binomial standard errors.

    The standard error is evaluated at the reference probability, which
    stays meaningful where every sampled trajectory agrees (``p`` of 0 or 1).
    Points where the reference itself is exactly 0 or 1 give ``0`` if the
    ensemble matches and ``inf`` otherwise.
    """
    ref = np.asarray(reference, dtype=float)
    diff = np.abs(summary.survival - ref)
    se = np.sqrt(ref * (1.0 - ref) / summary.n_traj)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / se, np.where(diff > 0, np.inf, 0.0))
    return z


def write_lifetimes(path, summary: EnsembleSummary):
    """One escape time per line, in seconds."""
    header = f"escape_time_s\nn_traj={summary.n_traj} escaped={summary.lifetime_samples.size}"
    np.savetxt(path, summary.lifetime_samples, fmt="%.17g", header=header)
