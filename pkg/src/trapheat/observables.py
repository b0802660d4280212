"""Survival probability and moments of the atoms remaining in the trap."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import LevelDistribution

__all__ = ["UNDEFINED_SURVIVAL", "ObservableSeries", "survival", "conditional_moments", "reduce_series"]

#: Below this survival the conditional moments are reported as NaN.
UNDEFINED_SURVIVAL = 1e-12


def survival(dist: LevelDistribution) -> float:
    """Probability that the atom is still in one of the bound levels."""
    return float(dist.clamped().sum())


def conditional_moments(dist: LevelDistribution):
    """Mean and standard deviation of ``n`` conditioned on survival.

    Returns ``(nan, nan)`` when the surviving mass is below
    :data:`UNDEFINED_SURVIVAL`.
    """
    p = dist.clamped()
    s = p.sum()
    if s < UNDEFINED_SURVIVAL:
        return math.nan, math.nan
    n = np.arange(p.size, dtype=float)
    mean = float(n @ p / s)
    # central second moment avoids cancellation in <n^2> - <n>^2
    var = float(((n - mean) ** 2) @ p / s)
    return mean, math.sqrt(max(var, 0.0))


@dataclass(frozen=True)
class ObservableSeries:
    times: np.ndarray
    survival: np.ndarray
    mean_n: np.ndarray
    std_n: np.ndarray
    escape_rate: np.ndarray

    def __len__(self):
        return self.times.size

    def columns(self):
        return {
            "t": self.times,
            "survival": self.survival,
            "mean_n": self.mean_n,
            "std_n": self.std_n,
            "escape_rate": self.escape_rate,
        }


def reduce_series(snapshots) -> ObservableSeries:
    """Observables for a time-ordered sequence of snapshots.

    ``escape_rate`` is ``-d(survival)/dt`` from centred differences (one-sided
    at the ends, zero for a single snapshot).
    """
    snapshots = list(snapshots)
    if not snapshots:
        raise ValueError("no snapshots given")
    times = np.array([d.time for d in snapshots])
    if np.any(np.diff(times) <= 0):
        raise ValueError("snapshot times must be strictly increasing")
    surv = np.array([survival(d) for d in snapshots])
    moments = np.array([conditional_moments(d) for d in snapshots]).reshape(-1, 2)
    if times.size > 1:
        rate = -np.gradient(surv, times)
    else:
        rate = np.zeros(1)
    return ObservableSeries(times, surv, moments[:, 0], moments[:, 1], rate)
