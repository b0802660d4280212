"""Intensity-noise spectra and the heating rate they imply.

Conventions
-----------
``S(omega)`` is the one-sided spectrum in angular frequency,

    S(omega) = (2/pi) * integral_0^inf cos(omega tau) C(tau) dtau,

so that ``integral_0^inf S(omega) domega = C(0)``.  The heating rate is
expressed with a one-sided spectrum per Hz,

    gamma = pi^2 nu_tr^2 S_hz(2 nu_tr),

and the two are related by ``S_hz(nu) = 2 pi S(2 pi nu)``.  That mapping
lives only in :func:`angular_to_per_hz`; with it the rate agrees with the
jump rates ``(pi omega_tr^2 / 16) S(2 omega_tr) (n + 2)(n + 1)`` written in
angular frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.signal

__all__ = [
    "TraceFormatError",
    "NoiseTrace",
    "SpectrumEstimate",
    "autocorrelation",
    "cosine_transform",
    "spectrum",
    "spectrum_at",
    "angular_to_per_hz",
    "gamma_from_spectrum",
    "gamma_from_trace",
    "exponential_noise",
    "read_trace",
]

TAPERS = (None, "bartlett", "hann")


class TraceFormatError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseTrace:
    """Fractional fluctuation ``epsilon(t_i)`` sampled every ``dt`` seconds."""

    dt: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if samples.ndim != 1 or samples.size < 16:
            raise ValueError(f"need a 1-d trace of at least 16 samples, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("trace contains non-finite samples")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "dt", float(self.dt))

    def __len__(self):
        return self.samples.size


@dataclass(frozen=True)
class SpectrumEstimate:
    omegas: np.ndarray
    values: np.ndarray
    settings: dict


def _default_lag(trace):
    return len(trace) // 4


def autocorrelation(trace: NoiseTrace, max_lag=None):
    """Biased, mean-removed autocorrelation ``C(k dt)`` for ``k = 0..max_lag``.

    ``C(k dt) = (1/N) sum_i x_i x_{i+k}`` with ``x`` the mean-removed trace.
    """
    n = len(trace)
    if max_lag is None:
        max_lag = _default_lag(trace)
    if not 0 < max_lag < n / 2:
        raise ValueError(f"max_lag must satisfy 0 < max_lag < {n / 2}, got {max_lag}")
    x = trace.samples - trace.samples.mean()
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, nfft)
    acf = np.fft.irfft(f * np.conj(f), nfft)[: max_lag + 1]
    return acf / n


def _lag_weights(m, taper):
    k = np.arange(m + 1, dtype=float)
    if taper is None:
        w = np.ones(m + 1)
    elif taper == "bartlett":
        w = 1.0 - k / m
    elif taper == "hann":
        w = 0.5 * (1.0 + np.cos(np.pi * k / m))
    else:
        raise ValueError(f"unknown taper {taper!r}; choose from {TAPERS}")
    # trapezoid end weights
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def cosine_transform(acf, dt, omegas, taper=None):
    """One-sided spectrum from autocorrelation samples ``acf[k] = C(k dt)``."""
    acf = np.asarray(acf, dtype=float)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if np.any(omegas < 0):
        raise ValueError("omega must be non-negative")
    m = acf.size - 1
    w = _lag_weights(m, taper) * acf
    tau = np.arange(m + 1) * dt
    return 2.0 / np.pi * dt * (np.cos(np.outer(omegas, tau)) @ w)


def spectrum(trace: NoiseTrace, omegas, max_lag=None, taper=None) -> SpectrumEstimate:
    """Estimate ``S(omega)`` at each angular frequency in ``omegas`` (rad/s)."""
    if max_lag is None:
        max_lag = _default_lag(trace)
    acf = autocorrelation(trace, max_lag)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    values = cosine_transform(acf, trace.dt, omegas, taper)
    settings = {"max_lag": int(max_lag), "taper": taper or "none", "dt": trace.dt, "n_samples": len(trace)}
    return SpectrumEstimate(omegas, values, settings)


def spectrum_at(trace: NoiseTrace, omega, max_lag=None, taper=None) -> float:
    return float(spectrum(trace, [omega], max_lag, taper).values[0])


def angular_to_per_hz(s_angular):
    """Convert a one-sided spectral density per rad/s into one per Hz."""
    return 2.0 * np.pi * s_angular


def gamma_from_spectrum(nu_tr, s_at_2nu):
    """Heating rate (1/s) from trap frequency ``nu_tr`` (Hz) and ``S_hz(2 nu_tr)`` (1/Hz)."""
    if not nu_tr > 0:
        raise ValueError(f"nu_tr must be positive, got {nu_tr!r}")
    if not s_at_2nu >= 0:
        raise ValueError(f"spectral density must be non-negative, got {s_at_2nu!r}")
    return math.pi**2 * nu_tr**2 * s_at_2nu


def gamma_from_trace(trace: NoiseTrace, nu_tr, max_lag=None, taper=None):
    """Estimate ``(S_hz(2 nu_tr), gamma)`` from a noise trace.

    A slightly negative estimate (possible without a taper) is reported as is
    but yields ``gamma = 0``.
    """
    s_ang = spectrum_at(trace, 2.0 * np.pi * 2.0 * nu_tr, max_lag, taper)
    s_hz = float(angular_to_per_hz(s_ang))
    return s_hz, gamma_from_spectrum(nu_tr, max(s_hz, 0.0))


def exponential_noise(n, dt, gamma, variance=1.0, rng=None):
    """Stationary Gaussian sequence with autocorrelation ``variance * exp(-gamma |tau|)``."""
    rng = np.random.default_rng(rng)
    rho = math.exp(-gamma * dt)
    drive = rng.standard_normal(n) * math.sqrt(variance * (1.0 - rho**2))
    x0 = rng.standard_normal() * math.sqrt(variance)
    x, _ = scipy.signal.lfilter([1.0], [1.0, -rho], drive, zi=[rho * x0])
    return NoiseTrace(dt, x)


def read_trace(path, jitter=1e-6) -> NoiseTrace:
    """Read a two-column ``time_seconds, epsilon`` text file.

    Columns may be separated by commas or whitespace; lines starting with
    ``#`` are skipped.  Sampling must be uniform to ``jitter`` relative.
    """
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise TraceFormatError(f"{path}:{lineno}: expected 2 columns, got {len(parts)}")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError:
                raise TraceFormatError(f"{path}:{lineno}: non-numeric value in {line!r}") from None
    if len(rows) < 16:
        raise TraceFormatError(f"{path}: need at least 16 samples, got {len(rows)}")
    data = np.array(rows)
    steps = np.diff(data[:, 0])
    dt = (data[-1, 0] - data[0, 0]) / (len(rows) - 1)
    if not dt > 0:
        raise TraceFormatError(f"{path}: time stamps must increase")
    worst = np.abs(steps - dt).max() / dt
    if worst > jitter:
        raise TraceFormatError(f"{path}: non-uniform sampling (relative jitter {worst:.2e})")
    return NoiseTrace(dt, data[:, 1])
