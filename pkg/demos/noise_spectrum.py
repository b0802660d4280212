"""From a fluctuation record to a heating rate.

A synthetic trace with exponential correlations has a Lorentzian spectrum;
the estimator should recover it, and the heating rate follows from the
spectrum at twice the trap frequency.
"""

import math

import numpy as np

from trapheat.spectrum import exponential_noise, gamma_from_spectrum, gamma_from_trace, spectrum

gamma_c, var, dt = 5.0e4, 1e-2, 2e-6
trace = exponential_noise(400_000, dt, gamma_c, variance=var, rng=1)

omegas = np.array([0.0, 0.5, 1.0, 2.0, 4.0]) * gamma_c
est = spectrum(trace, omegas, max_lag=300, taper="hann")
for w, s in zip(omegas, est.values):
    exact = 2 / math.pi * var * gamma_c / (gamma_c**2 + w**2)
    print(f"omega = {w:8.0f} 1/s   S = {s:.3e}   Lorentzian {exact:.3e}")

nu_tr = 2000.0
s_hz, rate = gamma_from_trace(trace, nu_tr, max_lag=300, taper="hann")
print(f"S(2 nu_tr) = {s_hz:.3e} 1/Hz -> gamma = {rate:.2f} 1/s, 1/gamma = {1e3 / rate:.1f} ms")
print("gamma_from_spectrum(1000 Hz, 1e-4 /Hz) =", gamma_from_spectrum(1000.0, 1e-4))
