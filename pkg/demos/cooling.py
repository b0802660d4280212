"""Heating balanced by a thermal cooling bath.

With 1/gamma_cool = 2 ms and nbar = 10 about 90% of atoms survive 60 ms.
Cooling on its own relaxes to a geometric distribution with mean nbar.
"""

import numpy as np

from trapheat import (
    TrapModel,
    build_cooling_generator,
    build_generator,
    evolve_times,
    initial_distribution,
    reduce_series,
    stationary_distribution,
)

model = TrapModel.from_inverse_ms(100, heat_ms=23, cool_ms=2, nbar=10)
times_ms = np.array([0, 1, 2, 5, 10, 20, 40, 60])
series = reduce_series(evolve_times(build_generator(model), initial_distribution(model, 45), times_ms * 1e-3))
for t, s, m, sd in zip(times_ms, series.survival, series.mean_n, series.std_n):
    print(f"{t:3d} ms  survival {s:.4f}  <n> {m:6.2f}  sigma {sd:6.2f}")

# cooling alone on a deep ladder: the thermal state
deep = TrapModel(400, gamma_cool=500.0, nbar=10.0)
state = stationary_distribution(build_cooling_generator(deep))
p = state.distribution.probs
print("stationary mean", np.dot(np.arange(deep.levels), p))
print("P(0), P(1)/P(0):", p[0], p[1] / p[0], "(expect 1/11 and 10/11)")
