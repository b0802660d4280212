"""Occupancy time under heating only, with the measured axial and radial rates.

The distribution spreads quickly but the population near the ground state
leaks out slowly, so survival develops a long tail.
"""

import numpy as np

from trapheat import TrapModel, build_generator, evolve_times, initial_distribution, reduce_series

times_ms = np.linspace(0, 60, 13)
for name in ("axial", "radial"):
    model = TrapModel.preset(name)
    series = reduce_series(evolve_times(build_generator(model), initial_distribution(model, 45), times_ms * 1e-3))
    print(f"{name}: 1/gamma = {1e3 / model.gamma_heat:.0f} ms")
    for t, s, r in zip(times_ms, series.survival, series.escape_rate):
        print(f"  {t:5.1f} ms  survival {s:.4f}  loss rate {r * 1e-3:.4f} /ms")
