"""Heating alone: a sharp distribution at n = 45 spreads over the trap in ~2 ms.

Run:  python demos/heating_spread.py
"""

import numpy as np

from trapheat import TrapModel, build_generator, evolve_times, initial_distribution, reduce_series

model = TrapModel.from_inverse_ms(100, heat_ms=23)
times_ms = np.array([0.0, 0.5, 1.0, 2.0, 5.0, 10.0])
snaps = evolve_times(build_generator(model), initial_distribution(model, 45), times_ms * 1e-3)
series = reduce_series(snaps)

print(" t/ms   survival   <n>     sigma")
for t, s, m, sd in zip(times_ms, series.survival, series.mean_n, series.std_n):
    print(f"{t:5.1f}   {s:.4f}   {m:6.2f}  {sd:6.2f}")

# heating only couples n to n +- 2, so the odd levels stay empty
print("mass on odd levels at 10 ms:", snaps[-1].probs[1::2].sum())

# a coarse text histogram of the 2 ms distribution
p = snaps[3].probs
for lo in range(0, 100, 10):
    bar = "#" * int(round(400 * p[lo : lo + 10].sum()))
    print(f"n {lo:2d}-{lo + 9:2d} {bar}")
