"""Single-atom trajectories agree with the master equation.

Each trajectory has its own seed derived from the base seed, so the
ensemble is reproducible and independent of the number of worker threads.
"""

import numpy as np

from trapheat import TrapModel, build_generator, evolve_times, initial_distribution
from trapheat.ssa import run_ensemble, simulate_trajectory, survival_z_scores

model = TrapModel.from_inverse_ms(100, heat_ms=23, cool_ms=2, nbar=10)

one = simulate_trajectory(model, 45, 0.06, seed=3, mirror=True, record_path=True)
print("one trajectory: escaped", one.escaped, "after", len(one.path) - 1, "jumps")

times = np.linspace(0, 0.06, 7)
ens = run_ensemble(model, 45, 0.06, 10_000, base_seed=12345, times=times, mirror=True, workers=4)
ref = [s.probs.sum() for s in evolve_times(build_generator(model), initial_distribution(model, 45), times)]
z = survival_z_scores(ens, ref)
for t, s, se, r, zz in zip(times, ens.survival, ens.std_error, ref, z):
    print(f"{t * 1e3:4.0f} ms  SSA {s:.4f} +- {se:.4f}   master {r:.4f}   |z| {zz:.2f}")
if ens.lifetime_samples.size:
    print("median escape time of lost atoms:", np.median(ens.lifetime_samples) * 1e3, "ms")
