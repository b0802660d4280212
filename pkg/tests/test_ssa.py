import numpy as np
import pytest

from trapheat.integrate import evolve_times
from trapheat.model import TrapModel, build_generator, initial_distribution
from trapheat.ssa import (
    run_ensemble,
    simulate_trajectory,
    survival_z_scores,
    trajectory_seed,
    write_lifetimes,
)

from oracles import dense_generator, expm_taylor


def test_no_rates_never_escapes():
    result = simulate_trajectory(TrapModel(100), 45, 1.0, seed=1)
    assert not result.escaped
    assert result.final_level == 45
    assert result.escape_time is None


def test_zero_temperature_cascade():
    result = simulate_trajectory(TrapModel(100, gamma_cool=1e3, nbar=0.0), 5, 1.0, seed=7, record_path=True)
    assert not result.escaped
    assert result.final_level == 0
    assert result.path.tolist() == [5, 4, 3, 2, 1, 0]


def test_heating_parity_on_trajectories():
    model = TrapModel(100, gamma_heat=1 / 0.023)
    for seed in range(20):
        result = simulate_trajectory(model, 44, 0.1, seed=seed, record_path=True)
        assert np.all(result.path % 2 == 0)


def test_escape_means_leaving_the_ladder():
    model = TrapModel(20, gamma_heat=200.0)
    result = simulate_trajectory(model, 18, 10.0, seed=3)
    assert result.escaped
    assert 0 < result.escape_time <= 10.0
    assert result.final_level is None


def test_small_ladder_agrees_with_matrix_exponential():
    model = TrapModel(6, gamma_heat=40.0)
    times = np.linspace(0, 0.06, 13)
    p0 = np.eye(6)[2]
    ref = np.array([(expm_taylor(dense_generator(6, 40.0) * t) @ p0).sum() for t in times])
    summary = run_ensemble(model, 2, 0.06, 5000, base_seed=99, times=times)
    combined = np.hypot(summary.std_error, np.sqrt(ref * (1 - ref) / 5000))
    assert np.all(np.abs(summary.survival - ref) <= 3 * np.maximum(combined, 1e-15))


def test_single_trajectory_ensemble_matches_trajectory():
    model = TrapModel.from_inverse_ms(100, heat_ms=23, cool_ms=2, nbar=10)
    summary = run_ensemble(model, 45, 0.06, 1, base_seed=42, mirror=True)
    single = simulate_trajectory(model, 45, 0.06, trajectory_seed(42, 0), mirror=True)
    if single.escaped:
        assert summary.lifetime_samples.tolist() == [single.escape_time]
    else:
        assert summary.final_levels.tolist() == [single.final_level]


def test_ensemble_reproducible_and_order_free():
    model = TrapModel(60, gamma_heat=1 / 0.023)
    a = run_ensemble(model, 30, 0.05, 300, base_seed=5)
    b = run_ensemble(model, 30, 0.05, 300, base_seed=5, workers=4)
    assert np.array_equal(a.survival, b.survival)
    assert np.array_equal(a.lifetime_samples, b.lifetime_samples)
    assert np.array_equal(a.final_levels, b.final_levels)
    # the same trajectories run one at a time, in reverse order
    manual = [simulate_trajectory(model, 30, 0.05, trajectory_seed(5, i)) for i in reversed(range(300))]
    times = sorted(r.escape_time for r in manual if r.escaped)
    assert np.array_equal(a.lifetime_samples, times)


def test_summary_fields():
    model = TrapModel(30, gamma_heat=100.0)
    summary = run_ensemble(model, 10, 0.02, 400, base_seed=1)
    assert summary.survival[0] == 1.0
    assert np.all(np.diff(summary.survival) <= 0)
    p = summary.survival
    np.testing.assert_allclose(summary.std_error, np.sqrt(p * (1 - p) / 400))
    assert summary.survival_curve[0] == (0.0, 1.0, 0.0)
    escaped = summary.lifetime_samples.size
    assert escaped == np.count_nonzero(summary.final_levels < 0)
    assert summary.survival[-1] == pytest.approx(1 - escaped / 400)


def test_agrees_with_master_equation():
    model = TrapModel.from_inverse_ms(100, heat_ms=23, cool_ms=4, nbar=10)
    times = np.linspace(0, 0.03, 16)
    summary = run_ensemble(model, 45, 0.03, 3000, base_seed=2024, times=times, mirror=True)
    snaps = evolve_times(build_generator(model), initial_distribution(model, 45), times)
    ref = [s.probs.sum() for s in snaps]
    assert survival_z_scores(summary, ref).max() <= 3.0


def test_z_scores_at_certain_reference():
    class Fake:
        survival = np.array([1.0, 1.0, 0.5])
        n_traj = 100

    z = survival_z_scores(Fake, [1.0, 0.9, 0.5])
    assert z[0] == 0.0
    assert z[1] == pytest.approx(0.1 / np.sqrt(0.09 / 100))
    assert survival_z_scores(Fake, [0.999, 1.0, 0.5])[1] == 0.0


def test_lifetime_export(tmp_path):
    summary = run_ensemble(TrapModel(20, gamma_heat=300.0), 10, 0.05, 200, base_seed=3)
    path = tmp_path / "life.txt"
    write_lifetimes(path, summary)
    back = np.loadtxt(path, ndmin=1)
    np.testing.assert_array_equal(back, summary.lifetime_samples)


def test_bad_arguments():
    model = TrapModel(10)
    with pytest.raises(ValueError):
        simulate_trajectory(model, 10, 1.0, seed=0)
    with pytest.raises(ValueError):
        simulate_trajectory(model, 9, 1.0, seed=0, mirror=True)
    with pytest.raises(ValueError):
        simulate_trajectory(model, 1, 1.0, seed=2**32)
    with pytest.raises(ValueError):
        run_ensemble(model, 1, 1.0, 0, base_seed=0)
