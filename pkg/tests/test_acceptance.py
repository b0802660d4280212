"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is printed at the end of the run."""

import math
import time

import numpy as np
import pytest

from trapheat import cli, ssa
from trapheat.config import RunConfig
from trapheat.integrate import evolve_times, stationary_distribution
from trapheat.model import (
    LevelDistribution,
    TrapModel,
    build_cooling_generator,
    build_generator,
    initial_distribution,
    point_distribution,
)
from trapheat.observables import conditional_moments, reduce_series, survival
from trapheat.spectrum import exponential_noise, gamma_from_spectrum, spectrum_at
from trapheat.validation import run_checks

from breakage import cooling_with_sign_error, heating_with_sign_error
from oracles import dense_generator, expm_taylor, geometric

pytestmark = pytest.mark.acceptance

AXIAL = 1 / 0.023
COOLED = TrapModel.from_inverse_ms(100, heat_ms=23, cool_ms=2, nbar=10)


@pytest.fixture(scope="module")
def deep_heating():
    """Heating only, L = 2000, start at n = 5, 0 to 50 ms."""
    model = TrapModel(2000, gamma_heat=AXIAL)
    times = np.linspace(0.0, 0.05, 201)
    snaps = evolve_times(build_generator(model), point_distribution(model, 5), times)
    return times, reduce_series(snaps)


def test_c01_survival_with_cooling():
    """1. survival at 60 ms with 1/Gc = 2 ms is 0.90 +- 0.03, under 5 s"""
    start = time.perf_counter()
    snaps = evolve_times(build_generator(COOLED), initial_distribution(COOLED, 45), [0.0, 0.06])
    elapsed = time.perf_counter() - start
    s = survival(snaps[-1])
    print(f"survival(60 ms) = {s:.4f} in {elapsed:.2f} s")
    assert s == pytest.approx(0.90, abs=0.03)
    assert elapsed < 5.0


def test_c02_cooling_scan_optimum():
    """2. cooling scan over 0.5, 1, 2, 4 ms peaks at 1 ms, marginally above 2 ms"""
    rows, best = cli.scan_cooling(RunConfig(nbar=10.0, horizon_ms=60.0), [0.5, 1.0, 2.0, 4.0])
    surv = dict(rows)
    print(surv)
    assert best == 1.0
    assert 0 < surv[1.0] - surv[2.0] < 0.05


def test_c03_mean_heating_law(deep_heating):
    """3. <n>(t) = (n0 + 1/2) e^(Gt) - 1/2 to 1e-4 while escaped mass < 1e-10 (L = 2000)"""
    times, series = deep_heating
    safe = 1 - series.survival < 1e-10
    exact = 5.5 * np.exp(AXIAL * times) - 0.5
    err = np.abs(series.mean_n - exact)[safe] / exact[safe]
    print(f"max rel err {err.max():.2e} over t <= {times[safe].max() * 1e3:.2f} ms")
    assert safe.sum() >= 20
    assert err.max() <= 1e-4


def test_c04_width_growth_rate(deep_heating):
    """4. fitted growth rate of sigma over 5 <= sigma <= 50 is 1.5 G within 5%"""
    times, series = deep_heating
    window = (series.std_n >= 5) & (series.std_n <= 50)
    slope = np.polyfit(times[window], np.log(series.std_n[window]), 1)[0]
    print(f"fitted rate {slope / AXIAL:.4f} G over {window.sum()} samples")
    assert window.sum() >= 10
    assert slope / AXIAL == pytest.approx(1.5, rel=0.05)


def test_c05_rapid_spreading():
    """5. sigma(2 ms) >= 10 from sigma(0) = 0.5 with the default model"""
    model = RunConfig().model()
    snaps = evolve_times(build_generator(model), initial_distribution(model, 45), [0.0, 0.002])
    sd0, sd2 = conditional_moments(snaps[0])[1], conditional_moments(snaps[1])[1]
    print(f"sigma: {sd0} -> {sd2:.3f}")
    assert sd0 == 0.5
    assert sd2 >= 10


def test_c06_cooling_equilibrium():
    """6. cooling only, L = 100: stationary mean 10 +- 1e-3, geometric to 1e-6 entrywise"""
    model = TrapModel(100, gamma_cool=1.0, nbar=10.0)
    state = stationary_distribution(build_cooling_generator(model))
    p = state.distribution.probs
    mean = float(np.dot(np.arange(100), p))
    diff = np.abs(p - geometric(10.0, 100)).max()
    print(f"mean {mean:.6f}, max |P - geometric| {diff:.2e}, leaked {state.leaked_mass:.2e}")
    assert mean == pytest.approx(10.0, abs=1e-3)
    assert diff <= 1e-6


def test_c07_ssa_agreement():
    """7. SSA (10^4 trajectories, fixed seed) within 3 SE at every time, under 30 s"""
    times = np.linspace(0.0, 0.06, 61)
    ref = [survival(s) for s in evolve_times(build_generator(COOLED), initial_distribution(COOLED, 45), times)]
    start = time.perf_counter()
    summary = ssa.run_ensemble(COOLED, 45, 0.06, 10_000, base_seed=12345, times=times, mirror=True)
    elapsed = time.perf_counter() - start
    z = ssa.survival_z_scores(summary, ref)
    print(f"max |z| {z.max():.2f}, SSA survival {summary.survival[-1]:.4f} vs {ref[-1]:.4f}, {elapsed:.2f} s")
    assert np.all(z <= 3.0)
    assert elapsed < 30.0


def test_c08_small_ladder_exactness():
    """8. L = 12 random generators agree with a dense matrix exponential to 1e-8"""
    rng = np.random.default_rng(777)
    worst = 0.0
    for _ in range(20):
        gh, gc, nbar = rng.uniform(0, 150), rng.uniform(0, 150), rng.uniform(0, 10)
        p0 = rng.dirichlet(np.ones(12))
        times = np.sort(rng.uniform(0, 0.2, 6))
        snaps = evolve_times(build_generator(TrapModel(12, gh, gc, nbar)), LevelDistribution(p0), times)
        dense = dense_generator(12, gh, gc, nbar)
        for snap, t in zip(snaps, times):
            ref = expm_taylor(dense * t) @ p0
            worst = max(worst, np.abs(snap.probs - ref).max() / np.abs(ref).max())
    print(f"max relative error {worst:.2e}")
    assert worst <= 1e-8


def test_c09_spectrum_pipeline():
    """9. synthetic spectrum at omega = gamma within 10%; gamma_from_spectrum(1000, 1e-4) = 100 pi^2"""
    gamma, c = 50.0, 2e-6
    trace = exponential_noise(400_000, 1e-3, gamma, variance=c, rng=31)
    est = spectrum_at(trace, gamma, max_lag=2000)
    exact = 2 / math.pi * c * gamma / (gamma**2 + gamma**2)
    print(f"S(gamma) = {est:.4e}, expected {exact:.4e}")
    assert est == pytest.approx(exact, rel=0.1)
    assert gamma_from_spectrum(1000.0, 1e-4) == math.pi**2 * 100


def test_c10_invariant_suite():
    """10. invariant suite passes and catches a sign error in either generator"""
    clean = run_checks()
    bad_heat = run_checks(heating=heating_with_sign_error)
    bad_cool = run_checks(cooling=cooling_with_sign_error)
    for r in clean:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}")
    assert all(r.passed for r in clean)
    assert not all(r.passed for r in bad_heat)
    assert not all(r.passed for r in bad_cool)
