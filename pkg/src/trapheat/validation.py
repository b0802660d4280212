"""Cross-module invariant checks.

:func:`run_checks` exercises the generators, the propagator, the moment
equations and the Monte Carlo simulator against each other.  The generator
builders are parameters so that a deliberately broken builder can be fed in
to confirm the checks notice it.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from . import ssa
from .integrate import IntegratorConfig, TimeGrid, evolve, moment_oracle
from .model import (
    TrapModel,
    build_cooling_generator,
    build_heating_generator,
    combine_generators,
    initial_distribution,
    point_distribution,
)
from .observables import conditional_moments, survival

__all__ = ["CheckResult", "run_checks", "SSA_CHECK_SEED"]

SSA_CHECK_SEED = 20240601


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def _heating_column_sums(heating):
    model = TrapModel(40, gamma_heat=3.7)
    gen = heating(model)
    sums = gen.column_sums()
    n = np.arange(model.levels)
    expected = np.zeros(model.levels)
    expected[-2:] = -model.gamma_heat / 8 * (n[-2:] + 2) * (n[-2:] + 1)
    err = np.abs(sums - expected).max()
    return err <= 1e-12 * np.abs(gen.diagonal).max(), f"max deviation {err:.3g} 1/s"


def _cooling_column_sums(cooling):
    model = TrapModel(40, gamma_cool=2.3, nbar=1.7)
    gen = cooling(model)
    sums = gen.column_sums()
    expected = np.zeros(model.levels)
    expected[-1] = -model.gamma_cool * model.nbar * model.levels
    err = np.abs(sums - expected).max()
    return err <= 1e-12 * np.abs(gen.diagonal).max(), f"max deviation {err:.3g} 1/s"


def _sign_structure(heating, cooling):
    model = TrapModel(40, gamma_heat=3.7, gamma_cool=2.3, nbar=1.7)
    problems = []
    for label, build in (("heating", heating), ("cooling", cooling)):
        problems += [f"{label}: {p}" for p in build(model).violations()]
    return not problems, "; ".join(problems) or "off-diagonal >= 0, diagonal <= 0"


def _parity(heating):
    model = TrapModel(60, gamma_heat=1 / 0.023)
    gen = heating(model)
    snaps = evolve(gen, point_distribution(model, 20), TimeGrid(0.0, 0.02, 11))
    odd = max(s.probs[1::2].sum() for s in snaps)
    coupling = max(np.abs(gen.band(1)).max(), np.abs(gen.band(-1)).max())
    return odd < 1e-14 and coupling == 0, f"max odd-level mass {odd:.3g}"


def _detailed_balance(cooling):
    model = TrapModel(60, gamma_cool=1.0, nbar=4.0)
    gen = cooling(model)
    n = np.arange(model.levels)
    g = (model.nbar / (model.nbar + 1)) ** n
    down = gen.band(-1)[1:] * g[1:]  # flux n+1 -> n
    up = gen.band(1)[:-1] * g[:-1]  # flux n -> n+1
    err = np.abs(down - up).max() / np.abs(up).max()
    return err < 1e-12, f"max relative flux imbalance {err:.3g}"


def _mass_and_positivity(heating, cooling):
    model = TrapModel.from_inverse_ms(100, heat_ms=23, cool_ms=2, nbar=10)
    gen = combine_generators(heating(model), cooling(model))
    # loose tolerances so this check, not the integrator, reports the violation
    loose = IntegratorConfig(neg_tolerance=1.0, mass_tolerance=1.0)
    snaps = evolve(gen, initial_distribution(model, 45), TimeGrid(0.0, 0.06, 61), loose)
    mass = np.array([s.probs.sum() for s in snaps])
    low = min(s.probs.min() for s in snaps)
    growth = np.diff(mass).max()
    ok = growth <= 1e-9 and low >= -1e-12
    return ok, f"largest sample-to-sample mass change {growth:+.3g}, min entry {low:.3g}"


def _moment_agreement(heating, cooling):
    """Compare with the open-ladder moments at samples with escaped mass < 1e-10."""
    details = []
    ok = True
    cases = (
        (TrapModel(600, gamma_heat=1 / 0.023), 10, TimeGrid(0.0, 0.004, 9)),
        (TrapModel.from_inverse_ms(800, heat_ms=23, cool_ms=2, nbar=10), 45, TimeGrid(0.0, 0.004, 9)),
    )
    for model, start, grid in cases:
        gen = combine_generators(heating(model), cooling(model))
        snaps = evolve(gen, point_distribution(model, start), grid)
        oracle = moment_oracle(model, start, 0.0, grid)
        err, used = 0.0, 0
        for snap, (mean, var) in zip(snaps, oracle):
            if 1 - survival(snap) >= 1e-10:
                continue
            used += 1
            m, sd = conditional_moments(snap)
            err = max(err, abs(m - mean) / mean, abs(sd**2 - var) / max(var, 1.0))
        ok = ok and err <= 1e-4 and used >= len(snaps) // 2
        details.append(f"L={model.levels}: rel err {err:.2g} over {used} samples")
    return ok, ", ".join(details)


def _ssa_agreement(heating):
    model = TrapModel(6, gamma_heat=40.0)
    gen = heating(model)
    times = np.linspace(0.0, 0.05, 11)
    p0 = point_distribution(model, 1).probs
    dense = gen.to_dense()
    ref = np.array([scipy.linalg.expm(dense * t) @ p0 for t in times]).sum(axis=1)
    summary = ssa.run_ensemble(model, 1, times[-1], 4000, SSA_CHECK_SEED, times=times)
    worst = ssa.survival_z_scores(summary, ref).max()
    return worst <= 3.0, f"max |z| {worst:.2f} (seed {SSA_CHECK_SEED}, 4000 trajectories)"


def run_checks(heating=build_heating_generator, cooling=build_cooling_generator):
    """Run every invariant check; returns a list of :class:`CheckResult`."""
    checks = [
        ("heating column sums", lambda: _heating_column_sums(heating)),
        ("cooling column sums", lambda: _cooling_column_sums(cooling)),
        ("sign structure", lambda: _sign_structure(heating, cooling)),
        ("parity conservation", lambda: _parity(heating)),
        ("detailed balance", lambda: _detailed_balance(cooling)),
        ("mass monotonicity and positivity", lambda: _mass_and_positivity(heating, cooling)),
        ("moment-oracle agreement", lambda: _moment_agreement(heating, cooling)),
        ("SSA agreement (L=6)", lambda: _ssa_agreement(heating)),
    ]
    results = []
    for name, check in checks:
        try:
            passed, detail = check()
        except Exception as exc:  # a broken generator may make propagation itself fail
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail))
    return results
