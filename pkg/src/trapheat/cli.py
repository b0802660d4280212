"""Command-line front end.

Subcommands::

    trapheat simulate      survival and conditional moments vs time
    trapheat scan-cooling  survival at the horizon for several cooling times
    trapheat spectrum      heating rate from a measured noise trace
    trapheat validate      cross-module invariant checks

Exit codes: 0 success, 1 validation failure, 2 usage or input error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import spectrum as spec
from . import ssa
from .config import ConfigError, RunConfig, load_config, merge, preset_inverse_ms
from .integrate import IntegrationError, evolve_times
from .model import PRESETS, S_PER_MS, build_generator, initial_distribution, rate_from_inverse_ms
from .observables import reduce_series
from .validation import run_checks

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _fmt(x):
    return repr(float(x))


def _write_table(path, command, cfg, columns, rows, trailer=()):
    lines = [f"# trapheat {command}"]
    if cfg is not None:
        lines += [f"# {line}" for line in cfg.to_text().splitlines()]
    lines.append("# " + ",".join(columns))
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    lines += [f"# {t}" for t in trailer]
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _add_model_flags(p):
    s = argparse.SUPPRESS
    p.add_argument("--config", default=s, help="key = value configuration file")
    p.add_argument("--levels", type=int, default=s)
    heat = p.add_mutually_exclusive_group()
    heat.add_argument("--gamma-heat-inv-ms", type=float, default=s, help="1/gamma_heat in ms")
    heat.add_argument("--gamma-heat", type=float, default=s, help="gamma_heat in 1/s")
    heat.add_argument("--preset", choices=sorted(PRESETS), default=s, help="measured heating rate")
    cool = p.add_mutually_exclusive_group()
    cool.add_argument("--gamma-cool-inv-ms", type=float, default=s, help="1/gamma_cool in ms")
    cool.add_argument("--gamma-cool", type=float, default=s, help="gamma_cool in 1/s")
    p.add_argument("--nbar", type=float, default=s)
    p.add_argument("--n0", type=int, default=s)
    p.add_argument("--horizon-ms", type=float, default=s)
    p.add_argument("--samples", type=int, default=s)
    p.add_argument("--seed", type=int, default=s)
    p.add_argument("--n-traj", type=int, default=s)
    p.add_argument("--mode", choices=("master", "ssa", "both"), default=s)
    p.add_argument("--out", default=s, help="output file (default: stdout)")


def _config_from(args, skip=()):
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "func", "config", *skip)}
    if "preset" in flags:
        flags["gamma_heat_inv_ms"] = preset_inverse_ms(flags.pop("preset"))
    if "snapshot_times_ms" in flags:
        flags["snapshot_times_ms"] = _float_list(flags["snapshot_times_ms"])
    file_values = load_config(args.config) if hasattr(args, "config") else {}
    return merge(file_values, flags)


def _float_list(text):
    if isinstance(text, tuple):
        return text
    try:
        values = tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from None
    if not values:
        raise ConfigError("empty list")
    return values


def _master_series(cfg, times_s):
    model = cfg.model()
    try:
        init = initial_distribution(model, cfg.n0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return evolve_times(build_generator(model), init, times_s)


def cmd_simulate(args):
    cfg = _config_from(args)
    times = np.linspace(0.0, cfg.horizon, cfg.samples)
    t_ms = times / S_PER_MS
    columns, data = ["t_ms"], [t_ms]
    series = None
    if cfg.mode in ("master", "both"):
        series = reduce_series(_master_series(cfg, times))
        columns += ["survival", "mean_n", "std_n", "escape_rate_per_ms"]
        data += [series.survival, series.mean_n, series.std_n, series.escape_rate * S_PER_MS]
    if cfg.mode in ("ssa", "both"):
        model = cfg.model()
        try:
            ens = ssa.run_ensemble(model, cfg.n0, cfg.horizon, cfg.n_traj, cfg.seed, times=times, mirror=True)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        columns += ["survival_ssa", "std_error_ssa"]
        data += [ens.survival, ens.std_error]
        if series is not None:
            columns.append("z_score")
            data.append(ssa.survival_z_scores(ens, series.survival))
        if cfg.lifetimes:
            ssa.write_lifetimes(cfg.lifetimes, ens)
    _write_table(cfg.out, "simulate", cfg, columns, zip(*data))

    if cfg.snapshots and cfg.mode in ("master", "both"):
        snap_ms = sorted(t for t in cfg.snapshot_times_ms if 0 <= t <= cfg.horizon_ms)
        snaps = _master_series(cfg, np.array(snap_ms) * S_PER_MS)
        rows = [(t, n, p) for t, d in zip(snap_ms, snaps) for n, p in enumerate(d.probs)]
        _write_table(cfg.snapshots, "simulate snapshots", cfg, ["t_ms", "n", "P"], rows)
    return EXIT_OK


def scan_cooling(cfg: RunConfig, inv_ms_values):
    """Survival at the horizon for each ``1/gamma_cool`` (ms); returns (rows, best)."""
    rows = []
    for inv in inv_ms_values:
        run = merge({}, {"gamma_cool_inv_ms": inv}, base=cfg)
        final = _master_series(run, np.array([0.0, run.horizon]))[-1]
        rows.append((inv, float(final.clamped().sum())))
    best = max(rows, key=lambda r: r[1])[0]
    return rows, best


def cmd_scan_cooling(args):
    values = _float_list(args.values_ms)
    cfg = _config_from(args, skip=("values_ms",))
    rows, best = scan_cooling(cfg, values)
    _write_table(
        cfg.out,
        "scan-cooling",
        cfg,
        ["inv_gamma_cool_ms", "survival_at_horizon"],
        rows,
        trailer=[f"argmax inv_gamma_cool_ms = {best!r}"],
    )
    print(f"best confinement at 1/gamma_cool = {best:g} ms", file=sys.stderr)
    return EXIT_OK


def spectrum_report(trace, nu_tr, max_lag=None, taper=None):
    s_hz, gamma = spec.gamma_from_trace(trace, nu_tr, max_lag, taper)
    return {
        "nu_tr_hz": nu_tr,
        "s_at_2nu_per_hz": s_hz,
        "gamma_per_s": gamma,
        "inv_gamma_ms": math.inf if gamma == 0 else 1.0 / gamma / S_PER_MS,
        "max_lag": len(trace) // 4 if max_lag is None else max_lag,
        "taper": taper or "none",
        "n_samples": len(trace),
    }


def cmd_spectrum(args):
    if args.preset:
        inv = PRESETS[args.preset]
        report = {"preset": args.preset, "inv_gamma_ms": inv, "gamma_per_s": rate_from_inverse_ms(inv)}
    else:
        if args.trace is None or args.nu_tr is None:
            raise UsageError("spectrum needs a trace file and --nu-tr (or --preset)")
        if not args.nu_tr > 0:
            raise UsageError("--nu-tr must be positive")
        trace = spec.read_trace(args.trace)
        try:
            report = spectrum_report(trace, args.nu_tr, args.max_lag, args.taper)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        if "s_at_2nu_per_hz" in report:
            print(f"S_eps(2 nu_tr) = {report['s_at_2nu_per_hz']!r} 1/Hz")
        print(f"gamma_eps = {report['gamma_per_s']!r} 1/s")
        print(f"1/gamma_eps = {report['inv_gamma_ms']!r} ms")
    return EXIT_OK


def cmd_validate(args):
    results = run_checks()
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return EXIT_OK if ok else EXIT_VALIDATION


def build_parser():
    parser = argparse.ArgumentParser(prog="trapheat", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="survival and moments vs time")
    _add_model_flags(p)
    p.add_argument("--snapshots", default=argparse.SUPPRESS, help="write P(n) snapshots to this file")
    p.add_argument("--snapshot-times-ms", default=argparse.SUPPRESS, help="comma-separated snapshot times")
    p.add_argument("--lifetimes", default=argparse.SUPPRESS, help="write SSA escape times to this file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan-cooling", help="survival at the horizon vs cooling time")
    _add_model_flags(p)
    p.add_argument("--values-ms", required=True, help="comma-separated 1/gamma_cool values in ms")
    p.set_defaults(func=cmd_scan_cooling)

    p = sub.add_parser("spectrum", help="heating rate from a noise trace")
    p.add_argument("trace", nargs="?", help="two-column file: time_seconds, epsilon")
    p.add_argument("--nu-tr", type=float, help="trap frequency in Hz")
    p.add_argument("--max-lag", type=int, help="autocorrelation lags (default N/4)")
    p.add_argument("--taper", choices=("bartlett", "hann"))
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("validate", help="run the invariant suite")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError, spec.TraceFormatError, OSError) as exc:
        print(f"trapheat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationError as exc:
        print(f"trapheat: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
