"""Command-line front end.

Subcommands::

    point   evaluate one scenario and print the full rate breakdown
    sweep   rate curves over distance (or families of m / v_s) to CSV
    mc      Monte Carlo validation report (analytic vs empirical) to CSV
    chaos   analytic vs empirical correction factor for a spreading band
    plot    render sweep/report CSV columns to a small SVG

Exit codes: 0 success, 1 numeric failure, 2 usage or config error.  The
default config path comes from ``--config`` or the QCDMA_CONFIG
environment variable.  All outputs are pure functions of (config, flags,
seed): repeated invocations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import montecarlo, network
from .chaos import correction_factor_from_psd, empirical_correction_factor, generate_phase_process
from .config import ConfigError, RunConfig, load_config
from .svgplot import render_line_plot

_CONFIG_ENV = "QCDMA_CONFIG"

_SWEEP_COLUMNS = (
    "d_km", "eta", "r1", "r2", "r_total", "r_baseline",
    "i_ab1", "chi1", "i_ab2", "chi2", "flag",
)


def _err(msg: str) -> None:
    print(f"qcdma: {msg}", file=sys.stderr)


def _load(args) -> RunConfig:
    path = args.config or os.environ.get(_CONFIG_ENV)
    if not path:
        raise ConfigError(
            f"no config file given (use --config or set {_CONFIG_ENV})"
        )
    cfg = load_config(path)
    for item in getattr(args, "set", None) or []:
        target, _, raw_value = item.partition("=")
        section, _, key = target.partition(".")
        if not (section and key and raw_value != ""):
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        cfg.set_value(section.strip(), key.strip(), raw_value.strip())
    for warning in cfg.warnings:
        _err(f"warning: {warning}")
    return cfg


def _open_out(path: str, force: bool):
    if path != "-" and os.path.exists(path) and not force:
        raise ConfigError(f"refusing to overwrite {path} (use --force)")
    return sys.stdout if path == "-" else open(path, "w", newline="")


def cmd_point(args) -> int:
    cfg = _load(args)
    params = cfg.to_params(distance_km=args.d)
    breakdown = network.secret_key_rate(params)
    flat = breakdown.flat()
    if args.json:
        print(json.dumps(flat))
    else:
        for key, value in flat.items():
            print(f"{key}={value!r}")
    return 0


def _grid(args) -> list[float]:
    if args.values is not None:
        try:
            vals = [float(v) for v in args.values.split(",") if v.strip() != ""]
        except ValueError:
            raise ConfigError(f"bad --values list: {args.values!r}") from None
        if not vals:
            raise ConfigError("empty --values list")
        return vals
    if args.min is None or args.max is None or args.step is None:
        raise ConfigError("give either --values or all of --min/--max/--step")
    if args.step <= 0 or args.min > args.max:
        raise ConfigError(
            f"bad grid: min={args.min} max={args.max} step={args.step}"
        )
    count = int(math.floor((args.max - args.min) / args.step + 1e-9)) + 1
    return [args.min + k * args.step for k in range(count)]


def _distance_grid(args) -> list[float]:
    if args.min is None and args.max is None and args.step is None:
        return [float(d) for d in range(0, 61)]
    if args.min is None or args.max is None or args.step is None:
        raise ConfigError("distance grid needs all of --min/--max/--step")
    if args.step <= 0 or args.min > args.max:
        raise ConfigError(
            f"bad grid: min={args.min} max={args.max} step={args.step}"
        )
    count = int(math.floor((args.max - args.min) / args.step + 1e-9)) + 1
    return [args.min + k * args.step for k in range(count)]


def _sweep_row(cfg: RunConfig, d: float) -> dict[str, float | str]:
    breakdown = network.secret_key_rate(cfg.to_params(distance_km=d))
    row = {
        "d_km": d,
        "eta": breakdown.eta,
        "r1": breakdown.user1.r,
        "r2": breakdown.user2.r,
        "r_total": breakdown.r_total,
        "r_baseline": breakdown.r_baseline,
        "i_ab1": breakdown.user1.i_ab,
        "chi1": breakdown.user1.chi,
        "i_ab2": breakdown.user2.i_ab,
        "chi2": breakdown.user2.chi,
    }
    if all(math.isfinite(v) for v in row.values()):
        row["flag"] = ""
    else:
        row = {k: (0.0 if not math.isfinite(v) else v) for k, v in row.items()}
        row["flag"] = "degenerate"
    return row


def _with_family_value(cfg: RunConfig, var: str, value: float) -> RunConfig:
    updated = RunConfig(values=dict(cfg.values), source=cfg.source)
    if var == "m":
        updated.values.pop(("chaos", "psd_omega_low"), None)
        updated.values.pop(("chaos", "psd_omega_high"), None)
        updated.values.pop(("chaos", "psd_density"), None)
        updated.values[("chaos", "m1")] = value
        updated.values[("chaos", "m2")] = value
    else:
        updated.values[("user1", "v_s")] = value
        updated.values[("user2", "v_s")] = value
    return updated


def cmd_sweep(args) -> int:
    cfg = _load(args)
    rows: list[dict[str, float | str]] = []
    if args.var == "d":
        grid = _grid(args)
        columns = _SWEEP_COLUMNS
        for d in grid:
            rows.append(_sweep_row(cfg, d))
    else:
        if args.values is None:
            raise ConfigError(f"--var {args.var} needs --values")
        family = _grid(args)
        distances = _distance_grid(args)
        columns = (args.var,) + _SWEEP_COLUMNS
        for value in family:
            sub = _with_family_value(cfg, args.var, value)
            for d in distances:
                row = _sweep_row(sub, d)
                row[args.var] = value
                rows.append(row)
    out = _open_out(args.out, args.force)
    try:
        out.write(",".join(columns) + "\n")
        for row in rows:
            out.write(
                ",".join(
                    str(row[c]) if c == "flag" else repr(float(row[c]))
                    for c in columns
                )
                + "\n"
            )
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _mc_rows(params, stats) -> list[tuple[str, float, float, float]]:
    """(quantity, analytic, empirical, std_err) rows for the report."""
    rows = []

    def add(name: str, analytic: float, stat: str) -> None:
        value, err = stats.stats[stat]
        rows.append((name, analytic, value, err))

    for u in (1, 2):
        add(f"var_x_b{u}", network.bob_variance(params, u), f"var_x_b{u}")
        add(f"cond_var_x_b{u}", network.conditional_variance(params, u),
            f"cond_var_x_b{u}")
        add(f"mi_{u}", network.mutual_information(params, u), f"mi_{u}")
        for mode in ("paper_literal", "derived"):
            alt = replace(params, xi_mode=mode, psi_mode=mode)
            cc = network.cross_covariances(alt, u)
            add(f"cov_x8_x_b{u}/xi={mode}", cc.xi, f"cov_x8_x_b{u}")
            add(f"cov_xn_prime_x_b{u}/psi={mode}", cc.psi, f"cov_xn_prime_x_b{u}")
        if stats.model == "explicit":
            add(f"var_x_b{u}/full_rotation",
                montecarlo.full_rotation_bob_variance(params, u), f"var_x_b{u}")
            add(f"cond_var_x_b{u}/full_rotation",
                montecarlo.full_rotation_conditional_variance(params, u),
                f"cond_var_x_b{u}")
            add(f"mi_{u}/full_rotation",
                montecarlo.full_rotation_mutual_information(params, u), f"mi_{u}")
            cc_full = montecarlo.full_rotation_cross_covariances(params, u)
            add(f"cov_x8_x_b{u}/xi=full_rotation", cc_full.xi, f"cov_x8_x_b{u}")
            add(f"cov_xn_prime_x_b{u}/psi=full_rotation", cc_full.psi,
                f"cov_xn_prime_x_b{u}")
            add(f"phase_factor_{u}", math.sqrt(params.m_for(u)), f"phase_factor_{u}")
    return rows


def cmd_mc(args) -> int:
    if args.samples < 10_000:
        raise ConfigError(f"--samples must be >= 10000, got {args.samples}")
    cfg = _load(args)
    params = cfg.to_params()
    if args.model == "averaged":
        batch = montecarlo.simulate_averaged(params, args.samples, args.seed)
    else:
        psd1, psd2 = cfg.psd_specs()
        batch = montecarlo.simulate_explicit_phase(
            params, psd1, psd2, args.samples, args.seed
        )
    stats = montecarlo.empirical_stats(batch)
    for name in stats.degenerate:
        _err(f"note: statistic {name} is degenerate (zero variance)")
    rows = _mc_rows(params, stats)
    out = _open_out(args.out, args.force)
    try:
        out.write("quantity,analytic,empirical,std_err,z_score\n")
        for name, analytic, value, err in rows:
            z = 0.0 if err == 0.0 else (value - analytic) / err
            out.write(f"{name},{analytic!r},{value!r},{err!r},{z!r}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_chaos(args) -> int:
    cfg = _load(args)
    spec, _ = cfg.psd_specs()
    dt = args.dt if args.dt is not None else 0.1 * math.pi / spec.omega_high
    duration = args.duration
    if duration is None:
        duration = max(16.0 * 2.0 * math.pi / spec.omega_low, 1100.0 * dt)
    m_closed = correction_factor_from_psd(spec).m
    m_quad = correction_factor_from_psd(spec, method="quadrature").m
    est = empirical_correction_factor(
        spec, realizations=args.realizations, duration=duration,
        dt=dt, seed=args.seed,
    )
    z = 0.0 if est.std_err == 0.0 else (est.m_hat - m_closed) / est.std_err
    print(f"m_analytic={m_closed!r}")
    print(f"m_quadrature={m_quad!r}")
    print(f"m_hat={est.m_hat!r}")
    print(f"std_err={est.std_err!r}")
    print(f"z_score={z!r}")
    if args.export_process:
        process = generate_phase_process(spec, duration, dt, args.seed)
        process.to_csv(args.export_process)
        _err(f"wrote one realization to {args.export_process}")
    return 0


def cmd_plot(args) -> int:
    try:
        with open(args.infile, "r", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise ConfigError(f"{args.infile}: empty CSV")
            fields = reader.fieldnames
            data = list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.infile}: {exc}") from exc
    if not data:
        raise ConfigError(f"{args.infile}: no data rows")
    y_cols = [c.strip() for c in args.y.split(",") if c.strip()]
    for col in [args.x] + y_cols:
        if col not in fields:
            raise ConfigError(
                f"{args.infile}: no column {col!r} (have: {', '.join(fields)})"
            )
    series: dict[str, tuple[list[float], list[float]]] = {}
    dropped = 0
    for col in y_cols:
        xs: list[float] = []
        ys: list[float] = []
        for row in data:
            x = float(row[args.x])
            y = float(row[col])
            if args.logy and y <= 0:
                dropped += 1
                continue
            xs.append(x)
            ys.append(y)
        series[col] = (xs, ys)
    if dropped:
        _err(f"note: dropped {dropped} nonpositive point(s) from log plot")
    if all(len(xs) == 0 for xs, _ in series.values()):
        raise ConfigError("nothing left to plot")
    svg = render_line_plot(
        series, xlabel=args.x, ylabel=",".join(y_cols), logy=args.logy
    )
    out = _open_out(args.out, args.force)
    try:
        out.write(svg)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcdma",
        description="Two-user chaotic-spreading CV-QKD link: rates, sweeps, "
        "Monte Carlo validation and plots.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", help=f"config file (default ${_CONFIG_ENV})")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="override a config value (repeatable)")

    p = sub.add_parser("point", help="evaluate one scenario")
    add_config(p)
    p.add_argument("--d", type=float, default=None, help="distance override (km)")
    p.add_argument("--json", action="store_true", help="emit a single JSON object")
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("sweep", help="rate curves to CSV")
    add_config(p)
    p.add_argument("--var", choices=("d", "m", "v_s"), required=True)
    p.add_argument("--min", type=float)
    p.add_argument("--max", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--values", help="comma-separated explicit values")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true", help="overwrite existing output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("mc", help="Monte Carlo validation report to CSV")
    add_config(p)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", choices=("averaged", "explicit"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("chaos", help="analytic vs empirical correction factor")
    add_config(p)
    p.add_argument("--realizations", type=int, default=1000)
    p.add_argument("--duration", type=float, default=None, help="seconds")
    p.add_argument("--dt", type=float, default=None, help="sample step (s)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--export-process", default=None, metavar="CSV",
                   help="also write one realization (t, delta, theta)")
    p.set_defaults(func=cmd_chaos)

    p = sub.add_parser("plot", help="render CSV columns to SVG")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True, help="comma-separated y columns")
    p.add_argument("--out", required=True)
    p.add_argument("--logy", action="store_true")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(str(exc))
        return 2
    except FileExistsError as exc:
        _err(str(exc))
        return 2
    except OSError as exc:
        _err(str(exc))
        return 2
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        _err(f"numeric failure: {exc}")
        return 1


def entry() -> None:
    sys.exit(main())
