"""Command-line front end: profile construction, simulation, verification,
and parameter sweeps, all driven by key = value configs.

Exit codes: 0 success, 2 config error, 3 shooting failure, 4 solver blow-up,
5 verification failure.  The DIFFWAVE_LOG environment variable sets the log
level (DEBUG, INFO, WARNING, ...).
"""
from __future__ import annotations

import argparse
import concurrent.futures
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (WeightKernel, boundary_report, check_weighted_estimate,
                       energy_ledger, fit_decay_rate, norm_series,
                       perturbation, tail_vanishing_check)
from .config import ExperimentConfig, load_config
from .profile import (DiffusionWave, ShootingError, check_decay_table,
                      load_profile, save_profile, solve_profile_cauchy,
                      solve_profile_halfline)
from .reporting import (build_manifest, content_hash, write_diagnostics,
                        write_manifest, write_report, write_series,
                        write_snapshots, write_ledger)
from .solver import BlowUpError, ConfigError, DirichletProblem, run
from .verify import run_checks

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SHOOTING = 3
EXIT_BLOWUP = 4
EXIT_VERIFY = 5

DECAY_TABLE_CASES = ((1, 0, 2), (1, 0, math.inf), (2, 0, 2), (0, 1, math.inf))

log = logging.getLogger("diffwave")


def _setup_logging():
    level = os.environ.get("DIFFWAVE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg.override_seed(args.seed)
    return cfg


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# profile


def _solve_profile(cfg: ExperimentConfig):
    params = cfg.build_params()
    if cfg.problem == "dirichlet":
        return params, solve_profile_halfline(params, cfg.beta,
                                              tol=cfg.profile_tol,
                                              dxi=cfg.profile_dxi)
    return params, solve_profile_cauchy(params, tol=cfg.profile_tol,
                                        dxi=cfg.profile_dxi)


def cmd_profile(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    params, prof = _solve_profile(cfg)
    profile_path = out / Path(cfg.profile_file).name
    save_profile(profile_path, prof, params)
    log.info("profile written to %s", profile_path)

    report = {
        "anchor": {"xi0": prof.anchor.xi0, "phi0": prof.anchor.phi0,
                   "slope0": prof.anchor.slope0},
        "residual_left": prof.residual_left,
        "residual_right": prof.residual_right,
        "constant": prof.is_constant,
        "profile_hash": content_hash(profile_path),
    }
    decay_rows = []
    if prof.is_constant:
        report["envelope"] = None
    else:
        env = prof.envelope
        report["envelope"] = {"c_amp": env.c_amp, "c0": env.c0, "r2": env.r2}
        wave = DiffusionWave(prof, params)
        times = np.geomspace(10.0, 1000.0, 25)
        for k, j, p in DECAY_TABLE_CASES:
            row = check_decay_table(wave, times, k, j, p)
            row.update(k=k, j=j, p="inf" if p == math.inf else p)
            decay_rows.append(row)
        report["decay_table"] = decay_rows
    write_report(out / f"profile_report.{_ext(cfg)}", report, cfg.report_format)
    if cfg.figures:
        from .figures import save_profile_figures

        save_profile_figures(out, prof, decay_rows)
    return EXIT_OK


def _ext(cfg: ExperimentConfig) -> str:
    return "json" if cfg.report_format == "json" else "txt"


# ---------------------------------------------------------------------------
# simulate


def _wave_for(cfg: ExperimentConfig, out: Path, extra_dirs=()):
    """Load the profile file for wave-based kinds; None for the Neumann kind.

    Relative paths are searched in the output directory first, then in any
    extra directories (a sweep row falls back to the sweep's top level)."""
    if cfg.problem == "neumann":
        return None, None
    path = Path(cfg.profile_file)
    if not path.is_absolute():
        for base in (out, *extra_dirs):
            candidate = Path(base) / path
            if candidate.exists():
                path = candidate
                break
        else:
            path = out / path
    if not path.exists():
        raise ConfigError(
            f"profile file {path} not found; run the profile command first")
    prof, prof_params = load_profile(path)
    params = cfg.build_params()
    mismatches = [n for n in ("a", "b", "lam", "mu", "kappa", "u_minus", "u_plus")
                  if abs(getattr(params, n) - getattr(prof_params, n)) > 1e-12]
    if mismatches:
        raise ConfigError(
            f"profile file {path} was built for different parameters: "
            f"{', '.join(mismatches)} differ")
    if cfg.problem == "dirichlet" and not prof.halfline:
        raise ConfigError(f"profile file {path} is a full-line profile; the "
                          "Dirichlet problem needs a half-line profile")
    return DiffusionWave(prof, params), content_hash(path)


def _simulate_pipeline(cfg: ExperimentConfig, out: Path, profile_dirs=()) -> dict:
    """Run + analyze + write artifacts; shared by simulate and sweep rows."""
    wave, profile_hash = _wave_for(cfg, out, profile_dirs)
    run_config = cfg.build_run_config(wave)
    kernel = WeightKernel(alpha=cfg.alpha,
                          domain="full_line" if cfg.problem == "cauchy"
                          else "half_line")
    try:
        result = run(run_config)
    except BlowUpError as exc:
        manifest = build_manifest(cfg, profile_hash=profile_hash)
        manifest["status"] = f"blow-up at t = {exc.t:g}"
        write_manifest(out / "manifest.txt", manifest)
        if exc.last_state is not None:
            w, z = perturbation(exc.last_state, run_config.kind,
                                run_config.params)
            from .solver import RunResult

            partial = RunResult(config=run_config,
                                times=np.array([exc.last_state.t]),
                                states=(exc.last_state,),
                                max_u=np.array([np.max(np.abs(exc.last_state.u))]),
                                max_rho=np.array([np.max(np.abs(exc.last_state.rho))]),
                                mass=np.array([0.0]), wall_clock=np.array([0.0]),
                                n_steps=0)
            write_snapshots(out, partial, [(w, z)])
        raise

    series = norm_series(result)
    perts = [perturbation(s, run_config.kind, run_config.params)
             for s in result.states]
    ledger = energy_ledger(result, cfg.resolved_energy_k())
    boundary = None
    if cfg.problem != "cauchy":
        boundary = boundary_report(result)

    manifest = build_manifest(cfg, result=result, profile_hash=profile_hash)
    manifest["status"] = "ok"
    write_manifest(out / "manifest.txt", manifest)
    manifest_hash_value = content_hash(out / "manifest.txt")

    write_series(out / "series.txt", series)
    write_ledger(out / "ledger.txt", ledger)
    write_diagnostics(out / "diagnostics.txt", result)
    write_snapshots(out, result, perts)

    window = cfg.fit_window()
    report: dict = {"manifest_hash": manifest_hash_value, "status": "ok",
                    "delta": run_config.params.delta,
                    "n_functional_max": float(series.n_functional[-1])}
    fits = {}
    for label, values in (("wx", series.w_norms[:, 1]),
                          ("zx", series.z_norms[:, 1]),
                          ("wxx", series.w_norms[:, 2]),
                          ("zxx", series.z_norms[:, 2]),
                          ("good", series.good_norm)):
        try:
            fit = fit_decay_rate(series.times, values, window)
            fits[label] = {"exponent": fit.exponent, "r2": fit.r2,
                           "window": list(fit.window)}
        except ValueError as exc:
            fits[label] = {"error": str(exc)}
    report["decay_fits"] = fits
    estimate = check_weighted_estimate(result, kernel)
    report["weighted_estimate"] = estimate
    if boundary is not None:
        summary = {k: float(np.max(v)) for k, v in boundary.items()
                   if k != "times"}
        report["boundary_max"] = summary
        names = [k for k in boundary if k != "times"]
        from .reporting import write_columns

        write_columns(out / "boundary.txt", ["t", *names],
                      [boundary["times"], *[boundary[k] for k in names]],
                      header_lines=["boundary diagnostics at x = 0"])
    try:
        tail = tail_vanishing_check(series.times, series.w_norms[:, 1] ** 2)
        report["tail_vanishing_wx2"] = tail
    except ValueError:
        pass
    write_report(out / f"report.{_ext(cfg)}", report, cfg.report_format)

    if cfg.figures:
        from .figures import save_run_figures

        save_run_figures(out, result, series, perts, boundary)
    return report


def cmd_simulate(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    _simulate_pipeline(cfg, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    report = run_checks(fault=args.fault)
    write_report(out / f"verify_report.{_ext(cfg)}", report, cfg.report_format)
    for check in report["checks"]:
        print(f"{check['name']}: {check['status'].upper()}")
    print(f"overall: {'PASS' if report['all_pass'] else 'FAIL'}")
    return EXIT_OK if report["all_pass"] else EXIT_VERIFY


# ---------------------------------------------------------------------------
# sweep


def _parse_axis(spec: str):
    if "=" not in spec:
        raise ConfigError("axis must look like key=v1,v2,v3")
    key, raw = spec.split("=", 1)
    values = [v.strip() for v in raw.split(",") if v.strip()]
    if not values:
        raise ConfigError("axis has no values")
    return key.strip(), values


def _sweep_row(payload) -> dict:
    """One sweep row; runs in its own process when workers > 1."""
    config_path, key, value, row_dir, seed = payload
    row = {"key": key, "value": value, "dir": str(row_dir)}
    try:
        cfg = load_config(config_path) if config_path else ExperimentConfig()
        if seed is not None:
            cfg.override_seed(seed)
        from .config import parse_config_text

        base = cfg.as_mapping()
        base[key] = value
        text = "\n".join(f"{k} = {v}" for k, v in base.items())
        cfg = parse_config_text(text)
        out = Path(row_dir)
        out.mkdir(parents=True, exist_ok=True)
        report = _simulate_pipeline(cfg, out, profile_dirs=(out.parent,))
        row["status"] = "ok"
        row["n_functional_max"] = report["n_functional_max"]
        for label in ("wx", "zx", "wxx"):
            fit = report["decay_fits"].get(label, {})
            row[f"slope_{label}"] = fit.get("exponent")
        row["value"] = float(value)
    except Exception as exc:  # rows fail independently; the sweep continues
        row["status"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
        try:
            row["value"] = float(value)
        except ValueError:
            pass
    return row


def cmd_sweep(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    key, values = _parse_axis(args.axis)
    from .config import _FIELD_BY_KEY

    if key not in _FIELD_BY_KEY:
        raise ConfigError(f"unknown sweep key {key!r}")
    payloads = [(args.config, key, v, out / f"row_{i:02d}_{key}={v}", args.seed)
                for i, v in enumerate(values)]
    if args.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(args.workers) as pool:
            rows = list(pool.map(_sweep_row, payloads))
    else:
        rows = [_sweep_row(p) for p in payloads]

    table_lines = ["# sweep results", f"# axis: {key}",
                   "# columns: value status slope_wx slope_zx slope_wxx n_functional_max"]
    for row in rows:
        if row["status"] == "ok":
            table_lines.append(
                f"{row['value']} ok {row['slope_wx']} {row['slope_zx']} "
                f"{row['slope_wxx']} {row['n_functional_max']}")
        else:
            table_lines.append(f"{row.get('value', 'nan')} error nan nan nan nan")
    (out / "sweep_table.txt").write_text("\n".join(table_lines) + "\n")
    write_report(out / f"sweep_report.{_ext(cfg)}",
                 {"axis": key, "rows": rows}, cfg.report_format)
    if cfg.figures:
        from .figures import save_sweep_figure

        save_sweep_figure(out, key, rows)
    failures = sum(1 for r in rows if r["status"] != "ok")
    log.info("sweep finished: %d rows, %d failed", len(rows), failures)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diffwave",
        description="Diffusion-wave laboratory for the 1D chemotaxis system")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=str, default=None,
                       help="key = value config file (defaults apply otherwise)")
        p.add_argument("--out", type=str, default="out",
                       help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the noise seeds")

    p = sub.add_parser("profile", help="construct and export a wave profile")
    common(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("simulate", help="run one simulation and its analysis")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the self-verification suite")
    common(p)
    p.add_argument("--fault", type=str, default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="run a one-axis parameter sweep")
    common(p)
    p.add_argument("--axis", type=str, required=True,
                   help="sweep axis, e.g. z0_amp=0.005,0.01,0.02")
    p.add_argument("--workers", type=int, default=1,
                   help="concurrent sweep rows")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ShootingError as exc:
        print(f"shooting failure: {exc}", file=sys.stderr)
        return EXIT_SHOOTING
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
