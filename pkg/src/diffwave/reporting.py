"""Run artifacts: manifests, columnar text dumps, and structured reports.

A run directory is reproducible from its manifest alone: the manifest holds
every config field, the content hash of the profile file it consumed, and the
scheme constants.  Series and snapshot files are plain columns with a
'#'-prefixed header naming columns and units, consumable by any plotting
tool; reports are JSON (or flattened key = value text) and embed the manifest
hash so results stay tied to the configuration that produced them.
"""
from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import EnergyLedger, PerturbSeries
from .config import ExperimentConfig
from .solver import RunResult

__all__ = [
    "content_hash",
    "write_manifest",
    "read_manifest",
    "build_manifest",
    "write_columns",
    "read_columns",
    "write_snapshots",
    "write_series",
    "write_ledger",
    "write_diagnostics",
    "write_report",
]

SCHEME = "imex-be-fluxform-v1"


def content_hash(path) -> str:
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return f"sha256:{digest}"


def build_manifest(config: ExperimentConfig, result: RunResult | None = None,
                   profile_hash: str | None = None) -> dict:
    manifest = {"schema": "diffwave-run-v1", "version": __version__,
                "scheme": SCHEME}
    manifest.update(config.as_mapping())
    if result is not None:
        manifest["resolved_dt"] = repr(result.config.dt)
        manifest["resolved_nodes"] = result.config.grid.n
        manifest["resolved_x0"] = repr(result.config.grid.x0)
        manifest["resolved_dx"] = repr(result.config.grid.dx)
        manifest["n_steps"] = result.n_steps
        manifest["delta"] = repr(result.config.params.delta)
    if profile_hash is not None:
        manifest["profile_hash"] = profile_hash
    return manifest


def write_manifest(path, manifest: dict) -> None:
    lines = ["# diffwave run manifest"]
    for key, val in manifest.items():
        lines.append(f"{key} = {val}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_manifest(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        body = line.split("#", 1)[0].strip()
        if not body or "=" not in body:
            continue
        key, val = (part.strip() for part in body.split("=", 1))
        out[key] = val
    return out


def write_columns(path, names, columns, header_lines=()) -> None:
    """Columnar text: '#' header lines, then one '# columns: ...' line, then
    rows with full float precision (repr round-trips exactly)."""
    columns = [np.asarray(c) for c in columns]
    lines = [f"# {h}" for h in header_lines]
    lines.append("# columns: " + " ".join(names))
    for row in zip(*columns):
        lines.append(" ".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_columns(path):
    """Returns (names, columns) from a write_columns file."""
    names = None
    rows = []
    for line in Path(path).read_text().splitlines():
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            if "columns:" in s:
                names = s.split("columns:", 1)[1].split()
            continue
        rows.append([float(v) for v in s.split()])
    data = np.array(rows) if rows else np.empty((0, 0))
    cols = [data[:, i] for i in range(data.shape[1])] if data.size else []
    return names, cols


def write_snapshots(outdir, result: RunResult, perturbations) -> list:
    """One file per snapshot: x, u, rho, w, z columns.  perturbations is the
    list of (w, z) pairs aligned with result.states."""
    outdir = Path(outdir)
    written = []
    x = result.grid.nodes
    for i, state in enumerate(result.states):
        w, z = perturbations[i]
        path = outdir / f"snapshot_{i:04d}.txt"
        write_columns(
            path, ["x", "u", "rho", "w", "z"],
            [x, state.u, state.rho, w, z],
            header_lines=[f"snapshot {i} at t = {state.t!r}",
                          "units: dimensionless"],
        )
        written.append(path)
    return written


def write_series(path, series: PerturbSeries) -> None:
    names = ["t",
             "w_l2", "wx_l2", "wxx_l2",
             "z_l2", "zx_l2", "zxx_l2",
             "wt_l2", "zt_l2",
             "good_l2", "good_dx_l2",
             "weighted_sum", "n_functional",
             "cum_d0", "cum_d1", "cum_d2", "cum_dt"]
    cols = [series.times,
            series.w_norms[:, 0], series.w_norms[:, 1], series.w_norms[:, 2],
            series.z_norms[:, 0], series.z_norms[:, 1], series.z_norms[:, 2],
            series.wt_norm, series.zt_norm,
            series.good_norm, series.good_dx_norm,
            series.weighted_sum, series.n_functional,
            series.cum_dissipation[:, 0], series.cum_dissipation[:, 1],
            series.cum_dissipation[:, 2], series.cum_time_deriv]
    write_columns(path, names, cols,
                  header_lines=["perturbation norm series",
                                "units: dimensionless; norms are discrete L2"])


def write_ledger(path, ledger: EnergyLedger) -> None:
    names = ["t", "quadratic", "quadratic_dx", "wx2", "zx2", "good2",
             "wxx2", "zxx2", "good_dx2", "boundary_flux"]
    cols = [ledger.times, ledger.quadratic, ledger.quadratic_dx,
            ledger.wx2, ledger.zx2, ledger.good2,
            ledger.wxx2, ledger.zxx2, ledger.good_dx2, ledger.boundary_flux]
    write_columns(path, names, cols,
                  header_lines=[f"energy ledger, K = {ledger.K!r}"])


def write_diagnostics(path, result: RunResult) -> None:
    write_columns(path, ["t", "max_u", "max_rho", "mass"],
                  [result.times, result.max_u, result.max_rho, result.mass],
                  header_lines=["per-snapshot diagnostics",
                                "mass is the trapezoidal integral of u"])


def _sanitize(value):
    if isinstance(value, dict):
        return {k: _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_sanitize(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def _flatten(prefix, value, lines):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, lines)
    elif isinstance(value, list):
        lines.append(f"{prefix} = {','.join(str(v) for v in value)}")
    else:
        lines.append(f"{prefix} = {value}")


def write_report(path, payload: dict, fmt: str = "json") -> None:
    """Machine-readable report; fmt 'json' or flattened key = value 'text'."""
    payload = _sanitize(payload)
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    elif fmt == "text":
        lines: list = []
        _flatten("", payload, lines)
        path.write_text("\n".join(lines) + "\n")
    else:
        raise ValueError(f"unknown report format {fmt!r}")
