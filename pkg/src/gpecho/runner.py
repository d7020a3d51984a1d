"""Execute configured runs and sweeps, write tables and manifests."""
from __future__ import annotations

import csv
import hashlib
import itertools
import json
import logging
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import find_temporal_nodes, measure_echoes, spectrum
from .config import RunConfig, config_to_dict, parse_config, resolve_scenario, scenario_to_cfg
from .errors import GPEchoError, InsufficientNodes, NoEchoFound

log = logging.getLogger(__name__)


@dataclass
class RunManifest:
    config: dict
    scenario: dict
    version: str
    wall_time: float
    backend: str
    status: str = "ok"
    outputs: dict[str, str] = field(default_factory=dict)  # relative path -> sha256
    metrics: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return NoEchoFound.exit_code if self.status == "no-echo-found" else 0

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "status": self.status,
            "backend": self.backend,
            "wall_time_s": self.wall_time,
            "config": self.config,
            "scenario": self.scenario,
            "outputs": self.outputs,
            "metrics": self.metrics,
            "warnings": self.warnings,
        }


def _fmt(x) -> str:
    # repr is locale independent and round-trips doubles exactly
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_table(path: Path, columns: dict[str, np.ndarray], formats=("csv",)) -> dict[str, str]:
    """Write one table as CSV (and a JSON mirror if requested); return path -> sha256."""
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    cols = [np.asarray(columns[n]) for n in names]
    cols = [c if np.issubdtype(c.dtype, np.integer) else c.astype(float) for c in cols]
    written = {}
    csv_path = path.with_suffix(".csv")
    with open(csv_path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_fmt(v) for v in row])
    written[csv_path] = _sha256(csv_path)
    if "json" in formats:
        json_path = path.with_suffix(".json")
        with open(json_path, "w", encoding="ascii") as fh:
            json.dump({"columns": names, "data": {n: c.tolist() for n, c in zip(names, cols)}}, fh)
        written[json_path] = _sha256(json_path)
    return written


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run(config: RunConfig) -> RunManifest:
    """Validate, simulate and write every requested output of one scenario."""
    started = time.perf_counter()
    sc = resolve_scenario(config)
    out = Path(config.output.dir)
    formats = tuple(config.output.formats)
    out.mkdir(parents=True, exist_ok=True)

    result = sc.simulate(backend=config.backend)
    manifest = RunManifest(config=config_to_dict(config),
                           scenario=scenario_to_cfg(sc).model_dump(mode="json"),
                           version=__version__, wall_time=0.0, backend=result.backend)
    written: dict[Path, str] = {}

    for rec in result.records:
        written |= write_table(out / "records" / rec.label, {
            "t": rec.times, "re_omega": rec.omega.real, "im_omega": rec.omega.imag,
            "abs2_omega": rec.intensity, "theta": result.theta}, formats)

    gamma0 = sc.numerics.gamma0_num
    if "spectrum" in sc.analyses:
        if not np.any(result.input.omega):
            manifest.warnings.append("spectrum skipped: input record is identically zero")
        else:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                spec_ = spectrum(result.output, result.input, gamma0,
                                half_width=sc.spectrum_half_width)
            manifest.warnings += [str(w.message) for w in caught]
            written |= write_table(out / "spectrum", {
                "omega_gamma0": spec_.omega_gamma0, "S": spec_.s_values}, formats)

    if "nodes" in sc.analyses:
        try:
            nodes = find_temporal_nodes(result.output, sc.node_after, sc.node_count)
        except InsufficientNodes as exc:
            manifest.warnings.append(str(exc))
            nodes = []
        written |= write_table(out / "nodes", {
            "k": np.arange(1, len(nodes) + 1), "t": np.asarray(nodes, float)}, formats)

    if "metrics" in sc.analyses:
        try:
            metrics = measure_echoes(result.output, result.input,
                                     None if sc.windows is None else list(sc.windows))
        except NoEchoFound as exc:
            manifest.status = "no-echo-found"
            manifest.warnings.append(f"no echo found: {exc}")
            metrics = []
        rows = [m.as_row() for m in metrics]
        manifest.metrics = rows
        table = {k: np.array([r[k] for r in rows], dtype=float)
                 for k in ("a_m", "b_m", "tau_m", "R_m", "F_m")}
        written |= write_table(out / "metrics", {"m": np.arange(1, len(rows) + 1), **table}, formats)

    manifest.outputs = {str(p.relative_to(out)): h for p, h in sorted(written.items())}
    manifest.wall_time = time.perf_counter() - started
    with open(out / "manifest.json", "w", encoding="ascii") as fh:
        json.dump(manifest.to_dict(), fh, indent=2)
    log.info("run %s finished in %.2f s (%s)", sc.name, manifest.wall_time, manifest.status)
    return manifest


def sweep_points(config: RunConfig) -> list[dict]:
    grid = config.sweep or {}
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def _point_config(config: RunConfig, params: dict, out_dir: Path) -> RunConfig:
    data = config_to_dict(config)
    data.pop("sweep", None)
    data["overrides"] = {**data.get("overrides", {}), **params}
    data["output"] = {**data.get("output", {}), "dir": str(out_dir)}
    return parse_config(data)


def _run_point(args):
    k, params, config = args
    row = {"point": k, **params, "status": "ok", "tau_1": np.nan, "R_1": np.nan, "F_1": np.nan,
           "error": ""}
    try:
        manifest = run(config)
        row["status"] = manifest.status
        if manifest.metrics:
            first = manifest.metrics[0]
            row.update(tau_1=first["tau_m"], R_1=first["R_m"], F_1=first["F_m"])
    except GPEchoError as exc:
        row.update(status=type(exc).__name__, error=str(exc))
    except Exception as exc:  # a broken point must not stop the sweep
        row.update(status="error", error=f"{type(exc).__name__}: {exc}")
    return row


def sweep(config: RunConfig) -> list[dict]:
    """Run every point of ``config.sweep`` into ``<out>/point_NNN`` and write a summary."""
    base = Path(config.output.dir)
    points = sweep_points(config)
    jobs = []
    for k, params in enumerate(points):
        jobs.append((k, params, _point_config(config, params, base / f"point_{k:03d}")))
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_run_point, jobs))
    else:
        rows = [_run_point(job) for job in jobs]

    base.mkdir(parents=True, exist_ok=True)
    keys = ["point", *(config.sweep or {}), "status", "tau_1", "R_1", "F_1", "error"]
    with open(base / "summary.csv", "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(keys)
        for row in rows:
            w.writerow([_fmt(row[k]) if isinstance(row[k], float) else row[k] for k in keys])
    with open(base / "summary.json", "w", encoding="ascii") as fh:
        json.dump([{k: (None if isinstance(row[k], float) and np.isnan(row[k]) else row[k])
                    for k in keys} for row in rows], fh, indent=2)
    return rows
