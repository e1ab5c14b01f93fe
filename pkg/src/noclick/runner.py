"""Execute one configured command and persist its CSVs plus a run manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
import platform
import shutil
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__, analysis, dsff, freefermion, kernels
from .basis import FULL, enumerate_sector, sector_labels
from .cache import Solver, backend_tag
from .config import ConfigError, RunConfig, default_cache_dir
from .entanglement import default_subsystem
from .hamiltonian import Disorder

log = logging.getLogger(__name__)

#: disorder amplitude used by ``dsff`` when none is configured
DSFF_DISORDER = 0.05

SPEC_COLUMNS = ["model", "L", "h", "gamma", "J", "J2", "g", "disorder"]


@dataclass
class RunResult:
    tables: dict = field(default_factory=dict)  # file name -> (header, rows)
    failures: list = field(default_factory=list)
    cells: int = 0
    seeds: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def table(self, name, header):
        self.tables[name] = (list(header), [])
        return self.tables[name][1]

    @property
    def total_failure(self) -> bool:
        return self.cells > 0 and len(self.failures) >= self.cells


def fmt(v) -> str:
    """Round-trippable text for a CSV cell."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def csv_bytes(header, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue().encode()


def _spec_cells(spec):
    dis = spec.disorder.amplitude if spec.disorder is not None else 0.0
    return [spec.model, spec.L, spec.h, spec.gamma, spec.J, spec.J2, spec.g, dis]


def _solver(cfg: RunConfig) -> Solver:
    cache_dir = None if cfg.cache == "off" else (cfg.cache_dir or default_cache_dir())
    return Solver(cache_dir, cfg.cache)


def _pool_map(fn, tasks, jobs):
    """Order-preserving map; a process pool when ``jobs > 1``."""
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(min(jobs, len(tasks))) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


# -- commands ---------------------------------------------------------------


def cmd_spectrum(cfg: RunConfig, solver: Solver, res: RunResult):
    spec = cfg.model_spec()
    sectors = cfg.sectors()
    if sectors == "all":
        sectors = sector_labels(spec.L, z2=spec.has_z2) if spec.clean else [FULL]
    rows = res.table("spectrum.csv", SPEC_COLUMNS + ["sector", "re", "im"])
    for lab in sectors:
        res.cells += 1
        try:
            ev = solver.eigenvalues(spec, [lab])
        except (ValueError, MemoryError) as exc:
            res.failures.append({"sector": str(lab), "error": str(exc)})
            continue
        rows.extend(_spec_cells(spec) + [str(lab), z.real, z.imag] for z in ev)


def cmd_steady_state(cfg: RunConfig, solver: Solver, res: RunResult):
    spec = cfg.model_spec()
    L_A = cfg.L_A if cfg.L_A is not None else default_subsystem(spec.L)
    ss = solver.steady_state(spec)
    S = solver.entropy(spec, L_A)
    gap = solver.gap(spec, cfg.gap_mode)
    rows = res.table("steady_state.csv", SPEC_COLUMNS + ["sector", "re", "im", "gap_mode", "gap", "L_A", "S"])
    rows.append(_spec_cells(spec) + [str(ss.sector), ss.eigenvalue.real, ss.eigenvalue.imag, cfg.gap_mode, gap, L_A, S])
    res.cells = 1


def _entropy_cell(args):
    spec, L_A, solver = args
    solver = solver.fresh()
    try:
        return solver.entropy(spec, L_A), None, solver.stats
    except Exception as exc:
        return math.nan, f"{type(exc).__name__}: {exc}", solver.stats


def cmd_entropy_scan(cfg: RunConfig, solver: Solver, res: RunResult):
    gammas = cfg.grid_gamma or [cfg.gamma]
    Ls = sorted(cfg.L_list)
    tasks = []
    for gm in gammas:
        for L in Ls:
            L_A = cfg.L_A if cfg.L_A is not None else default_subsystem(L)
            tasks.append((cfg.model_spec(L=L, gamma=gm), L_A, solver))
    out = _pool_map(_entropy_cell, tasks, cfg.jobs)
    res.cells = len(tasks)
    rows = res.table("entropy.csv", ["L", "L_A", "gamma", "h", "J2", "g", "S"])
    series = {}
    for (spec, L_A, _), (S, err, stats) in zip(tasks, out):
        solver.stats.add(stats)
        if err is not None:
            res.failures.append({"L": spec.L, "gamma": spec.gamma, "error": err})
            continue
        rows.append([spec.L, L_A, spec.gamma, spec.h, spec.J2, spec.g, S])
        series.setdefault(spec.gamma, []).append((spec.L, S))
    crow = res.table("classification.csv", ["gamma", "h", "J2", "g", "kind", "log_a", "log_c", "flat_c",
                                            "rms_log", "rms_flat", "score", "margin", "min_slope", "spread"])
    for gm in gammas:
        pts = series.get(gm, [])
        spread = (max(S for _, S in pts) - min(S for _, S in pts)) if pts else math.nan
        try:
            c = analysis.classify_entropy_scaling(pts)
            crow.append([gm, cfg.h, cfg.J2, cfg.g, c.kind, c.log_a, c.log_c, c.flat_c, c.rms_log, c.rms_flat,
                         c.score, c.margin, c.min_slope, spread])
        except ValueError as exc:
            log.warning("gamma=%g not classified: %s", gm, exc)
            crow.append([gm, cfg.h, cfg.J2, cfg.g, "unclassified"] + [math.nan] * 6
                        + [analysis.LOG_MARGIN, analysis.LOG_MIN_SLOPE, spread])


def _gap_cell(args):
    spec, mode, solver = args
    solver = solver.fresh()
    try:
        return solver.gap(spec, mode), None, solver.stats
    except Exception as exc:
        return math.nan, f"{type(exc).__name__}: {exc}", solver.stats


def cmd_gap_scan(cfg: RunConfig, solver: Solver, res: RunResult):
    gammas = cfg.grid_gamma or [cfg.gamma]
    Ls = sorted(cfg.L_list)
    tasks = [(cfg.model_spec(L=L, gamma=gm), cfg.gap_mode, solver) for gm in gammas for L in Ls]
    out = _pool_map(_gap_cell, tasks, cfg.jobs)
    res.cells = len(tasks)
    rows = res.table("gaps.csv", SPEC_COLUMNS + ["mode", "delta"])
    series = {}
    for (spec, mode, _), (d, err, stats) in zip(tasks, out):
        solver.stats.add(stats)
        if err is not None:
            res.failures.append({"L": spec.L, "gamma": spec.gamma, "error": err})
            continue
        rows.append(_spec_cells(spec) + [mode, d])
        series.setdefault(spec.gamma, []).append((spec.L, max(d, 0.0)))
    frows = res.table("fit.csv", ["model", "h", "gamma", "J2", "g", "mode", "n_points", "delta_a", "delta_a_raw",
                                  "slope", "rms", "clamped"])
    for gm in gammas:
        pts = series.get(gm, [])
        try:
            f = analysis.hyperbolic_fit(pts)
            frows.append([cfg.model, cfg.h, gm, cfg.J2, cfg.g, cfg.gap_mode, len(pts), f.delta_a, f.delta_a_raw,
                          f.slope, f.rms, f.clamped])
        except ValueError as exc:
            log.warning("gamma=%g not fitted: %s", gm, exc)
            frows.append([cfg.model, cfg.h, gm, cfg.J2, cfg.g, cfg.gap_mode, len(pts)] + [math.nan] * 4 + [""])


def cmd_phase_diagram(cfg: RunConfig, solver: Solver, res: RunResult):
    if not cfg.grid_h or not cfg.grid_gamma:
        raise ConfigError("grid_h", "phase-diagram needs both grid_h and grid_gamma")
    grid = analysis.phase_diagram(cfg.grid_h, cfg.grid_gamma, sorted(cfg.L_list), cfg.model_spec(),
                                  cfg.gap_mode, cfg.jobs, solver)
    rows = res.table("phase.csv", ["h", "gamma", "delta_a", "rms", "flags"])
    i = 0
    for a, h in enumerate(grid.h_values):
        for b, gm in enumerate(grid.gamma_values):
            flag = grid.flags[i]
            rows.append([h, gm, grid.delta_a[a, b], grid.rms[a, b], flag])
            if flag.startswith("error"):
                res.failures.append({"h": float(h), "gamma": float(gm), "error": flag})
            i += 1
    res.cells = i
    brows = res.table("boundary.csv", ["h", "gamma_c"])
    brows.extend([h, gc] for h, gc in grid.boundary)


def _rescaled_grid(cfg: RunConfig):
    return dsff.default_tau_grid(cfg.n_tau, cfg.tau_min, cfg.tau_max)


def _curve_rows(res: RunResult, curve, name="dsff.csv"):
    rows = res.table(name, ["theta", "tau", "tau_rescaled", "kappa", "stderr", "N", "realizations"])
    for t, th in enumerate(curve.theta_values):
        for j, tr in enumerate(curve.tau_values):
            rows.append([th, tr * curve.tau_H, tr, curve.kappa[t, j], curve.stderr[t, j],
                         curve.N, curve.realizations])


def cmd_dsff(cfg: RunConfig, solver: Solver, res: RunResult):
    amp = DSFF_DISORDER if cfg.disorder is None else cfg.disorder
    if amp <= 0:
        raise ConfigError("disorder", "dsff needs a disorder amplitude > 0")
    spec = cfg.model_spec().with_(disorder=Disorder(amp, cfg.seed))
    ens = dsff.model_ensemble(spec, cfg.realizations, cfg.seed, cfg.resolve_z2, cfg.jobs, solver)
    res.cells = cfg.realizations
    res.seeds["realizations"] = ens.provenance["seeds"]
    res.notes["sector"] = ens.provenance["sector"]
    curve = dsff.rescaled_dsff(ens, _rescaled_grid(cfg), cfg.theta_values(), cfg.connected, cfg.heisenberg_c)
    _curve_rows(res, curve)


def baseline_size(cfg: RunConfig) -> int:
    """Explicit ``N``, else the dimension the matching model ensemble would have."""
    if cfg.N is not None:
        return cfg.N
    spec = cfg.model_spec()
    return enumerate_sector(spec.L, dsff.ensemble_sector(spec, cfg.resolve_z2)).dim


def cmd_rmt_baseline(cfg: RunConfig, solver: Solver, res: RunResult):
    N = baseline_size(cfg)
    curve = solver.baseline(cfg.rmt_class, N, cfg.samples, cfg.seed, _rescaled_grid(cfg), cfg.theta_values(),
                            cfg.heisenberg_c)
    res.cells = 1
    res.notes.update({"class": cfg.rmt_class, "N": N, "samples": cfg.samples})
    _curve_rows(res, curve)


def cmd_perturbation_check(cfg: RunConfig, solver: Solver, res: RunResult):
    hs = cfg.grid_h or [cfg.h]
    gammas = cfg.grid_gamma or [cfg.gamma]
    rows = res.table("perturbation.csv", ["h", "gamma", "L", "pred_E", "pred_Gamma", "ed_E", "ed_Gamma",
                                          "difference", "bound", "within_bound", "second_order_gamma0"])
    for h in hs:
        for gm in gammas:
            res.cells += 1
            try:
                c = analysis.perturbation_check(h, gm, cfg.L, solver)
            except ValueError as exc:
                res.failures.append({"h": h, "gamma": gm, "error": str(exc)})
                continue
            bound = 10 * cfg.L * h ** 4
            g2_at_zero = (analysis.perturbative_vacuum(h, 0.0, cfg.L) - analysis.perturbative_vacuum(0.0, 0.0, cfg.L)).imag
            rows.append([h, gm, cfg.L, c.predicted.real, c.predicted.imag, c.ed.real, c.ed.imag, c.difference,
                         bound, c.difference <= bound, g2_at_zero])
    res.notes["model"] = "longitudinal_measured"


def cmd_oracle(cfg: RunConfig, solver: Solver, res: RunResult):
    qp = freefermion.spectrum(cfg.h, cfg.gamma, n_points=cfg.n_k)
    rows = res.table("dispersion.csv", ["k", "re", "im"])
    rows.extend([k, z.real, z.imag] for k, z in zip(qp.momenta, qp.values))
    hs = cfg.grid_h or [float(x) for x in np.linspace(0.0, 0.99, 100)]
    brows = res.table("boundary.csv", ["h", "gamma_c"])
    brows.extend([h, freefermion.critical_rate(h)] for h in hs)
    orows = res.table("oracle.csv", ["h", "gamma", "gamma_c", "asymptotic_gap"])
    for h in (cfg.grid_h or [cfg.h]):
        for gm in (cfg.grid_gamma or [cfg.gamma]):
            res.cells += 1
            gap = freefermion.asymptotic_imag_gap(h, gm, cfg.n_k) if h < 1 else math.nan
            orows.append([h, gm, freefermion.critical_rate(h), gap])


COMMAND_FUNCS = {
    "spectrum": cmd_spectrum,
    "steady-state": cmd_steady_state,
    "entropy-scan": cmd_entropy_scan,
    "gap-scan": cmd_gap_scan,
    "phase-diagram": cmd_phase_diagram,
    "dsff": cmd_dsff,
    "rmt-baseline": cmd_rmt_baseline,
    "perturbation-check": cmd_perturbation_check,
    "oracle": cmd_oracle,
}


# -- persistence --------------------------------------------------------------


def versions() -> dict:
    return {"noclick": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version(), "kernels": kernels.BACKEND, "backend": backend_tag()}


def write_outputs(out_dir, files: dict) -> None:
    """Stage every file in a private temp dir, then rename each into place."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".run-", dir=out))
    try:
        for name, data in files.items():
            (tmp / name).write_bytes(data)
        for name in files:
            os.replace(tmp / name, out / name)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)


def run(cfg: RunConfig) -> int:
    """Run ``cfg.command``; returns the process exit status."""
    t0 = time.perf_counter()
    solver = _solver(cfg)
    res = RunResult(seeds={"master": cfg.seed})
    COMMAND_FUNCS[cfg.command](cfg, solver, res)
    files = {name: csv_bytes(h, rows) for name, (h, rows) in res.tables.items()}
    manifest = {
        "command": cfg.command,
        "config": cfg.as_dict(),
        "seeds": res.seeds,
        "versions": versions(),
        "wall_time_s": time.perf_counter() - t0,
        "cache": dict(solver.stats.as_dict(), dir=solver.cache_dir, policy=solver.policy),
        "cells": res.cells,
        "failures": res.failures,
        "notes": res.notes,
        "outputs": {name: hashlib.sha256(data).hexdigest() for name, data in files.items()},
    }
    files["manifest.json"] = (json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n").encode()
    write_outputs(cfg.out, files)
    for f in res.failures:
        log.error("cell failed: %s", f)
    if res.total_failure:
        log.error("every cell failed")
        return 1
    return 0
