"""Parameter sweeps over (chi, d) for the evolution, slab, and stability
pipelines, bifurcation-boundary mapping, and persistent result storage.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analysis import bound_report, chi_star, stability_report
from .cauchy import (RunConfig, run, run_metadata, snapshots_to_csv,
                     write_metadata)
from .core import Params, grid_make
from .errors import ConfigError, KswaveError
from .fronts import detect_period, speed_from_positions
from .slab import (SlabConfig, integral_identity_check, slab_metadata,
                   solve_slab, solution_to_csv)

PIPELINES = ("cauchy", "slab", "stability")
SUMMARY_COLUMNS = ["chi", "d", "pipeline", "status", "speed", "period",
                   "classification", "lambda_max", "bound_failures",
                   "artifact_dir"]
#: Speed is measured between these times (endpoint method, level 1/2 with
#: level 2/5 as fallback when the 1/2 positions are unavailable).
SPEED_WINDOW = (10.0, 30.0)
#: Period detection looks at the final 15 time units of the run.
PERIOD_SPAN = 14.0


@dataclass
class SweepSpec:
    chi_values: list
    d_values: list
    pipeline: str
    base_config: object = None
    output_dir: str = "."
    n_jobs: int = 1

    def __post_init__(self):
        for name, vals in (("chi_values", self.chi_values),
                           ("d_values", self.d_values)):
            if not vals:
                raise ConfigError(f"{name} must be non-empty")
            if not all(math.isfinite(v) for v in vals):
                raise ConfigError(f"{name} must contain finite values")
        if self.pipeline not in PIPELINES:
            raise ConfigError(
                f"pipeline must be one of {PIPELINES}, got {self.pipeline!r}"
            )
        if self.n_jobs < 1:
            raise ConfigError("n_jobs must be >= 1")


@dataclass
class SweepRecord:
    chi: float
    d: float
    pipeline: str
    status: str  # ok | failed
    speed: float | None = None
    period: float | None = None
    classification: str = ""
    lambda_max: float | None = None
    bound_failures: int | None = None
    artifact_dir: str = ""
    artifact_paths: list = field(default_factory=list)
    message: str = ""


def default_cauchy_config(params: Params) -> RunConfig:
    """The evolution configuration used by sweeps when none is given:
    domain [0, 160] at dx = 0.2, dt = dx^2/10, run to t = 38 with snapshots
    covering both the speed window and the final period-detection window."""
    grid = grid_make(0.0, 160.0, 801)
    times = sorted({10.0, 15.0, 20.0, 25.0, 30.0}
                   | {float(t) for t in range(24, 39)})
    return RunConfig(params, grid, dt=grid.dx ** 2 / 10.0, t_max=38.0,
                     snapshot_times=times)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _point_dir(output_dir: str, chi: float, d: float) -> str:
    return os.path.join(output_dir, f"chi_{chi:g}_d_{d:g}")


def measure_speed(result) -> float:
    """Endpoint speed over the window t in [10, 30], level 1/2 with fallback
    to level 2/5 when the 1/2 level yields too few crossings."""
    lo, hi = SPEED_WINDOW
    for level in (0.5, 0.4):
        pts = [(t, x) for t, x in result.speed_inputs.get(level, [])
               if lo - 1e-9 <= t <= hi + 1e-9]
        try:
            return speed_from_positions(pts, level=level).speed
        except ConfigError:
            continue
    raise KswaveError("no usable front positions in the speed window")


def _period_snapshots(result, t_max: float):
    """Uniformly spaced integer-time snapshots in the final 15 time units."""
    lo = t_max - PERIOD_SPAN
    snaps = [s for s in result.snapshots
             if s.t >= lo - 1e-9 and abs(s.t - round(s.t)) < 1e-9]
    return snaps


def _eval_cauchy(chi: float, d: float, base_config, out_dir: str) -> SweepRecord:
    cfg = base_config if base_config is not None else default_cauchy_config(
        Params(chi, d))
    cfg = dataclasses.replace(cfg, params=Params(chi, d))
    result = run(cfg)
    speed = measure_speed(result)
    pe = detect_period(_period_snapshots(result, cfg.t_max), speed)
    last = result.snapshots[-1]
    report = bound_report(speed, last.u, last.v, cfg.params)
    lam = stability_report(cfg.params).lambda_max

    os.makedirs(out_dir, exist_ok=True)
    snap_path = os.path.join(out_dir, "snapshots.csv")
    meta_path = os.path.join(out_dir, "metadata.json")
    snapshots_to_csv(result, snap_path)
    meta = run_metadata(cfg, result, extra={
        "speed": speed,
        "period": pe.period,
        "classification": pe.classification,
        "mismatch_by_period": {repr(k): v
                               for k, v in pe.mismatch_by_period.items()},
        "lambda_max": lam,
        "bound_report": report.as_dicts(),
    })
    write_metadata(meta, meta_path)
    return SweepRecord(chi, d, "cauchy", "ok", speed=speed, period=pe.period,
                       classification=pe.classification, lambda_max=lam,
                       bound_failures=report.n_failures,
                       artifact_dir=out_dir,
                       artifact_paths=[snap_path, meta_path])


def _eval_slab(chi: float, d: float, base_config, out_dir: str) -> SweepRecord:
    cfg = base_config if base_config is not None else SlabConfig(Params(chi, d))
    cfg = dataclasses.replace(cfg, params=Params(chi, d))
    sol = solve_slab(cfg)
    report = bound_report(sol.c, sol.U, sol.V, cfg.params)
    identity = integral_identity_check(sol, cfg)
    lam = stability_report(cfg.params).lambda_max

    os.makedirs(out_dir, exist_ok=True)
    sol_path = os.path.join(out_dir, "solution.csv")
    meta_path = os.path.join(out_dir, "metadata.json")
    solution_to_csv(sol, sol_path)
    meta = slab_metadata(cfg, sol, extra={
        "lambda_max": lam,
        "bound_report": report.as_dicts(),
        "integral_identity": identity,
    })
    write_metadata(meta, meta_path)
    status = "ok" if sol.converged else "failed"
    return SweepRecord(chi, d, "slab", status, speed=sol.c,
                       lambda_max=lam, bound_failures=report.n_failures,
                       artifact_dir=out_dir,
                       artifact_paths=[sol_path, meta_path],
                       message="" if sol.converged else "solver did not converge")


def _eval_stability(chi: float, d: float, base_config, out_dir: str) -> SweepRecord:
    rep = stability_report(Params(chi, d))
    os.makedirs(out_dir, exist_ok=True)
    meta_path = os.path.join(out_dir, "metadata.json")
    write_metadata({
        "chi": chi, "d": d,
        "chi_star": rep.chi_star,
        "lambda_max": rep.lambda_max,
        "k_star": rep.k_star,
        "verdict": rep.verdict,
    }, meta_path)
    return SweepRecord(chi, d, "stability", "ok",
                       classification=rep.verdict, lambda_max=rep.lambda_max,
                       artifact_dir=out_dir, artifact_paths=[meta_path])


_EVALUATORS = {"cauchy": _eval_cauchy, "slab": _eval_slab,
               "stability": _eval_stability}


def _evaluate_point(args) -> SweepRecord:
    pipeline, chi, d, base_config, out_dir = args
    try:
        return _EVALUATORS[pipeline](chi, d, base_config, out_dir)
    except Exception as err:  # fault isolation: one bad point never aborts
        return SweepRecord(chi, d, pipeline, "failed",
                           artifact_dir=out_dir, message=str(err))


def summary_path(spec: SweepSpec) -> str:
    return os.path.join(spec.output_dir, "summary.csv")


def write_summary(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for r in records:
            w.writerow([_fmt(r.chi), _fmt(r.d), r.pipeline, r.status,
                        _fmt(r.speed), _fmt(r.period), r.classification,
                        _fmt(r.lambda_max), _fmt(r.bound_failures),
                        r.artifact_dir])


def run_sweep(spec: SweepSpec) -> list:
    """Execute the Cartesian product chi_values x d_values.

    Points run independently (in a process pool when n_jobs > 1); the summary
    CSV is written in deterministic product order regardless of completion
    order. A failing point contributes a row with status "failed" and never
    aborts the sweep.
    """
    os.makedirs(spec.output_dir, exist_ok=True)
    tasks = [(spec.pipeline, chi, d, spec.base_config,
              _point_dir(spec.output_dir, chi, d))
             for chi in spec.chi_values for d in spec.d_values]
    if spec.n_jobs > 1:
        # spawn, not fork: forking a process with live BLAS thread state is
        # unreliable, and spawn keeps serial/parallel behavior identical
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=spec.n_jobs, mp_context=ctx) as pool:
            records = list(pool.map(_evaluate_point, tasks))
    else:
        records = [_evaluate_point(t) for t in tasks]
    write_summary(records, summary_path(spec))
    return records


@dataclass(frozen=True)
class BifurcationPoint:
    d: float
    chi_crit: float
    chi_analytic: float
    n_runs: int


def _is_pulsating(chi: float, d: float, base_config) -> bool:
    cfg = base_config if base_config is not None else default_cauchy_config(
        Params(chi, d))
    cfg = dataclasses.replace(cfg, params=Params(chi, d))
    result = run(cfg)
    speed = measure_speed(result)
    pe = detect_period(_period_snapshots(result, cfg.t_max), speed)
    return pe.classification == "pulsating_front"


def bifurcation_scan(d_values, chi_range, tol: float = 0.25,
                     base_config=None) -> list:
    """Bisect in chi on the pulsating-front classification of the evolution
    pipeline, per d. Returns BifurcationPoint records carrying both the
    empirical critical chi and the analytic curve (1 + sqrt(d))^2.

    The range must bracket the transition: not pulsating at the low end,
    pulsating at the high end.
    """
    lo0, hi0 = chi_range
    if not lo0 < hi0:
        raise ConfigError(f"need chi_range lo < hi, got {chi_range}")
    if tol <= 0:
        raise ConfigError("tol must be positive")
    out = []
    for d in d_values:
        lo, hi = float(lo0), float(hi0)
        n_runs = 2
        if _is_pulsating(lo, d, base_config):
            raise ConfigError(
                f"chi = {lo} already pulsating at d = {d}: range does not bracket"
            )
        if not _is_pulsating(hi, d, base_config):
            raise ConfigError(
                f"chi = {hi} not pulsating at d = {d}: range does not bracket"
            )
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            n_runs += 1
            if _is_pulsating(mid, d, base_config):
                hi = mid
            else:
                lo = mid
        out.append(BifurcationPoint(d, 0.5 * (lo + hi), chi_star(d), n_runs))
    return out
