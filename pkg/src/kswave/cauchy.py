"""Explicit upwind time stepper for the full evolution system and the run
loop with snapshot scheduling.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import backend
from ._version import __version__
from .core import Field, Grid1D, Params
from .elliptic import NEUMANN, solve_v
from .errors import BlowUpError, ConfigError, DomainTooSmallError
from .fronts import front_position

#: Hard stability cap on dt; the default protocol choice is dx^2 / 10.
DT_CAP_FACTOR = 0.5
#: Conservative front-speed estimate used by the domain-size guard.
GUARD_SPEED = 3.0
GUARD_CELLS = 10


@dataclass
class CauchyState:
    """Snapshot (t, u, v); v is always the elliptic solve of u."""

    t: float
    u: Field
    v: Field

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise ConfigError("u and v must share a grid")


def initial_gaussian_plateau(grid: Grid1D) -> Field:
    """u(x) = exp(-2 max(x - 10, 0)^2 / 5): a plateau at 1 for x <= 10 with a
    Gaussian decay to the right."""
    if not (grid.x_min <= 10.0 <= grid.x_max):
        raise ConfigError("grid must cover x = 10 for the plateau initial data")
    x = grid.nodes
    return Field(grid, np.exp(-2.0 * np.maximum(x - 10.0, 0.0) ** 2 / 5.0))


IC_REGISTRY = {
    "gaussian_plateau": lambda grid, **kw: initial_gaussian_plateau(grid),
    "constant": lambda grid, value=0.0, **kw: Field.constant(grid, value),
}


@dataclass
class RunConfig:
    params: Params
    grid: Grid1D
    dt: float
    t_max: float
    snapshot_times: list = field(default_factory=list)
    ic_name: str = "gaussian_plateau"
    ic_params: dict = field(default_factory=dict)
    track_levels: tuple = (0.5, 0.4)

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        cap = DT_CAP_FACTOR * self.grid.dx ** 2
        if self.dt > cap * (1 + 1e-12):
            raise ConfigError(
                f"dt = {self.dt} exceeds the stability cap dx^2/2 = {cap}"
            )
        if self.t_max < 0:
            raise ConfigError("t_max must be nonnegative")
        ts = list(self.snapshot_times)
        if ts != sorted(ts):
            raise ConfigError("snapshot_times must be sorted")
        if ts and (ts[0] < 0 or ts[-1] > self.t_max + 1e-12):
            raise ConfigError("snapshot_times must lie within [0, t_max]")
        if self.ic_name not in IC_REGISTRY:
            raise ConfigError(f"unknown initial condition {self.ic_name!r}")

    def initial_field(self) -> Field:
        return IC_REGISTRY[self.ic_name](self.grid, **self.ic_params)


@dataclass
class RunResult:
    snapshots: list  # of CauchyState, ordered in t
    speed_inputs: dict  # level -> list of (t, x or None)
    wall_time: float


def positivity_dt_bound(dx: float, chi: float, d: float, amplitude: float = 1.0) -> float:
    """Time step below which the explicit update preserves nonnegativity,
    assuming |u| stays below `amplitude` (so |v'| <= amplitude / sqrt(d))."""
    drift = 2.0 * abs(chi) * amplitude / math.sqrt(d)
    growth = max(amplitude - 1.0, 0.0)
    return dx * dx / (2.0 + dx * drift + dx * dx * growth)


def step(state: CauchyState, params: Params, dt: float, *,
         react: bool = True, advect: bool = True) -> CauchyState:
    """One explicit Euler step (diffusion + conservative upwind chemotaxis
    flux + logistic reaction), then v is refreshed from the elliptic solve."""
    cap = DT_CAP_FACTOR * state.u.grid.dx ** 2
    if dt > cap * (1 + 1e-12):
        raise ConfigError(f"dt = {dt} exceeds the stability cap dx^2/2 = {cap}")
    try:
        u, v = backend.advance(
            state.u.values, state.v.values, 1, state.u.grid.dx, dt,
            params.chi, params.d, react, advect,
        )
    except BlowUpError as err:
        raise BlowUpError(state.t + err.t, err.node) from None
    return CauchyState(state.t + dt, Field(state.u.grid, u), Field(state.u.grid, v))


def _check_domain(u0: Field, t_max: float) -> None:
    pos = front_position(u0, 0.5)
    if pos is None:
        return
    limit = u0.grid.x_max - GUARD_CELLS * u0.grid.dx
    if pos + GUARD_SPEED * t_max > limit:
        raise DomainTooSmallError(
            f"front starting near x = {pos:.3g} would reach within "
            f"{GUARD_CELLS} cells of the right boundary by t = {t_max:g} "
            f"under speed estimate {GUARD_SPEED:g}; enlarge the domain"
        )


def run(config: RunConfig) -> RunResult:
    """Step from t = 0 to t_max, storing snapshots at the configured times.

    A snapshot time maps to the first step with t >= snapshot time; the
    actual time reached is recorded.  Front positions at each tracked level
    are recorded per snapshot.
    """
    t0 = time.perf_counter()
    u = config.initial_field()
    _check_domain(u, config.t_max)
    v = solve_v(u, config.params.d, NEUMANN)
    times = list(config.snapshot_times) or [config.t_max]
    n_total = int(math.ceil(config.t_max / config.dt - 1e-9)) if config.t_max > 0 else 0
    snap_steps = sorted({min(int(math.ceil(s / config.dt - 1e-9)), n_total) for s in times})

    snapshots = []
    speed_inputs = {lvl: [] for lvl in config.track_levels}
    grid = config.grid
    ua, va = u.values, v.values
    done = 0

    def record(k):
        state = CauchyState(k * config.dt, Field(grid, ua.copy()), Field(grid, va.copy()))
        snapshots.append(state)
        for lvl in config.track_levels:
            speed_inputs[lvl].append((state.t, front_position(state.u, lvl)))

    for k in snap_steps:
        if k > done:
            try:
                ua, va = backend.advance(
                    ua, va, k - done, grid.dx, config.dt,
                    config.params.chi, config.params.d, True, True,
                )
            except BlowUpError as err:
                raise BlowUpError(done * config.dt + err.t, err.node) from None
            done = k
        record(k)
    if done < n_total:
        try:
            ua, va = backend.advance(
                ua, va, n_total - done, grid.dx, config.dt,
                config.params.chi, config.params.d, True, True,
            )
        except BlowUpError as err:
            raise BlowUpError(done * config.dt + err.t, err.node) from None
    return RunResult(snapshots, speed_inputs, time.perf_counter() - t0)


def snapshots_to_csv(result: RunResult, path) -> None:
    """Export snapshots as CSV with columns t,x,u,v."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "u", "v"])
        for s in result.snapshots:
            for x, uu, vv in zip(s.u.grid.nodes, s.u.values, s.v.values):
                w.writerow([repr(s.t), repr(float(x)), repr(float(uu)), repr(float(vv))])


def run_metadata(config: RunConfig, result: RunResult, extra: dict | None = None) -> dict:
    """Structured run metadata: full config echo, wall time, library version."""
    meta = {
        "version": __version__,
        "backend": backend.active_backend(),
        "config": {
            "chi": config.params.chi,
            "d": config.params.d,
            "x_min": config.grid.x_min,
            "x_max": config.grid.x_max,
            "n": config.grid.n,
            "dx": config.grid.dx,
            "dt": config.dt,
            "t_max": config.t_max,
            "snapshot_times": list(config.snapshot_times),
            "ic_name": config.ic_name,
            "ic_params": dict(config.ic_params),
            "track_levels": list(config.track_levels),
        },
        "wall_time_s": result.wall_time,
        "snapshot_actual_times": [s.t for s in result.snapshots],
        "front_positions": {
            repr(lvl): [[t, x] for t, x in pts]
            for lvl, pts in result.speed_inputs.items()
        },
    }
    if extra:
        meta.update(extra)
    return meta


def write_metadata(meta: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
