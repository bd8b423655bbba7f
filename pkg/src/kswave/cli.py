"""Command-line entry point: evolution runs with figure presets, the slab
solver, parameter sweeps, and the closed-form stability report.

Exit codes: 0 success, 2 invalid flags or configuration, 3 solver failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from ._version import __version__
from .analysis import bound_report, stability_report
from .cauchy import (RunConfig, run, run_metadata, snapshots_to_csv,
                     write_metadata)
from .core import Params, grid_make
from .errors import ConfigError, KswaveError
from .fronts import detect_period
from .slab import (SlabConfig, integral_identity_check, slab_metadata,
                   solve_slab, solution_to_csv)
from .sweep import (SweepSpec, measure_speed, run_sweep, summary_path,
                    _period_snapshots)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3

#: Reference presets for the two standard protocols; the domain length is
#: our choice (documented in the README).
PRESETS = {
    "fig1": {
        "d": 1.0,
        "x_min": 0.0, "x_max": 120.0, "n": 601,
        "t_max": 30.0,
        "snapshots": "10,15,20,25,30",
        "ic": "gaussian_plateau",
    },
    "fig2": {
        "d": 1.0,
        "x_min": 0.0, "x_max": 160.0, "n": 801,
        "t_max": 38.0,
        "snapshots": "10,15,20,25,30,24:1:38",
        "ic": "gaussian_plateau",
    },
}


def parse_snapshots(text: str) -> list:
    """Parse snapshot times: comma-separated entries, each either a number
    or a range start:step:stop (inclusive)."""
    times = set()
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            raise ConfigError(f"empty entry in snapshot list {text!r}")
        if ":" in part:
            pieces = part.split(":")
            if len(pieces) != 3:
                raise ConfigError(f"range must be start:step:stop, got {part!r}")
            start, step, stop = (float(p) for p in pieces)
            if step <= 0 or stop < start:
                raise ConfigError(f"bad range {part!r}")
            k = 0
            while start + k * step <= stop + 1e-9:
                times.add(round(start + k * step, 12))
                k += 1
        else:
            times.add(float(part))
    return sorted(times)


def parse_value_list(text: str) -> list:
    vals = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            raise ConfigError(f"empty entry in list {text!r}")
        vals.append(float(part))
    return vals


def read_config_file(path: str) -> dict:
    """Flat key=value file; # starts a comment; keys match flag names."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _merge(args: argparse.Namespace, parser_defaults: dict) -> dict:
    """Effective settings: preset < config file < explicit flags."""
    eff = dict(parser_defaults)
    preset = getattr(args, "preset", None)
    if preset:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; have {sorted(PRESETS)}")
        eff.update(PRESETS[preset])
    if getattr(args, "config", None):
        file_vals = read_config_file(args.config)
        unknown = set(file_vals) - set(parser_defaults) - {"preset"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        eff.update(file_vals)
    # argparse flag defaults are all None, so non-None means explicitly given
    for key in parser_defaults:
        val = getattr(args, key, None)
        if val is not None:
            eff[key] = val
    return eff


def _as_float(eff, key):
    v = eff.get(key)
    if v is None:
        raise ConfigError(f"--{key.replace('_', '-')} is required")
    return float(v)


def _as_int(eff, key):
    v = eff.get(key)
    return None if v is None else int(v)


# --- simulate ----------------------------------------------------------------

def cmd_simulate(args, defaults) -> int:
    eff = _merge(args, defaults)
    chi = _as_float(eff, "chi")
    d = _as_float(eff, "d")
    x_min = _as_float(eff, "x_min")
    x_max = _as_float(eff, "x_max")
    n = _as_int(eff, "n")
    if eff.get("dx") is not None:
        dx = float(eff["dx"])
        n = int(round((x_max - x_min) / dx)) + 1
    if n is None:
        raise ConfigError("one of --n or --dx is required")
    grid = grid_make(x_min, x_max, n)
    dt = float(eff["dt"]) if eff.get("dt") is not None else grid.dx ** 2 / 10.0
    t_max = _as_float(eff, "t_max")
    snapshots = parse_snapshots(eff.get("snapshots") or str(t_max))
    config = RunConfig(Params(chi, d), grid, dt=dt, t_max=t_max,
                       snapshot_times=snapshots, ic_name=str(eff["ic"]))

    result = run(config)
    extra = {"preset": getattr(args, "preset", None)}
    try:
        speed = measure_speed(result)
        extra["speed"] = speed
    except KswaveError as err:
        speed = None
        extra["speed"] = None
        extra["speed_note"] = str(err)
    classification = period = None
    if speed is not None:
        snaps = _period_snapshots(result, config.t_max)
        if len(snaps) >= 3:
            pe = detect_period(snaps, speed)
            classification, period = pe.classification, pe.period
            extra["period"] = period
            extra["classification"] = classification
            extra["period_mismatch"] = pe.mismatch
    last = result.snapshots[-1]
    if speed is not None and float(last.u.values.min()) > -1e-8:
        report = bound_report(speed, last.u, last.v, config.params)
        extra["bound_report"] = report.as_dicts()

    out = eff.get("output") or "."
    os.makedirs(out, exist_ok=True)
    snapshots_to_csv(result, os.path.join(out, "snapshots.csv"))
    write_metadata(run_metadata(config, result, extra),
                   os.path.join(out, "metadata.json"))
    bits = [f"chi={chi:g}", f"d={d:g}"]
    if speed is not None:
        bits.append(f"speed={speed:.4f}")
    if classification:
        bits.append(f"classification={classification}")
    if period is not None:
        bits.append(f"period={period:g}")
    print("simulate ok: " + " ".join(bits))
    print(f"artifacts: {out}")
    return EXIT_OK


# --- slab --------------------------------------------------------------------

def cmd_slab(args, defaults) -> int:
    eff = _merge(args, defaults)
    config = SlabConfig(
        Params(_as_float(eff, "chi"), _as_float(eff, "d")),
        a=_as_float(eff, "a"),
        theta=_as_float(eff, "theta"),
        tau=_as_float(eff, "tau"),
        grid_n=int(eff["grid_n"]),
        tol=float(eff["tol"]),
    )
    sol = solve_slab(config)
    report = bound_report(sol.c, sol.U, sol.V, config.params)
    lhs, rhs, gap = integral_identity_check(sol, config)

    out = eff.get("output") or "."
    os.makedirs(out, exist_ok=True)
    solution_to_csv(sol, os.path.join(out, "solution.csv"))
    write_metadata(slab_metadata(config, sol, extra={
        "bound_report": report.as_dicts(),
        "integral_identity": {"lhs": lhs, "rhs": rhs, "gap": gap},
    }), os.path.join(out, "metadata.json"))
    status = "converged" if sol.converged else "NOT converged"
    print(f"slab {status}: c={sol.c:.6f} residual={sol.residual:.3e} "
          f"iterations={sol.iterations} bound_failures={report.n_failures}")
    print(f"artifacts: {out}")
    return EXIT_OK if sol.converged else EXIT_SOLVER


# --- sweep and stability -------------------------------------------------------

def cmd_sweep(args, defaults) -> int:
    eff = _merge(args, defaults)
    spec = SweepSpec(
        chi_values=parse_value_list(eff["chi"]),
        d_values=parse_value_list(eff["d"]),
        pipeline=str(eff["pipeline"]),
        output_dir=str(eff.get("output") or "sweep_out"),
        n_jobs=int(eff["jobs"]),
    )
    records = run_sweep(spec)
    n_failed = sum(1 for r in records if r.status != "ok")
    for r in records:
        print(f"  chi={r.chi:g} d={r.d:g} status={r.status} "
              f"classification={r.classification or '-'}"
              + (f" speed={r.speed:.4f}" if r.speed is not None else ""))
    print(f"summary: {summary_path(spec)} ({len(records)} rows, {n_failed} failed)")
    return EXIT_OK if n_failed == 0 else EXIT_SOLVER


def cmd_stability(args, defaults) -> int:
    eff = _merge(args, defaults)
    params = Params(_as_float(eff, "chi"), _as_float(eff, "d"))
    rep = stability_report(params)
    print(f"verdict={rep.verdict} chi_star={rep.chi_star:g} "
          f"lambda_max={rep.lambda_max:.6g} k_star={rep.k_star:.6g}")
    if eff.get("output"):
        os.makedirs(eff["output"], exist_ok=True)
        write_metadata({
            "chi": params.chi, "d": params.d, "chi_star": rep.chi_star,
            "lambda_max": rep.lambda_max, "k_star": rep.k_star,
            "verdict": rep.verdict, "version": __version__,
        }, os.path.join(eff["output"], "metadata.json"))
    return EXIT_OK


# --- wiring --------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="kswave",
        description="Keller-Segel-FKPP wave laboratory",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = {"config": None, "output": None}

    p = sub.add_parser("simulate", help="run the evolution pipeline")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--chi", type=float)
    p.add_argument("--d", type=float)
    p.add_argument("--x-min", dest="x_min", type=float)
    p.add_argument("--x-max", dest="x_max", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--dx", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--snapshots", help="comma list and/or start:step:stop ranges")
    p.add_argument("--ic", default=None, help="initial condition name")
    p.add_argument("--config", help="key=value config file (flags override)")
    p.add_argument("--output", help="artifact directory")
    p.set_defaults(func=cmd_simulate, defaults={
        "chi": None, "d": None, "x_min": 0.0, "x_max": 160.0, "n": 801,
        "dx": None, "dt": None, "t_max": 38.0, "snapshots": None,
        "ic": "gaussian_plateau", **common,
    })

    p = sub.add_parser("slab", help="solve the traveling-wave slab problem")
    p.add_argument("--chi", type=float)
    p.add_argument("--d", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--grid-n", dest="grid_n", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--config", help="key=value config file (flags override)")
    p.add_argument("--output", help="artifact directory")
    p.set_defaults(func=cmd_slab, defaults={
        "chi": None, "d": None, "a": 40.0, "theta": 0.1, "tau": 1.0,
        "grid_n": 801, "tol": 1e-8, **common,
    })

    p = sub.add_parser("sweep", help="Cartesian sweep over (chi, d)")
    p.add_argument("--pipeline", choices=("cauchy", "slab", "stability"))
    p.add_argument("--chi", help="comma-separated chi values")
    p.add_argument("--d", help="comma-separated d values")
    p.add_argument("--jobs", type=int)
    p.add_argument("--config", help="key=value config file (flags override)")
    p.add_argument("--output", help="artifact directory")
    p.set_defaults(func=cmd_sweep, defaults={
        "pipeline": "stability", "chi": None, "d": None, "jobs": 1, **common,
    })

    p = sub.add_parser("stability", help="closed-form stability report")
    p.add_argument("--chi", type=float)
    p.add_argument("--d", type=float)
    p.add_argument("--config", help="key=value config file (flags override)")
    p.add_argument("--output", help="artifact directory")
    p.set_defaults(func=cmd_stability, defaults={"chi": None, "d": None, **common})

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, args.defaults)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except KswaveError as err:
        print(f"solver error: {err}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
