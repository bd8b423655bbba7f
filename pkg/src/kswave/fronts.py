"""Level-set front tracking, wave-speed estimation, and detection of
time-periodic (pulsating) fronts in the co-moving frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Field
from .errors import ConfigError

#: All candidate periods below this normalized mismatch: plain traveling wave.
#: The floor is set by the frame-speed error of a finite-time speed estimate
#: (the front still accelerates logarithmically), which grows linearly in T.
TRAVELING_TOL = 2e-3
#: A strict interior minimum below this (and 3x under the median): pulsating.
PULSATING_TOL = 5e-2
PULSATING_RATIO = 3.0

#: Default comparison window, relative to the front at the first snapshot.
#: The wake only phase-locks onto the periodic cycle within a dozen or so
#: length units of the front; deeper wake is still slowly rearranging at the
#: times of interest, so the default window hugs the front.
WINDOW_BEHIND = (15.0, 5.0)


def front_position(u: Field, level: float):
    """Rightmost x where u crosses the level, scanning from the right
    boundary for the first pair u_i >= level > u_{i+1}; linear interpolation
    between the nodes.  Returns None when there is no crossing."""
    if not 0.0 < level < 1.0:
        raise ConfigError(f"level must lie in (0, 1), got {level}")
    vals = u.values
    mask = (vals[:-1] >= level) & (vals[1:] < level)
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return None
    i = int(idx[-1])
    x = u.grid.nodes
    frac = (vals[i] - level) / (vals[i] - vals[i + 1])
    return float(x[i] + frac * u.grid.dx)


@dataclass
class SpeedEstimate:
    level: float
    positions: list  # of (t, x), sorted in t
    speed: float
    method: str  # "endpoint_difference" or "least_squares"


def speed_from_positions(positions, method: str = "endpoint_difference",
                         level: float = float("nan")) -> SpeedEstimate:
    """Wave speed from tracked front positions.

    endpoint_difference: (x_last - x_first) / (t_last - t_first).
    least_squares: regression slope of x against t.
    Entries whose position is None (no crossing) are dropped first.
    """
    pts = [(t, x) for t, x in positions if x is not None]
    if len(pts) < 2:
        raise ConfigError(f"need at least 2 front positions, got {len(pts)}")
    ts = np.array([t for t, _ in pts])
    xs = np.array([x for _, x in pts])
    if np.any(np.diff(ts) <= 0):
        raise ConfigError("positions must have strictly increasing t")
    if method == "endpoint_difference":
        speed = (xs[-1] - xs[0]) / (ts[-1] - ts[0])
    elif method == "least_squares":
        speed = float(np.polyfit(ts, xs, 1)[0])
    else:
        raise ConfigError(f"unknown method {method!r}")
    return SpeedEstimate(level=level, positions=pts, speed=float(speed), method=method)


@dataclass
class PeriodEstimate:
    period: float | None
    shift_speed: float
    mismatch: float
    classification: str  # traveling_wave | pulsating_front | undetermined
    mismatch_by_period: dict = field(default_factory=dict)


def detect_period(snapshots, speed: float, window=None) -> PeriodEstimate:
    """Detect time-periodicity of the profile in the frame moving at `speed`.

    For each candidate period T = k * dt (dt the uniform snapshot spacing),
    computes the normalized L2 mismatch between u(t, x) and
    u(t + T, x + speed * T) restricted to the window, averaged over all
    usable snapshot pairs.  Shifted profiles are evaluated by linear
    interpolation.  Candidate periods are capped at half the observed time
    span: claiming a period requires seeing at least two of them.
    """
    snaps = sorted(snapshots, key=lambda s: s.t)
    if len(snaps) < 3:
        raise ConfigError("need at least 3 snapshots")
    ts = np.array([s.t for s in snaps])
    dts = np.diff(ts)
    if not np.allclose(dts, dts[0], rtol=1e-9, atol=1e-12):
        raise ConfigError("snapshots must be uniformly spaced in time")
    dt = float(dts[0])
    grid = snaps[0].u.grid

    if window is None:
        ref = front_position(snaps[0].u, 0.4)
        if ref is None:
            ref = grid.x_max
        window = (ref - WINDOW_BEHIND[0], ref - WINDOW_BEHIND[1])
    x_lo, x_hi = window
    xw = grid.nodes
    xw = xw[(xw >= x_lo) & (xw <= x_hi)]
    if xw.size == 0:
        raise ConfigError(f"comparison window [{x_lo}, {x_hi}] contains no nodes")

    nodes = grid.nodes
    profiles = [s.u.values for s in snaps]
    n = len(snaps)
    mism = {}
    for k in range(1, (n - 1) // 2 + 1):
        T = k * dt
        if xw[-1] + speed * T > grid.x_max + 1e-9 or xw[0] + speed * T < grid.x_min - 1e-9:
            continue  # window leaves the grid after shifting
        num = 0.0
        den = 0.0
        for j in range(n - k):
            a = np.interp(xw, nodes, profiles[j])
            b = np.interp(xw + speed * T, nodes, profiles[j + k])
            num += float(np.sum((a - b) ** 2))
            den += float(np.sum(a ** 2))
        if den > 0:
            mism[T] = math.sqrt(num / den)
    if not mism:
        raise ConfigError("comparison window empty after shift for every period")

    periods = sorted(mism)
    values = [mism[T] for T in periods]
    if max(values) < TRAVELING_TOL:
        return PeriodEstimate(None, speed, max(values), "traveling_wave", mism)

    # smallest qualifying period wins: multiples of the fundamental period
    # are interior minima as well
    median = float(np.median(values))
    for i in range(1, len(periods) - 1):
        if values[i] < values[i - 1] and values[i] < values[i + 1]:
            if values[i] < PULSATING_TOL and values[i] * PULSATING_RATIO <= median:
                return PeriodEstimate(periods[i], speed, values[i],
                                      "pulsating_front", mism)
    return PeriodEstimate(None, speed, min(values), "undetermined", mism)
