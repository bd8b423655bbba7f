"""Closed-form linear stability analysis of the constant state u = 1 and the
consolidated inequality-check report shared by the Cauchy and slab pipelines.

The growth rate of a perturbation mode exp(ikx + lambda*t) around u = v = 1
is

    lambda(k) = -k^2 - 1 + chi * k^2 / (1 + d k^2),

obtained by linearizing the coupled system (the signal responds through
(1 + d k^2)^-1).  The instability threshold chi = (1 + sqrt(d))^2 follows by
maximizing over k, and `measure_growth_rate` validates the formula against
the time stepper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Field, Params, derivative_central, grid_make
from .elliptic import NEUMANN, solve_v
from .errors import ConfigError, KswaveError
from .kernel import SLAB_EXTENSION, ExtensionPolicy, ULNormSpec, ul_norm
from . import backend

NEUTRAL_BAND = 1e-12
#: Perturbation amplitude and the cap past which the fit window is rejected.
PERTURBATION = 1e-4
SATURATION_CAP = 1e-2
AMPLITUDE_FLOOR = 1e-8


def dispersion(k: float, params: Params):
    """Linear growth rate lambda(k) of the mode exp(ikx + lambda t)."""
    k2 = np.asarray(k) ** 2
    out = -k2 - 1.0 + params.chi * k2 / (1.0 + params.d * k2)
    return float(out) if out.ndim == 0 else out


def chi_star(d: float) -> float:
    """Stability threshold of u = 1: stable iff chi < (1 + sqrt(d))^2."""
    return (1.0 + math.sqrt(d)) ** 2


@dataclass(frozen=True)
class StabilityReport:
    chi_star: float
    lambda_max: float
    k_star: float
    verdict: str  # stable | neutral | unstable


def stability_report(params: Params) -> StabilityReport:
    """Closed-form maximization of the dispersion relation.

    For chi <= 1 the maximum sits at k = 0 with lambda = -1; for chi > 1 it
    sits at k^2 = (sqrt(chi) - 1)/d with lambda = (sqrt(chi)-1)^2/d - 1.
    """
    chi, d = params.chi, params.d
    if chi > 1.0:
        k_star = math.sqrt((math.sqrt(chi) - 1.0) / d)
        lambda_max = (math.sqrt(chi) - 1.0) ** 2 / d - 1.0
    else:
        k_star = 0.0
        lambda_max = -1.0
    if abs(lambda_max) <= NEUTRAL_BAND:
        verdict = "neutral"
    elif lambda_max > 0:
        verdict = "unstable"
    else:
        verdict = "stable"
    return StabilityReport(chi_star(d), lambda_max, k_star, verdict)


def measure_growth_rate(params: Params, k: float, run_backend=None) -> float:
    """Fit the growth rate of a small cosine perturbation of u = 1.

    Runs the explicit stepper on a Neumann domain whose length is a multiple
    of pi/k (so cos(kx) is an exact discrete eigenmode), fits the log of the
    perturbation amplitude between the noise floor and the nonlinear
    saturation cap, and returns the slope.
    """
    if k <= 0:
        raise ConfigError("k must be positive")
    adv = run_backend if run_backend is not None else backend.advance
    half_waves = 8
    nodes_per_half_wave = 16
    L = half_waves * math.pi / k
    n = half_waves * nodes_per_half_wave + 1
    grid = grid_make(0.0, L, n)
    if grid.dx > (2.0 * math.pi / k) / 8.0:
        raise ConfigError("fewer than 8 nodes per wavelength")
    dt = grid.dx ** 2 / 10.0
    u = 1.0 + PERTURBATION * np.cos(k * grid.nodes)
    v = solve_v(Field(grid, u), params.d, NEUMANN).values

    sample_every = max(1, int(round(0.05 / dt)))
    t_max = 14.0
    n_chunks = int(t_max / (sample_every * dt))
    times, amps = [0.0], [PERTURBATION]
    t = 0.0
    for _ in range(n_chunks):
        u, v = adv(u, v, sample_every, grid.dx, dt, params.chi, params.d, True, True)
        t += sample_every * dt
        amp = 0.5 * float(np.max(u) - np.min(u))
        times.append(t)
        amps.append(amp)
        if amp > SATURATION_CAP:
            break
    times = np.array(times)
    amps = np.array(amps)
    usable = (amps > AMPLITUDE_FLOOR) & (amps < SATURATION_CAP)
    if np.count_nonzero(usable) < 5:
        raise KswaveError(
            "no fittable window: perturbation saturated or decayed too fast"
        )
    return float(np.polyfit(times[usable], np.log(amps[usable]), 1)[0])


@dataclass(frozen=True)
class BoundCheck:
    name: str
    value: float
    bound: float
    margin: float
    passed: bool
    asserted: bool = True


@dataclass
class BoundReport:
    checks: list

    @property
    def n_failures(self) -> int:
        return sum(1 for c in self.checks if c.asserted and not c.passed)

    def entry(self, name: str) -> BoundCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dicts(self):
        return [vars(c) for c in self.checks]


def bound_report(c: float, U: Field, V: Field, params: Params,
                 ext: ExtensionPolicy = SLAB_EXTENSION,
                 speed_discrete_slack: float = 0.2) -> BoundReport:
    """Evaluate the checkable inequalities on a wave (c, U, V).

    (i)   |V'| <= V/sqrt(d) pointwise, with discrete slack 20*dx^2;
    (ii)  c <= 2 + (chi/sqrt(d) + chi/d) * max(V);
    (iii) c >= 2 - speed_discrete_slack;
    (iv)  empirical constant in max(V) <= C d^{-1/4} ||U||_ul (reported,
          never asserted: the constant is not pinned down).
    """
    if float(np.min(U.values)) < -1e-8:
        raise ConfigError("bound report requires a nonnegative profile")
    dx = U.grid.dx
    rd = math.sqrt(params.d)
    Vp = derivative_central(V).values
    slack = 20.0 * dx * dx
    worst = float(np.max(np.abs(Vp) - V.values / rd))
    checks = [BoundCheck("signal_gradient", worst, slack, slack - worst,
                         worst <= slack)]

    vmax = float(np.max(V.values))
    upper = 2.0 + (params.chi / rd + params.chi / params.d) * vmax
    checks.append(BoundCheck("speed_upper", c, upper, upper - c, c <= upper))

    lower = 2.0 - speed_discrete_slack
    checks.append(BoundCheck("speed_lower", c, lower, c - lower, c >= lower))

    sigma = 0.5 / rd
    spec = ULNormSpec(sigma_ul=sigma, p=2.0)
    norm = ul_norm(U, spec, ext)
    if norm > 0:
        emp = vmax * params.d ** 0.25 / norm
    else:
        emp = 0.0
    checks.append(BoundCheck("ul_constant", emp, math.inf, math.inf, True,
                             asserted=False))
    return BoundReport(checks)
