"""Pure-NumPy time-stepping core.

This is the fallback for the compiled extension `kswave._core`; both expose
the same `advance` contract and must agree to rounding error.  Operation
order inside the update is deliberately fixed so the chi = 0 reduction is
bitwise identical to a plain Fisher-KPP stepper.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from .errors import BlowUpError

BACKEND_NAME = "python"


def _elliptic_banded(n: int, dx: float, d: float):
    r = d / (dx * dx)
    ab = np.zeros((3, n))
    ab[0, 2:] = -r
    ab[1, :] = 1.0 + 2.0 * r
    ab[2, :-2] = -r
    ab[0, 1] = -2.0 * r
    ab[2, -2] = -2.0 * r
    return ab


def advance(u, v, nsteps, dx, dt, chi, d, react=True, advect=True):
    """Advance (u, v) by nsteps explicit upwind steps.

    u is updated by explicit Euler (diffusion + conservative upwind advective
    flux + logistic reaction), then v is recomputed from the Neumann
    tridiagonal solve of the signal equation.  Raises BlowUpError with the
    time offset (relative to the start of this call) and node of the first
    non-finite value.
    """
    u = np.array(u, dtype=np.float64)
    v = np.array(v, dtype=np.float64)
    n = u.size
    dx2 = dx * dx
    ab = _elliptic_banded(n, dx, d)
    for k in range(nsteps):
        lap = np.empty(n)
        lap[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dx2
        lap[0] = (u[1] - 2.0 * u[0] + u[1]) / dx2
        lap[-1] = (u[-2] - 2.0 * u[-1] + u[-2]) / dx2
        rhs = lap
        if advect:
            w = (v[1:] - v[:-1]) / dx
            a = chi * w
            donor = np.where(a > 0.0, u[:-1], u[1:])
            flux = a * donor
            div = np.empty(n)
            div[0] = (flux[0] - 0.0) / dx
            div[1:-1] = (flux[1:] - flux[:-1]) / dx
            div[-1] = (0.0 - flux[-1]) / dx
            rhs = rhs - div
        if react:
            rhs = rhs + u * (1.0 - u)
        u = u + dt * rhs
        if not np.all(np.isfinite(u)):
            node = int(np.argmin(np.isfinite(u)))
            raise BlowUpError((k + 1) * dt, node)
        v = solve_banded((1, 1), ab, u)
    return u, v
