"""Tridiagonal finite-difference solver for the signal equation
-d v'' = u - v, the second (local) route to v alongside kernel convolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .core import Field
from .errors import ConfigError


@dataclass(frozen=True)
class EllipticBC:
    """Boundary condition for the signal solve.

    kind 'neumann' is zero-flux (mirrored ghost nodes, second order);
    kind 'dirichlet' pins the boundary values.
    """

    kind: str = "neumann"
    left_value: float = 0.0
    right_value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("neumann", "dirichlet"):
            raise ConfigError(f"unknown BC kind {self.kind!r}")
        if not (math.isfinite(self.left_value) and math.isfinite(self.right_value)):
            raise ConfigError("BC values must be finite")


NEUMANN = EllipticBC("neumann")


def _banded_matrix(n: int, dx: float, d: float, bc: EllipticBC):
    """Banded form (for scipy.solve_banded) of (-d D^2 + I)."""
    r = d / (dx * dx)
    ab = np.zeros((3, n))
    ab[0, 2:] = -r          # superdiagonal for interior rows
    ab[1, :] = 1.0 + 2.0 * r
    ab[2, :-2] = -r         # subdiagonal for interior rows
    if bc.kind == "neumann":
        ab[0, 1] = -2.0 * r     # row 0: ghost v_{-1} = v_1
        ab[2, -2] = -2.0 * r    # row n-1: ghost v_n = v_{n-2}
    else:
        ab[1, 0] = 1.0
        ab[0, 1] = 0.0
        ab[1, -1] = 1.0
        ab[2, -2] = 0.0
    return ab


def solve_v(u: Field, d: float, bc: EllipticBC = NEUMANN) -> Field:
    """Solve (-d D^2 + I) v = u by exact tridiagonal elimination.

    The matrix is an M-matrix with unit row sums under Neumann, so the
    discrete max principle min(u) <= v <= max(u) holds.
    """
    if d <= 0:
        raise ConfigError(f"d must be positive, got {d}")
    n = u.grid.n
    ab = _banded_matrix(n, u.grid.dx, d, bc)
    rhs = u.values.copy()
    if bc.kind == "dirichlet":
        rhs[0] = bc.left_value
        rhs[-1] = bc.right_value
    v = solve_banded((1, 1), ab, rhs)
    return Field(u.grid, v)


def residual_elliptic(u: Field, v: Field, d: float) -> float:
    """Max over interior nodes of |-d D^2 v - u + v|."""
    if u.grid != v.grid:
        raise ConfigError("fields must share a grid")
    dx2 = u.grid.dx ** 2
    lap = (v.values[2:] - 2.0 * v.values[1:-1] + v.values[:-2]) / dx2
    return float(np.max(np.abs(-d * lap - u.values[1:-1] + v.values[1:-1])))
