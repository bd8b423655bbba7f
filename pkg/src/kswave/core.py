"""Shared data model: physical parameters, uniform 1D grids, sampled fields,
and elementary calculus (differentiation, quadrature) on them.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError


@dataclass(frozen=True)
class Params:
    """Physical parameters of the model.

    Attributes
    ----------
    chi : float
        Chemotaxis sensitivity. Any finite sign.
    d : float
        Signal diffusion length-scale parameter, strictly positive.
    """

    chi: float
    d: float

    def __post_init__(self):
        if not math.isfinite(self.chi):
            raise ConfigError(f"chi must be finite, got {self.chi}")
        if not (math.isfinite(self.d) and self.d > 0):
            raise ConfigError(f"d must be positive and finite, got {self.d}")


@dataclass(frozen=True)
class Grid1D:
    """Uniform mesh on [x_min, x_max] with n nodes.

    Node i sits exactly at ``x_min + i * dx`` (computed by multiplication,
    never by repeated addition, so repeated construction is bitwise stable).
    """

    x_min: float
    x_max: float
    n: int
    dx: float = field(init=False)

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ConfigError("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise ConfigError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if self.n < 3:
            raise ConfigError(f"need at least 3 nodes, got n={self.n}")
        object.__setattr__(self, "dx", (self.x_max - self.x_min) / (self.n - 1))

    @property
    def nodes(self) -> NDArray[np.float64]:
        return self.x_min + np.arange(self.n) * self.dx

    def nearest_node(self, x: float) -> int:
        """Index of the node closest to x (ties resolve to the right)."""
        i = int(round((x - self.x_min) / self.dx))
        return min(max(i, 0), self.n - 1)


def grid_make(x_min: float, x_max: float, n: int) -> Grid1D:
    """Build a uniform grid; rejects non-finite bounds and n < 3."""
    return Grid1D(float(x_min), float(x_max), int(n))


@dataclass
class Field:
    """A real-valued function sampled on a grid."""

    grid: Grid1D
    values: NDArray[np.float64]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.n,):
            raise ConfigError(
                f"field has {self.values.shape} values for a grid of {self.grid.n} nodes"
            )

    @classmethod
    def from_function(cls, grid: Grid1D, fn) -> "Field":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=np.float64))

    @classmethod
    def constant(cls, grid: Grid1D, value: float) -> "Field":
        return cls(grid, np.full(grid.n, float(value)))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


def derivative_central(f: Field) -> Field:
    """Second-order derivative: centered in the interior, one-sided 3-point
    stencils at the endpoints. Exact for polynomials of degree <= 2."""
    u = f.values
    dx = f.grid.dx
    out = np.empty_like(u)
    out[1:-1] = (u[2:] - u[:-2]) / (2.0 * dx)
    out[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx)
    out[-1] = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * dx)
    return Field(f.grid, out)


def second_difference(f: Field) -> Field:
    """Centered second difference on interior nodes; endpoint values are
    copied from the adjacent interior node (only the interior is meaningful)."""
    u = f.values
    dx2 = f.grid.dx * f.grid.dx
    out = np.empty_like(u)
    out[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dx2
    out[0] = out[1]
    out[-1] = out[-2]
    return Field(f.grid, out)


def snap_to_node(grid: Grid1D, x: float) -> float:
    """Snap x to the nearest grid node; used by `trapezoid` for its bounds."""
    return grid.x_min + grid.nearest_node(x) * grid.dx


def trapezoid(f: Field, a: float, b: float) -> float:
    """Composite trapezoid rule of f over [a, b].

    The bounds are snapped to the nearest grid nodes (use `snap_to_node` to
    see the effective interval). [a, b] must lie within the grid extent.
    """
    g = f.grid
    eps = 0.5 * g.dx
    if a < g.x_min - eps or b > g.x_max + eps or a > b:
        raise ConfigError(f"[{a}, {b}] outside grid extent [{g.x_min}, {g.x_max}]")
    i = g.nearest_node(a)
    j = g.nearest_node(b)
    if i == j:
        return 0.0
    vals = f.values[i : j + 1]
    return float(g.dx * (vals.sum() - 0.5 * (vals[0] + vals[-1])))


def field_to_csv(f: Field, path) -> None:
    """Write a field as CSV with mandatory header `x,value`."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "value"])
        for x, v in zip(f.grid.nodes, f.values):
            w.writerow([repr(float(x)), repr(float(v))])


def field_from_csv(path) -> Field:
    """Read a field written by `field_to_csv`; the grid is reconstructed
    from the first/last x and the row count."""
    xs, vs = [], []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if [h.strip() for h in header] != ["x", "value"]:
            raise ConfigError(f"expected header 'x,value', got {header!r}")
        for row in r:
            xs.append(float(row[0]))
            vs.append(float(row[1]))
    grid = grid_make(xs[0], xs[-1], len(xs))
    return Field(grid, np.array(vs))
