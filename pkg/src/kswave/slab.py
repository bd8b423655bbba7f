"""Traveling-wave boundary-value solver on [-a, a]: the linearized update
operator, a damped fixed-point driver with homotopy in the chemotaxis
coupling, and a Newton polish on the full nonlinear residual with the
normalization max_{x>=0} U = theta.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_banded

from ._version import __version__
from .core import Field, Grid1D, Params, grid_make, trapezoid
from .errors import ConfigError, ConvergenceError
from .kernel import SLAB_EXTENSION, ExtensionPolicy, _kd_weights

#: Homotopy increment in the coupling parameter tau.
TAU_STEP = 0.1
#: Fixed-point update size past which the iteration is declared divergent
#: and the Newton polish takes over from the best iterate seen.  The bare
#: map amplifies errors by a factor that grows with the slab length, so on
#: long slabs damping alone cannot stabilize it.
FP_DIVERGENCE_CAP = 1e3


@dataclass
class SlabConfig:
    params: Params
    a: float = 40.0
    theta: float = 0.1
    tau: float = 1.0
    grid_n: int = 801
    damping: float = 0.5
    max_iters: int = 300
    #: Strongly coupled points (chi/d near 2) have Newton systems with
    #: condition numbers around 1e14, which caps the reachable residual
    #: near 1e-9; the default keeps a safety factor above that floor.
    tol: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.theta < 0.25:
            raise ConfigError(f"theta must lie in (0, 1/4), got {self.theta}")
        if not self.a > math.log(1.0 / self.theta):
            raise ConfigError(
                f"need a > ln(1/theta) = {math.log(1.0 / self.theta):.4g}, got a = {self.a}"
            )
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError(f"tau must lie in [0, 1], got {self.tau}")
        if self.grid_n < 5 or self.grid_n % 2 == 0:
            raise ConfigError("grid_n must be odd (so x = 0 is a node) and >= 5")
        if not 0.0 < self.damping <= 1.0:
            raise ConfigError(f"damping must lie in (0, 1], got {self.damping}")
        if self.max_iters < 1 or self.tol <= 0:
            raise ConfigError("max_iters >= 1 and tol > 0 required")

    @property
    def grid(self) -> Grid1D:
        return grid_make(-self.a, self.a, self.grid_n)


@dataclass
class SlabSolution:
    c: float
    U: Field
    V: Field
    residual: float
    iterations: int
    converged: bool
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExtendedProfile:
    """A slab profile together with its off-slab extension (1 left, 0 right)."""

    field: Field
    ext: ExtensionPolicy

    def eval(self, x: float) -> float:
        g = self.field.grid
        if x <= g.x_min:
            return self.ext.left
        if x >= g.x_max:
            return self.ext.right
        return float(np.interp(x, g.nodes, self.field.values))


def extended_profile(U: Field) -> ExtendedProfile:
    """Tag a slab profile with the (1, 0) extension used by the convolution."""
    return ExtendedProfile(U, SLAB_EXTENSION)


# --- discrete operators, shared by the linear solve, residual, and Newton ---

def _deriv(vals: np.ndarray, dx: float) -> np.ndarray:
    """Array version of derivative_central (keeps everything consistent)."""
    out = np.empty_like(vals)
    out[1:-1] = (vals[2:] - vals[:-2]) / (2.0 * dx)
    out[0] = (-3.0 * vals[0] + 4.0 * vals[1] - vals[2]) / (2.0 * dx)
    out[-1] = (3.0 * vals[-1] - 4.0 * vals[-2] + vals[-3]) / (2.0 * dx)
    return out


@lru_cache(maxsize=16)
def _slab_operators(grid: Grid1D, d: float):
    """Cached (W, tail, M, dtail) where V = W @ U + tail and V' = M @ U + dtail
    for the slab extension (1 left, 0 right)."""
    W, tl, _tr = _kd_weights(grid, d)
    n = grid.n
    dx = grid.dx
    D = np.zeros((n, n))
    idx = np.arange(1, n - 1)
    D[idx, idx + 1] = 1.0 / (2.0 * dx)
    D[idx, idx - 1] = -1.0 / (2.0 * dx)
    D[0, 0], D[0, 1], D[0, 2] = -3.0 / (2 * dx), 4.0 / (2 * dx), -1.0 / (2 * dx)
    D[-1, -1], D[-1, -2], D[-1, -3] = 3.0 / (2 * dx), -4.0 / (2 * dx), 1.0 / (2 * dx)
    M = D @ W
    dtail = D @ tl
    return W, tl.copy(), M, dtail


def _signal(Uvals: np.ndarray, grid: Grid1D, d: float):
    W, tl, M, dtail = _slab_operators(grid, d)
    V = W @ Uvals + tl
    Vp = M @ Uvals + dtail
    return V, Vp


def _argmax_right_half(Uvals: np.ndarray, grid: Grid1D) -> int:
    """Leftmost argmax of U over nodes with x >= 0."""
    i0 = grid.nearest_node(0.0)
    return i0 + int(np.argmax(Uvals[i0:]))


def linear_solve_ubar(c: float, U: Field, config: SlabConfig,
                      tau: float | None = None) -> Field:
    """Solve the linearized profile equation for Ubar given (c, U):

        -Ubar'' - c Ubar' + tau*chi*(Ubar V')' = U(1-U),
        Ubar(-a) = 1, Ubar(a) = 0,

    with V the kernel convolution of the extended U.  Direct banded solve.
    """
    if tau is None:
        tau = config.tau
    grid = config.grid
    if U.grid != grid:
        raise ConfigError("profile grid does not match config grid")
    n = grid.n
    dx = grid.dx
    dx2 = dx * dx
    chi_eff = tau * config.params.chi
    _V, Vp = _signal(U.values, grid, config.params.d)

    ab = np.zeros((3, n))
    # row 0 and row n-1: Dirichlet
    ab[1, 0] = 1.0
    ab[1, -1] = 1.0
    # interior rows i = 1..n-2
    ab[2, 0:n - 2] = -1.0 / dx2 + c / (2.0 * dx) - chi_eff * Vp[0:n - 2] / (2.0 * dx)
    ab[1, 1:n - 1] = 2.0 / dx2
    ab[0, 2:n] = -1.0 / dx2 - c / (2.0 * dx) + chi_eff * Vp[2:n] / (2.0 * dx)
    rhs = U.values * (1.0 - U.values)
    rhs[0] = 1.0
    rhs[-1] = 0.0
    try:
        ubar = solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as err:  # pragma: no cover - defensive
        raise ConvergenceError(f"singular linear system at c={c}, tau={tau}") from err
    if not np.all(np.isfinite(ubar)):
        raise ConvergenceError(f"singular linear system at c={c}, tau={tau}")
    return Field(grid, ubar)


def s_tau_map(c: float, U: Field, config: SlabConfig,
              tau: float | None = None):
    """One application of the fixed-point operator:
    (c, U) -> (c + theta - max_{x>=0} Ubar, Ubar)."""
    ubar = linear_solve_ubar(c, U, config, tau)
    i = _argmax_right_half(ubar.values, config.grid)
    return c + config.theta - float(ubar.values[i]), ubar


def _residual_vector(c: float, Uvals: np.ndarray, config: SlabConfig,
                     tau: float, norm_node: int) -> np.ndarray:
    """Full discrete system: boundary rows, interior profile equation with
    the positive-part reaction, and the normalization row (appended)."""
    grid = config.grid
    n = grid.n
    dx = grid.dx
    chi_eff = tau * config.params.chi
    _V, Vp = _signal(Uvals, grid, config.params.d)
    G = Uvals * Vp
    F = np.empty(n + 1)
    F[0] = Uvals[0] - 1.0
    upp = (Uvals[2:] - 2.0 * Uvals[1:-1] + Uvals[:-2]) / (dx * dx)
    up = (Uvals[2:] - Uvals[:-2]) / (2.0 * dx)
    gp = (G[2:] - G[:-2]) / (2.0 * dx)
    react = np.maximum(Uvals[1:-1], 0.0) * (1.0 - Uvals[1:-1])
    F[1:n - 1] = -upp - c * up + chi_eff * gp - react
    F[n - 1] = Uvals[-1]
    F[n] = Uvals[norm_node] - config.theta
    return F


def _jacobian(c: float, Uvals: np.ndarray, config: SlabConfig,
              tau: float, norm_node: int) -> np.ndarray:
    """Analytic Jacobian of `_residual_vector` w.r.t. (c, U)."""
    grid = config.grid
    n = grid.n
    dx = grid.dx
    chi_eff = tau * config.params.chi
    W, tl, M, dtail = _slab_operators(grid, config.params.d)
    Vp = M @ Uvals + dtail
    # dG/dU where G = U * V': diag(V') + diag(U) @ M
    GJ = Uvals[:, None] * M
    GJ[np.arange(n), np.arange(n)] += Vp

    # unknown ordering: column 0 is c, columns 1..n are the nodal values of U
    J = np.zeros((n + 1, n + 1))
    Ju = J[:, 1:]
    Ju[0, 0] = 1.0
    Ju[n - 1, n - 1] = 1.0
    Ju[n, norm_node] = 1.0
    rows = np.arange(1, n - 1)
    # d/dc of -c U'
    J[rows, 0] = -(Uvals[2:] - Uvals[:-2]) / (2.0 * dx)
    # -U'' and -c U' tridiagonal parts
    Ju[rows, rows] += 2.0 / (dx * dx)
    Ju[rows, rows + 1] += -1.0 / (dx * dx) - c / (2.0 * dx)
    Ju[rows, rows - 1] += -1.0 / (dx * dx) + c / (2.0 * dx)
    # chi * ((U V')' centered): row i picks dG rows i+1 and i-1
    Ju[1:n - 1, :] += chi_eff * (GJ[2:, :] - GJ[:-2, :]) / (2.0 * dx)
    # reaction -relu(U)(1-U)
    drex = np.where(Uvals[1:-1] > 0.0, 1.0 - 2.0 * Uvals[1:-1], 0.0)
    Ju[rows, rows] += -drex
    return J


def _newton_polish(c: float, Uvals: np.ndarray, config: SlabConfig, tau: float,
                   target: float, max_newton: int = 80):
    """Newton iteration on the full nonlinear system with the normalization
    row appended.  The argmax node is frozen per iteration (leftmost argmax
    over x >= 0).  Backtracking line search on the max-norm of the residual.
    """
    grid = config.grid
    z = np.concatenate([[c], Uvals])
    its = 0
    for _ in range(max_newton):
        norm_node = _argmax_right_half(z[1:], grid)
        F = _residual_vector(z[0], z[1:], config, tau, norm_node)
        fn = float(np.max(np.abs(F)))
        if fn < target:
            break
        J = _jacobian(z[0], z[1:], config, tau, norm_node)
        try:
            delta = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as err:
            raise ConvergenceError(f"singular Newton system at tau={tau}") from err
        s = 1.0
        improved = False
        for _ls in range(12):
            z_new = z + s * delta
            F_new = _residual_vector(z_new[0], z_new[1:], config, tau,
                                     _argmax_right_half(z_new[1:], grid))
            if float(np.max(np.abs(F_new))) < fn:
                improved = True
                break
            s *= 0.5
        if not improved:
            break  # stagnation: no step length reduces the residual
        z = z + s * delta
        its += 1
    norm_node = _argmax_right_half(z[1:], grid)
    res = float(np.max(np.abs(_residual_vector(z[0], z[1:], config, tau, norm_node))))
    return float(z[0]), z[1:], res, its


def _initial_guess(config: SlabConfig):
    """Decaying front with max over x >= 0 pinned at theta."""
    x = config.grid.nodes
    x0 = math.log(config.theta)
    U = np.minimum(1.0, np.exp(-(x - x0)))
    U[0] = 1.0
    U[-1] = 0.0
    return 2.0, U


def _homotopy_stages(tau: float):
    stages = []
    k = 0
    while k * TAU_STEP < tau - 1e-12:
        stages.append(round(k * TAU_STEP, 12))
        k += 1
    stages.append(tau)
    return stages


def solve_slab(config: SlabConfig) -> SlabSolution:
    """Solve the slab problem: homotopy in tau from 0 to config.tau, damped
    fixed-point iteration at each stage, and a Newton polish on the full
    nonlinear residual (normalization row included) at every stage.
    """
    grid = config.grid
    c, U = _initial_guess(config)
    total_iters = 0
    fp_tol = 1e-4

    for tau in _homotopy_stages(config.tau):
        gamma = config.damping
        prev_delta = math.inf
        best_c, best_U, best_delta = c, U.copy(), math.inf
        for _ in range(config.max_iters):
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    c_new, ubar = s_tau_map(c, Field(grid, U), config, tau)
            except (ConvergenceError, ValueError):
                c, U = best_c, best_U
                break
            delta = max(abs(c_new - c), float(np.max(np.abs(ubar.values - U))))
            total_iters += 1
            if not math.isfinite(delta) or delta > FP_DIVERGENCE_CAP:
                c, U = best_c, best_U
                break
            if delta < best_delta:
                best_c, best_U, best_delta = c, U.copy(), delta
            if delta > prev_delta:
                gamma = max(gamma * 0.5, 0.05)
            else:
                gamma = min(config.damping, gamma * 1.2)
            prev_delta = delta
            c = (1.0 - gamma) * c + gamma * c_new
            U = (1.0 - gamma) * U + gamma * ubar.values
            if delta < fp_tol:
                break
        c, U, _res, nits = _newton_polish(c, U, config, tau,
                                          target=min(config.tol * 1e-1, 1e-10))
        total_iters += nits

    V, _ = _signal(U, grid, config.params.d)
    Uf = Field(grid, U)
    Vf = Field(grid, V)
    sol = SlabSolution(c=c, U=Uf, V=Vf, residual=0.0, iterations=total_iters,
                       converged=False)
    sol.residual = residual_slab(sol, config)
    interior_min = float(np.min(U[1:-1]))
    norm_defect = abs(float(U[_argmax_right_half(U, grid)]) - config.theta)
    # the far tail decays below machine epsilon, so positivity is only
    # meaningful down to the residual tolerance
    positive = interior_min >= -config.tol
    sol.converged = (sol.residual <= config.tol and positive
                     and norm_defect <= config.tol)
    sol.diagnostics = {
        "interior_min": interior_min,
        "normalization_defect": norm_defect,
        "tau": config.tau,
        "positivity_ok": positive,
    }
    return sol


def residual_slab(sol: SlabSolution, config: SlabConfig) -> float:
    """Max-norm of the discretized equation defect, combined with the
    boundary and normalization defects."""
    U = sol.U.values
    if sol.U.grid != config.grid:
        raise ConfigError("solution grid does not match config grid")
    norm_node = _argmax_right_half(U, config.grid)
    F = _residual_vector(sol.c, U, config, config.tau, norm_node)
    return float(np.max(np.abs(F)))


def integral_identity_check(sol: SlabSolution, config: SlabConfig):
    """Check the integrated profile equation over [0, a]:

        int_0^a U(1-U) = -c U(0) - U'(a) + U'(0) - chi U(0) V'(0),

    with the left side by trapezoid and the derivatives by the central
    (one-sided at a) stencils.  Returns (lhs, rhs, gap).  Stated for tau = 1;
    for intermediate tau the coupling tau*chi is used.
    """
    grid = config.grid
    U = sol.U
    Up = _deriv(U.values, grid.dx)
    _V, Vp = _signal(U.values, grid, config.params.d)
    i0 = grid.nearest_node(0.0)
    chi_eff = config.tau * config.params.chi
    lhs = trapezoid(Field(grid, U.values * (1.0 - U.values)), 0.0, config.a)
    rhs = (-sol.c * U.values[i0] - Up[-1] + Up[i0]
           - chi_eff * U.values[i0] * Vp[i0])
    return float(lhs), float(rhs), abs(float(lhs) - float(rhs))


def solution_to_csv(sol: SlabSolution, path) -> None:
    """Export the profile as CSV with columns x,U,V."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "U", "V"])
        for x, uu, vv in zip(sol.U.grid.nodes, sol.U.values, sol.V.values):
            w.writerow([repr(float(x)), repr(float(uu)), repr(float(vv))])


def slab_metadata(config: SlabConfig, sol: SlabSolution, extra: dict | None = None) -> dict:
    meta = {
        "version": __version__,
        "config": {
            "chi": config.params.chi,
            "d": config.params.d,
            "a": config.a,
            "theta": config.theta,
            "tau": config.tau,
            "grid_n": config.grid_n,
            "damping": config.damping,
            "max_iters": config.max_iters,
            "tol": config.tol,
        },
        "c": sol.c,
        "residual": sol.residual,
        "iterations": sol.iterations,
        "converged": sol.converged,
        "diagnostics": sol.diagnostics,
    }
    if extra:
        meta.update(extra)
    return meta
