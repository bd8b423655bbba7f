"""The exponential convolution kernel, convolution with explicit tail
extensions, the exponentially-weighted mollified weight function, and the
uniformly local Lp norm built from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import Field, Grid1D
from .errors import ConfigError

# Gauss-Legendre order used for all bump-function quadrature.  The bump is
# smooth, so this is far beyond the accuracy of anything it feeds.
_QUAD_ORDER = 96


@dataclass(frozen=True)
class ExtensionPolicy:
    """Constant values assumed for the integrand outside the grid."""

    left: float
    right: float

    def __post_init__(self):
        if not (math.isfinite(self.left) and math.isfinite(self.right)):
            raise ConfigError("extension values must be finite")


#: Extension used by the slab problem: 1 left of the slab, 0 right of it.
SLAB_EXTENSION = ExtensionPolicy(1.0, 0.0)


def kd_eval(x, d: float):
    """Evaluate the kernel exp(-|x|/sqrt(d)) / (2 sqrt(d)).

    Strictly positive, even in x, unit L1 mass.  Accepts scalars or arrays.
    """
    if d <= 0:
        raise ConfigError(f"d must be positive, got {d}")
    rd = math.sqrt(d)
    return np.exp(-np.abs(x) / rd) / (2.0 * rd)


@lru_cache(maxsize=32)
def _kd_weights(grid: Grid1D, d: float):
    """Quadrature weights for convolution against the kernel on a grid.

    Returns (W, tail_left, tail_right) such that, for a field f with constant
    extension (L, R),

        v_i = W[i] @ f + tail_left[i] * L + tail_right[i] * R.

    The tails are the closed-form half-line integrals of the kernel; the
    interior uses composite trapezoid weights.  Each row is normalized so the
    total kernel mass is exactly 1, which makes constants reproduce exactly
    and enforces the max principle at machine precision.
    """
    if d <= 0:
        raise ConfigError(f"d must be positive, got {d}")
    x = grid.nodes
    rd = math.sqrt(d)
    tw = np.full(grid.n, grid.dx)
    tw[0] = tw[-1] = 0.5 * grid.dx
    # W0[i, j] = trapezoid weight for K_d(x_i - x_j)
    W = kd_eval(x[:, None] - x[None, :], d) * tw[None, :]
    tail_left = 0.5 * np.exp(-(x - grid.x_min) / rd)
    tail_right = 0.5 * np.exp(-(grid.x_max - x) / rd)
    total = W.sum(axis=1) + tail_left + tail_right
    W /= total[:, None]
    tail_left /= total
    tail_right /= total
    W.setflags(write=False)
    tail_left.setflags(write=False)
    tail_right.setflags(write=False)
    return W, tail_left, tail_right


def convolve_kd(f: Field, d: float, ext: ExtensionPolicy) -> Field:
    """Convolve a field against the kernel, with constant tail extensions
    integrated in closed form.  Satisfies min(f~) <= v <= max(f~) exactly."""
    W, tl, tr = _kd_weights(f.grid, float(d))
    return Field(f.grid, W @ f.values + tl * ext.left + tr * ext.right)


# --- mollified exponential weight ------------------------------------------

#: Integral of exp(1 - 1/(1 - t^2)) over [-1, 1]; the peak of the normalized
#: bump on half-width h is 1 / (h * _BUMP_MASS).
def _bump_unnormalized(t):
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti))
    return out


@lru_cache(maxsize=4)
def _bump_mass() -> float:
    t, w = np.polynomial.legendre.leggauss(512)
    return float(np.sum(w * _bump_unnormalized(t)))


_MIN_HALFWIDTH = None  # set lazily: smallest h keeping the bump peak <= 1


def _min_halfwidth() -> float:
    global _MIN_HALFWIDTH
    if _MIN_HALFWIDTH is None:
        _MIN_HALFWIDTH = 1.0 / _bump_mass()
    return _MIN_HALFWIDTH


@dataclass(frozen=True)
class ULNormSpec:
    """Parameters of the uniformly local Lp norm.

    The mollifier is the standard smooth bump exp(1 - 1/(1-(x/h)^2)) on
    [-h, h], normalized to unit mass.  The half-width must be large enough
    that the normalized bump stays <= 1.
    """

    sigma_ul: float
    p: float = 2.0
    psi_halfwidth: float = 1.0

    def __post_init__(self):
        if not self.sigma_ul > 0:
            raise ConfigError(f"sigma_ul must be positive, got {self.sigma_ul}")
        if not self.p >= 1:
            raise ConfigError(f"p must be >= 1, got {self.p}")
        hmin = _min_halfwidth()
        if not self.psi_halfwidth >= hmin:
            raise ConfigError(
                f"psi_halfwidth must be >= {hmin:.6f} so the mollifier stays <= 1"
            )


def psi_eval(y, spec: ULNormSpec):
    """The normalized mollifier, supported on [-h, h] with unit mass."""
    h = spec.psi_halfwidth
    return _bump_unnormalized(np.asarray(y, dtype=np.float64) / h) / (h * _bump_mass())


#: phi_eval works on blocks of this many points: the quadrature temporaries
#: are (block, _QUAD_ORDER) arrays, so this caps memory at a few MB.
_PHI_BLOCK = 16384


@lru_cache(maxsize=8)
def _gauss_nodes(order: int):
    t, w = np.polynomial.legendre.leggauss(order)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


@lru_cache(maxsize=32)
def _psi_laplace(spec: "ULNormSpec") -> float:
    """L = int psi(y) exp(sigma*y) dy (= the same with -sigma: psi is even).

    Outside the bump support, phi(x) = L * exp(-sigma |x|) exactly.
    """
    h = spec.psi_halfwidth
    t, w = _gauss_nodes(_QUAD_ORDER)
    y = h * t
    vals = psi_eval(y, spec) * np.exp(spec.sigma_ul * y)
    return float(h * np.sum(w * vals))


def _phi_eval_block(x, spec: ULNormSpec):
    h = spec.psi_halfwidth
    sig = spec.sigma_ul
    t, w = _gauss_nodes(_QUAD_ORDER)
    # split point: the exponential kink at y = x, clipped into the support
    m = np.clip(x, -h, h)
    out = np.zeros_like(x)
    for lo, hi in ((-h, m), (m, h)):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        y = mid[:, None] + half[:, None] * t[None, :]  # (n_x, Q)
        vals = psi_eval(y.ravel(), spec).reshape(y.shape)
        integ = np.exp(-sig * np.abs(x[:, None] - y)) * vals
        out += half * (integ @ w)
    return out


def phi_eval(x, spec: ULNormSpec):
    """Evaluate phi(x) = (exp(-sigma|.|) * psi)(x).

    Fixed Gauss-Legendre quadrature over the mollifier's support, split at
    the kink of the exponential when it falls inside the support.  Accepts
    scalars or arrays; vectorized over x (in bounded-memory blocks).
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty_like(x)
    # outside the bump support the convolution is a pure exponential
    outside = np.abs(x) >= spec.psi_halfwidth
    out[outside] = _psi_laplace(spec) * np.exp(-spec.sigma_ul * np.abs(x[outside]))
    inner = np.nonzero(~outside)[0]
    for i in range(0, inner.size, _PHI_BLOCK):
        idx = inner[i:i + _PHI_BLOCK]
        out[idx] = _phi_eval_block(x[idx], spec)
    return out if out.shape != (1,) else float(out[0])


def phi_halfline_integral(w_upper, spec: ULNormSpec):
    """Closed-tail integral int_{-inf}^{w} phi, by quadrature over psi.

    Uses int_{-inf}^{z} exp(-sigma|t|) dt = exp(sigma z)/sigma for z <= 0
    and (2 - exp(-sigma z))/sigma for z > 0.
    """
    wq = np.atleast_1d(np.asarray(w_upper, dtype=np.float64))
    h = spec.psi_halfwidth
    sig = spec.sigma_ul
    L = _psi_laplace(spec)
    below = wq <= -h
    above = wq >= h
    if np.all(below | above):
        out = np.where(below, L * np.exp(sig * np.minimum(wq, 0.0)) / sig,
                       2.0 / sig - L * np.exp(-sig * np.maximum(wq, 0.0)) / sig)
        return out if out.shape != (1,) else float(out[0])
    t, gw = _gauss_nodes(_QUAD_ORDER)
    m = np.clip(wq, -h, h)
    out = np.zeros_like(wq)
    for lo, hi in ((-h, m), (m, h)):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        y = mid[:, None] + half[:, None] * t[None, :]
        z = wq[:, None] - y
        E = np.where(z <= 0, np.exp(sig * np.minimum(z, 0.0)) / sig,
                     (2.0 - np.exp(-sig * np.maximum(z, 0.0))) / sig)
        out += half * ((E * psi_eval(y.ravel(), spec).reshape(y.shape)) @ gw)
    return out if out.shape != (1,) else float(out[0])


def _ul_integral_at_shifts(f: Field, spec: ULNormSpec, ext: ExtensionPolicy, shifts):
    """phi_s-weighted integral of |f~|^p at each shift, mass-normalized.

    The on-grid part is composite trapezoid; both constant tails use the
    closed half-line integral of phi.  Each shift's quadrature is rescaled so
    the discrete phi mass equals the exact value 2/sigma, making constant
    fields exact.
    """
    g = f.grid
    x = g.nodes
    shifts = np.asarray(shifts, dtype=np.float64)
    gp = np.abs(f.values) ** spec.p
    tw = np.full(g.n, g.dx)
    tw[0] = tw[-1] = 0.5 * g.dx
    # phi(x_i - s) for all node/shift pairs
    diff = x[None, :] - shifts[:, None]
    P = phi_eval(diff.ravel(), spec).reshape(diff.shape)  # (S, n)
    interior = P @ (tw * gp)
    interior_mass = P @ tw
    left_mass = phi_halfline_integral(g.x_min - shifts, spec)
    # phi is even: int_{x_max}^inf phi(x-s) dx = int_{-inf}^{s - x_max} phi
    right_mass = phi_halfline_integral(shifts - g.x_max, spec)
    total = interior_mass + left_mass + right_mass
    exact_mass = 2.0 / spec.sigma_ul
    vals = (abs(ext.left) ** spec.p * left_mass
            + interior
            + abs(ext.right) ** spec.p * right_mass)
    return vals * (exact_mass / total)


def ul_norm(f: Field, spec: ULNormSpec, ext: ExtensionPolicy = ExtensionPolicy(0.0, 0.0)) -> float:
    """Uniformly local Lp norm: sup over shifts of the phi_s-weighted integral.

    The sup is taken over all grid nodes, two sentinel shifts beyond each
    boundary, and the two analytic limits s -> -inf / +inf where the constant
    extension makes the integral exactly |ext|^p * 2/sigma.
    """
    g = f.grid
    delta = spec.psi_halfwidth + 1.0 / spec.sigma_ul
    shifts = np.concatenate([
        g.nodes,
        [g.x_min - delta, g.x_min - 2.0 * delta,
         g.x_max + delta, g.x_max + 2.0 * delta],
    ])
    best = float(np.max(_ul_integral_at_shifts(f, spec, ext, shifts)))
    exact_mass = 2.0 / spec.sigma_ul
    best = max(best,
               abs(ext.left) ** spec.p * exact_mass,
               abs(ext.right) ** spec.p * exact_mass)
    return best ** (1.0 / spec.p)


@dataclass(frozen=True)
class DominationReport:
    """Empirical check that K_d(x-s) <= (C/sqrt(d)) * phi_s(x)."""

    d: float
    sigma_ul: float
    sigma_sqrt_d: float
    c_empirical: float
    x_at_max: float
    n_points: int

    @property
    def holds(self) -> bool:
        return math.isfinite(self.c_empirical)


def check_kd_phi_domination(spec: ULNormSpec, d: float, *, x_halfwidth: float | None = None,
                            n_points: int = 4001) -> DominationReport:
    """Scan for the smallest constant C with sqrt(d) K_d(z) <= C phi(z).

    Valid only for sigma_ul < 1/sqrt(d); a violated precondition raises
    rather than being silently accepted.
    """
    if d <= 0:
        raise ConfigError(f"d must be positive, got {d}")
    prod = spec.sigma_ul * math.sqrt(d)
    if not prod < 1.0:
        raise ConfigError(
            f"domination requires sigma_ul < 1/sqrt(d); got sigma_ul*sqrt(d) = {prod:.4g}"
        )
    if x_halfwidth is None:
        x_halfwidth = max(10.0 / spec.sigma_ul, 10.0 * math.sqrt(d))
    z = np.linspace(-x_halfwidth, x_halfwidth, n_points)
    ratio = math.sqrt(d) * kd_eval(z, d) / phi_eval(z, spec)
    i = int(np.argmax(ratio))
    return DominationReport(
        d=d, sigma_ul=spec.sigma_ul, sigma_sqrt_d=prod,
        c_empirical=float(ratio[i]), x_at_max=float(z[i]), n_points=n_points,
    )
