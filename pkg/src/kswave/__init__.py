"""Numerical laboratory for the Keller-Segel-FKPP reaction-diffusion-
chemotaxis system: an upwind Cauchy simulator, a slab traveling-wave
boundary-value solver, and diagnostics (wave speeds, pulsating-front
detection, inequality checks).
"""

from ._version import __version__
from .backend import active_backend, available_backends
from .core import Field, Grid1D, Params, derivative_central, grid_make, trapezoid
from .kernel import (ExtensionPolicy, SLAB_EXTENSION, ULNormSpec,
                     check_kd_phi_domination, convolve_kd, kd_eval, phi_eval,
                     ul_norm)
from .elliptic import EllipticBC, NEUMANN, residual_elliptic, solve_v
from .cauchy import (CauchyState, RunConfig, RunResult,
                     initial_gaussian_plateau, run, step)
from .fronts import (PeriodEstimate, SpeedEstimate, detect_period,
                     front_position, speed_from_positions)
from .slab import (SlabConfig, SlabSolution, extended_profile,
                   integral_identity_check, linear_solve_ubar, residual_slab,
                   s_tau_map, solve_slab)
from .analysis import (BoundReport, StabilityReport, bound_report, chi_star,
                       dispersion, measure_growth_rate, stability_report)
from .sweep import (BifurcationPoint, SweepRecord, SweepSpec,
                    bifurcation_scan, run_sweep)

__all__ = [name for name in dir() if not name.startswith("_")]
