"""Averaged explicit-formula laboratory for one-parameter elliptic curve families."""

__version__ = "0.1.0"

from .bounds import BoundsReport, lower_bound, rmt_window, sandwich, tau_bsd, upper_bound
from .density import DensityReport, first_moment, kernel_hat, one_level_density, predicted_density
from .family import FamilySpec, avg_log_conductor, log_conductor, sieve_family, specialize
from .optimize import OptimumReport, maximize_c, objective, scan_candidates
from .rmtsim import EnsembleConfig, WindowCountStats, run_ensemble
from .testfunc import TestFunctionH, build_phi, c_of_h, fejer, h_integrals, ratio_phihat0_phi0

__all__ = [
    "BoundsReport", "DensityReport", "EnsembleConfig", "FamilySpec", "OptimumReport",
    "TestFunctionH", "WindowCountStats", "avg_log_conductor", "build_phi", "c_of_h", "fejer",
    "first_moment", "h_integrals", "kernel_hat", "log_conductor", "lower_bound", "maximize_c",
    "objective", "one_level_density", "predicted_density", "ratio_phihat0_phi0", "rmt_window",
    "run_ensemble", "sandwich", "scan_candidates", "sieve_family", "specialize", "tau_bsd",
    "upper_bound",
]
