"""Numerical laboratory for critical fractional Moser-Trudinger problems in one dimension."""
__version__ = "0.1.0"

from .fraccore import (Grid1D, GridFunction, build_grid, pv_half_laplacian,
                       spectral_frac_laplacian, poisson_extend, sample)
from .functionals import INTERVAL, LINE, ProblemDomain, mt_energy, constraint_norm_sq
from .extremals import MaximizerOptions, ExtremalResult, maximize, subcritical_sweep
from .blowup import BlowupScales, BlowupReport, SyntheticBlowup, blowup_scales, bubble
from .testfns import interval_test_family, line_test_family, moser_sharpness_family

__all__ = [
    "Grid1D", "GridFunction", "build_grid", "pv_half_laplacian", "spectral_frac_laplacian",
    "poisson_extend", "sample", "INTERVAL", "LINE", "ProblemDomain", "mt_energy",
    "constraint_norm_sq", "MaximizerOptions", "ExtremalResult", "maximize",
    "subcritical_sweep", "BlowupScales", "BlowupReport", "SyntheticBlowup", "blowup_scales",
    "bubble", "interval_test_family", "line_test_family", "moser_sharpness_family",
]
