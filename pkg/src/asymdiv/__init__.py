"""Numerical companion for mean-square estimates of asymmetric divisor problems."""

from .exponents import (
    DEFAULT_PROFILE,
    DomainError,
    ExponentTuple,
    InapplicableError,
    MomentProfile,
    check_applicability,
    derive_constants,
    eta,
    eta3,
    ivic_r_and_g,
    lemma7_sigma,
    sigma_star,
)
from .laurent import PrecisionError, stieltjes, zeta_laurent
from .mainterm import MainTerm, compute_main_term, eval_main_term
from .meansquare import MeanSquareProfile, delta_at, fit_power_law, mean_square
from .sieve import DivisorTable, build_table, load_or_build, series_constant, summatory
from .voronoi import TruncatedSeriesParams, calibrate, eval_truncated

__version__ = "0.1.0"
