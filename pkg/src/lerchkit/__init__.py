"""Lerch distribution toolkit: series evaluation, distribution functions, sampling and fitting."""

from .baselines import GenPoisson, GenPoissonParams, genpoisson_adjusted_pmf, genpoisson_pmf
from .data import BUILTIN_NAMES, Dataset, FrequencyTable, GroupingSpec, builtin, load_dataset, load_table
from .distribution import LerchDist, LerchParams, Truncation, vmr_threshold
from .errors import (
    DomainError,
    LerchError,
    NoConvergence,
    NoSolution,
    ParseError,
    SingularMatrix,
    UnknownDataset,
    ValidationError,
)
from .estimate import FitConfig, FitResult, fit, fit_minchi2, fit_ml, fit_mm, ml_covariance, mm_covariance
from .gof import GofReport, chi2_sf, pearson_chi2
from .phi import PhiResult, lerch_tail, phi, phi_ds, phi_dv, phi_dz
from .sampler import Direction, SamplerState, default_rng

__version__ = "0.1.0"
