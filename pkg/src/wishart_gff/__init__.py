"""Monte Carlo, analytic and exact checks for spectra of overlapping Wishart matrices."""

from . import analytic, cli, config, oracle, records, rng_ensemble, spectra
from .rng_ensemble import (
    ArrayHandle,
    CornerFamilySpec,
    DistributionKind,
    EntryDistribution,
    SubmatrixSpec,
    corner_family,
    entry,
    materialize,
    wishart,
)
from .config import ConfigError, ExperimentConfig, load_config
from .spectra import CovarianceReport, LinearStat, PlanarStat, PlanarTestFn, estimate_moments

__version__ = "0.1.0"
