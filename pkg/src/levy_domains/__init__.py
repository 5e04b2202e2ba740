"""Domains of improper stochastic integrals with respect to Levy processes."""
from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("levy-domains")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .classifier import Status, classify, sign_sets
from .core import Triplet, cumulant, load_triplet, mean, phi, phi_cumulant
from .errors import ConfigError, LevyDomainsError
from .integrands import MaskSet, apply_mask, dominates, parse_integrand
from .measures import AnalyticTail, BlockE2, FiniteAtomic

__all__ = ["__version__", "Status", "classify", "sign_sets", "Triplet", "cumulant",
           "load_triplet", "mean", "phi", "phi_cumulant", "ConfigError", "LevyDomainsError",
           "MaskSet", "apply_mask", "dominates", "parse_integrand", "AnalyticTail", "BlockE2",
           "FiniteAtomic"]
