"""Exception types raised across the package."""


class LevyDomainsError(Exception):
    """Base class for all package errors."""


class UnsupportedMeasure(LevyDomainsError):
    """A measure family cannot evaluate a functional to the requested tolerance."""


class QuadratureFailure(LevyDomainsError):
    """Adaptive quadrature did not reach its tolerance within the panel budget."""


class RootIsolationFailure(LevyDomainsError):
    """Too many sign changes to isolate within the per-window budget."""


class HypothesisViolated(LevyDomainsError):
    """Preconditions of a witness construction do not hold for the input."""


class InvalidDirections(LevyDomainsError):
    """Direction data for a block measure violates S0 ∩ (-S0) = ∅ or has zero mean."""


class InfiniteActivity(LevyDomainsError):
    """Exact compound Poisson simulation needs a finite Levy measure."""


class ConfigError(LevyDomainsError):
    """Malformed measure, integrand, or run configuration."""
