"""Exact distribution, moments and moment asymptotics of quicksort comparison counts."""

__version__ = "0.1.0"

from .exact import (  # noqa: E402
    ComparisonDistribution,
    InvariantError,
    MomentTable,
    Mode,
    PGFPolynomial,
    PivotCostModel,
    QuicksortEngine,
    brute_force_distribution,
    distribution,
    factorial_moment_from_distribution,
    factorial_moments_recurrence,
    moment_series,
    pgf,
    quicksort_count,
    raw_moments,
    variance,
)
from .series import TruncatedSeries, coeff_exact, format_rational  # noqa: E402
