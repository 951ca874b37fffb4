"""Chi-square upper-tail probabilities."""

import math

from scipy import special

from .errors import DomainError

__all__ = ["chi_square_sf", "format_p"]


def chi_square_sf(x: float, df: int) -> float:
    """Upper-tail probability ``P(X >= x)`` for ``X ~ chi2(df)``.

    Evaluated as the regularized upper incomplete gamma function
    ``Q(df/2, x/2)``.  Negative ``x`` within rounding of zero is treated as 0.
    """
    if df <= 0 or int(df) != df:
        raise DomainError(f"chi-square df must be a positive integer, got {df}")
    if math.isnan(x):
        raise DomainError("chi-square statistic is NaN")
    if x <= 0:
        return 1.0
    return float(special.gammaincc(0.5 * df, 0.5 * x))


def format_p(p: float) -> str:
    """Text form of a p-value; values below 1e-16 print as ``< 1e-16``."""
    if p < 1e-16:
        return "< 1e-16"
    if p < 1e-3:
        return f"{p:.2e}"
    return f"{p:.3f}"
