import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catinfo.chisq import chi_square_sf, format_p
from catinfo.errors import DomainError
from oracles import chi2_sf_quad

# oracle values frozen from chi2_sf_quad (adaptive quadrature, 40 digits)
FROZEN = [
    (3.841459, 1, 0.05000000),
    (26.296, 16, 0.04999),
]


def test_zero_gives_one():
    assert chi_square_sf(0.0, 3) == 1.0


@pytest.mark.parametrize("x,df,p", FROZEN)
def test_critical_values(x, df, p):
    assert abs(chi_square_sf(x, df) - 0.05) < (1e-6 if df == 1 else 1e-4)
    assert abs(chi_square_sf(x, df) - chi2_sf_quad(x, df)) < 1e-10


def test_bad_df():
    with pytest.raises(DomainError):
        chi_square_sf(1.0, 0)
    with pytest.raises(DomainError):
        chi_square_sf(1.0, 1.5)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 120), st.integers(1, 40))
def test_matches_quadrature(x, df):
    assert abs(chi_square_sf(x, df) - chi2_sf_quad(x, df)) < 1e-10


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 200), st.floats(0, 50), st.integers(1, 40))
def test_monotone_decreasing(x, dx, df):
    assert chi_square_sf(x + dx, df) <= chi_square_sf(x, df)


def test_format_p():
    assert format_p(1e-20) == "< 1e-16"
    assert format_p(0.0005) == "5.00e-04"
    assert format_p(0.416) == "0.416"
    assert np.isfinite(chi_square_sf(2000.0, 1))
