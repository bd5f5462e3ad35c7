import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phaserelax.model import (
    DomainError,
    ModelParams,
    ValidityWarning,
    default_j_max,
    legendre,
    legendre_table,
    reference_params,
    spin_window,
)

# hand-computed exp(-(8 - 14)^2 / 9) = exp(-4)
E_MINUS_4 = 0.018315638888734179


def test_spin_window_values(ref):
    assert spin_window(14, ref) == 1.0
    assert spin_window(17, ref) == pytest.approx(math.exp(-1), rel=1e-15)
    assert spin_window(8, ref) == pytest.approx(E_MINUS_4, rel=1e-14)


def test_spin_window_symmetric(ref):
    for k in range(1, 14):
        assert spin_window(14 + k, ref) == spin_window(14 - k, ref)


def test_spin_window_rejects_out_of_range(ref):
    with pytest.raises(DomainError):
        spin_window(ref.jmax + 1, ref)


def test_default_cutoff_truncation(ref):
    assert ref.jmax == default_j_max(14, 3) == 29
    assert spin_window(ref.jmax, ref) < math.exp(-25) * 1.0001


def test_explicit_short_cutoff_warns():
    with pytest.warns(ValidityWarning):
        ModelParams(j_max=20)


@pytest.mark.parametrize(
    "kw",
    [dict(beta=-0.1), dict(gamma=0.0), dict(hbar_omega=-1.0), dict(d=0.0), dict(j_max=3.5), dict(phi=math.nan)],
)
def test_invalid_params(kw):
    with pytest.raises(DomainError):
        ModelParams(**kw)


def test_period_and_units(ref):
    assert ref.period == 2 * math.pi / 1.45


def test_legendre_values():
    assert legendre(0, 0.7) == 1.0
    assert legendre(5, -1.0) == -1.0
    assert legendre(2, 0.5) == pytest.approx(-0.125, abs=1e-15)
    assert legendre(7, 1.0) == 1.0


@given(st.integers(0, 40), st.floats(-1.0, 1.0))
def test_legendre_matches_numpy(n, x):
    ref = np.polynomial.legendre.legval(x, [0] * n + [1])
    assert legendre(n, x) == pytest.approx(ref, abs=1e-12)


def test_legendre_domain():
    with pytest.raises(DomainError):
        legendre(3, 1.0001)
    with pytest.raises(DomainError):
        legendre(-1, 0.3)


def test_legendre_closed_forms():
    x = np.linspace(-1, 1, 1000)
    closed = [
        np.ones_like(x),
        x,
        (3 * x**2 - 1) / 2,
        (5 * x**3 - 3 * x) / 2,
        (35 * x**4 - 30 * x**2 + 3) / 8,
    ]
    table = legendre_table(4, x)
    for n in range(5):
        np.testing.assert_allclose(table[n], closed[n], atol=1e-12, rtol=0)


@given(st.integers(0, 60), st.floats(-1.0, 1.0))
def test_legendre_bounded(n, x):
    assert abs(legendre(n, x)) <= 1.0 + 1e-12


@given(st.integers(0, 40))
def test_legendre_endpoints(n):
    assert legendre(n, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert legendre(n, -1.0) == pytest.approx((-1) ** n, abs=1e-12)


def test_reference_params_override():
    p = reference_params(0.04, 4.0, phi=0.3)
    assert (p.beta, p.d, p.phi, p.j_bar) == (0.04, 4.0, 0.3, 14.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        p.with_(beta=0.0)
