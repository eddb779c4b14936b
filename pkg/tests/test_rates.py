from math import log

import numpy as np
import pytest
import sympy

from bplt.exceptions import ValidationError
from bplt.rates import gnp_range_message, rate_gnm, rate_gnm_via_gnp, rate_gnp


def test_rate_gnp_graph_case_against_high_precision():
    w = sympy.LambertW(1).evalf(40)
    expected = float(w + w**2 / 2 - 1)
    assert rate_gnp(2, 1.0, 0.0) == pytest.approx(expected, abs=1e-14)
    assert expected == pytest.approx(-0.2720309, abs=1e-7)


def test_rate_gnp_small_c():
    c = 1e-3
    assert rate_gnp(3, c, 0.0) == pytest.approx(-(c**3) / 3, rel=1e-3)
    assert rate_gnp(4, c, 0.0) == pytest.approx(-(c**4) / 4, rel=1e-3)


def test_rate_gnp_monotone():
    rates = [rate_gnp(3, c, 0.3) for c in np.linspace(0.1, 1.3, 25)]
    assert np.all(np.diff(rates) < 0)
    rates = [rate_gnp(3, 0.9, eta) for eta in np.linspace(0.0, 0.95, 20)]
    assert np.all(np.diff(rates) > 0)
    assert all(rate < 0 for rate in rates)


def test_rate_gnp_range():
    with pytest.raises(ValidationError, match="admissible range"):
        rate_gnp(3, 2.0, 0.0)
    with pytest.raises(ValidationError):
        rate_gnp(3, 0.5, 1.0)
    with pytest.raises(ValidationError):
        rate_gnp(1, 0.5, 0.0)
    # c_bar is infinite once eta passes e^{-k/(k-1)}
    assert np.isfinite(rate_gnp(3, 5.0, 0.5))
    assert "c_bar_3(0.2)" in gnp_range_message(3, 0.2)
    assert gnp_range_message(3, 0.0).startswith("c < (e/2)^(1/2)")


@pytest.mark.parametrize("k, b", [(2, 0.7), (3, 0.6), (4, 0.5), (5, 0.3)])
def test_rate_gnm_at_zero(k, b):
    assert rate_gnm(k, b, 0.0) * k == pytest.approx(-(b**k), rel=1e-15)


def test_rate_gnm_examples():
    assert rate_gnm(3, 0.6, 0.5) == pytest.approx(-(0.6**3) * (0.5 + 0.5 * log(0.5)) / 3)
    assert abs(rate_gnm(3, 0.6, 1 - 1e-9)) < 1e-15
    assert rate_gnm(3, 1.2, 0.9) < 0
    with pytest.raises(ValidationError, match="admissible range"):
        rate_gnm(3, 0.8, 0.0)
    with pytest.raises(ValidationError):
        rate_gnm(3, -0.1, 0.0)


@pytest.mark.parametrize("k, b, eta", [(2, 0.5, 0.0), (3, 0.6, 0.2), (3, 1.0, 0.6), (4, 0.5, 0.4)])
def test_rate_gnm_via_gnp(k, b, eta):
    assert rate_gnm_via_gnp(k, b, eta) == pytest.approx(rate_gnm(k, b, eta), rel=1e-10, abs=1e-14)
