import math
import warnings

import numpy as np
import pytest
from scipy.special import riccati_jn, riccati_yn

from potential_identification.errors import DomainError, RiccatiRangeWarning
from potential_identification.special_functions import riccati_j, riccati_n, riccati_row, riccati_table

GRID_X = np.geomspace(1e-3, 100.0, 37)
GRID_L = 64


def test_order_zero_closed_forms():
    assert riccati_j(0, math.pi / 2) == pytest.approx((1.0, 0.0), abs=1e-15)
    value, deriv = riccati_n(0, math.pi)
    assert value == pytest.approx(1.0, abs=1e-15)
    assert deriv == pytest.approx(0.0, abs=1e-15)


def test_order_zero_is_exact():
    for x in (1e-3, 0.7, 3.0, 27.0, 90.0):
        pair = riccati_row(0, x)[0]
        assert pair.value_j == math.sin(x)
        assert pair.value_n == -math.cos(x)
        assert pair.deriv_j == math.cos(x)
        assert pair.deriv_n == math.sin(x)


def test_order_one_closed_forms():
    x = 1.0
    value, deriv = riccati_j(1, x)
    assert value == pytest.approx(math.sin(x) / x - math.cos(x), rel=1e-13)
    assert value == pytest.approx(0.301169, abs=1e-6)
    assert deriv == pytest.approx(math.cos(x) / x - math.sin(x) / x**2 + math.sin(x), rel=1e-12)

    value, deriv = riccati_n(1, x)
    assert value == pytest.approx(-math.cos(x) / x - math.sin(x), rel=1e-13)
    assert value == pytest.approx(-1.381773, abs=1e-6)
    assert deriv == pytest.approx(math.sin(x) / x + math.cos(x) / x**2 - math.cos(x), rel=1e-12)


@pytest.mark.parametrize("l, x", [(15, 27.0), (5, 0.3), (32, 27.0), (10, 2.5)])
def test_regular_matches_scipy(l, x):
    values, derivs = riccati_jn(l, x)
    value, deriv = riccati_j(l, x)
    assert value == pytest.approx(values[l], rel=1e-10)
    assert deriv == pytest.approx(derivs[l], rel=1e-10)


@pytest.mark.parametrize("l, x", [(20, 5.0), (3, 0.4), (8, 30.0)])
def test_irregular_matches_scipy(l, x):
    values, derivs = riccati_yn(l, x)
    value, deriv = riccati_n(l, x)
    assert value == pytest.approx(values[l], rel=1e-10)
    assert deriv == pytest.approx(derivs[l], rel=1e-10)


def test_row_agrees_with_scalar_calls():
    for l_max, x in ((2, 2.0), (32, 27.0), (12, 0.05)):
        row = riccati_row(l_max, x)
        assert [pair.order for pair in row] == list(range(l_max + 1))
        for pair in row:
            assert pair.regular() == pytest.approx(riccati_j(pair.order, x), rel=1e-12)
            assert pair.irregular() == pytest.approx(riccati_n(pair.order, x), rel=1e-12)


def test_single_pair_row():
    (pair,) = riccati_row(0, 1.0)
    assert (pair.value_j, pair.value_n, pair.deriv_j, pair.deriv_n) == (
        math.sin(1.0),
        -math.cos(1.0),
        math.cos(1.0),
        math.sin(1.0),
    )


def test_wronskian_over_grid():
    table = riccati_table(GRID_L, GRID_X)
    wronskian = table.j * table.dn - table.dj * table.n
    assert np.all(np.isfinite(wronskian))
    assert np.max(np.abs(wronskian - 1.0)) < 1e-10


def test_scaled_values_stay_finite_deep_in_the_barrier():
    table = riccati_table(128, [1e-3, 0.1])
    for arr in (table.j, table.dj, table.n, table.dn):
        assert np.all(np.isfinite(arr))
    assert table.log_scale[0, -1] > 100
    assert np.all(table.log_scale >= 0)


def _true_values(l_max, x):
    rows = riccati_row(l_max, x)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RiccatiRangeWarning)
        regular = [pair.regular() for pair in rows]
        irregular = [pair.irregular() for pair in rows]
    return regular, irregular


@pytest.mark.parametrize("x", [0.05, 0.8, 3.0, 17.0, 60.0])
def test_recurrence_and_derivative_identities(x):
    regular, irregular = _true_values(40, x)
    for family in (regular, irregular):
        values = [v for v, _ in family]
        derivs = [d for _, d in family]
        for l in range(1, 40):
            triple = (values[l - 1], values[l], values[l + 1])
            if min(abs(v) for v in triple) <= 1e-200 or max(abs(v) for v in triple) >= 1e200:
                continue
            lhs = values[l - 1] + values[l + 1]
            rhs = (2 * l + 1) / x * values[l]
            assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9 * abs(values[l - 1]))
            assert derivs[l] == pytest.approx(values[l - 1] - l / x * values[l], rel=1e-9, abs=1e-9 * abs(values[l - 1]))


@pytest.mark.parametrize("l", range(6))
def test_large_argument_asymptotics(l):
    for x in (2000.0, 3500.0, 5000.0):
        value, _ = riccati_j(l, x)
        assert abs(value - math.sin(x - l * math.pi / 2)) <= 1e-2
    for x in (50.0, 75.0, 120.0):
        value, _ = riccati_j(l, x)
        assert abs(value - math.sin(x - l * math.pi / 2)) <= l * (l + 1) / x + 1e-2


def test_nonpositive_argument_is_rejected():
    with pytest.raises(DomainError):
        riccati_j(1, 0.0)
    with pytest.raises(DomainError):
        riccati_n(2, -1.0)
    with pytest.raises(DomainError):
        riccati_table(-1, 1.0)


def test_unrepresentable_values_are_clipped_with_a_warning():
    with pytest.warns(RiccatiRangeWarning):
        value, deriv = riccati_j(128, 1e-3)
    assert value == 0.0 and deriv == 0.0
    with pytest.warns(RiccatiRangeWarning):
        value, deriv = riccati_n(128, 1e-3)
    assert math.isinf(value) and value < 0
    assert not math.isnan(deriv)
    assert riccati_row(128, 1e-3)[-1].clipped
