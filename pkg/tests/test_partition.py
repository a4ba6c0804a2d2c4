import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treelab.counting import build_counts, catalan
from treelab.partition import (height_law, ldp_curve, partition_function,
                               partition_via_bounded, root_degree_law, w_sum, z_over_w)
from treelab.tree_core import stats

from conftest import brute_law, brute_weights

MUS = [0.0, 0.5, 1.0, 3.0]


def test_partition_small_cases():
    for mu in MUS:
        assert float(partition_function(2, mu)) == pytest.approx(math.exp(-mu), rel=1e-14)
        assert float(partition_function(3, mu)) == pytest.approx(
            math.exp(-mu) + math.exp(-2 * mu), rel=1e-14)
    assert float(partition_function(3, 0)) == 2
    assert float(partition_function(1, 2.0)) == 1


def test_partition_guards():
    with pytest.raises(ValueError):
        partition_function(0, 1.0)
    with pytest.raises(ValueError):
        partition_function(5, -1.0)
    with pytest.raises(ValueError):
        z_over_w(10, 0.0)


@pytest.mark.parametrize("mu", MUS)
def test_partition_matches_enumeration(mu, small_table):
    for n in range(2, 9):
        want = sum(brute_weights(n, mu).values())
        got = float(partition_function(n, mu, small_table))
        assert got == pytest.approx(want, rel=1e-12)
        assert float(partition_via_bounded(n, mu, small_table)) == pytest.approx(want, rel=1e-12)


def test_uniform_partition_is_catalan():
    assert float(partition_function(40, 0.0)) == pytest.approx(catalan(39), rel=1e-14)


def test_w_sum_small():
    for mu in (0.5, 2.0):
        assert float(w_sum(3, mu)) == pytest.approx(math.exp(-3 * mu) / 64, rel=1e-14)


def test_z_over_w_close_to_one():
    assert abs(z_over_w(1200, 0.5) - 1) < 5e-2


def test_height_law_examples():
    law = height_law(3, 0.0)
    assert law.pmf[1] == pytest.approx(0.5) and law.pmf[2] == pytest.approx(0.5)
    law = height_law(3, math.log(2))
    assert law.pmf[1] == pytest.approx(2 / 3) and law.pmf[2] == pytest.approx(1 / 3)


@pytest.mark.parametrize("mu", MUS)
def test_height_law_matches_enumeration(mu, small_table):
    for n in range(2, 9):
        want = brute_law(n, mu, lambda t: stats(t).height)
        law = height_law(n, mu, small_table)
        assert abs(law.pmf.sum() - 1) < 1e-12
        for h in range(n):
            assert abs(law.pmf[h] - want.get(h, 0.0)) < 1e-12


@pytest.mark.parametrize("mu", MUS)
def test_root_degree_law_matches_enumeration(mu, small_table):
    for n in range(2, 9):
        want = brute_law(n, mu, lambda t: stats(t).root_degree)
        law = root_degree_law(n, mu, small_table)
        assert abs(law.pmf.sum() - 1) < 1e-12
        for r in range(1, n):
            assert abs(law.prob(r) - want.get(r, 0.0)) < 1e-12
        z = float(partition_function(n, mu, small_table))
        assert law.prob(n - 1) == pytest.approx(math.exp(-mu) / z, rel=1e-12)


def test_root_degree_float_path_agrees_with_exact():
    table = build_counts(120, 120)
    a = root_degree_law(120, 2.0, table, method="exact")
    b = root_degree_law(120, 2.0, table, method="float")
    assert np.abs(a.pmf - b.pmf).max() < 1e-12


def test_log_backend_height_law_close():
    a = height_law(400, 1.0)
    b = height_law(400, 1.0, build_counts(400, 400, backend="log"))
    assert np.abs(a.pmf - b.pmf).max() < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 4.0), st.floats(0.01, 2.0))
def test_height_stochastically_decreasing_in_mu(mu, dmu):
    a = height_law(30, mu).cdf()
    b = height_law(30, mu + dmu).cdf()
    assert np.all(b >= a - 1e-12)


def test_ldp_curve_shape():
    vals = dict(ldp_curve(2000, 2.0, [0.5, 1.0, 1.3, 1.5, 2.0]))
    assert 0 <= vals[1.0] < 0.2
    assert vals[2.0] > vals[1.5] > vals[1.3] > 0
    assert vals[0.5] > 0
    with pytest.raises(ValueError):
        ldp_curve(20, 1.0, [0.0])


def test_ldp_small_x_grows_with_n():
    a = dict(ldp_curve(400, 2.0, [0.2]))[0.2]
    b = dict(ldp_curve(1600, 2.0, [0.2]))[0.2]
    assert b > a
