import itertools
import math

import numpy as np
import pytest
from scipy.optimize import bisect

from treelab import asymptotics as asy
from treelab.counting import _ctx
from treelab.partition import partition_function
from treelab.tree_core import PlaneTree


def test_lambda_exact_values():
    x = 0.37
    assert asy.lam(x, 4) == pytest.approx(4 * x + math.log(2), rel=1e-14)
    assert asy.lam(x, 3) == pytest.approx(3 * x + math.log(4), rel=1e-14)
    with pytest.raises(ValueError):
        asy.lam(x, 2)


def test_t_min_inversion_and_oracle():
    assert asy.t_min(math.pi / 8) == pytest.approx(4, rel=1e-12)
    want = bisect(lambda t: asy.lam_prime(1.0, t), 2 + 1e-9, 10, xtol=1e-14)
    assert abs(asy.t_min(1.0) - want) < 1e-12
    with pytest.raises(ValueError):
        asy.t_min(0.0)


@pytest.mark.parametrize("x", np.logspace(-8, 1, 19))
def test_t_min_stationarity(x):
    t = asy.t_min(x)
    assert abs(asy.lam_prime(x, t)) < 1e-12 * x
    assert asy.lam(x, t) <= min(asy.lam(x, t * 0.999), asy.lam(x, t * 1.001))


def test_t_min_leading_order():
    assert asy.t_min(1e-9) / asy.t_leading(1e-9) == pytest.approx(1, abs=1e-4)


def test_lambda_expansion_examples():
    x = 1e-6
    e = asy.lambda_expansion(x)
    t = asy.t_min(x)
    assert abs(e.t_approx - t) / t < 1e-4
    assert abs(e.min_approx - asy.lam(x, t)) < 1e-7
    assert e.excess(0.0) == 0.0
    with pytest.raises(ValueError):
        asy.lambda_expansion(0.5)


def test_ldp_forms_agree():
    for x in np.logspace(-3, 3, 61):
        a, b = asy.ldp_rate(x), asy.ldp_rate_alt(x)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)
    assert asy.ldp_rate(1.0) == 0.0
    assert asy.ldp_rate(2.0) == pytest.approx((math.pi / 2) ** (2 / 3) * 5 / 4, rel=1e-14)
    assert asy.ldp_rate(-1.0) == math.inf


def test_star_and_bernoulli_values():
    assert asy.star_probability(0.0) == pytest.approx(0.8)
    assert asy.star_probability(-math.inf) == 0.0
    assert asy.star_probability(math.inf) == 1.0
    assert asy.bernoulli_param(0, 0) == pytest.approx(0.5)
    assert asy.bernoulli_param(0.3, math.inf) == 0.0
    assert asy.bernoulli_param(0.3, -math.inf) == 1.0


def test_bernoulli_branches_converge():
    gaps = [abs(asy.bernoulli_param(c, 0.7) - asy.bernoulli_param(0, 0.7))
            for c in (1e-3, 1e-6, 1e-9, 1e-12)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-4


def test_bernoulli_branch_coherence_at_1e6():
    assert abs(asy.bernoulli_param(1e-6, 0.7) - asy.bernoulli_param(0, 0.7)) < 1e-3


def test_discrete_clt_pmf():
    p = asy.discrete_clt_pmf(1.0, 0.5)
    assert p.prob(0) == pytest.approx(p.prob(1), rel=1e-14)
    p = asy.discrete_clt_pmf(1.0, 0.3)
    assert abs(p.pmf.sum() - 1) < 1e-12
    a = 3 * (1 / (4 * math.pi)) ** (2 / 3)
    ks = np.arange(-200, 201)
    w = np.exp(-a * (ks - 0.3) ** 2)
    assert p.prob(2) == pytest.approx(w[202] / w.sum(), rel=1e-12)
    big = asy.discrete_clt_pmf(200.0, 0.4)
    assert big.prob(0) + big.prob(1) > 1 - 1e-12
    with pytest.raises(ValueError):
        asy.discrete_clt_pmf(1.0, 1.5)


def test_kesten_ball_mass():
    assert asy.kesten_ball_mass(PlaneTree.path(2)) == 0.25
    assert asy.kesten_ball_mass(PlaneTree.star(3)) == 0.25
    total = sum(asy.kesten_ball_mass(PlaneTree.star(k + 1)) for k in range(1, 31))
    # tail sum_{k > 30} k 2^{-(k+1)} = 32 / 2^31
    assert abs(total + 32 / 2 ** 31 - 1) < 1e-12


def test_predictions():
    p = asy.height_predictions(2000, 1.0)
    assert p.lln_height == pytest.approx((2 * math.pi ** 2 * 2000) ** (1 / 3))
    assert abs(p.lln_height - 34.0) < 0.1
    e = asy.height_predictions(500, 500.0)
    assert e.regime == "extreme" and e.lln_height is None and e.m_x >= 3
    sds = [asy.height_predictions(1000, mu).clt_sd for mu in (0.5, 1, 2, 4)]
    assert all(b < a for a, b in zip(sds, sds[1:]))


def test_regime_classification():
    assert asy.classify_regime(1000, 0.1) == "brownian"
    assert asy.classify_regime(1000, 200.0) == "extreme"
    assert asy.classify_regime(1000, 1000 ** 0.25) == "intermediate-discrete"
    assert asy.classify_regime(10 ** 6, 2.0) == "intermediate-gaussian"
    tag, vals = asy.partition_asymptotic(1000, 0.1)
    assert tag == "brownian" and vals == {}


def test_regime1_close_to_exact():
    r = float(_ctx.exp(partition_function(1200, 0.5).log - asy.regime_value(1200, 0.5, 1).log))
    assert abs(r - 1) < 0.05


def test_regime3_star_dominated():
    n = 400
    mu = n * math.log(2)
    r = float(_ctx.exp(partition_function(n, mu).log - asy.regime_value(n, mu, 3).log))
    assert abs(r - 1) < 0.05


@pytest.mark.parametrize("n", [1000, 2000])
def test_overlapping_regimes_coherent(n):
    mu = n ** 0.25
    vals = {r: asy.regime_value(n, mu, r) for r in asy.applicable_regimes(n, mu)}
    assert len(vals) >= 2
    for a, b in itertools.combinations(sorted(vals), 2):
        ratio = float(_ctx.exp(vals[a].log - vals[b].log))
        assert abs(ratio - 1) <= 0.01, f"regime{a}/regime{b} = {ratio}"
