import math
from collections import Counter

import numpy as np
import pytest

from treelab.counting import build_counts, catalan
from treelab.partition import height_law
from treelab.sampler import (IntDraws, code_to_tree, descent_codes, make_rng,
                             sample_biased_tree, sample_biased_trees, sample_uniform_bounded,
                             sample_uniform_exact_height, sample_uniform_tree,
                             sample_walk_stats, tree_to_code, uniform_codes)
from treelab.tree_core import enumerate_trees, stats

from conftest import chi2_pvalue, code_law


def test_rng_streams_reproducible():
    a = make_rng(7, 3).integers(0, 2 ** 63, 5)
    b = make_rng(7, 3).integers(0, 2 ** 63, 5)
    c = make_rng(7, 4).integers(0, 2 ** 63, 5)
    assert (a == b).all() and not (a == c).all()


def test_int_draws_uniform_small_bound():
    d = IntDraws(make_rng(1))
    c = Counter(d.below(3) for _ in range(30_000))
    assert set(c) == {0, 1, 2}
    for k in range(3):
        assert abs(c[k] - 10_000) < 4 * math.sqrt(30_000 * 2 / 9)
    big = 3 ** 100
    assert all(0 <= d.below(big) < big for _ in range(100))
    with pytest.raises(ValueError):
        d.below(0)


def test_code_roundtrip():
    for n in range(1, 9):
        codes = {tree_to_code(t) for t in enumerate_trees(n)}
        assert len(codes) == catalan(n - 1)
        for t in enumerate_trees(n):
            assert code_to_tree(tree_to_code(t), n) == t


def test_exact_height_sampler_hits_height(small_table):
    rng = make_rng(2)
    for n in range(2, 12):
        for h in range(1, n):
            t = sample_uniform_exact_height(n, h, small_table, rng)
            assert t.size == n and stats(t).height == h
    with pytest.raises(ValueError):
        sample_uniform_exact_height(5, 0, small_table, rng)


def test_bounded_sampler_respects_bound(small_table):
    rng = make_rng(3)
    for _ in range(200):
        t = sample_uniform_bounded(10, 4, small_table, rng)
        assert t.size == 10 and stats(t).height < 4


def test_n4_examples(small_table):
    rng = make_rng(4)
    # mu = 0: all five trees equally likely
    c = Counter(sample_biased_tree(4, 0.0, small_table, rng) for _ in range(20_000))
    assert len(c) == 5
    for t, k in c.items():
        assert abs(k - 4000) < 4 * math.sqrt(20_000 * 0.2 * 0.8)
    # large mu: the star dominates
    star = sum(1 for _ in range(2000)
               if stats(sample_biased_tree(4, 20.0, small_table, rng)).height == 1)
    assert star == 2000


@pytest.mark.parametrize("mu", [0.0, 1.0, 3.0])
def test_per_draw_sampler_matches_enumeration(mu, small_table):
    rng = make_rng(5, int(mu * 10))
    codes = [tree_to_code(sample_biased_tree(6, mu, small_table, rng)) for _ in range(20_000)]
    assert chi2_pvalue(codes, code_law(6, mu)) > 1e-3


@pytest.mark.parametrize("mu", [0.0, 0.5, 3.0])
def test_descent_codes_match_enumeration(mu, small_table):
    codes = descent_codes(7, mu, 100_000, small_table, make_rng(6, int(mu * 10)))
    assert chi2_pvalue(codes, code_law(7, mu)) > 1e-3


@pytest.mark.parametrize("mu", [0.0, 1.0])
def test_walk_codes_match_enumeration(mu):
    res = sample_walk_stats(7, mu, 100_000, seed=8, stream=int(mu * 10), want_codes=True)
    assert chi2_pvalue(res.codes, code_law(7, mu)) > 1e-3
    trees = [code_to_tree(c, 7) for c in res.codes[:500]]
    assert [stats(t).height for t in trees] == res.heights[:500].tolist()
    assert [stats(t).width for t in trees] == res.widths[:500].tolist()
    assert [stats(t).root_degree for t in trees] == res.root_degrees[:500].tolist()


def test_uniform_codes_match_enumeration():
    codes = uniform_codes(7, 100_000, make_rng(9))
    assert chi2_pvalue(codes, code_law(7, 0.0)) > 1e-3


def test_uniform_tree_sampler():
    rng = np.random.default_rng(10)
    t = sample_uniform_tree(50, rng)
    assert t.size == 50


def test_log_backend_sampler_heights():
    n, mu = 60, 1.0
    table = build_counts(n, n, backend="log")
    trees = sample_biased_trees(n, mu, 4000, table, make_rng(11))
    assert all(t.size == n for t in trees)
    law = height_law(n, mu)
    mean = np.mean([stats(t).height for t in trees])
    assert abs(mean - law.mean()) < 5 * law.sd() / math.sqrt(4000)
    one = sample_biased_tree(n, mu, table, make_rng(12))
    assert one.size == n


def test_walk_stats_worker_invariance():
    a = sample_walk_stats(300, 0.5, 3000, seed=1, workers=1, block=2)
    b = sample_walk_stats(300, 0.5, 3000, seed=1, workers=2, block=2)
    assert (a.heights == b.heights).all()
    assert (a.widths == b.widths).all()
    assert (a.root_degrees == b.root_degrees).all()


def test_batch_limits(small_table):
    with pytest.raises(ValueError):
        descent_codes(40, 1.0, 10, small_table, make_rng(0))
    with pytest.raises(ValueError):
        uniform_codes(0, 10, make_rng(0))
