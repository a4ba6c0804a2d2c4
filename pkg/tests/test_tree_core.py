import pytest
from hypothesis import given, strategies as st

from treelab.counting import catalan
from treelab.lattice_paths import LatticePath
from treelab.tree_core import (PlaneTree, ball, enumerate_trees, from_contour, height, stats,
                               to_contour)

from conftest import brute_trees


def test_parens_roundtrip_and_cherry():
    t = PlaneTree.from_parens("(()())")
    assert t.size == 3
    assert t.to_parens() == "(()())"
    assert t.children == ((1, 2), (), ())


@pytest.mark.parametrize("bad", ["", ")(", "(()", "())", "(a)", "()()"])
def test_parens_rejects_malformed(bad):
    with pytest.raises(ValueError):
        PlaneTree.from_parens(bad)


def test_children_must_be_preorder():
    with pytest.raises(ValueError):
        PlaneTree([(2,), (), (1,)])
    with pytest.raises(ValueError):
        PlaneTree([(1,), (), ()])


def test_star_and_path_stats():
    s = stats(PlaneTree.star(5))
    assert (s.height, s.width, s.root_degree, s.generation_sizes) == (1, 4, 4, (1, 4))
    p = stats(PlaneTree.path(4))
    assert (p.height, p.width, p.root_degree) == (3, 1, 1)
    assert stats(PlaneTree([[]])).height == 0


def test_enumeration_matches_catalan_and_brute_force():
    for n in range(1, 9):
        trees = enumerate_trees(n)
        assert len(trees) == len(set(trees)) == catalan(n - 1)
        assert set(trees) == set(brute_trees(n))


def test_enumeration_cap():
    with pytest.raises(ValueError):
        enumerate_trees(13)


def test_contour_shape():
    t = PlaneTree.from_parens("((())())")
    c = to_contour(t)
    assert c.to_string() == "0:UUDDUDD"
    assert len(c) == 2 * t.size - 1
    assert c.is_excursion()
    assert from_contour(c) == t


def test_contour_bijection_small():
    for n in range(1, 8):
        seen = set()
        for t in enumerate_trees(n):
            c = to_contour(t)
            assert from_contour(c) == t
            seen.add(c)
        assert len(seen) == catalan(n - 1)


def test_from_contour_rejects_non_excursion():
    with pytest.raises(ValueError):
        from_contour(LatticePath.from_string("0:DUD"))


def test_ball_keeps_child_order():
    t = PlaneTree.from_parens("((()())(()))")
    assert ball(t, 0).to_parens() == "()"
    assert ball(t, 1).to_parens() == "(()())"
    assert ball(t, 5) == t
    with pytest.raises(ValueError):
        ball(t, -1)


@given(st.integers(1, 9).flatmap(lambda n: st.sampled_from(enumerate_trees(n))))
def test_depth_roundtrip(t):
    assert PlaneTree.from_depths(t.depths) == t
    assert height(t) == max(t.depths)
    assert sum(stats(t).generation_sizes) == t.size
