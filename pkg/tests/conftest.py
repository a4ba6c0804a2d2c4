import itertools
import math
from collections import Counter
from functools import lru_cache

import pytest

from treelab.counting import build_counts
from treelab.tree_core import PlaneTree, stats


@lru_cache(maxsize=None)
def brute_trees(n: int) -> tuple:
    """Every plane tree with n nodes, from all balanced parenthesis words."""
    out = []
    for bits in itertools.product("()", repeat=2 * (n - 1)):
        depth, ok = 0, True
        for c in bits:
            depth += 1 if c == "(" else -1
            if depth < 0:
                ok = False
                break
        if ok and depth == 0:
            out.append(PlaneTree.from_parens("(" + "".join(bits) + ")"))
    return tuple(out)


@lru_cache(maxsize=None)
def brute_height_counts(n: int) -> Counter:
    return Counter(stats(t).height for t in brute_trees(n))


def brute_weights(n: int, mu: float) -> dict:
    """Unnormalized e^{-mu h(T)} for every tree."""
    return {t: math.exp(-mu * stats(t).height) for t in brute_trees(n)}


def brute_law(n: int, mu: float, key) -> dict:
    w = brute_weights(n, mu)
    z = sum(w.values())
    out = Counter()
    for t, v in w.items():
        out[key(t)] += v / z
    return out


@pytest.fixture(scope="session")
def small_table():
    return build_counts(12, 12, engine="recurrence")


def code_law(n: int, mu: float) -> dict:
    """Exact law of contour codes of the mu-biased tree, by enumeration."""
    from treelab.sampler import tree_to_code
    w = brute_weights(n, mu)
    z = sum(w.values())
    return {tree_to_code(t): v / z for t, v in w.items()}


def chi2_pvalue(codes, law: dict) -> float:
    """Goodness of fit of sampled codes to an exact law; cells with expected
    count below 5 are pooled into one cell."""
    import numpy as np
    from scipy.stats import chi2

    values, counts = np.unique(np.asarray(codes), return_counts=True)
    seen = dict(zip(values.tolist(), counts.tolist()))
    if set(seen) - set(law):
        return 0.0
    total = len(codes)
    obs, exp = [], []
    pool_o = pool_e = 0.0
    for code, p in law.items():
        e = p * total
        if e < 5:
            pool_o += seen.get(code, 0)
            pool_e += e
        else:
            obs.append(seen.get(code, 0))
            exp.append(e)
    if pool_e > 0:
        obs.append(pool_o)
        exp.append(pool_e)
    obs, exp = np.array(obs, float), np.array(exp, float)
    if len(obs) < 2:
        return 1.0
    stat = float(((obs - exp) ** 2 / exp).sum())
    return float(chi2.sf(stat, len(obs) - 1))
