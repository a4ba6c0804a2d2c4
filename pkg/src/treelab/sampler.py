"""Samplers for height-biased and uniform plane trees.

Exact samplers use recursive descent over the count recurrences with exact
integer draws. Two batch variants exist: ``descent_codes`` runs the same
descent on whole batches at once (trees with up to 32 nodes, returned as
contour bit codes), and ``sample_walk_stats`` simulates contour walks
confined to a strip with precomputed float step probabilities, which is the
workhorse for Monte Carlo at large n.
"""

from __future__ import annotations

import bisect
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .counting import CountTable, TableTooSmall, _ctx, build_counts
from .lattice_paths import uniform_excursion
from .partition import HeightLaw, height_law, log_height_counts
from .tree_core import PlaneTree, from_contour

MAX_CODE_NODES = 32


# ---------------------------------------------------------------- randomness

def make_rng(seed: int, stream: int = 0, *sub: int) -> np.random.Generator:
    """Counter-based Philox generator keyed by (seed, stream, sub...)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),) + tuple(int(s) for s in sub))
    key = ss.generate_state(2, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class IntDraws:
    """Exact uniform integers below arbitrary bounds, from buffered 64-bit words."""

    def __init__(self, rng: np.random.Generator, block: int = 4096):
        self.rng = rng
        self.block = block
        self.buf: list[int] = []

    def _word(self) -> int:
        if not self.buf:
            self.buf = self.rng.integers(0, 2 ** 64, size=self.block, dtype=np.uint64).tolist()
            self.buf.reverse()
        return self.buf.pop()

    def below(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError("bound must be positive")
        if bound == 1:
            return 0
        words = (bound.bit_length() + 63) // 64
        span = 1 << (64 * words)
        limit = span - span % bound
        while True:
            v = 0
            for _ in range(words):
                v = (v << 64) | self._word()
            if v < limit:
                return v % bound


# ---------------------------------------------------------------- exact descent

class _Descent:
    """Cumulative weight tables for the descent, built lazily per (n, m)."""

    def __init__(self, table: CountTable):
        if not table.exact:
            raise ValueError("the exact descent needs the exact backend")
        self.t = table
        self._bounded: dict[tuple[int, int], list[int]] = {}
        self._exact: dict[tuple[int, int], list[int]] = {}

    def H(self, n, m):
        return self.t.H(n, m) if m >= 0 else 0

    def E(self, n, h):
        return self.t.E(n, h) if h >= 0 else 0

    def bounded(self, n: int, m: int) -> list[int]:
        # first subtree of size j (height < m-1), rest of size n-j (height < m)
        key = (n, m)
        cum = self._bounded.get(key)
        if cum is None:
            cum, acc = [], 0
            for j in range(1, n):
                acc += self.H(j, m - 1) * self.H(n - j, m)
                cum.append(acc)
            self._bounded[key] = cum
        return cum

    def exact(self, n: int, h: int) -> list[int]:
        # entries 0..n-2: first subtree of exact height h-1, rest of height <= h
        # entries n-1..2n-3: first subtree of height < h-1, rest of exact height h
        key = (n, h)
        cum = self._exact.get(key)
        if cum is None:
            cum, acc = [], 0
            for j in range(1, n):
                acc += self.E(j, h - 1) * self.H(n - j, h + 1)
                cum.append(acc)
            for j in range(1, n):
                acc += self.H(j, h - 1) * self.E(n - j, h)
                cum.append(acc)
            self._exact[key] = cum
        return cum


_descents: dict[int, _Descent] = {}


def _descent_for(table: CountTable) -> _Descent:
    d = _descents.get(id(table))
    if d is None or d.t is not table:
        d = _descents[id(table)] = _Descent(table)
    return d


def _check_table(table: CountTable, n: int, m: int):
    if n > table.n_max or m > table.m_max:
        raise TableTooSmall(f"table (n_max={table.n_max}, m_max={table.m_max}) too small "
                            f"for n={n}, m={m}")


def _descend(d: _Descent, draws: IntDraws, task) -> list[int]:
    """Preorder depths of one tree. Tasks are (kind, n, m, depth, emit_root)
    with kind 'b' (height < m) or 'e' (height exactly m)."""
    depths: list[int] = []
    stack = [task]
    while stack:
        kind, n, m, dep, emit = stack.pop()
        if emit:
            depths.append(dep)
        if n == 1:
            continue
        if kind == "b":
            cum = d.bounded(n, m)
            j = bisect.bisect_right(cum, draws.below(cum[-1])) + 1
            stack.append(("b", n - j, m, dep, False))
            stack.append(("b", j, m - 1, dep + 1, True))
        else:
            cum = d.exact(n, m)
            i = bisect.bisect_right(cum, draws.below(cum[-1]))
            if i < n - 1:
                j = i + 1
                stack.append(("b", n - j, m + 1, dep, False))
                stack.append(("e", j, m - 1, dep + 1, True))
            else:
                j = i - (n - 1) + 1
                stack.append(("e", n - j, m, dep, False))
                stack.append(("b", j, m - 1, dep + 1, True))
    return depths


def _draws(rng) -> IntDraws:
    return rng if isinstance(rng, IntDraws) else IntDraws(rng)


def sample_uniform_bounded(n: int, m: int, table: CountTable, rng) -> PlaneTree:
    """Uniform tree among n-node trees of height < m."""
    _check_table(table, n, m)
    if n < 1 or table.H(n, m) == 0:
        raise ValueError(f"no tree with {n} nodes and height < {m}")
    return PlaneTree.from_depths(_descend(_descent_for(table), _draws(rng), ("b", n, m, 0, True)))


def sample_uniform_exact_height(n: int, h: int, table: CountTable, rng) -> PlaneTree:
    """Uniform tree among n-node trees of height exactly h."""
    _check_table(table, n, h + 1)
    if n < 1 or h < 0 or table.E(n, h) == 0:
        raise ValueError(f"no tree with {n} nodes and height {h}")
    t = PlaneTree.from_depths(_descend(_descent_for(table), _draws(rng), ("e", n, h, 0, True)))
    if max(t.depths) != h:
        raise AssertionError("exact-height descent produced the wrong height")
    return t


def sample_height(law: HeightLaw, rng: np.random.Generator, size=None):
    cdf = law.cdf()
    u = rng.random(size)
    return np.minimum(np.searchsorted(cdf, u * cdf[-1], side="right"), len(cdf) - 1)


_thresholds: dict[tuple, list[int]] = {}


def height_thresholds(n: int, mu: float, table: CountTable) -> list[int]:
    """floor(2^128 * P(h <= k)) for every k, from the 113-bit log-domain law."""
    key = (id(table), n, float(mu))
    th = _thresholds.get(key)
    if th is None:
        logs = [v - _ctx.mpf(mu) * h for h, v in enumerate(log_height_counts(n, table))]
        mx = max(v for v in logs if v != _ctx.ninf)
        acc, th = _ctx.mpf(0), []
        weights = [_ctx.exp(v - mx) if v != _ctx.ninf else _ctx.mpf(0) for v in logs]
        total = _ctx.fsum(weights)
        for w in weights:
            acc += w
            th.append(int(_ctx.floor(acc / total * _ctx.mpf(2) ** 128)))
        th[-1] = 1 << 128
        if len(_thresholds) > 64:
            _thresholds.clear()
        _thresholds[key] = th
    return th


def sample_biased_tree(n: int, mu: float, table: CountTable, rng) -> PlaneTree:
    """Height from the exact height law, then a uniform tree of that height.

    With the exact backend the height is chosen by comparing a 128-bit uniform
    integer against the cumulative law and the tree by exact integer descent.
    With the log backend the tree comes from a single strip walk."""
    if n == 1:
        return PlaneTree([[]])
    _check_table(table, n, n)
    draws = _draws(rng)
    if not table.exact:
        law = height_law(n, mu, table)
        h = int(sample_height(law, draws.rng))
        steps = _walk_block(2 * (n - 1), np.array([h]), np.array([h]), draws.rng,
                            want_codes=False, want_steps=True, want_width=False)[3][0]
        return _steps_to_tree(steps)
    th = height_thresholds(n, mu, table)
    h = bisect.bisect_right(th, draws.below(1 << 128))
    return sample_uniform_exact_height(n, h, table, draws)


def _steps_to_tree(steps) -> PlaneTree:
    depths, y = [0], 0
    for s in steps:
        y += 1 if s > 0 else -1
        if s > 0:
            depths.append(y)
    return PlaneTree.from_depths(depths)


def sample_biased_trees(n: int, mu: float, count: int, table: CountTable, rng) -> list[PlaneTree]:
    """``count`` independent samples; the log backend shares one set of strip tables."""
    draws = _draws(rng)
    if n == 1 or table.exact:
        return [sample_biased_tree(n, mu, table, draws) for _ in range(count)]
    _check_table(table, n, n)
    law = height_law(n, mu, table)
    hs = sample_height(law, draws.rng, count)
    steps = _walk_block(2 * (n - 1), np.unique(hs), hs, draws.rng,
                        want_codes=False, want_steps=True, want_width=False)[3]
    return [_steps_to_tree(row) for row in steps]


def sample_uniform_tree(n: int, rng: np.random.Generator) -> PlaneTree:
    """Uniform plane tree via a uniform bridge and the cyclic shift."""
    return from_contour(uniform_excursion(n, rng))


# ---------------------------------------------------------------- batched descent

def _batch_below(rng: np.random.Generator, total: int, size: int) -> np.ndarray:
    if total >= 2 ** 63:
        raise ValueError("batched draws need totals below 2^63")
    return rng.integers(0, total, size=size, dtype=np.int64)


def _join(first: np.ndarray, j: int, rest: np.ndarray, rest_size: int) -> np.ndarray:
    # contour(root with first child subtree F, then R) = U F D R, most significant first
    lf = 2 * (j - 1)
    lr = 2 * (rest_size - 1)
    head = (np.uint64(1) << np.uint64(lf + 1)) | (first << np.uint64(1))
    return (head << np.uint64(lr)) | rest


def _batch(d: _Descent, rng, kind: str, n: int, m: int, count: int) -> np.ndarray:
    if count == 0:
        return np.zeros(0, dtype=np.uint64)
    if n == 1:
        return np.zeros(count, dtype=np.uint64)
    cum = np.array(d.bounded(n, m) if kind == "b" else d.exact(n, m), dtype=np.int64)
    idx = np.searchsorted(cum, _batch_below(rng, int(cum[-1]), count), side="right")
    out = np.zeros(count, dtype=np.uint64)
    for i in np.unique(idx):
        sel = np.nonzero(idx == i)[0]
        if kind == "b":
            j = int(i) + 1
            parts = (("b", j, m - 1), ("b", n - j, m))
        elif i < n - 1:
            j = int(i) + 1
            parts = (("e", j, m - 1), ("b", n - j, m + 1))
        else:
            j = int(i) - (n - 1) + 1
            parts = (("b", j, m - 1), ("e", n - j, m))
        first = _batch(d, rng, parts[0][0], j, parts[0][2], sel.size)
        rest = _batch(d, rng, parts[1][0], n - j, parts[1][2], sel.size)
        out[sel] = _join(first, j, rest, n - j)
    return out


def descent_codes(n: int, mu: float, count: int, table: CountTable,
                  rng: np.random.Generator) -> np.ndarray:
    """Batch of exact mu-biased samples as contour codes (bit 1 = up step,
    first step most significant, final down step to -1 omitted)."""
    if not 1 <= n <= MAX_CODE_NODES:
        raise ValueError(f"code batches support 1 <= n <= {MAX_CODE_NODES}")
    if n == 1:
        return np.zeros(count, dtype=np.uint64)
    _check_table(table, n, n)
    d = _descent_for(table)
    law = height_law(n, mu, table)
    hs = sample_height(law, rng, count)
    out = np.zeros(count, dtype=np.uint64)
    for h in np.unique(hs):
        sel = np.nonzero(hs == h)[0]
        out[sel] = _batch(d, rng, "e", n, int(h), sel.size)
    return out


def uniform_codes(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform trees as contour codes via uniform bridges and the cyclic shift."""
    if not 1 <= n <= MAX_CODE_NODES:
        raise ValueError(f"code batches support 1 <= n <= {MAX_CODE_NODES}")
    k = 2 * n - 1
    keys = rng.random((count, k))
    order = np.argsort(keys, axis=1)
    steps = np.where(order < n - 1, 1, -1).astype(np.int8)   # n-1 ups, n downs
    vals = np.cumsum(steps, axis=1)
    # first time the minimum of (0, w_1, ..., w_k) is reached, as a rotation offset
    first_min = (np.argmin(vals, axis=1) + 1) % k
    rot = (first_min[:, None] + np.arange(k)[None, :]) % k
    exc = np.take_along_axis(steps, rot, axis=1)[:, :-1]
    code = np.zeros(count, dtype=np.uint64)
    for c in range(k - 1):
        code = (code << np.uint64(1)) | (exc[:, c] > 0).astype(np.uint64)
    return code


def code_to_tree(code: int, n: int) -> PlaneTree:
    depths, y = [0], 0
    for i in range(2 * (n - 1) - 1, -1, -1):
        if (int(code) >> i) & 1:
            y += 1
            depths.append(y)
        else:
            y -= 1
    return PlaneTree.from_depths(depths)


def tree_to_code(t: PlaneTree) -> int:
    from .tree_core import to_contour
    code = 0
    for s in to_contour(t).steps[:-1]:
        code = (code << 1) | (1 if s > 0 else 0)
    return code


# ---------------------------------------------------------------- strip walks

class StripTables:
    """Up-step probabilities for walks of length L from 0 back to 0 confined to
    [0, h] that touch h, for each h in hs.

    ``segment(lo, hi)`` returns (pn, pg) of shape (hi - lo, len(hs), max(hs) + 1)
    for remaining step counts k = lo+1..hi: pn[., i, y] is the up probability
    at level y once h was touched, pg the same before touching. Only states at
    multiples of ``stride`` are kept, so memory stays O(sqrt(L)) rows."""

    def __init__(self, L: int, hs, stride: int | None = None):
        self.L = L
        self.hs = np.asarray(hs, dtype=np.int64)
        nh, hmax = len(self.hs), int(self.hs.max())
        self.w = hmax + 2
        lev = np.arange(self.w)
        self.mask = (lev[None, :] <= self.hs[:, None]).astype(np.float64)
        self.rows = np.arange(nh)
        self.stride = stride or max(1, math.isqrt(L))
        N = np.zeros((nh, self.w))
        N[:, 0] = 1.0
        G = np.zeros((nh, self.w))
        G[self.hs == 0, 0] = 1.0
        self.checkpoints = {0: (N, G)}
        for k in range(1, L + 1):
            N, G, _, _ = self._advance(N, G, want_probs=False)
            if k % self.stride == 0:
                self.checkpoints[k] = (N, G)

    def _advance(self, N, G, want_probs=True):
        w = self.w
        Nn = np.zeros_like(N)
        Nn[:, 0] = N[:, 1]
        Nn[:, 1:w - 1] = N[:, 0:w - 2] + N[:, 2:w]
        Nn *= self.mask
        Gn = np.zeros_like(G)
        Gn[:, 0] = G[:, 1]
        Gn[:, 1:w - 1] = G[:, 0:w - 2] + G[:, 2:w]
        Gn *= self.mask
        Gn[self.rows, self.hs] = Nn[self.rows, self.hs]
        pn = pg = None
        if want_probs:
            with np.errstate(divide="ignore", invalid="ignore"):
                pn = np.where(Nn[:, :-1] > 0, N[:, 1:] / Nn[:, :-1], 0.0)
                pg = np.where(Gn[:, :-1] > 0, G[:, 1:] / Gn[:, :-1], 0.0)
        s = Nn.max()
        return Nn / s, Gn / s, pn, pg

    def segment(self, lo: int, hi: int):
        N, G = self.checkpoints[lo]
        pn = np.empty((hi - lo, len(self.hs), self.w - 1))
        pg = np.empty_like(pn)
        for i in range(hi - lo):
            N, G, pn[i], pg[i] = self._advance(N, G)
        return pn, pg

    def segments_down(self):
        """(lo, hi) pairs covering 1..L from the top down, aligned to checkpoints."""
        tops = list(range(0, self.L, self.stride))
        for lo in reversed(tops):
            yield lo, min(lo + self.stride, self.L)


SAMPLE_CHUNK = 200_000


def _walk_block(L: int, hs_block: np.ndarray, heights: np.ndarray, rng: np.random.Generator,
                want_codes: bool = False, want_steps: bool = False, want_width: bool = True) -> tuple:
    """Simulate contour walks for samples whose heights all lie in hs_block.

    Returns (widths, root degrees, codes, steps); entries not requested are None.
    Samples are processed in fixed-size chunks, in order, from the same stream."""
    tables = StripTables(L, hs_block)
    row_of = {int(h): i for i, h in enumerate(hs_block)}
    out = []
    for start in range(0, len(heights), SAMPLE_CHUNK):
        chunk = heights[start:start + SAMPLE_CHUNK]
        hi_idx = np.array([row_of[int(h)] for h in chunk], dtype=np.int64)
        out.append(_walk_chunk(tables, hi_idx, chunk.astype(np.int64), rng,
                               want_codes, want_steps, want_width))
    return tuple(None if parts[0] is None else np.concatenate(parts) for parts in zip(*out))


def _walk_chunk(tables: StripTables, hi: np.ndarray, hcap: np.ndarray, rng, want_codes,
                want_steps, want_width):
    L = tables.L
    B = len(hcap)
    y = np.zeros(B, dtype=np.int64)
    hit = hcap == 0
    rootdeg = np.zeros(B, dtype=np.int64)
    counts = None
    if want_width:
        counts = np.zeros((B, tables.w), dtype=np.int32)
        counts[:, 0] = 1
    code = np.zeros(B, dtype=np.uint64) if want_codes else None
    steps = np.zeros((B, L), dtype=np.int8) if want_steps else None
    idx = np.arange(B)
    for lo, top in tables.segments_down():
        pn, pg = tables.segment(lo, top)
        for k in range(top, lo, -1):
            i = k - lo - 1
            p = np.where(hit, pn[i, hi, y], pg[i, hi, y])
            up = rng.random(B) < p
            rootdeg += up & (y == 0)
            y += 2 * up - 1
            hit |= y == hcap
            if want_width:
                counts[idx[up], y[up]] += 1
            if want_codes:
                code = (code << np.uint64(1)) | up.astype(np.uint64)
            if want_steps:
                steps[:, L - k] = 2 * up - 1
    if np.any(y != 0) or not np.all(hit):
        raise AssertionError("strip walk left its constraints")
    widths = counts.max(axis=1) if want_width else None
    return widths, rootdeg, code, steps


def _walk_task(args):
    L, hs_block, heights, key, want_codes, want_width = args
    w, r, c, _ = _walk_block(L, hs_block, heights, make_rng(*key), want_codes=want_codes,
                             want_width=want_width)
    return w, r, c


@dataclass
class WalkStats:
    heights: np.ndarray
    widths: np.ndarray | None
    root_degrees: np.ndarray
    codes: np.ndarray | None = None


def sample_walk_stats(n: int, mu: float, count: int, seed: int, stream: int = 0,
                      table: CountTable | None = None, law: HeightLaw | None = None,
                      workers: int = 1, block: int = 8, want_codes: bool = False,
                      want_width: bool = True) -> WalkStats:
    """Heights, widths and root degrees of ``count`` mu-biased trees.

    Heights come from the exact height law using stream (seed, stream, 0);
    samples are then grouped into blocks of ``block`` consecutive heights and
    each block simulates its contour walks with its own stream
    (seed, stream, 1, block id). The output is therefore identical for every
    worker count."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if want_codes and n > MAX_CODE_NODES:
        raise ValueError(f"codes need n <= {MAX_CODE_NODES}")
    if law is None:
        if table is None:
            table = build_counts(n, n, engine="fast")
        law = height_law(n, mu, table)
    heights = sample_height(law, make_rng(seed, stream, 0), count)
    L = 2 * (n - 1)
    tasks, sels = [], []
    for b in np.unique(heights // block):
        sel = np.nonzero(heights // block == b)[0]
        hs_block = np.unique(heights[sel])
        tasks.append((L, hs_block, heights[sel], (seed, stream, 1, int(b)), want_codes, want_width))
        sels.append(sel)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_walk_task, tasks))
    else:
        results = [_walk_task(t) for t in tasks]
    widths = np.zeros(count, dtype=np.int64) if want_width else None
    roots = np.zeros(count, dtype=np.int64)
    codes = np.zeros(count, dtype=np.uint64) if want_codes else None
    for sel, (w, r, c) in zip(sels, results):
        roots[sel] = r
        if want_width:
            widths[sel] = w
        if want_codes:
            codes[sel] = c
    return WalkStats(heights=heights.astype(np.int64), widths=widths, root_degrees=roots, codes=codes)
