"""Exact laws of the mu-height-biased tree: partition function, height law,
root-degree law and large-deviation tails, all built from exact counts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np

from .counting import (CountTable, LogReal, TableTooSmall, _ctx, build_counts, catalan,
                       logsum)

EXACT_FOREST_MAX = 300   # above this the forest convolutions run in scaled floats
SUPPORT_EPS = 1e-16      # height mass dropped from each tail of the root-degree sum


def _table_for(n: int, table: CountTable | None) -> CountTable:
    if table is None:
        return build_counts(n, n, engine="fast")
    if n > table.n_max:
        raise TableTooSmall(f"table covers n <= {table.n_max}, need {n}")
    return table


def _log_exact_heights(n: int, table: CountTable) -> list:
    """mp logs of E[n][h] for h = 0..n-1 (exact backend)."""
    if table.m_max < n:
        raise TableTooSmall(f"need m_max >= {n} for the full height law")
    row = table.row(n)
    out = []
    for h in range(n):
        e = row[h + 1] - row[h]
        out.append(_ctx.log(_ctx.mpf(e)) if e > 0 else _ctx.ninf)
    return out


def _log_approx_heights(n: int, table: CountTable) -> list:
    lr = table.log_row(n)
    out = []
    for h in range(n):
        a, b = lr[h + 1], lr[h]
        if a == -math.inf:
            out.append(_ctx.ninf)
        elif b == -math.inf:
            out.append(_ctx.mpf(a))
        else:
            d = b - a
            out.append(_ctx.mpf(a) + _ctx.log(-_ctx.expm1(d)) if d < 0 else _ctx.ninf)
    return out


def log_height_counts(n: int, table: CountTable) -> list:
    return _log_exact_heights(n, table) if table.exact else _log_approx_heights(n, table)


def _logsum_mp(logs) -> "mpf":
    logs = [v for v in logs if v != _ctx.ninf]
    if not logs:
        return _ctx.ninf
    mx = max(logs)
    return mx + _ctx.log(_ctx.fsum(_ctx.exp(v - mx) for v in logs))


def partition_function(n: int, mu: float, table: CountTable | None = None) -> LogReal:
    """Z = sum over n-node trees of exp(-mu * height)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if mu < 0:
        raise ValueError("mu must be >= 0")
    if n == 1:
        return LogReal.from_int(1)
    table = _table_for(n, table)
    mu_ = _ctx.mpf(mu)
    logs = log_height_counts(n, table)
    return LogReal.from_log(_logsum_mp(v - mu_ * h for h, v in enumerate(logs)))


def partition_via_bounded(n: int, mu: float, table: CountTable | None = None) -> LogReal:
    """Z = C_{n-1} e^{-mu(n-1)} + e^mu (e^mu - 1) sum_{m=2}^{n-1} H[n][m] e^{-mu(m+1)}."""
    if n < 2:
        raise ValueError("n must be >= 2")
    table = _table_for(n, table)
    mu_ = _ctx.mpf(mu)
    head = LogReal(1, _ctx.log(catalan(n - 1)) - mu_ * (n - 1))
    if mu == 0:
        return head
    if table.exact:
        row = table.row(n)
        logs = [_ctx.log(_ctx.mpf(row[m])) - mu_ * m for m in range(2, n) if row[m]]
    else:
        lr = table.log_row(n)
        logs = [_ctx.mpf(lr[m]) - mu_ * m for m in range(2, n)]
    body = _logsum_mp(logs)
    if body == _ctx.ninf:
        return head
    return head + LogReal(1, body + _ctx.log(_ctx.expm1(mu_)))


def w_sum(n: int, mu: float, table: CountTable | None = None) -> LogReal:
    """W_n = 4^{-n} sum_{m=3}^{n} H[n][m-1] e^{-mu m}."""
    if n < 3:
        if n < 1:
            raise ValueError("n must be >= 1")
        return LogReal(0)
    table = _table_for(n, table)
    mu_ = _ctx.mpf(mu)
    if table.exact:
        row = table.row(n)
        logs = [_ctx.log(_ctx.mpf(row[m - 1])) - mu_ * m for m in range(3, n + 1) if row[m - 1]]
    else:
        lr = table.log_row(n)
        logs = [_ctx.mpf(lr[m - 1]) - mu_ * m for m in range(3, n + 1)]
    return LogReal.from_log(_logsum_mp(logs) - n * _ctx.log(4))


def z_over_w(n: int, mu: float, table: CountTable | None = None) -> float:
    """Z / (4^n e^mu (e^mu - 1) W_n), which tends to 1 outside the Brownian regime."""
    if mu <= 0:
        raise ValueError("the Z/W relation needs mu > 0")
    z = partition_function(n, mu, table)
    w = w_sum(n, mu, table)
    mu_ = _ctx.mpf(mu)
    denom = w * LogReal(1, n * _ctx.log(4) + mu_ + _ctx.log(_ctx.expm1(mu_)))
    return float(z / denom)


# ---------------------------------------------------------------- height law

@dataclass
class HeightLaw:
    n: int
    mu: float
    log_pmf: np.ndarray     # index = height
    log_z: LogReal
    backend: str = "exact"

    @property
    def pmf(self) -> np.ndarray:
        return np.exp(self.log_pmf)

    @property
    def heights(self) -> np.ndarray:
        return np.arange(len(self.log_pmf))

    def mean(self) -> float:
        return float((self.pmf * self.heights).sum())

    def var(self) -> float:
        p, h = self.pmf, self.heights
        m = (p * h).sum()
        return float((p * (h - m) ** 2).sum())

    def sd(self) -> float:
        return math.sqrt(self.var())

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.pmf)

    def quantile(self, q: float) -> int:
        return int(np.searchsorted(self.cdf(), q))

    def support(self, eps: float = 0.0) -> tuple[int, int]:
        """Smallest [lo, hi] holding all but eps of the mass in each tail."""
        c = self.cdf()
        lo = int(np.searchsorted(c, eps, side="right"))
        hi = int(np.searchsorted(c, 1 - eps, side="left"))
        hi = min(max(hi, lo), len(c) - 1)
        return lo, hi

    def log_tail_ge(self, k: float) -> float:
        """log P(h >= k)."""
        start = max(math.ceil(k - 1e-12), 0)
        return _lse(self.log_pmf[start:])

    def log_tail_le(self, k: float) -> float:
        stop = math.floor(k + 1e-12)
        return _lse(self.log_pmf[: stop + 1]) if stop >= 0 else -math.inf


def _lse(v: np.ndarray) -> float:
    v = v[np.isfinite(v)]
    if v.size == 0:
        return -math.inf
    mx = v.max()
    return float(mx + np.log(np.exp(v - mx).sum()))


def height_law(n: int, mu: float, table: CountTable | None = None) -> HeightLaw:
    if n < 2:
        raise ValueError("n must be >= 2")
    if mu < 0:
        raise ValueError("mu must be >= 0")
    table = _table_for(n, table)
    mu_ = _ctx.mpf(mu)
    logs = [v - mu_ * h for h, v in enumerate(log_height_counts(n, table))]
    lz = _logsum_mp(logs)
    log_pmf = np.array([float(v - lz) if v != _ctx.ninf else -np.inf for v in logs])
    return HeightLaw(n, mu, log_pmf, LogReal(1, lz), table.backend)


# ---------------------------------------------------------------- root degree

@dataclass
class RootDegreeLaw:
    n: int
    mu: float
    log_pmf: np.ndarray     # index = root degree (index 0 unused for n >= 2)
    method: str = "exact"

    @property
    def pmf(self) -> np.ndarray:
        return np.exp(self.log_pmf)

    def mean(self) -> float:
        r = np.arange(len(self.log_pmf))
        return float((self.pmf * r).sum())

    def var(self) -> float:
        p = self.pmf
        r = np.arange(len(p))
        m = (p * r).sum()
        return float((p * (r - m) ** 2).sum())

    def prob(self, r: int) -> float:
        return float(self.pmf[r]) if 0 <= r < len(self.log_pmf) else 0.0


def _height_weights(mu: float, lo: int, hi: int) -> list:
    """mp log-weights for the summation by parts over heights lo..hi:
    F(m) multiplies e^{-mu m} - e^{-mu(m+1)} for m < hi, and e^{-mu hi} at hi."""
    mu_ = _ctx.mpf(mu)
    out = []
    for m in range(lo, hi + 1):
        if m == hi:
            out.append(-mu_ * m)
        elif mu == 0:
            out.append(_ctx.ninf)
        else:
            out.append(-mu_ * m + _ctx.log(-_ctx.expm1(-mu_)))
    return out


def root_degree_law(n: int, mu: float, table: CountTable | None = None,
                    r_max: int | None = None, method: str = "auto") -> RootDegreeLaw:
    """Law of the root degree.

    Trees with root degree r and height <= m are ordered forests of r trees
    of height < m with n-1 nodes in total, counted by F_r(n-1, m). Summing
    e^{-mu m} (F_r(m) - F_r(m-1)) by parts keeps every term positive. Heights
    outside the bulk of the exact height law (mass < 1e-16 per tail) are
    dropped."""
    if n < 2:
        raise ValueError("n must be >= 2")
    table = _table_for(n, table)
    if r_max is None:
        r_max = n - 1
    if not 1 <= r_max <= n - 1:
        raise ValueError("r_max must lie in [1, n-1]")
    if method == "auto":
        method = "exact" if (n <= EXACT_FOREST_MAX and table.exact) else "float"
    if method == "exact" and not table.exact:
        raise ValueError("exact forest sums need the exact backend")
    law = height_law(n, mu, table)
    lo, hi = law.support(SUPPORT_EPS)
    lo = max(lo, 1)
    hi = max(hi, lo)
    weights = _height_weights(mu, lo, hi)
    lz = law.log_z.log
    N = n - 1
    log_q = np.full(r_max + 1, -np.inf)

    if method == "exact":
        bits = 2 * N + 8
        mask = (gmpy2.mpz(1) << (bits * (N + 1))) - 1
        gens = []
        for m in range(lo, hi + 1):
            col = table.column(m)
            g = gmpy2.mpz(0)
            for j in range(N, 0, -1):
                g = (g << bits) + col[j]
            gens.append(g << bits)     # coefficient j sits at bits*j, j >= 1
        cur = [gmpy2.mpz(1)] * len(gens)
        shift = bits * N
        digit = (gmpy2.mpz(1) << bits) - 1
        mass = 0.0
        for r in range(1, r_max + 1):
            terms = []
            for i, g in enumerate(gens):
                cur[i] = (cur[i] * g) & mask
                f = int((cur[i] >> shift) & digit)
                if f and weights[i] != _ctx.ninf:
                    terms.append(_ctx.log(_ctx.mpf(f)) + weights[i])
            s = _logsum_mp(terms)
            log_q[r] = float(s - lz) if s != _ctx.ninf else -np.inf
            mass += math.exp(log_q[r])
            if _done(log_q, r, mass):
                break
    else:
        cols = []
        for m in range(lo, hi + 1):
            lc = table.log_column(m)[: N + 1]
            s = math.log1p(math.tan(math.pi / (m + 1)) ** 2)
            scale = math.log(4) - s      # g_j = H[j][m] (s/4)^j stays O(1)
            g = np.exp(lc - scale * np.arange(N + 1))
            g[0] = 0.0
            cols.append((g, scale))
        cur = [None] * len(cols)
        mass = 0.0
        for r in range(1, r_max + 1):
            terms = []
            for i, (g, scale) in enumerate(cols):
                cur[i] = g.copy() if r == 1 else np.convolve(cur[i], g)[: N + 1]
                f = cur[i][N]
                if f > 0 and weights[i] != _ctx.ninf:
                    terms.append(math.log(f) + N * scale + float(weights[i]))
            if terms:
                t = np.array(terms)
                s = float(t.max() + np.log(np.exp(t - t.max()).sum()))
                log_q[r] = s - float(lz)
            mass += math.exp(log_q[r])
            if _done(log_q, r, mass):
                break
    return RootDegreeLaw(n, mu, log_q, method)


def _done(log_q: np.ndarray, r: int, mass: float) -> bool:
    # stop once past the mode with all remaining mass negligible
    return r >= 3 and mass > 1 - 1e-14 and log_q[r] < log_q[r - 1] and log_q[r] < math.log(1e-18)


# ---------------------------------------------------------------- large deviations

def ldp_curve(n: int, mu: float, x_grid, table: CountTable | None = None,
              law: HeightLaw | None = None) -> list[tuple[float, float]]:
    """-(mu^2 n)^{-1/3} log P(h >= x c) for x >= 1 and with <= for x < 1,
    where c = (2 pi^2 n / mu)^{1/3}."""
    if mu <= 0:
        raise ValueError("mu must be > 0")
    if law is None:
        law = height_law(n, mu, table)
    c = (2 * math.pi ** 2 * n / mu) ** (1 / 3)
    speed = (mu * mu * n) ** (1 / 3)
    out = []
    for x in x_grid:
        if x <= 0:
            raise ValueError("grid points must be > 0")
        lt = law.log_tail_ge(x * c) if x >= 1 else law.log_tail_le(x * c)
        out.append((float(x), math.inf if lt == -math.inf else -lt / speed))
    return out
