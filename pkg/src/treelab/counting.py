"""Exact and approximate counts of plane trees with bounded height.

H[n][m] is the number of n-node plane trees of height < m and E[n][h] the
number of height exactly h, so E[n][h] = H[n][h+1] - H[n][h].

Three exact engines are available and are cross-checked in the tests:

* the first-subtree recurrence H[n][m] = [n=1] + sum_j H[j][m-1] H[n-j][m]
  (dense tables, O(n^2 m) big-integer operations);
* a reflection sum over binomial coefficients that yields a whole row
  H[n][.] in O(n) big-integer operations;
* a power-series division x p_{m-1}(x) / p_m(x) evaluated with a single
  packed big-integer division, yielding a whole column H[.][m].

The trigonometric closed form is kept as an independent oracle, and in float
form as the log-approximate backend for very large n.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from functools import lru_cache
from pathlib import Path

import gmpy2
import mpmath
import numpy as np

LOG_PREC = 113          # mantissa bits of LogReal magnitudes
CACHE_FORMAT = 1
DENSE_WORK_LIMIT = 6e7  # n^2 m budget for the dense recurrence under engine="auto"
MAX_DENSE_CELLS = 4_000_000


class TableTooSmall(ValueError):
    pass


class PrecisionError(ArithmeticError):
    pass


def catalan(n: int) -> int:
    if n < 0:
        raise ValueError("n must be >= 0")
    return math.comb(2 * n, n) // (n + 1)


# ---------------------------------------------------------------- LogReal

_ctx = mpmath.MPContext()
_ctx.prec = LOG_PREC


class LogReal:
    """Signed real stored as (sign, log|x|) with a 113-bit log magnitude."""

    __slots__ = ("sign", "log")

    def __init__(self, sign: int, log=None):
        if sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or 1")
        self.sign = sign
        self.log = _ctx.ninf if sign == 0 else _ctx.mpf(log)

    @classmethod
    def zero(cls) -> "LogReal":
        return cls(0)

    @classmethod
    def from_int(cls, k: int) -> "LogReal":
        k = int(k)
        if k == 0:
            return cls(0)
        return cls(1 if k > 0 else -1, _ctx.log(_ctx.mpf(abs(k))))

    @classmethod
    def from_value(cls, x) -> "LogReal":
        x = _ctx.mpf(x)
        if x == 0:
            return cls(0)
        return cls(1 if x > 0 else -1, _ctx.log(abs(x)))

    @classmethod
    def from_log(cls, log, sign: int = 1) -> "LogReal":
        if log == -math.inf:
            return cls(0)
        return cls(sign, log)

    def __mul__(self, other):
        other = _as_logreal(other)
        if self.sign == 0 or other.sign == 0:
            return LogReal(0)
        return LogReal(self.sign * other.sign, self.log + other.log)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_logreal(other)
        if other.sign == 0:
            raise ZeroDivisionError("LogReal division by zero")
        if self.sign == 0:
            return LogReal(0)
        return LogReal(self.sign * other.sign, self.log - other.log)

    def __rtruediv__(self, other):
        return _as_logreal(other) / self

    def __neg__(self):
        return LogReal(-self.sign, self.log) if self.sign else self

    def __add__(self, other):
        other = _as_logreal(other)
        if other.sign == 0:
            return self
        if self.sign == 0:
            return other
        hi, lo = (self, other) if self.log >= other.log else (other, self)
        d = _ctx.exp(lo.log - hi.log)
        if hi.sign == lo.sign:
            return LogReal(hi.sign, hi.log + _ctx.log1p(d))
        if d == 1:
            return LogReal(0)
        return LogReal(hi.sign, hi.log + _ctx.log1p(-d))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_as_logreal(other))

    def __rsub__(self, other):
        return _as_logreal(other) - self

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * float(_ctx.exp(self.log))

    def log10(self):
        return self.log / _ctx.ln10

    def mpf(self):
        return self.sign * _ctx.exp(self.log) if self.sign else _ctx.mpf(0)

    def __repr__(self) -> str:
        if self.sign == 0:
            return "LogReal(0)"
        return f"LogReal({'-' if self.sign < 0 else ''}exp({_ctx.nstr(self.log, 25)}))"

    def __format__(self, spec) -> str:
        if self.sign == 0:
            return "0"
        l10 = self.log / _ctx.ln10
        e = int(_ctx.floor(l10))
        mant = _ctx.power(10, l10 - e)
        s = _ctx.nstr(mant, 17, strip_zeros=False)
        return f"{'-' if self.sign < 0 else ''}{s}e{e}"


def _as_logreal(x) -> LogReal:
    if isinstance(x, LogReal):
        return x
    if isinstance(x, int):
        return LogReal.from_int(x)
    return LogReal.from_value(x)


def logsum(terms) -> LogReal:
    """Sum of LogReals (or ints) in a fixed pairwise order."""
    terms = [_as_logreal(t) for t in terms]
    if not terms:
        return LogReal(0)
    while len(terms) > 1:
        nxt = [terms[i] + terms[i + 1] for i in range(0, len(terms) - 1, 2)]
        if len(terms) % 2:
            nxt.append(terms[-1])
        terms = nxt
    return terms[0]


def log_of_int(k: int) -> float:
    """Natural log of a (big) positive integer as a float, -inf for 0."""
    if k <= 0:
        return -math.inf if k == 0 else math.nan
    return math.log(k)


# ---------------------------------------------------------------- exact engines

def bounded_row(n: int, m_max: int | None = None) -> list[int]:
    """[H[n][m] for m in 0..m_max] from the reflection sum.

    With s = n-1 and w = m+1, H[n][m] = sum_k C(2s, s+kw) - C(2s, s+kw+1):
    contour paths confined to the strip [0, m-1]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if m_max is None:
        m_max = n
    s = n - 1
    binom = [1] * (2 * s + 1)
    for j in range(1, 2 * s + 1):
        binom[j] = binom[j - 1] * (2 * s - j + 1) // j

    def c(j: int) -> int:
        return binom[j] if 0 <= j <= 2 * s else 0

    cat = catalan(s)
    out = [0] * (m_max + 1)
    for m in range(1, m_max + 1):
        if m >= n:
            out[m] = cat
            continue
        w = m + 1
        total = 0
        for k in range(-(s // w) - 1, s // w + 2):
            total += c(s + k * w) - c(s + k * w + 1)
        out[m] = total
    return out


@lru_cache(maxsize=None)
def _strip_poly(h: int) -> tuple[int, ...]:
    # p_0 = p_1 = 1, p_{k+1} = p_k - x p_{k-1}; coefficients (-1)^k C(h-k, k)
    return tuple((-1) ** k * math.comb(h - k, k) for k in range(h // 2 + 1))


def bounded_column(m: int, n_max: int) -> list[int]:
    """[H[n][m] for n in 0..n_max] as coefficients of x p_{m-1}(x) / p_m(x).

    Both polynomials are packed into integers in base 2^B (B > 2 n_max) and
    divided once; every series coefficient is below 4^n so the base-2^B
    digits of the quotient are the counts themselves."""
    if m <= 0:
        return [0] * (n_max + 1)
    num = (0,) + _strip_poly(m - 1)
    den = _strip_poly(m)
    nbytes = (2 * n_max + 8 + 7) // 8
    bits = 8 * nbytes
    top = max(len(num), len(den)) - 1

    def pack(poly) -> gmpy2.mpz:
        v = gmpy2.mpz(0)
        for i, coef in enumerate(poly):
            v += gmpy2.mpz(coef) << (bits * (top - i))
        return v

    q = (pack(num) << (bits * n_max)) // pack(den)
    raw = int(q).to_bytes(nbytes * (n_max + 1), "big")
    return [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "big") for i in range(n_max + 1)]


def recurrence_tables(n_max: int, m_max: int) -> tuple[list[list[int]], list[list[int]]]:
    """Dense H (height < m) and E (height = h) from the two-subtree recurrences.

    A tree is a root whose first subtree has height < m-1 followed by the
    rest, which is again a tree of height < m rooted at the same node."""
    H = [[0] * (m_max + 1) for _ in range(n_max + 1)]
    for m in range(1, m_max + 1):
        H[1][m] = 1
        for n in range(2, n_max + 1):
            H[n][m] = sum(H[j][m - 1] * H[n - j][m] for j in range(1, n))
    # exact height h: first subtree of height h-1 and rest of height <= h, or
    # first subtree of height < h-1 and rest of height exactly h
    h_max = m_max - 1
    E = [[0] * (max(h_max, 0) + 1) for _ in range(n_max + 1)]
    if n_max >= 1 and h_max >= 0:
        E[1][0] = 1
    for h in range(1, h_max + 1):
        for n in range(2, n_max + 1):
            E[n][h] = sum(E[j][h - 1] * H[n - j][h + 1] + H[j][h - 1] * E[n - j][h]
                          for j in range(1, n))
    return H, E


# ---------------------------------------------------------------- trig closed form

@lru_cache(maxsize=256)
def _trig_terms(m: int, prec: int):
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        pi = gmpy2.const_pi()
        ang = [pi * k / (m + 1) for k in range(1, m // 2 + 1)]
        return [gmpy2.sin(a) ** 2 for a in ang], [gmpy2.cos(a) ** 2 for a in ang]


def trig_count(n: int, m: int, precision_bits: int | None = None, round_result: bool = False):
    """4^n/(m+1) * sum_{k=1}^{floor(m/2)} sin^2(pi k/(m+1)) cos^{2n-2}(pi k/(m+1)).

    Returns a high-precision real (gmpy2.mpfr), or the certified nearest
    integer when ``round_result`` is set. The closed form covers n >= 2; n = 1
    is the single node (H[1][m] = 1 for m >= 1)."""
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    if precision_bits is None:
        precision_bits = 2 * n + 64
    if precision_bits < 64:
        raise ValueError("precision_bits must be >= 64")
    if n == 1:
        return 1 if round_result else gmpy2.mpfr(1)
    s2, c2 = _trig_terms(m, precision_bits)
    with gmpy2.context(gmpy2.get_context(), precision=precision_bits):
        total = gmpy2.fsum([s * c ** (n - 1) for s, c in zip(s2, c2)])
        val = gmpy2.mul_2exp(total, 2 * n) / (m + 1)
        if not round_result:
            return val
        nearest = int(gmpy2.rint(val))
        # each term carries O(log n) roundings from the power; bound generously
        err = abs(val) * (len(s2) + 4) * (2 * n + 16) * gmpy2.mul_2exp(gmpy2.mpfr(1), -precision_bits)
        if abs(val - nearest) + err >= 0.5 or err >= 0.25:
            raise PrecisionError(f"{precision_bits} bits cannot certify H({n},{m})")
    return nearest


def trig_count_exact(n: int, m: int) -> int:
    bits = 2 * n + 64
    while True:
        try:
            return trig_count(n, m, bits, round_result=True)
        except PrecisionError:
            bits *= 2


def log_trig_count(n, m):
    """Float log of the closed form; vectorized over n (array) for one m."""
    n_arr = np.atleast_1d(np.asarray(n, dtype=np.float64))
    out = np.full(n_arr.shape, -np.inf)
    if m >= 1:
        out[n_arr == 1] = 0.0
    k = np.arange(1, m // 2 + 1)
    if k.size:
        ang = np.pi * k / (m + 1)
        a = 2 * np.log(np.sin(ang))
        b = 2 * np.log(np.cos(ang))
        big = n_arr >= 2
        terms = a[None, :] + (n_arr[big, None] - 1) * b[None, :]
        mx = terms.max(axis=1, keepdims=True)
        lse = mx[:, 0] + np.log(np.exp(terms - mx).sum(axis=1))
        out[big] = n_arr[big] * math.log(4) - math.log(m + 1) + lse
    cat = n_arr <= m
    if np.any(cat):
        nn = n_arr[cat]
        # C_{n-1} = (2n-2)! / ((n-1)! n!)
        out[cat] = (np.array([math.lgamma(2 * v - 1) - math.lgamma(v) - math.lgamma(v + 1)
                              for v in nn]))
    return out if np.ndim(n) else float(out[0])


def asymptotic_count(n: int, m: int) -> LogReal:
    """Leading term 4^n/(m+1) tan^2(pi/(m+1)) / (1 + tan^2(pi/(m+1)))^n."""
    if m < 2:
        raise ValueError("m must be >= 2")
    if m >= n:
        raise ValueError("the height-bounded asymptotic needs m much smaller than sqrt(n)")
    t2 = _ctx.tan(_ctx.pi / (m + 1)) ** 2
    log = n * _ctx.log(4) - _ctx.log(m + 1) + _ctx.log(t2) - n * _ctx.log1p(t2)
    return LogReal(1, log)


# ---------------------------------------------------------------- tables

class CountTable:
    """Counts H[n][m] for 1 <= n <= n_max and 0 <= m <= m_max.

    The exact backend serves exact integers from a dense recurrence table when
    one was built, otherwise from cached rows (reflection sum) and columns
    (series division) computed on demand. The log backend serves float logs
    from the trigonometric closed form."""

    def __init__(self, n_max: int, m_max: int | None = None, backend: str = "exact"):
        if n_max < 1:
            raise ValueError("n_max must be >= 1")
        if backend not in ("exact", "log"):
            raise ValueError(f"unknown backend {backend!r}")
        self.n_max = n_max
        self.m_max = n_max if m_max is None else m_max
        if self.m_max < 1:
            raise ValueError("m_max must be >= 1")
        self.backend = backend
        self.engine = "fast"
        self._dense_H: list[list[int]] | None = None
        self._dense_E: list[list[int]] | None = None
        self._rows: dict[int, list[int]] = {}
        self._cols: dict[int, list[int]] = {}

    @property
    def exact(self) -> bool:
        return self.backend == "exact"

    def _check(self, n: int, m: int):
        if not 0 <= n <= self.n_max:
            raise TableTooSmall(f"n={n} outside table (n_max={self.n_max})")
        if not 0 <= m <= self.m_max:
            raise TableTooSmall(f"m={m} outside table (m_max={self.m_max})")

    def _need_exact(self):
        if not self.exact:
            raise ValueError("exact counts are not available on the log backend")

    def row(self, n: int) -> list[int]:
        """[H[n][m] for m in 0..m_max]."""
        self._check(n, 0)
        self._need_exact()
        if n == 0:
            return [0] * (self.m_max + 1)
        r = self._rows.get(n)
        if r is None:
            if self._dense_H is not None:
                r = list(self._dense_H[n])
            else:
                r = bounded_row(n, self.m_max)
            self._rows[n] = r
        return r

    def column(self, m: int) -> list[int]:
        """[H[n][m] for n in 0..n_max]."""
        self._check(0, m)
        self._need_exact()
        c = self._cols.get(m)
        if c is None:
            if self._dense_H is not None:
                c = [self._dense_H[n][m] for n in range(self.n_max + 1)]
            else:
                c = bounded_column(m, self.n_max)
            self._cols[m] = c
        return c

    def H(self, n: int, m: int) -> int:
        self._check(n, m)
        self._need_exact()
        if n == 0:
            return 0
        if self._dense_H is not None:
            return self._dense_H[n][m]
        if n in self._rows:
            return self._rows[n][m]
        if m in self._cols:
            return self._cols[m][n]
        return self.row(n)[m]

    def E(self, n: int, h: int) -> int:
        """Number of n-node trees of height exactly h."""
        self._check(n, h + 1)
        self._need_exact()
        if self._dense_E is not None and h < len(self._dense_E[n]):
            return self._dense_E[n][h]
        return self.H(n, h + 1) - self.H(n, h)

    def log_H(self, n: int, m: int) -> float:
        self._check(n, m)
        if self.exact:
            return log_of_int(self.H(n, m))
        if n == 0:
            return -math.inf
        return log_trig_count(n, m)

    def log_row(self, n: int) -> np.ndarray:
        """Float logs of H[n][m], m = 0..m_max."""
        self._check(n, 0)
        if self.exact:
            return np.array([log_of_int(v) for v in self.row(n)])
        out = np.full(self.m_max + 1, -np.inf)
        for m in range(1, self.m_max + 1):
            out[m] = log_trig_count(n, m)
        return out

    def log_column(self, m: int) -> np.ndarray:
        """Float logs of H[n][m], n = 0..n_max."""
        self._check(0, m)
        if self.exact:
            return np.array([log_of_int(v) for v in self.column(m)])
        out = np.full(self.n_max + 1, -np.inf)
        out[1:] = log_trig_count(np.arange(1, self.n_max + 1), m)
        return out

    def materialize(self) -> list[list[int]]:
        """Dense exact H for every cell (n, m)."""
        self._need_exact()
        if self._dense_H is None:
            if (self.n_max + 1) * (self.m_max + 1) > MAX_DENSE_CELLS:
                raise MemoryError("table too large to materialize")
            self._dense_H = [[0] * (self.m_max + 1)] + [
                list(self.row(n)) for n in range(1, self.n_max + 1)]
        return self._dense_H

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(f"{CACHE_FORMAT}|{self.backend}|{self.n_max}|{self.m_max}".encode())
        if self.exact and self._dense_H is not None:
            for row in self._dense_H:
                h.update((",".join(map(str, row)) + "\n").encode())
        return h.hexdigest()[:16]


def build_counts(n_max: int, m_max: int | None = None, backend: str = "exact",
                 engine: str = "auto") -> CountTable:
    """Count table for n <= n_max, m <= m_max.

    engine: "recurrence" fills dense tables with the two-subtree recurrences,
    "fast" computes rows and columns lazily, "auto" picks the recurrence when
    n_max^2 m_max is small."""
    table = CountTable(n_max, m_max, backend)
    if engine not in ("auto", "recurrence", "fast"):
        raise ValueError(f"unknown engine {engine!r}")
    if backend == "log":
        table.engine = "trig"
        return table
    if engine == "auto":
        engine = "recurrence" if n_max * n_max * table.m_max <= DENSE_WORK_LIMIT else "fast"
    if engine == "recurrence":
        if (n_max + 1) * (table.m_max + 1) > MAX_DENSE_CELLS:
            raise MemoryError("dense table exceeds the size cap")
        table._dense_H, table._dense_E = recurrence_tables(n_max, table.m_max)
    table.engine = engine
    return table


def forest_count(r: int, n: int, m: int, table: CountTable) -> int:
    """Number of ordered forests of r trees, each of height < m, with n nodes."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if r > n:
        raise ValueError("a forest of r nonempty trees needs n >= r")
    return forest_counts(r, n, m, table)[r - 1]


def forest_counts(r_max: int, n: int, m: int, table: CountTable) -> list[int]:
    """[F_r(n, m) for r = 1..r_max] by repeated truncated convolution."""
    col = table.column(m)[: n + 1]
    cur = [0] * (n + 1)
    cur[0] = 1
    out = []
    for _ in range(r_max):
        nxt = [0] * (n + 1)
        for i, a in enumerate(cur):
            if a:
                for j in range(1, n + 1 - i):
                    b = col[j]
                    if b:
                        nxt[i + j] += a * b
        cur = nxt
        out.append(cur[n])
    return out


def root_degree_count(r: int, n: int, m: int, table: CountTable) -> int:
    """Trees with n nodes, root degree r and height exactly m."""
    if m < 1 or r > n - 1:
        return 0
    hi = forest_count(r, n - 1, m, table)
    lo = forest_count(r, n - 1, m - 1, table) if m >= 2 else 0
    return hi - lo


# ---------------------------------------------------------------- disk cache

def cache_dir(override: str | os.PathLike | None = None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get("TREELAB_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "treelab"


def cache_name(n_max: int, m_max: int, backend: str) -> str:
    return f"counts-v{CACHE_FORMAT}-{backend}-n{n_max}-m{m_max}.jsonl"


def save_table(table: CountTable, directory=None) -> Path:
    d = cache_dir(directory)
    d.mkdir(parents=True, exist_ok=True)
    path = d / cache_name(table.n_max, table.m_max, table.backend)
    H = table.materialize() if table.exact else None
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w") as fh:
        header = {"format": CACHE_FORMAT, "backend": table.backend,
                  "n_max": table.n_max, "m_max": table.m_max, "hash": table.content_hash()}
        fh.write(json.dumps(header) + "\n")
        for n in range(1, table.n_max + 1):
            for m in range(table.m_max + 1):
                if H is not None:
                    rec = {"n": n, "m": m, "count": str(H[n][m])}
                else:
                    lg = table.log_H(n, m)
                    rec = {"n": n, "m": m, "sign": 0 if lg == -math.inf else 1,
                           "log10": "-inf" if lg == -math.inf else repr(lg / math.log(10))}
                fh.write(json.dumps(rec) + "\n")
    os.replace(tmp, path)
    return path


def load_table(path) -> CountTable:
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("format") != CACHE_FORMAT:
            raise ValueError(f"unsupported cache format {header.get('format')!r}")
        table = CountTable(header["n_max"], header["m_max"], header["backend"])
        if table.exact:
            H = [[0] * (table.m_max + 1) for _ in range(table.n_max + 1)]
            for line in fh:
                rec = json.loads(line)
                H[rec["n"]][rec["m"]] = int(rec["count"])
            table._dense_H = H
            table.engine = "cache"
    return table


def verify_table(table: CountTable) -> list[str]:
    """Structural checks on a dense exact table; returns a list of problems."""
    problems = []
    H = table.materialize()
    for n in range(1, table.n_max + 1):
        row = H[n]
        if any(b < a for a, b in zip(row, row[1:])):
            problems.append(f"row {n} not monotone in m")
        if table.m_max >= n and row[n] != catalan(n - 1):
            problems.append(f"row {n} does not reach C_{n - 1}")
        if row[0] != 0:
            problems.append(f"H[{n}][0] != 0")
    for n in range(2, table.n_max + 1):
        if H[n][1] != 0 or (table.m_max >= 2 and H[n][2] != 1):
            problems.append(f"row {n} has wrong small-m values")
    return problems
