"""Closed-form predictions for height-biased plane trees.

Everything here is a pure function of (n, mu) or of the scaled bias
x = mu/n. The exponent function lambda_x(t) = x t + log(1 + tan^2(pi/t)) and
its minimizer t_x drive all non-Brownian asymptotics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .counting import LogReal, _ctx
from .tree_core import PlaneTree

PI = math.pi

# regime cutoffs (informational; see classify_regime)
BROWNIAN_CUT = 10.0      # mu * sqrt(n) <= this
EXTREME_CUT = 0.1        # mu / n >= this
DISCRETE_BAND = (0.2, 5.0)  # mu / n^(1/4) inside this band


def _tan2(t):
    return math.tan(PI / t) ** 2


def lam(x: float, t: float) -> float:
    if t <= 2:
        raise ValueError("lambda_x(t) needs t > 2")
    return x * t + math.log1p(_tan2(t))


def lam_prime(x: float, t: float) -> float:
    if t <= 2:
        raise ValueError("lambda_x(t) needs t > 2")
    return x - 2 * PI / t ** 2 * math.tan(PI / t)


def lam_second(t: float) -> float:
    tn = math.tan(PI / t)
    return 4 * PI * tn / t ** 3 + 2 * PI ** 2 * (1 + tn * tn) / t ** 4


def t_min(x: float) -> float:
    """Unique minimizer of lambda_x over (2, inf): bracket, then Newton polish."""
    if not x > 0:
        raise ValueError("x must be > 0")
    lo = 2 + 1e-9
    hi = max(8.0, 2 * (2 * PI ** 2 / x) ** (1 / 3))
    t = brentq(lambda s: lam_prime(x, s), lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    for _ in range(3):
        step = lam_prime(x, t) / lam_second(t)
        if not math.isfinite(step) or t - step <= 2:
            break
        t -= step
    return t


def t_leading(x: float) -> float:
    return (2 * PI ** 2 / x) ** (1 / 3)


@dataclass(frozen=True)
class LambdaExpansion:
    t_approx: float
    min_approx: float
    curvature_coeff: float
    t_refined: float

    def excess(self, eps: float) -> float:
        """Approximate lambda_x((1+eps) t_x) - lambda_x(t_x)."""
        return self.curvature_coeff * eps * eps


def lambda_expansion(x: float) -> LambdaExpansion:
    """Small-x expansions of t_x, lambda_x(t_x) and the quadratic excess."""
    if not 0 < x <= 0.1:
        raise ValueError("expansions are only offered for 0 < x <= 0.1")
    u = (PI * x / 2) ** (2 / 3)
    return LambdaExpansion(
        t_approx=t_leading(x),
        min_approx=3 * u + u * u / 6,
        curvature_coeff=3 * u,
        t_refined=t_leading(x) * (1 + u / 9),
    )


# ---------------------------------------------------------------- regimes

def classify_regime(n: int, mu: float, brownian_cut: float = BROWNIAN_CUT,
                    extreme_cut: float = EXTREME_CUT, band=DISCRETE_BAND) -> str:
    if mu * math.sqrt(n) <= brownian_cut:
        return "brownian"
    if mu / n >= extreme_cut:
        return "extreme"
    if mu / n ** 0.25 >= band[0]:
        return "intermediate-discrete"
    return "intermediate-gaussian"


def _regime_1(n: int, mu: float) -> LogReal:
    c = _ctx
    mu_ = c.mpf(mu)
    log = (n * c.log(4) + mu_ + c.log(c.expm1(mu_))
           + c.log(c.pi ** (c.mpf(5) / 6) / (c.cbrt(2) * c.sqrt(3)))
           + c.log(mu_) / 3 - c.mpf(5) / 6 * c.log(n)
           - 3 * c.cbrt(c.pi ** 2 * mu_ ** 2 * n / 4))
    return LogReal(1, log)


def _regime_2(n: int, mu: float) -> LogReal:
    c = _ctx
    x = mu / n
    t = t_min(x)
    a = 1.5 * (mu ** 4 / (2 * PI ** 2 * n)) ** (1 / 3)
    # Gaussian sum over Z, truncated where terms drop below 1e-30 of the peak
    half = math.sqrt(30 * math.log(10) / a) + 2
    ms = np.arange(math.floor(t - half), math.ceil(t + half) + 1)
    w = -a * (ms - t) ** 2
    lse = float(w.max() + np.log(np.exp(w - w.max()).sum()))
    mu_ = c.mpf(mu)
    log = (n * c.log(4) + mu_ + c.log(c.expm1(mu_)) + c.log(mu_ / (2 * n))
           - n * c.mpf(lam(x, t)) + lse)
    return LogReal(1, log)


def _regime_3(n: int, mu: float) -> LogReal:
    c = _ctx
    x = mu / n
    t = t_min(x)
    lo = max(math.floor(t), 3)
    hi = max(math.ceil(t), lo)
    terms = []
    for m in range(lo, hi + 1):
        t2 = c.tan(c.pi / m) ** 2
        terms.append(LogReal(1, c.log(t2) - c.log(m) - n * (x * m + c.log1p(t2))))
    total = terms[0]
    for extra in terms[1:]:
        total = total + extra
    return LogReal(1, n * c.log(4) + 2 * c.mpf(mu) + total.log)


REGIME_FORMULAS = {1: _regime_1, 2: _regime_2, 3: _regime_3}


def regime_value(n: int, mu: float, regime: int) -> LogReal:
    """Evaluate one of the three partition-function asymptotics regardless of
    whether (n, mu) lies in its range of validity."""
    return REGIME_FORMULAS[regime](n, mu)


def applicable_regimes(n: int, mu: float) -> list[int]:
    if mu * math.sqrt(n) <= BROWNIAN_CUT:
        return []
    g = mu / n ** 0.25
    out = []
    if g <= DISCRETE_BAND[1]:
        out.append(1)
    if mu / n < EXTREME_CUT:
        out.append(2)
    if g >= DISCRETE_BAND[0]:
        out.append(3)
    return out


def partition_asymptotic(n: int, mu: float) -> tuple[str, dict[int, LogReal]]:
    """(regime tag, {formula number: value}) for every formula whose range
    contains (n, mu). Brownian inputs get an empty dict."""
    if mu <= 0:
        raise ValueError("mu must be > 0")
    tag = classify_regime(n, mu)
    return tag, {r: regime_value(n, mu, r) for r in applicable_regimes(n, mu)}


# ---------------------------------------------------------------- height laws

@dataclass(frozen=True)
class DiscretePmf:
    ks: np.ndarray
    pmf: np.ndarray
    norm: float

    def prob(self, k: int) -> float:
        i = k - int(self.ks[0])
        return float(self.pmf[i]) if 0 <= i < len(self.pmf) else 0.0


def discrete_clt_pmf(gamma: float, delta: float, k_range=None) -> DiscretePmf:
    """Integer law with weights exp(-3 (gamma^2/(4 pi))^(2/3) (k - delta)^2)."""
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    if not 0 <= delta <= 1:
        raise ValueError("delta must lie in [0, 1]")
    a = 3 * (gamma ** 2 / (4 * PI)) ** (2 / 3)
    # mass outside |k - delta| > half is far below 1e-15
    half = math.sqrt(40 * math.log(10) / a) + 2
    ks = np.arange(math.floor(delta - half), math.ceil(delta + half) + 1)
    w = np.exp(-a * (ks - delta) ** 2)
    norm = float(w.sum())
    pmf = w / norm
    if k_range is not None:
        lo, hi = k_range
        keep = (ks >= lo) & (ks <= hi)
        ks, pmf = ks[keep], pmf[keep]
    return DiscretePmf(ks, pmf, norm)


def m_of(x: float) -> int:
    return max(math.floor(t_min(x)), 3)


def delta_n(n: int, mu: float) -> float:
    t = t_min(mu / n)
    m = max(math.floor(t), 3)
    return mu + n * (math.log1p(_tan2(math.ceil(t))) - math.log1p(_tan2(m)))


def bernoulli_param(c: float, delta: float) -> float:
    """Limit probability that h - m_c + 2 equals 1."""
    if delta == math.inf:
        return 0.0
    if delta == -math.inf:
        return 1.0
    if c == 0:
        return 1 / (1 + math.exp(delta))
    if c == math.inf:
        m = 3
    else:
        m = m_of(c)
    num = m * _tan2(m + 1)
    den = (m + 1) * _tan2(m)
    # e^{-delta} num / (den + e^{-delta} num), written to avoid overflow
    return 1 / (1 + den / num * math.exp(delta))


def star_probability(delta: float) -> float:
    if delta == math.inf:
        return 1.0
    if delta == -math.inf:
        return 0.0
    return 4 / (4 + math.exp(-delta)) if delta > -700 else 0.0


def ldp_rate(x: float) -> float:
    if x <= 0:
        return math.inf
    return (PI / 2) ** (2 / 3) * (x - 1) ** 2 * (2 * x + 1) / x ** 2


def ldp_rate_alt(x: float) -> float:
    if x <= 0:
        return math.inf
    return (2 * PI ** 2) ** (1 / 3) * (x + 1 / (2 * x * x) - 1.5)


def kesten_ball_mass(t0: PlaneTree) -> float:
    """Limit mass of the ball of radius height(t0) around the root equal to t0,
    under the single-spine limit of uniform trees: 2K 2^K 4^{-|t0|} with K the
    number of nodes at maximal depth."""
    depths = t0.depths
    r = max(depths)
    if r == 0:
        return 1.0
    k = sum(1 for d in depths if d == r)
    return 2 * k * 2.0 ** k * 4.0 ** (-t0.size)


# ---------------------------------------------------------------- prediction set

@dataclass
class PredictionSet:
    n: int
    mu: float
    x: float
    t_x: float
    regime: str
    lln_height: float | None
    clt_sd: float | None
    m_x: int
    delta_n: float
    bernoulli_p: float
    width_scale: float
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def height_predictions(n: int, mu: float) -> PredictionSet:
    if n < 2 or mu <= 0:
        raise ValueError("need n >= 2 and mu > 0")
    x = mu / n
    t = t_min(x)
    regime = classify_regime(n, mu)
    notes = []
    lln = (2 * PI ** 2 * n / mu) ** (1 / 3)
    sd = math.sqrt((2 * PI ** 2 * n / mu ** 4) ** (1 / 3) / 3)
    if regime == "extreme":
        notes.append("height LLN/CLT predictions do not apply in the extreme regime")
        lln = sd = None
    elif regime == "brownian":
        notes.append("Brownian regime: height is of order sqrt(n), no LLN at the cube-root scale")
    dn = delta_n(n, mu)
    return PredictionSet(n=n, mu=mu, x=x, t_x=t, regime=regime, lln_height=lln, clt_sd=sd,
                         m_x=max(math.floor(t), 3), delta_n=dn,
                         bernoulli_p=bernoulli_param(x, dn),
                         width_scale=min(n, (mu * n * n) ** (1 / 3)), notes=notes)
