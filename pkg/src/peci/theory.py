"""Closed-form accuracy theory for IGCI and its parallel ensemble.

Under a central-limit model of the per-gap log slopes, the base learner on
``m`` points errs with probability ``(1 - erf(c sqrt(m - 1))) / 2``, where
``c = mu / sqrt(2 sigma^2)`` summarizes how separable the two slope
distributions are.  A majority vote over ``T`` tasks of size ``k`` then obeys
a Hoeffding bound ``exp(-T/2 erf^2(c sqrt(k - 1)))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Direction, SamplePairs, SlopeTerms, slope_terms
from .errors import DegenerateData, Saturated

__all__ = [
    "TheoryParams",
    "erf",
    "log_comb",
    "base_error_rate",
    "ensemble_error_bound",
    "critical_ensemble_size",
    "corollary_conditions",
    "hoeffding_tail_bound",
    "estimate_c",
    "best_k",
]

ERF_SATURATION = 6.0


@dataclass(frozen=True)
class TheoryParams:
    mu: float
    sigma2: float
    c: float
    m: int
    k: int | None = None
    T: int | None = None
    # Per-direction moments of the log-slope terms.
    mu_x: float = math.nan
    mu_y: float = math.nan
    var_x: float = math.nan
    var_y: float = math.nan

    @classmethod
    def from_moments(cls, mu: float, sigma2: float, m: int, **kw) -> "TheoryParams":
        if not sigma2 > 0:
            raise DegenerateData("slope-term variance is zero")
        return cls(mu=mu, sigma2=sigma2, c=mu / math.sqrt(2.0 * sigma2), m=m, **kw)


def erf(x: float) -> float:
    """Gaussian error function; exactly odd, saturating to +-1 for ``|x| > 6``."""
    x = float(x)
    a = abs(x)
    v = 1.0 if a > ERF_SATURATION else math.erf(a)
    return v if x >= 0 else -v


def log_comb(n: int, r: int) -> float:
    """``ln C(n, r)`` via log-gamma."""
    if not 0 <= r <= n:
        raise ValueError(f"need 0 <= r <= n, got n={n}, r={r}")
    return math.lgamma(n + 1) - math.lgamma(r + 1) - math.lgamma(n - r + 1)


def base_error_rate(c: float, m: int) -> float:
    """Error rate of a single IGCI decision on ``m`` points."""
    if m < 2:
        raise ValueError("m must be >= 2")
    if c == 0:
        return 0.5
    return 0.5 * (1.0 - erf(c * math.sqrt(m - 1)))


def ensemble_error_bound(c: float, k: int, T: int) -> float:
    """Hoeffding bound on the majority-vote error of ``T`` tasks of size ``k``.

    Only meaningful for ``c > 0``; ``c = 0`` gives the vacuous bound 1.
    """
    if k < 2 or T < 1:
        raise ValueError("need k >= 2 and T >= 1")
    e = erf(c * math.sqrt(k - 1))
    return math.exp(-0.5 * T * e * e)


def critical_ensemble_size(c: float, m: int) -> float:
    """``2 ln(2 / (1 - erf(c sqrt(m - 1))))``, the effort the ensemble must exceed.

    Raises Saturated once ``erf`` reaches 1 in double precision.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    z = c * math.sqrt(m - 1)
    if erf(z) >= 1.0:
        raise Saturated(f"erf({z:g}) == 1: base error rate is numerically zero")
    tail = math.erfc(z) if z <= ERF_SATURATION else 1.0 - erf(z)
    return 2.0 * math.log(2.0 / tail)


def corollary_conditions(c: float, m: int, k: int, T: int) -> tuple[bool, bool]:
    """Sufficient conditions on ``k`` and ``T`` for the ensemble to beat the base learner.

    Returns ``(k_ok, T_ok)``.  Both are False when ``c <= 0``: the bound
    argument assumes better-than-chance base decisions.
    """
    if not 2 <= k < m:
        raise ValueError(f"need 2 <= k < m, got k={k}, m={m}")
    crit = critical_ensemble_size(c, m)
    if c <= 0:
        return False, False
    e = erf(c * math.sqrt(k - 1))
    if e == 0.0:
        return False, False
    k_ok = log_comb(m, k) + 2.0 * math.log(abs(e)) > math.log(crit)
    T_ok = T > crit / (e * e)
    return k_ok, T_ok


def hoeffding_tail_bound(t: float, ranges: Sequence[float]) -> float:
    """``exp(-2 t^2 / sum(range_i^2))`` for a sum of bounded variables."""
    if not t > 0:
        raise ValueError("t must be positive")
    r = np.asarray(ranges, dtype=np.float64)
    if r.size == 0 or not (r > 0).all():
        raise ValueError("ranges must be positive")
    return math.exp(-2.0 * t * t / float(np.sum(r * r)))


def _weighted_moments(st: SlopeTerms) -> tuple[float, float]:
    w = st.weights.astype(np.float64)
    n = w.sum()
    if n < 2:
        raise DegenerateData("fewer than two usable slope terms")
    mean = st.mean()
    var = math.fsum((w * (st.terms - mean) ** 2).tolist()) / (n - 1)
    return mean, var


def estimate_c(pairs: SamplePairs, true_direction: Direction) -> TheoryParams:
    """Moment estimate of ``c`` from the log-slope terms of normalized pairs.

    ``mu`` is signed so that it is positive when IGCI's expected decision
    agrees with ``true_direction``.
    """
    if true_direction is Direction.UNDECIDED:
        raise ValueError("true_direction must be X_CAUSES_Y or Y_CAUSES_X")
    mu_x, var_x = _weighted_moments(slope_terms(pairs.x, pairs.y))
    mu_y, var_y = _weighted_moments(slope_terms(pairs.y, pairs.x))
    mu = mu_y - mu_x if true_direction is Direction.X_CAUSES_Y else mu_x - mu_y
    return TheoryParams.from_moments(
        mu, var_x + var_y, len(pairs), mu_x=mu_x, mu_y=mu_y, var_x=var_x, var_y=var_y
    )


def best_k(c: float, m: int, k_min: int = 2) -> int:
    """Numerical argmax over ``k`` of ``C(m, k) erf^2(c sqrt(k - 1))``.

    A heuristic only; nothing guarantees it is the accuracy-optimal ``k``.
    """
    best, best_val = k_min, -math.inf
    for k in range(k_min, m):
        e = erf(c * math.sqrt(k - 1))
        if e == 0.0:
            continue
        val = log_comb(m, k) + 2.0 * math.log(abs(e))
        if val > best_val:
            best, best_val = k, val
    return best
