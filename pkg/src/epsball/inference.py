"""Plug-in variance estimation, confidence intervals, the two-sample test,
Bonferroni simultaneous intervals, and bandwidth schedules.

The asymptotic variance of a quadratic estimate splits into a fixed-bandwidth
part (a variance of density values, ``zeta``) and a small-bandwidth part
(``eta``); both are functions of the integrated-power functionals of order
two and three, which are estimated at a pilot bandwidth and plugged in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functionals import D2_COEFFS, QuadraticCoefficients, estimate_d2
from .spatial import as_sample, ball_volume, count_cross, count_within
from .stats_util import normal_cdf, normal_quantile


class DegenerateVarianceError(ValueError):
    """Raised when a variance plug-in is zero and no valid test exists."""


@dataclass(frozen=True)
class QHatTable:
    """Plug-in estimates of all integrated-power functionals of order 2-3."""

    q20: float
    q11: float
    q02: float
    q30: float
    q21: float
    q12: float
    q03: float
    epsilon0: float
    n1: int
    n2: int
    d: int


@dataclass(frozen=True)
class VariancePlugins:
    zeta_n: float
    v2_n: float
    w2_n: float
    rho_n: float
    epsilon0: float


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    degenerate: bool = False


@dataclass(frozen=True)
class TestReport:
    statistic: float
    p_value: float
    reject: bool
    level: float
    d2_hat: float


@dataclass(frozen=True)
class ScheduleSpec:
    mode: str  # smooth | alpha | gamma | agnostic
    c: float = 1.0
    alpha: float | None = None
    gamma_param: float | None = None


def _comb2_sum(counts: np.ndarray) -> int:
    c = counts.astype(object)
    return int(np.sum(c * (c - 1) // 2))


def qhat_table(x, y, eps0: float, *, require_third_order: bool = True) -> QHatTable:
    """All seven order-2 and order-3 functional estimates at bandwidth eps0.

    Derived from four neighbor-count passes (within each sample and across,
    both directions); the third-order entries need n1, n2 >= 3.
    """
    x = as_sample(x)
    y = as_sample(y)
    n1, n2 = x.shape[0], y.shape[0]
    min_n = 3 if require_third_order else 2
    if n1 < min_n or n2 < min_n:
        raise ValueError(f"need n1, n2 >= {min_n}, got n1={n1}, n2={n2}")
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    d = x.shape[1]
    b = ball_volume(d, eps0)
    nxx = count_within(x, eps0).within
    nyy = count_within(y, eps0).within
    nyx = count_cross(x, y, eps0).cross  # y-points near each x
    nxy = count_cross(y, x, eps0).cross  # x-points near each y

    q20 = int(nxx.sum()) / 2 / (math.comb(n1, 2) * b)
    q02 = int(nyy.sum()) / 2 / (math.comb(n2, 2) * b)
    q11 = int(nyx.sum()) / (n1 * n2 * b)
    if require_third_order or (n1 >= 3 and n2 >= 3):
        q30 = _comb2_sum(nxx) / 3 / (math.comb(n1, 3) * b**2)
        q03 = _comb2_sum(nyy) / 3 / (math.comb(n2, 3) * b**2)
        q21 = int(np.sum(nxx.astype(object) * nyx.astype(object))) / 2 \
            / (math.comb(n1, 2) * n2 * b**2)
        q12 = _comb2_sum(nyx) / (n1 * math.comb(n2, 2) * b**2)
    else:
        q30 = q03 = q21 = q12 = 0.0
    return QHatTable(q20=q20, q11=q11, q02=q02, q30=q30, q21=q21, q12=q12, q03=q03,
                     epsilon0=float(eps0), n1=n1, n2=n2, d=d)


def zeta_plugin(a, rho: float, q: QHatTable) -> float:
    """Fixed-bandwidth variance component, clamped below at zero."""
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must be in (0, 1), got {rho}")
    a0, a1, a2 = (float(v) for v in a)
    var_x = (a0 * a0 * q.q30 + a0 * a1 * q.q21 + (a1 * a1 / 4.0) * q.q12
             - (a0 * q.q20 + (a1 / 2.0) * q.q11) ** 2)
    var_y = (a2 * a2 * q.q03 + a1 * a2 * q.q12 + (a1 * a1 / 4.0) * q.q21
             - (a2 * q.q02 + (a1 / 2.0) * q.q11) ** 2)
    zeta = (4.0 / rho) * var_x + (4.0 / (1.0 - rho)) * var_y
    return max(zeta, 0.0)


def eta_plugin(a, rho: float, q: QHatTable, d: int) -> float:
    """Small-bandwidth variance component."""
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must be in (0, 1), got {rho}")
    a0, a1, a2 = (float(v) for v in a)
    b1 = ball_volume(d, 1.0)
    return (2.0 / b1) * (a0 * a0 / rho**2 * q.q20
                         + a2 * a2 / (1.0 - rho) ** 2 * q.q02
                         + a1 * a1 / (2.0 * rho * (1.0 - rho)) * q.q11)


def w_squared(zeta_n: float, v2_n: float, n: int, eps: float, d: int) -> float:
    if zeta_n < 0 or v2_n < 0 or n < 1 or eps <= 0:
        raise ValueError("w_squared needs non-negative inputs, n >= 1, eps > 0")
    return zeta_n + v2_n / (n * eps**d)


def variance_plugins(x, y, a, eps: float, eps0: float | None = None) -> VariancePlugins:
    """Zeta/eta plug-ins at the pilot bandwidth (defaults to eps itself)."""
    eps0 = eps if eps0 is None else eps0
    x = as_sample(x)
    y = as_sample(y)
    n1, n2 = x.shape[0], y.shape[0]
    n = n1 + n2
    rho = n1 / n
    q = qhat_table(x, y, eps0)
    zeta_n = zeta_plugin(a, rho, q)
    v2_n = eta_plugin(a, rho, q, q.d)
    return VariancePlugins(zeta_n=zeta_n, v2_n=v2_n,
                           w2_n=w_squared(zeta_n, v2_n, n, eps, q.d),
                           rho_n=rho, epsilon0=float(eps0))


def one_sample_plugins(x, eps: float, eps0: float | None = None) -> VariancePlugins:
    """Variance plug-ins for the single-sample squared-density functional.

    Uses the rho-free one-sample form: zeta = 4 Var(p_X(X)) estimated as
    4 (q30 - q20^2), eta = 2 q20 / b_1(d), and w^2 = zeta + eta/(n1 eps^d).
    """
    eps0 = eps if eps0 is None else eps0
    x = as_sample(x)
    n1, d = x.shape
    if n1 < 3:
        raise ValueError(f"need n1 >= 3, got {n1}")
    b = ball_volume(d, eps0)
    nxx = count_within(x, eps0).within
    q20 = int(nxx.sum()) / 2 / (math.comb(n1, 2) * b)
    q30 = _comb2_sum(nxx) / 3 / (math.comb(n1, 3) * b**2)
    zeta_n = max(4.0 * (q30 - q20 * q20), 0.0)
    v2_n = 2.0 * q20 / ball_volume(d, 1.0)
    return VariancePlugins(zeta_n=zeta_n, v2_n=v2_n,
                           w2_n=w_squared(zeta_n, v2_n, n1, eps, d),
                           rho_n=1.0, epsilon0=float(eps0))


def confidence_interval(point: float, w2: float, n: int, level: float) -> Interval:
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if w2 < 0:
        raise ValueError(f"w2 must be non-negative, got {w2}")
    if w2 == 0.0:
        return Interval(point, point, degenerate=True)
    half = normal_quantile((1.0 + level) / 2.0) * math.sqrt(w2 / n)
    return Interval(point - half, point + half)


def entropy_interval(h_est: float, q_tilde: float, w2: float, n: int,
                     level: float) -> Interval:
    """Delta-method interval for the truncated-log entropy estimate."""
    if not q_tilde > 0:
        raise ValueError(f"q estimate must be positive, got {q_tilde}")
    base = confidence_interval(0.0, w2, n, level)
    if base.degenerate:
        return Interval(h_est, h_est, degenerate=True)
    half = base.hi / q_tilde
    return Interval(h_est - half, h_est + half)


def two_sample_test(x, y, eps: float, eps0: float | None = None,
                    level: float = 0.05) -> TestReport:
    """Test of equal densities via the quadratic divergence estimate.

    Rejects for large values of n * eps^(d/2) * D-hat / v_n, referred to the
    upper tail of the standard normal.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    eps0 = eps if eps0 is None else eps0
    x = as_sample(x)
    y = as_sample(y)
    n1, n2 = x.shape[0], y.shape[0]
    n = n1 + n2
    d2 = estimate_d2(x, y, eps)
    # only the order-2 entries enter the eta plug-in
    third = n1 >= 3 and n2 >= 3
    q = qhat_table(x, y, eps0, require_third_order=third)
    v2 = eta_plugin(D2_COEFFS, n1 / n, q, d2.d)
    if v2 <= 0.0:
        raise DegenerateVarianceError(
            "all pilot-bandwidth counts are zero; no valid test statistic")
    t_n = n * eps ** (d2.d / 2.0) * d2.value / math.sqrt(v2)
    p = 1.0 - normal_cdf(t_n)
    return TestReport(statistic=t_n, p_value=p, reject=p < level, level=level,
                      d2_hat=d2.value)


@dataclass(frozen=True)
class PairDivergence:
    estimate: float
    interval: Interval
    individual_level: float


def simultaneous_d2(samples, eps: float, eps0: float | None = None,
                    level: float = 0.95) -> dict:
    """Bonferroni-simultaneous divergence intervals for all sample pairs.

    Returns a dict keyed by (l, m) with l < m; each interval holds at
    individual level 1 - (1 - level)/C(M, 2).
    """
    samples = [as_sample(s) for s in samples]
    m_pop = len(samples)
    if m_pop < 2:
        raise ValueError(f"need at least two samples, got {m_pop}")
    n_pairs = math.comb(m_pop, 2)
    adj_level = 1.0 - (1.0 - level) / n_pairs
    out = {}
    for l in range(m_pop):
        for m in range(l + 1, m_pop):
            x, y = samples[l], samples[m]
            est = estimate_d2(x, y, eps)
            plugins = variance_plugins(x, y, D2_COEFFS, eps, eps0)
            ci = confidence_interval(est.value, plugins.w2_n,
                                     x.shape[0] + y.shape[0], adj_level)
            out[(l, m)] = PairDivergence(estimate=est.value, interval=ci,
                                         individual_level=adj_level)
    return out


def epsilon_schedule(spec: ScheduleSpec, n: int, d: int) -> float:
    """Bandwidth as a function of the total sample size.

    smooth:   c * n^(-1/d)            (root-n regime, n eps^d -> c^d)
    alpha:    c * n^(-1/(2a + d/2))   (low-regularity rate, 0 < a <= d/4)
    gamma:    c * n^(-2/((1+g)d))     (intermediate rate, 0 < g < 1)
    agnostic: (c log n)^(2/d) n^(-2/d) (no smoothness information)
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d}")
    if not spec.c > 0:
        raise ValueError(f"schedule constant must be positive, got {spec.c}")
    if spec.mode == "smooth":
        return spec.c * n ** (-1.0 / d)
    if spec.mode == "alpha":
        if spec.alpha is None or not 0.0 < spec.alpha <= d / 4.0:
            raise ValueError(f"alpha mode needs 0 < alpha <= d/4, got {spec.alpha}")
        return spec.c * n ** (-1.0 / (2.0 * spec.alpha + d / 2.0))
    if spec.mode == "gamma":
        if spec.gamma_param is None or not 0.0 < spec.gamma_param < 1.0:
            raise ValueError(f"gamma mode needs 0 < gamma < 1, got {spec.gamma_param}")
        return spec.c * n ** (-2.0 / ((1.0 + spec.gamma_param) * d))
    if spec.mode == "agnostic":
        return (spec.c * math.log(n)) ** (2.0 / d) * n ** (-2.0 / d)
    raise ValueError(f"unknown schedule mode {spec.mode!r}")
