"""Estimators of integrated density-power functionals from close-pair counts.

The core statistic for order (k1, k2) is a U-statistic over all (k1, k2)
subset pairs of the two samples. It collapses to a sum of binomial
coefficients of per-point neighbor counts, which is what gets computed here;
the subset-enumeration form lives in the test suite as the oracle. Count
accumulation is exact integer arithmetic; floats appear only in the final
normalization by the ball volume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .spatial import as_sample, ball_volume, count_cross, count_within


class FunctionalOrder(NamedTuple):
    k1: int
    k2: int


class QuadraticCoefficients(NamedTuple):
    a0: float
    a1: float
    a2: float


D2_COEFFS = QuadraticCoefficients(1.0, -2.0, 1.0)


@dataclass(frozen=True)
class QEstimate:
    value: float
    order: object
    epsilon: float
    n1: int
    n2: int
    d: int


def _check_order(k) -> FunctionalOrder:
    k = FunctionalOrder(*k)
    if k.k1 < 0 or k.k2 < 0 or int(k.k1) != k.k1 or int(k.k2) != k.k2:
        raise ValueError(f"order components must be non-negative integers, got {k}")
    if k.k1 + k.k2 < 2:
        raise ValueError(f"order must satisfy k1 + k2 >= 2, got {k}")
    return FunctionalOrder(int(k.k1), int(k.k2))


def _comb_sum(counts: np.ndarray, r1: int, other: np.ndarray | None = None,
              r2: int = 0) -> int:
    """Exact sum over points of C(counts[i], r1) * C(other[i], r2)."""
    total = 0
    if other is None:
        for m in counts.tolist():
            total += math.comb(m, r1)
    else:
        for m, w in zip(counts.tolist(), other.tolist()):
            total += math.comb(m, r1) * math.comb(w, r2)
    return total


def _prepare(x, y, k: FunctionalOrder):
    x = as_sample(x)
    y = as_sample(y if y is not None else np.empty((0, x.shape[1])))
    n1, n2 = x.shape[0], y.shape[0]
    if k.k1 >= 1 and n1 < max(k.k1, 1):
        raise ValueError(f"need n1 >= {k.k1} for order {tuple(k)}, got n1={n1}")
    if n2 < k.k2:
        raise ValueError(f"need n2 >= {k.k2} for order {tuple(k)}, got n2={n2}")
    if k.k1 == 0 and n2 < 1:
        raise ValueError(f"need a non-empty second sample for order {tuple(k)}")
    if n1 and n2 and x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    d = x.shape[1] if (k.k1 >= 1 and n1) else y.shape[1]
    return x, y, n1, n2, d


def q_statistic_exact(x, y, k, eps: float) -> Fraction:
    """The order-(k1, k2) U-statistic before ball-volume normalization."""
    k = _check_order(k)
    x, y, n1, n2, _ = _prepare(x, y, k)
    if k.k1 >= 1:
        nxx = count_within(x, eps).within if k.k1 >= 2 else np.zeros(n1, dtype=np.int64)
        nyx = count_cross(x, y, eps).cross if k.k2 >= 1 else np.zeros(n1, dtype=np.int64)
        num = _comb_sum(nxx, k.k1 - 1, nyx, k.k2)
        den = k.k1 * math.comb(n1, k.k1) * math.comb(n2, k.k2)
    else:
        nyy = count_within(y, eps).within
        num = _comb_sum(nyy, k.k2 - 1)
        den = k.k2 * math.comb(n2, k.k2)
    return Fraction(num, den)


def estimate_q_tilde(x, y, k, eps: float) -> QEstimate:
    """Ball-volume-normalized estimate of the integral of p_X^k1 * p_Y^k2."""
    k = _check_order(k)
    x, y, n1, n2, d = _prepare(x, y, k)
    q = q_statistic_exact(x, y, k, eps)
    value = float(q) / ball_volume(d, eps) ** (k.k1 + k.k2 - 1)
    return QEstimate(value=value, order=k, epsilon=float(eps), n1=n1, n2=n2, d=d)


def estimate_quadratic(x, y, a, eps: float) -> QEstimate:
    """Linear combination a0*q(2,0) + a1*q(1,1) + a2*q(0,2) of estimates."""
    a = QuadraticCoefficients(*(float(v) for v in a))
    value = 0.0
    n1 = n2 = 0
    d = 0
    for coeff, order in zip(a, ((2, 0), (1, 1), (0, 2))):
        if coeff == 0.0:
            continue
        est = estimate_q_tilde(x, y, order, eps)
        value += coeff * est.value
        n1, n2, d = est.n1, est.n2, est.d
    if d == 0:  # all coefficients zero: report shapes anyway
        x = as_sample(x)
        y = as_sample(y if y is not None else np.empty((0, x.shape[1])))
        n1, n2, d = x.shape[0], y.shape[0], x.shape[1]
    return QEstimate(value=value, order=a, epsilon=float(eps), n1=n1, n2=n2, d=d)


def estimate_d2(x, y, eps: float) -> QEstimate:
    """Quadratic density-power divergence estimate."""
    return estimate_quadratic(x, y, D2_COEFFS, eps)


def estimate_ds(x, y, s: int, eps: float) -> QEstimate:
    """Density power divergence of integer order s >= 2."""
    if int(s) != s or s < 2:
        raise ValueError(f"order s must be an integer >= 2, got {s}")
    s = int(s)
    q_s0 = estimate_q_tilde(x, y, (s, 0), eps)
    q_1s = estimate_q_tilde(x, y, (1, s - 1), eps)
    q_0s = estimate_q_tilde(x, y, (0, s), eps)
    value = q_s0.value / (s - 1) - s * q_1s.value / (s - 1) + q_0s.value
    return QEstimate(value=value, order=("ds", s), epsilon=float(eps),
                     n1=q_s0.n1, n2=q_s0.n2, d=q_s0.d)


def estimate_rs(x, y, s: int, eps: float) -> QEstimate:
    """Log-based pseudodistance of integer order s >= 2.

    Each component estimate is floored at 1/(n1+n2) before the logarithm, the
    same truncation used by the entropy estimator.
    """
    if int(s) != s or s < 2:
        raise ValueError(f"order s must be an integer >= 2, got {s}")
    s = int(s)
    q_s0 = estimate_q_tilde(x, y, (s, 0), eps)
    q_s11 = estimate_q_tilde(x, y, (s - 1, 1), eps)
    q_0s = estimate_q_tilde(x, y, (0, s), eps)
    n = q_s0.n1 + q_s0.n2
    floor = 1.0 / n
    value = (
        math.log(max(q_s0.value, floor)) / s
        - math.log(max(q_s11.value, floor)) / (s - 1)
        + math.log(max(q_0s.value, floor)) / (s * (s - 1))
    )
    return QEstimate(value=value, order=("rs", s), epsilon=float(eps),
                     n1=q_s0.n1, n2=q_s0.n2, d=q_s0.d)


def estimate_entropy_h(x, y, k, eps: float) -> QEstimate:
    """Truncated-log entropy estimate: log(max(q-estimate, 1/n)) / (1 - k)."""
    k = _check_order(k)
    est = estimate_q_tilde(x, y, k, eps)
    n = est.n1 + est.n2
    ktot = k.k1 + k.k2
    value = math.log(max(est.value, 1.0 / n)) / (1 - ktot)
    return QEstimate(value=value, order=k, epsilon=float(eps),
                     n1=est.n1, n2=est.n2, d=est.d)
