"""Standard-normal CDF/quantile, one-sample KS test, and sample summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation for the normal quantile (used as the
# starting point; Newton steps on the CDF polish it to near machine accuracy)
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)


def normal_cdf(z: float) -> float:
    if not math.isfinite(z):
        raise ValueError(f"argument must be finite, got {z}")
    return 0.5 * math.erfc(-z / _SQRT2)


def _acklam(p: float) -> float:
    p_low, p_high = 0.02425, 1 - 0.02425
    if p < p_low:
        q = math.sqrt(-2 * math.log(p))
        return ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
                / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1))
    if p > p_high:
        q = math.sqrt(-2 * math.log(1 - p))
        return -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
                 / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1))
    q = p - 0.5
    r = q * q
    return ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
            / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1))


def normal_quantile(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must be in (0, 1), got {p}")
    z = _acklam(p)
    for _ in range(2):  # safeguarded Newton on the CDF
        err = normal_cdf(z) - p
        pdf = math.exp(-0.5 * z * z) / _SQRT2PI
        if pdf <= 0.0:
            break
        step = err / pdf
        step = max(min(step, 1.0), -1.0)
        z -= step
    return z


@dataclass(frozen=True)
class KsReport:
    statistic: float
    p_value: float
    sample_size: int


def _kolmogorov_sf(t: float) -> float:
    """Asymptotic Kolmogorov tail 2 * sum (-1)^(k-1) exp(-2 k^2 t^2)."""
    if t <= 0.0:
        return 1.0
    total = 0.0
    sign = 1.0
    for k in range(1, 1001):
        term = math.exp(-2.0 * k * k * t * t)
        if term < 1e-12:
            break
        total += sign * term
        sign = -sign
    return min(max(2.0 * total, 0.0), 1.0)


def ks_test_standard_normal(values) -> KsReport:
    """One-sample Kolmogorov-Smirnov test against N(0, 1).

    The p-value uses the asymptotic distribution with the usual small-sample
    correction factor sqrt(N) + 0.12 + 0.11/sqrt(N).
    """
    x = np.sort(np.asarray(values, dtype=np.float64).ravel())
    n = x.size
    if n == 0:
        raise ValueError("KS test needs a non-empty sample")
    cdf = 0.5 * np.array([math.erfc(-v / _SQRT2) for v in x])
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf - (i - 1) / n)
    d = float(max(d_plus, d_minus))
    sn = math.sqrt(n)
    t = (sn + 0.12 + 0.11 / sn) * d
    return KsReport(statistic=d, p_value=_kolmogorov_sf(t), sample_size=n)


@dataclass(frozen=True)
class Summary:
    mean: float
    variance: float
    minimum: float
    maximum: float
    quantiles: dict = field(default_factory=dict)


def summarize(values, probs=(0.05, 0.25, 0.5, 0.75, 0.95)) -> Summary:
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("cannot summarize an empty sample")
    variance = float(np.var(x, ddof=1)) if x.size > 1 else 0.0
    qs = np.quantile(x, probs)  # linear interpolation
    return Summary(
        mean=float(np.mean(x)),
        variance=variance,
        minimum=float(x.min()),
        maximum=float(x.max()),
        quantiles={float(p): float(q) for p, q in zip(probs, qs)},
    )
