"""Product-form synthetic distributions: seeded sampling and exact functionals.

A distribution is a product of independent one-dimensional marginals
(uniform, normal, or Student t), so every integrated density-power
functional factorizes across dimensions. Per-dimension integrals use closed
forms for uniform/normal combinations and adaptive quadrature when a
Student-t marginal is involved.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .stats_util import normal_cdf

_QUAD_TOL = 1e-10


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"uniform needs lo < hi, got ({self.lo}, {self.hi})")

    def pdf(self, x):
        return np.where((x >= self.lo) & (x < self.hi), 1.0 / (self.hi - self.lo), 0.0)

    def sample(self, rng, n):
        return rng.uniform(self.lo, self.hi, n)


@dataclass(frozen=True)
class Normal:
    mean: float
    sd: float

    def __post_init__(self):
        if not self.sd > 0:
            raise ValueError(f"normal needs sd > 0, got {self.sd}")

    def pdf(self, x):
        z = (np.asarray(x) - self.mean) / self.sd
        return np.exp(-0.5 * z * z) / (self.sd * math.sqrt(2 * math.pi))

    def sample(self, rng, n):
        return self.mean + self.sd * rng.standard_normal(n)


@dataclass(frozen=True)
class StudentT:
    df: int

    def __post_init__(self):
        if int(self.df) != self.df or self.df < 1:
            raise ValueError(f"student_t needs integer df >= 1, got {self.df}")

    def pdf(self, x):
        v = self.df
        c = math.gamma((v + 1) / 2) / (math.sqrt(v * math.pi) * math.gamma(v / 2))
        return c * (1.0 + np.asarray(x) ** 2 / v) ** (-(v + 1) / 2)

    def sample(self, rng, n):
        # normal / sqrt(chi2/df), both from the same stream
        z = rng.standard_normal(n)
        w = rng.chisquare(self.df, n)
        return z / np.sqrt(w / self.df)


@dataclass(frozen=True)
class DistributionSpec:
    marginals: tuple

    def __post_init__(self):
        if len(self.marginals) < 1:
            raise ValueError("need at least one marginal")
        object.__setattr__(self, "marginals", tuple(self.marginals))

    @property
    def d(self) -> int:
        return len(self.marginals)


_MARGINAL_RE = re.compile(
    r"^(u|uniform|n|normal|t|student_t)\(([^)]*)\)(?:\*(\d+))?$"
)


def parse_spec(text: str) -> DistributionSpec:
    """Parse e.g. 'u(0,1)', 'n(1,1)*3', 't(3)*3', 'u(0,1);n(0,2)'."""
    marginals = []
    for part in text.replace(" ", "").split(";"):
        m = _MARGINAL_RE.match(part)
        if not m:
            raise ValueError(f"cannot parse marginal spec {part!r}")
        name, args, reps = m.group(1), m.group(2), int(m.group(3) or 1)
        vals = [float(v) for v in args.split(",")] if args else []
        if name in ("u", "uniform"):
            marg = Uniform(*vals)
        elif name in ("n", "normal"):
            marg = Normal(*vals)
        else:
            marg = StudentT(int(vals[0]))
        marginals.extend([marg] * reps)
    return DistributionSpec(tuple(marginals))


def spec_to_str(spec: DistributionSpec) -> str:
    parts = []
    for m in spec.marginals:
        if isinstance(m, Uniform):
            parts.append(f"u({m.lo},{m.hi})")
        elif isinstance(m, Normal):
            parts.append(f"n({m.mean},{m.sd})")
        else:
            parts.append(f"t({m.df})")
    return ";".join(parts)


def draw(spec: DistributionSpec, n: int, seed) -> np.ndarray:
    """n i.i.d. draws as an (n, d) array; deterministic in (spec, n, seed)."""
    if n < 0:
        raise ValueError(f"sample size must be non-negative, got {n}")
    rng = np.random.default_rng(seed)
    cols = [m.sample(rng, n) for m in spec.marginals]
    return np.column_stack(cols) if cols else np.empty((n, 0))


def _power_integral_1d(mx, my, k1: int, k2: int) -> float:
    """Integral over the line of pdf(mx)^k1 * pdf(my)^k2."""
    if k1 == 0 and k2 == 0:
        return 1.0
    if k1 == 0:
        return _power_integral_1d(my, None, k2, 0)
    if k2 == 0:
        if isinstance(mx, Uniform):
            return (mx.hi - mx.lo) ** (1 - k1)
        if isinstance(mx, Normal):
            return _normal_power_integral(mx.mean, mx.sd, k1)
        return _quad_integral(mx, None, k1, 0)
    if isinstance(mx, StudentT) or isinstance(my, StudentT):
        return _quad_integral(mx, my, k1, k2)
    if isinstance(mx, Uniform) and isinstance(my, Uniform):
        lo = max(mx.lo, my.lo)
        hi = min(mx.hi, my.hi)
        overlap = max(0.0, hi - lo)
        return overlap / ((mx.hi - mx.lo) ** k1 * (my.hi - my.lo) ** k2)
    if isinstance(mx, Normal) and isinstance(my, Normal):
        return _two_normal_power_integral(mx, my, k1, k2)
    # one uniform, one normal
    if isinstance(mx, Normal):
        mx, my, k1, k2 = my, mx, k2, k1
    return _uniform_normal_power_integral(mx, my, k1, k2)


def _normal_power_integral(mu: float, sd: float, k: int) -> float:
    # integral of a normal pdf raised to the k-th power
    return (2 * math.pi) ** ((1 - k) / 2) * sd ** (1 - k) / math.sqrt(k)


def _two_normal_power_integral(mx: Normal, my: Normal, k1: int, k2: int) -> float:
    a1 = k1 / (2 * mx.sd**2)
    a2 = k2 / (2 * my.sd**2)
    coef = ((2 * math.pi) ** (-k1 / 2) * mx.sd ** (-k1)
            * (2 * math.pi) ** (-k2 / 2) * my.sd ** (-k2))
    cross = a1 * a2 * (mx.mean - my.mean) ** 2 / (a1 + a2)
    return coef * math.sqrt(math.pi / (a1 + a2)) * math.exp(-cross)


def _uniform_normal_power_integral(mu_: Uniform, mn: Normal, k1: int, k2: int) -> float:
    # pdf_normal^k2 is a scaled normal pdf with sd/sqrt(k2); integrate over
    # the uniform's support
    scale = ((2 * math.pi) ** ((1 - k2) / 2) * mn.sd ** (1 - k2) / math.sqrt(k2))
    s = mn.sd / math.sqrt(k2)
    mass = normal_cdf((mu_.hi - mn.mean) / s) - normal_cdf((mu_.lo - mn.mean) / s)
    return scale * mass / (mu_.hi - mu_.lo) ** k1


def _quad_integral(mx, my, k1: int, k2: int) -> float:
    def f(x):
        val = mx.pdf(x) ** k1
        if my is not None and k2:
            val = val * my.pdf(x) ** k2
        return val

    val, _ = integrate.quad(f, -np.inf, np.inf, epsabs=_QUAD_TOL, epsrel=_QUAD_TOL,
                            limit=400)
    return val


def true_q(spec_x: DistributionSpec, spec_y, k) -> float:
    """Exact integral of p_X^k1 * p_Y^k2 for product-form distributions."""
    k1, k2 = int(k[0]), int(k[1])
    if k1 + k2 < 2:
        raise ValueError(f"order must satisfy k1 + k2 >= 2, got {(k1, k2)}")
    if k2 > 0 and spec_y is None:
        raise ValueError("second distribution required when k2 > 0")
    if spec_y is not None and spec_y.d != spec_x.d:
        raise ValueError(f"dimension mismatch: {spec_x.d} vs {spec_y.d}")
    val = 1.0
    for j in range(spec_x.d):
        my = spec_y.marginals[j] if spec_y is not None else None
        val *= _power_integral_1d(spec_x.marginals[j], my, k1, k2)
    return val


def true_quadratic(spec_x, spec_y, a) -> float:
    a0, a1, a2 = (float(v) for v in a)
    val = 0.0
    if a0:
        val += a0 * true_q(spec_x, spec_y, (2, 0))
    if a1:
        val += a1 * true_q(spec_x, spec_y, (1, 1))
    if a2:
        val += a2 * true_q(spec_x, spec_y, (0, 2))
    return val


def true_d2(spec_x, spec_y) -> float:
    return true_quadratic(spec_x, spec_y, (1.0, -2.0, 1.0))


def true_entropy(spec_x, spec_y, k) -> float:
    """Exact value of log(q_k) / (1 - k); errors on q_k = 0."""
    k1, k2 = int(k[0]), int(k[1])
    q = true_q(spec_x, spec_y, (k1, k2))
    if q <= 0.0:
        raise ValueError("functional value is zero (disjoint supports); "
                         "entropy is not finite")
    return math.log(q) / (1 - (k1 + k2))
