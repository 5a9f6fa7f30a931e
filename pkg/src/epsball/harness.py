"""Monte Carlo experiment driver: residual normality, interval coverage,
test calibration/power, and empirical bias order.

Replications are independent: each gets its own child of the root seed
sequence, so splitting across worker processes (EPSBALL_WORKERS) reproduces
the serial results exactly. Replications whose variance plug-in degenerates
to zero are excluded and counted.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import sampling
from .functionals import (
    D2_COEFFS,
    FunctionalOrder,
    QuadraticCoefficients,
    estimate_entropy_h,
    estimate_q_tilde,
    estimate_quadratic,
)
from .inference import (
    DegenerateVarianceError,
    ScheduleSpec,
    confidence_interval,
    entropy_interval,
    epsilon_schedule,
    one_sample_plugins,
    two_sample_test,
    variance_plugins,
)
from .stats_util import KsReport, ks_test_standard_normal, normal_quantile

TARGETS = ("q", "quadratic", "d2", "entropy", "variability", "test")


@dataclass(frozen=True)
class ExperimentConfig:
    spec_x: sampling.DistributionSpec
    spec_y: sampling.DistributionSpec | None
    n1: int
    n2: int
    epsilon: float | ScheduleSpec
    epsilon0: float | None = None
    n_sim: int = 100
    seed: int = 0
    target: str = "d2"
    k: tuple | None = None
    a: tuple | None = None


@dataclass
class ExperimentReport:
    target: str
    n_sim: int
    n_excluded: int
    epsilon: float
    epsilon0: float
    seed: int
    truth: float | None = None
    residuals: list = field(default_factory=list)
    estimates: list = field(default_factory=list)
    ks: KsReport | None = None
    mean: float | None = None
    variance: float | None = None
    coverage: float | None = None
    rejection_rate: float | None = None

    def to_json_dict(self) -> dict:
        out = asdict(self)
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_json_dict(), **kwargs)

    def residuals_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["residual"])
            for r in self.residuals:
                writer.writerow([repr(r)])

    def histogram_table(self, bins: int = 30):
        """(edges, counts) for the residual histogram."""
        counts, edges = np.histogram(np.asarray(self.residuals), bins=bins)
        return edges.tolist(), counts.tolist()

    def qq_table(self):
        """(theoretical, empirical) standard-normal quantile pairs."""
        emp = np.sort(np.asarray(self.residuals))
        n = emp.size
        theo = [normal_quantile((i - 0.5) / n) for i in range(1, n + 1)]
        return theo, emp.tolist()

    def histogram_to_csv(self, path, bins: int = 30) -> None:
        edges, counts = self.histogram_table(bins)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bin_lo", "bin_hi", "count"])
            for lo, hi, c in zip(edges[:-1], edges[1:], counts):
                writer.writerow([repr(lo), repr(hi), c])

    def qq_to_csv(self, path) -> None:
        theo, emp = self.qq_table()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theoretical", "empirical"])
            for t, e in zip(theo, emp):
                writer.writerow([repr(t), repr(e)])


def _coefficients(cfg: ExperimentConfig) -> QuadraticCoefficients:
    """Quadratic coefficients matching the configured target."""
    if cfg.target in ("d2", "test"):
        return D2_COEFFS
    if cfg.target == "quadratic":
        return QuadraticCoefficients(*(float(v) for v in cfg.a))
    if cfg.target == "variability":
        return QuadraticCoefficients(0.0, 1.0, 0.0)
    k = FunctionalOrder(*cfg.k)
    if k.k1 + k.k2 != 2:
        raise ValueError(
            f"normality-based experiments need an order-2 target, got {tuple(k)}")
    return QuadraticCoefficients(float(k == (2, 0)), float(k == (1, 1)),
                                 float(k == (0, 2)))


def _entropy_order(cfg: ExperimentConfig) -> FunctionalOrder:
    if cfg.target == "variability":
        return FunctionalOrder(1, 1)
    k = FunctionalOrder(*cfg.k)
    if k.k1 + k.k2 != 2:
        raise ValueError(f"entropy pivot needs k1 + k2 = 2, got {tuple(k)}")
    return k


def resolve_epsilon(cfg: ExperimentConfig) -> float:
    if isinstance(cfg.epsilon, ScheduleSpec):
        d = cfg.spec_x.d
        n = cfg.n1 + (cfg.n2 if cfg.spec_y is not None else 0)
        return epsilon_schedule(cfg.epsilon, n, d)
    return float(cfg.epsilon)


def _truth(cfg: ExperimentConfig) -> float:
    if cfg.target in ("d2", "test"):
        return sampling.true_d2(cfg.spec_x, cfg.spec_y)
    if cfg.target == "quadratic":
        return sampling.true_quadratic(cfg.spec_x, cfg.spec_y, cfg.a)
    if cfg.target in ("entropy", "variability"):
        return sampling.true_entropy(cfg.spec_x, cfg.spec_y, _entropy_order(cfg))
    return sampling.true_q(cfg.spec_x, cfg.spec_y, cfg.k)


def _one_sample(cfg: ExperimentConfig) -> bool:
    return cfg.spec_y is None


def _draw_pair(cfg: ExperimentConfig, seedseq):
    children = seedseq.spawn(2)
    x = sampling.draw(cfg.spec_x, cfg.n1, children[0])
    if _one_sample(cfg):
        return x, None
    return x, sampling.draw(cfg.spec_y, cfg.n2, children[1])


def _rep_residual(task):
    cfg, eps, eps0, truth, seedseq = task
    x, y = _draw_pair(cfg, seedseq)
    n = cfg.n1 if y is None else cfg.n1 + cfg.n2
    try:
        if _one_sample(cfg):
            plugins = one_sample_plugins(x, eps, eps0)
        else:
            plugins = variance_plugins(x, y, _coefficients(cfg), eps, eps0)
    except DegenerateVarianceError:
        return None
    if plugins.w2_n <= 0.0:
        return None
    w = math.sqrt(plugins.w2_n)
    if cfg.target in ("entropy", "variability"):
        k = _entropy_order(cfg)
        q_est = estimate_q_tilde(x, y, k, eps)
        h_est = estimate_entropy_h(x, y, k, eps)
        resid = math.sqrt(n) * q_est.value * (h_est.value - truth) / w
        return resid, h_est.value
    if _one_sample(cfg):
        est = estimate_q_tilde(x, None, (2, 0), eps)
    else:
        est = estimate_quadratic(x, y, _coefficients(cfg), eps)
    resid = math.sqrt(n) * (est.value - truth) / w
    return resid, est.value


def _rep_coverage(task):
    cfg, eps, eps0, truth, level, seedseq = task
    x, y = _draw_pair(cfg, seedseq)
    n = cfg.n1 if y is None else cfg.n1 + cfg.n2
    try:
        if _one_sample(cfg):
            plugins = one_sample_plugins(x, eps, eps0)
        else:
            plugins = variance_plugins(x, y, _coefficients(cfg), eps, eps0)
    except DegenerateVarianceError:
        return None
    if plugins.w2_n <= 0.0:
        return None
    if cfg.target in ("entropy", "variability"):
        k = _entropy_order(cfg)
        q_est = estimate_q_tilde(x, y, k, eps)
        h_est = estimate_entropy_h(x, y, k, eps)
        if q_est.value <= 0.0:
            return None
        ci = entropy_interval(h_est.value, q_est.value, plugins.w2_n, n, level)
        return ci.lo <= truth <= ci.hi, h_est.value
    if _one_sample(cfg):
        est = estimate_q_tilde(x, None, (2, 0), eps)
    else:
        est = estimate_quadratic(x, y, _coefficients(cfg), eps)
    ci = confidence_interval(est.value, plugins.w2_n, n, level)
    return ci.lo <= truth <= ci.hi, est.value


def _rep_test(task):
    cfg, eps, eps0, level, seedseq = task
    x, y = _draw_pair(cfg, seedseq)
    try:
        report = two_sample_test(x, y, eps, eps0, level)
    except DegenerateVarianceError:
        return None
    return report.reject, report.d2_hat


def _map_reps(fn, tasks):
    workers = int(os.environ.get("EPSBALL_WORKERS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    return [fn(t) for t in tasks]


def run_residuals(cfg: ExperimentConfig) -> ExperimentReport:
    """Normalized residuals across replications plus a KS normality check."""
    if cfg.n_sim < 1:
        raise ValueError(f"n_sim must be >= 1, got {cfg.n_sim}")
    eps = resolve_epsilon(cfg)
    eps0 = eps if cfg.epsilon0 is None else float(cfg.epsilon0)
    truth = _truth(cfg)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_sim)
    results = _map_reps(_rep_residual, [(cfg, eps, eps0, truth, s) for s in seeds])
    kept = [r for r in results if r is not None]
    residuals = [r[0] for r in kept]
    estimates = [r[1] for r in kept]
    report = ExperimentReport(
        target=cfg.target, n_sim=cfg.n_sim, n_excluded=cfg.n_sim - len(kept),
        epsilon=eps, epsilon0=eps0, seed=cfg.seed, truth=truth,
        residuals=residuals, estimates=estimates,
    )
    if residuals:
        report.ks = ks_test_standard_normal(residuals)
        report.mean = float(np.mean(estimates))
        report.variance = float(np.var(estimates, ddof=1)) if len(estimates) > 1 else 0.0
    return report


def run_coverage(cfg: ExperimentConfig, level: float = 0.95) -> ExperimentReport:
    """Fraction of replications whose confidence interval covers the truth."""
    eps = resolve_epsilon(cfg)
    eps0 = eps if cfg.epsilon0 is None else float(cfg.epsilon0)
    truth = _truth(cfg)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_sim)
    results = _map_reps(_rep_coverage,
                        [(cfg, eps, eps0, truth, level, s) for s in seeds])
    kept = [r for r in results if r is not None]
    covered = [r[0] for r in kept]
    estimates = [r[1] for r in kept]
    report = ExperimentReport(
        target=cfg.target, n_sim=cfg.n_sim, n_excluded=cfg.n_sim - len(kept),
        epsilon=eps, epsilon0=eps0, seed=cfg.seed, truth=truth,
        estimates=estimates,
    )
    if kept:
        report.coverage = float(np.mean(covered))
        report.mean = float(np.mean(estimates))
        report.variance = float(np.var(estimates, ddof=1)) if len(estimates) > 1 else 0.0
    return report


def run_test_calibration(cfg: ExperimentConfig, level: float = 0.05) -> ExperimentReport:
    """Empirical rejection rate of the two-sample test."""
    if cfg.spec_y is None:
        raise ValueError("two-sample test experiments need spec_y")
    eps = resolve_epsilon(cfg)
    eps0 = eps if cfg.epsilon0 is None else float(cfg.epsilon0)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_sim)
    results = _map_reps(_rep_test, [(cfg, eps, eps0, level, s) for s in seeds])
    kept = [r for r in results if r is not None]
    rejects = [r[0] for r in kept]
    estimates = [r[1] for r in kept]
    report = ExperimentReport(
        target="test", n_sim=cfg.n_sim, n_excluded=cfg.n_sim - len(kept),
        epsilon=eps, epsilon0=eps0, seed=cfg.seed,
        truth=sampling.true_d2(cfg.spec_x, cfg.spec_y), estimates=estimates,
    )
    if kept:
        report.rejection_rate = float(np.mean(rejects))
        report.mean = float(np.mean(estimates))
        report.variance = float(np.var(estimates, ddof=1)) if len(estimates) > 1 else 0.0
    return report


@dataclass(frozen=True)
class BiasRow:
    epsilon: float
    mean_estimate: float
    bias: float
    mc_se: float


@dataclass(frozen=True)
class BiasReport:
    truth: float
    rows: tuple
    slope: float

    def to_json_dict(self) -> dict:
        return {"truth": self.truth, "slope": self.slope,
                "rows": [asdict(r) for r in self.rows]}


def _rep_bias(task):
    cfg, eps_list, seedseq = task
    x, y = _draw_pair(cfg, seedseq)
    vals = []
    for eps in eps_list:
        if _one_sample(cfg):
            vals.append(estimate_q_tilde(x, None, (2, 0), eps).value)
        else:
            vals.append(estimate_quadratic(x, y, _coefficients(cfg), eps).value)
    return vals


def run_bias_order(spec_x, spec_y, target, eps_list, n_large,
                   n_sim: int = 100, seed: int = 0, k=None, a=None) -> BiasReport:
    """Empirical |bias| versus bandwidth, with a log-log least-squares slope.

    The same replication samples are reused across the bandwidth grid; the
    estimator is unbiased at each fixed bandwidth, so the replication mean
    estimates the smoothing bias directly.
    """
    if len(eps_list) < 2:
        raise ValueError("need at least two bandwidths to fit a slope")
    n2 = n_large if spec_y is not None else 0
    cfg = ExperimentConfig(spec_x=spec_x, spec_y=spec_y, n1=n_large, n2=n2,
                           epsilon=float(eps_list[0]), n_sim=n_sim, seed=seed,
                           target=target, k=k, a=a)
    truth = _truth(cfg)
    seeds = np.random.SeedSequence(seed).spawn(n_sim)
    results = _map_reps(_rep_bias, [(cfg, list(eps_list), s) for s in seeds])
    mat = np.asarray(results)  # (n_sim, n_eps)
    rows = []
    for j, eps in enumerate(eps_list):
        mean_est = float(mat[:, j].mean())
        se = float(mat[:, j].std(ddof=1) / math.sqrt(n_sim))
        rows.append(BiasRow(epsilon=float(eps), mean_estimate=mean_est,
                            bias=mean_est - truth, mc_se=se))
    log_eps = np.log([r.epsilon for r in rows])
    log_bias = np.log([max(abs(r.bias), 1e-300) for r in rows])
    slope = float(np.polyfit(log_eps, log_bias, 1)[0])
    return BiasReport(truth=truth, rows=tuple(rows), slope=slope)
