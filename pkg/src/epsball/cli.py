"""Command-line interface: estimation, divergence, entropy, testing,
simulation, and bandwidth schedules, with JSON (or CSV) reports on stdout.

Exit codes: 0 success, 2 usage error, 3 data error, 4 degenerate statistics.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import harness, sampling
from .functionals import (
    estimate_d2,
    estimate_ds,
    estimate_entropy_h,
    estimate_q_tilde,
    estimate_rs,
)
from .inference import (
    D2_COEFFS,
    DegenerateVarianceError,
    ScheduleSpec,
    confidence_interval,
    entropy_interval,
    epsilon_schedule,
    one_sample_plugins,
    two_sample_test,
    variance_plugins,
)
from .functionals import QuadraticCoefficients

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_DEGENERATE = 4


class CsvParseError(ValueError):
    """Raised on malformed CSV input; carries the offending line number."""


def ingest_csv(path) -> np.ndarray:
    """Read observations (rows) of coordinates (columns) from a CSV file.

    A single non-numeric first row is treated as a header and skipped.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [(i + 1, r) for i, r in enumerate(rows) if any(c.strip() for c in r)]
    if not rows:
        return np.empty((0, 1))
    start = 0
    first = rows[0][1]
    if not all(_is_number(c) for c in first):
        start = 1
    data = []
    width = None
    for lineno, row in rows[start:]:
        vals = []
        for cell in row:
            if not _is_number(cell):
                raise CsvParseError(f"line {lineno}: non-numeric cell {cell.strip()!r}")
            vals.append(float(cell))
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise CsvParseError(
                f"line {lineno}: expected {width} columns, got {len(vals)}")
        data.append(vals)
    if not data:
        return np.empty((0, 1))
    return np.asarray(data, dtype=np.float64)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _add_data_args(p, require_y=False):
    p.add_argument("--x", metavar="FILE", help="CSV file with the first sample")
    p.add_argument("--y", metavar="FILE", help="CSV file with the second sample")
    p.add_argument("--spec-x", metavar="SPEC",
                   help="synthetic distribution, e.g. 'n(0,1)*3' or 'u(0,1)'")
    p.add_argument("--spec-y", metavar="SPEC")
    p.add_argument("--n1", type=int, help="sample size when drawing from --spec-x")
    p.add_argument("--n2", type=int, help="sample size when drawing from --spec-y")
    p.add_argument("--seed", type=int, default=0)
    p.required_y = require_y


def _add_bandwidth_args(p):
    p.add_argument("--epsilon", type=float, help="estimation radius")
    p.add_argument("--epsilon0", type=float,
                   help="pilot radius for variance plug-ins (default: epsilon)")
    p.add_argument("--schedule", choices=("smooth", "alpha", "gamma", "agnostic"),
                   help="derive epsilon from a rate schedule instead")
    p.add_argument("--c", type=float, default=1.0, help="schedule constant")
    p.add_argument("--alpha", type=float, help="smoothness for the alpha schedule")
    p.add_argument("--gamma", type=float, help="parameter for the gamma schedule")


def _load_sample(args, which: str, parser):
    path = getattr(args, which)
    spec_text = getattr(args, f"spec_{which}")
    if path and spec_text:
        parser.error(f"give either --{which} or --spec-{which}, not both")
    if path:
        return ingest_csv(path)
    if spec_text:
        n = args.n1 if which == "x" else args.n2
        if n is None:
            parser.error(f"--spec-{which} requires --n{1 if which == 'x' else 2}")
        spec = sampling.parse_spec(spec_text)
        seed = np.random.SeedSequence([args.seed, 0 if which == "x" else 1])
        return sampling.draw(spec, n, seed)
    return None


def _resolve_epsilon(args, parser, n, d):
    if args.schedule:
        spec = ScheduleSpec(mode=args.schedule, c=args.c, alpha=args.alpha,
                            gamma_param=args.gamma)
        return epsilon_schedule(spec, n, d)
    if args.epsilon is None:
        parser.error("--epsilon (or --schedule) is required")
    return args.epsilon


def _parse_ints(text, count, name):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != count:
        raise ValueError(f"{name} needs {count} comma-separated values, got {text!r}")
    return tuple(int(p) for p in parts)


def _parse_floats(text, count, name):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != count:
        raise ValueError(f"{name} needs {count} comma-separated values, got {text!r}")
    return tuple(float(p) for p in parts)


def _metadata(args, eps, eps0, n1, n2, d, level=None):
    return {
        "epsilon": eps, "epsilon0": eps0, "n1": n1, "n2": n2, "d": d,
        "seed": getattr(args, "seed", None), "level": level,
    }


def _interval_dict(ci):
    return {"lo": ci.lo, "hi": ci.hi, "degenerate": ci.degenerate}


def _emit(args, payload) -> None:
    if getattr(args, "format", "json") == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(["key", "value"])
        _emit_flat(writer, payload, "")
    else:
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")


def _emit_flat(writer, obj, prefix):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _emit_flat(writer, v, f"{prefix}{k}." if isinstance(v, dict) else f"{prefix}{k}")
    elif isinstance(obj, (list, tuple)):
        writer.writerow([prefix.rstrip("."), json.dumps(obj)])
    else:
        writer.writerow([prefix.rstrip("."), obj])


def _cmd_estimate(args, parser) -> dict:
    x = _load_sample(args, "x", parser)
    y = _load_sample(args, "y", parser)
    if x is None:
        parser.error("--x or --spec-x is required")
    k = _parse_ints(args.k, 2, "--k")
    n1 = x.shape[0]
    n2 = y.shape[0] if y is not None else 0
    d = x.shape[1]
    eps = _resolve_epsilon(args, parser, max(n1 + n2, 2), d)
    eps0 = args.epsilon0 if args.epsilon0 is not None else eps
    est = estimate_q_tilde(x, y, k, eps)
    result = {"k": list(k), "value": est.value}
    if sum(k) == 2:
        a = QuadraticCoefficients(float(k == (2, 0)), float(k == (1, 1)),
                                  float(k == (0, 2)))
        if y is not None and y.shape[0] >= 3 and n1 >= 3:
            plugins = variance_plugins(x, y, a, eps, eps0)
            n_tot = n1 + n2
        elif y is None and k == (2, 0) and n1 >= 3:
            plugins = one_sample_plugins(x, eps, eps0)
            n_tot = n1
        else:
            plugins = None
        if plugins is not None:
            ci = confidence_interval(est.value, plugins.w2_n, n_tot, args.level)
            result.update(zeta_n=plugins.zeta_n, v2_n=plugins.v2_n,
                          w2_n=plugins.w2_n, interval=_interval_dict(ci))
    return {"command": "estimate",
            "metadata": _metadata(args, eps, eps0, n1, n2, d, args.level),
            "result": result}


def _cmd_divergence(args, parser) -> dict:
    x = _load_sample(args, "x", parser)
    y = _load_sample(args, "y", parser)
    if x is None or y is None:
        parser.error("divergence needs both samples")
    n1, n2, d = x.shape[0], y.shape[0], x.shape[1]
    eps = _resolve_epsilon(args, parser, n1 + n2, d)
    eps0 = args.epsilon0 if args.epsilon0 is not None else eps
    if args.kind == "rs":
        est = estimate_rs(x, y, args.s, eps)
        result = {"kind": "rs", "s": args.s, "value": est.value}
    else:
        est = estimate_ds(x, y, args.s, eps)
        result = {"kind": "ds", "s": args.s, "value": est.value}
        if args.s == 2 and n1 >= 3 and n2 >= 3:
            plugins = variance_plugins(x, y, D2_COEFFS, eps, eps0)
            ci = confidence_interval(est.value, plugins.w2_n, n1 + n2, args.level)
            result.update(zeta_n=plugins.zeta_n, v2_n=plugins.v2_n,
                          w2_n=plugins.w2_n, interval=_interval_dict(ci))
    return {"command": "divergence",
            "metadata": _metadata(args, eps, eps0, n1, n2, d, args.level),
            "result": result}


def _cmd_entropy(args, parser) -> dict:
    x = _load_sample(args, "x", parser)
    y = _load_sample(args, "y", parser)
    if x is None:
        parser.error("--x or --spec-x is required")
    k = _parse_ints(args.k, 2, "--k")
    n1 = x.shape[0]
    n2 = y.shape[0] if y is not None else 0
    d = x.shape[1]
    eps = _resolve_epsilon(args, parser, max(n1 + n2, 2), d)
    eps0 = args.epsilon0 if args.epsilon0 is not None else eps
    h_est = estimate_entropy_h(x, y, k, eps)
    q_est = estimate_q_tilde(x, y, k, eps)
    result = {"k": list(k), "value": h_est.value, "q_tilde": q_est.value}
    if sum(k) == 2 and q_est.value > 0:
        a = QuadraticCoefficients(float(k == (2, 0)), float(k == (1, 1)),
                                  float(k == (0, 2)))
        if y is not None and n1 >= 3 and n2 >= 3:
            plugins = variance_plugins(x, y, a, eps, eps0)
            n_tot = n1 + n2
        elif y is None and k == (2, 0) and n1 >= 3:
            plugins = one_sample_plugins(x, eps, eps0)
            n_tot = n1
        else:
            plugins = None
        if plugins is not None:
            ci = entropy_interval(h_est.value, q_est.value, plugins.w2_n,
                                  n_tot, args.level)
            result.update(w2_n=plugins.w2_n, interval=_interval_dict(ci))
    return {"command": "entropy",
            "metadata": _metadata(args, eps, eps0, n1, n2, d, args.level),
            "result": result}


def _cmd_test(args, parser) -> dict:
    x = _load_sample(args, "x", parser)
    y = _load_sample(args, "y", parser)
    if x is None or y is None:
        parser.error("test needs both samples")
    n1, n2, d = x.shape[0], y.shape[0], x.shape[1]
    eps = _resolve_epsilon(args, parser, n1 + n2, d)
    eps0 = args.epsilon0 if args.epsilon0 is not None else eps
    report = two_sample_test(x, y, eps, eps0, args.level)
    return {"command": "test",
            "metadata": _metadata(args, eps, eps0, n1, n2, d, args.level),
            "result": {"statistic": report.statistic, "p_value": report.p_value,
                       "reject": report.reject, "d2_hat": report.d2_hat}}


def _cmd_simulate(args, parser):
    if not args.spec_x:
        parser.error("simulate needs --spec-x")
    spec_x = sampling.parse_spec(args.spec_x)
    spec_y = sampling.parse_spec(args.spec_y) if args.spec_y else None
    if args.n1 is None:
        parser.error("simulate needs --n1")
    n2 = args.n2 if args.n2 is not None else (args.n1 if spec_y is not None else 0)
    if args.schedule:
        epsilon = ScheduleSpec(mode=args.schedule, c=args.c, alpha=args.alpha,
                               gamma_param=args.gamma)
    elif args.epsilon is not None:
        epsilon = args.epsilon
    else:
        parser.error("--epsilon (or --schedule) is required")
    k = _parse_ints(args.k, 2, "--k") if args.k else None
    a = _parse_floats(args.a, 3, "--a") if args.a else None
    cfg = harness.ExperimentConfig(
        spec_x=spec_x, spec_y=spec_y, n1=args.n1, n2=n2, epsilon=epsilon,
        epsilon0=args.epsilon0, n_sim=args.nsim, seed=args.seed,
        target=args.target, k=k, a=a)
    if args.mode == "coverage":
        report = harness.run_coverage(cfg, args.level)
    elif args.mode == "calibration":
        report = harness.run_test_calibration(cfg, args.level)
    else:
        report = harness.run_residuals(cfg)
    if args.format == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(["residual"])
        for r in report.residuals:
            writer.writerow([repr(r)])
        return None
    body = report.to_json_dict()
    return {"command": "simulate",
            "metadata": _metadata(args, report.epsilon, report.epsilon0,
                                  args.n1, n2, spec_x.d, args.level),
            "result": body}


def _cmd_schedule(args, parser) -> dict:
    spec = ScheduleSpec(mode=args.mode, c=args.c, alpha=args.alpha,
                        gamma_param=args.gamma)
    eps = epsilon_schedule(spec, args.n, args.d)
    return {"command": "schedule",
            "metadata": {"epsilon": eps, "epsilon0": None, "n1": args.n, "n2": None,
                         "d": args.d, "seed": None, "level": None},
            "result": {"mode": args.mode, "epsilon": eps, "n": args.n, "d": args.d,
                       "c": args.c}}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epsball",
        description="Close-pair U-statistic estimation of entropy-type functionals")
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="estimate an integrated-power functional")
    _add_data_args(p_est)
    _add_bandwidth_args(p_est)
    p_est.add_argument("--k", required=True, help="order, e.g. 2,0")
    p_est.add_argument("--level", type=float, default=0.95)
    p_est.add_argument("--format", choices=("json", "csv"), default="json")

    p_div = sub.add_parser("divergence", help="density power divergence estimate")
    _add_data_args(p_div)
    _add_bandwidth_args(p_div)
    p_div.add_argument("--s", type=int, default=2)
    p_div.add_argument("--kind", choices=("ds", "rs"), default="ds")
    p_div.add_argument("--level", type=float, default=0.95)
    p_div.add_argument("--format", choices=("json", "csv"), default="json")

    p_ent = sub.add_parser("entropy", help="truncated-log entropy estimate")
    _add_data_args(p_ent)
    _add_bandwidth_args(p_ent)
    p_ent.add_argument("--k", required=True, help="order, e.g. 2,0 or 1,1")
    p_ent.add_argument("--level", type=float, default=0.95)
    p_ent.add_argument("--format", choices=("json", "csv"), default="json")

    p_test = sub.add_parser("test", help="two-sample test of equal densities")
    _add_data_args(p_test)
    _add_bandwidth_args(p_test)
    p_test.add_argument("--level", type=float, default=0.05)
    p_test.add_argument("--format", choices=("json", "csv"), default="json")

    p_sim = sub.add_parser("simulate", help="Monte Carlo experiments")
    _add_data_args(p_sim)
    _add_bandwidth_args(p_sim)
    p_sim.add_argument("--target", choices=harness.TARGETS, default="d2")
    p_sim.add_argument("--mode", choices=("residuals", "coverage", "calibration"),
                       default="residuals")
    p_sim.add_argument("--k", help="order for q/entropy targets, e.g. 1,1")
    p_sim.add_argument("--a", help="quadratic coefficients, e.g. 1,-2,1")
    p_sim.add_argument("--nsim", type=int, default=100)
    p_sim.add_argument("--level", type=float, default=0.95)
    p_sim.add_argument("--format", choices=("json", "csv"), default="json")

    p_sch = sub.add_parser("schedule", help="bandwidth from a rate schedule")
    p_sch.add_argument("--mode", required=True,
                       choices=("smooth", "alpha", "gamma", "agnostic"))
    p_sch.add_argument("--c", type=float, default=1.0)
    p_sch.add_argument("--alpha", type=float)
    p_sch.add_argument("--gamma", type=float)
    p_sch.add_argument("--n", type=int, required=True)
    p_sch.add_argument("--d", type=int, required=True)
    p_sch.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


_COMMANDS = {
    "estimate": _cmd_estimate,
    "divergence": _cmd_divergence,
    "entropy": _cmd_entropy,
    "test": _cmd_test,
    "simulate": _cmd_simulate,
    "schedule": _cmd_schedule,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload = _COMMANDS[args.command](args, parser)
    except CsvParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DegenerateVarianceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if payload is not None:
        _emit(args, payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())
