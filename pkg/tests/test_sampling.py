import math

import numpy as np
import pytest
from scipy import integrate

from epsball import sampling
from epsball.sampling import (
    DistributionSpec,
    Normal,
    StudentT,
    Uniform,
    draw,
    parse_spec,
    true_d2,
    true_entropy,
    true_q,
)


def test_parse_spec_roundtrip():
    spec = parse_spec("t(3)*3")
    assert spec.d == 3
    assert all(isinstance(m, StudentT) for m in spec.marginals)
    spec = parse_spec("u(0,1);n(1,2)")
    assert isinstance(spec.marginals[0], Uniform)
    assert isinstance(spec.marginals[1], Normal)


def test_parse_spec_invalid():
    with pytest.raises(ValueError):
        parse_spec("weibull(1,2)")


def test_draw_deterministic_and_in_range():
    spec = parse_spec("u(0,1)")
    a = draw(spec, 5, 77)
    b = draw(spec, 5, 77)
    assert np.array_equal(a, b)
    assert ((a >= 0) & (a < 1)).all()


def test_draw_different_seeds_differ():
    spec = parse_spec("n(0,1)*2")
    assert not np.array_equal(draw(spec, 10, 1), draw(spec, 10, 2))


def test_draw_normal_means():
    x = draw(parse_spec("n(1,1)*3"), 1000, 123)
    assert np.all(np.abs(x.mean(axis=0) - 1.0) < 4 / math.sqrt(1000))


def test_draw_student_t_variance():
    x = draw(parse_spec("t(3)"), 100_000, 9)
    # Var(t_3) = 3; heavy tails make this noisy, allow a wide band
    assert 2.0 < x.var() < 4.5


def test_true_q_uniform_pair():
    q = true_q(parse_spec("u(0,1)"), parse_spec(f"u(0,{math.sqrt(2)})"), (1, 1))
    assert q == pytest.approx(1 / math.sqrt(2), abs=1e-12)


def test_true_q_gaussian_squared():
    q = true_q(parse_spec("n(0,1)*3"), None, (2, 0))
    assert q == pytest.approx((2 * math.sqrt(math.pi)) ** -3, rel=1e-10)


def test_true_d2_example_pair():
    d2 = true_d2(parse_spec("t(3)*3"), parse_spec("n(1,1)*3"))
    assert d2 == pytest.approx(0.018, abs=5e-4)  # two significant figures


def test_true_entropy_variability():
    h = true_entropy(parse_spec("u(0,1)"), parse_spec(f"u(0,{math.sqrt(2)})"), (1, 1))
    assert h == pytest.approx(math.log(2) / 2, abs=1e-12)


def test_true_entropy_uniform_self():
    spec = parse_spec("u(0,1)")
    assert true_entropy(spec, spec, (2, 0)) == pytest.approx(0.0, abs=1e-12)


def test_true_entropy_gaussian():
    h = true_entropy(parse_spec("n(0,1)"), None, (2, 0))
    assert h == pytest.approx(math.log(2 * math.sqrt(math.pi)), rel=1e-10)


def test_true_entropy_disjoint_supports():
    with pytest.raises(ValueError, match="disjoint"):
        true_entropy(parse_spec("u(0,1)"), parse_spec("u(2,3)"), (1, 1))


def test_factorization_matches_quadrature():
    # closed forms per dimension agree with direct numerical integration
    pairs = [
        (Uniform(0.0, 1.0), Normal(0.5, 0.3)),
        (Normal(0.0, 1.0), Normal(1.0, 2.0)),
        (Uniform(-1.0, 2.0), Uniform(0.0, 1.0)),
        (StudentT(3), Normal(1.0, 1.0)),
    ]
    for mx, my in pairs:
        for k1, k2 in [(2, 0), (1, 1), (2, 1), (0, 3)]:
            got = sampling._power_integral_1d(mx, my, k1, k2)
            ref, _ = integrate.quad(
                lambda t: float(mx.pdf(t)) ** k1 * float(my.pdf(t)) ** k2,
                -30, 30, limit=400)
            assert got == pytest.approx(ref, abs=1e-7), (mx, my, k1, k2)


def test_true_q_symmetric_definitions_agree():
    spec = parse_spec("n(0.3,1.2)*2")
    assert true_q(spec, spec, (1, 1)) == pytest.approx(true_q(spec, None, (2, 0)),
                                                       rel=1e-10)


def test_true_q_dimension_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        true_q(parse_spec("n(0,1)"), parse_spec("n(0,1)*2"), (1, 1))


def test_spec_validation():
    with pytest.raises(ValueError):
        Uniform(1.0, 0.0)
    with pytest.raises(ValueError):
        Normal(0.0, -1.0)
    with pytest.raises(ValueError):
        StudentT(0)
    with pytest.raises(ValueError):
        DistributionSpec(())
