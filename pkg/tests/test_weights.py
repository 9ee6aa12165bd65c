import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from annealed_potts import weights as wt
from annealed_potts.landscape import curvature_kernel

CLOSED_FORM = [
    wt.Dirac(5.0), wt.TwoAtom(1.0, 5.0, 0.3), wt.Pareto(5.0), wt.Pareto(4.5, 2.0),
    wt.Uniform(1.0, 2.0), wt.Uniform(0.0, 3.0), wt.Gamma(2.0, 1.0), wt.Gamma(0.5, 2.0),
    wt.LogNormal(0.0, 1.0), wt.LogNormal(0.3, 0.4), wt.Rayleigh(1.5),
]


def test_pareto_mean():
    assert wt.moment(wt.Pareto(5.0), 1) == pytest.approx(4 / 3, rel=1e-15)


def test_dirac_second_moment():
    assert wt.moment(wt.Dirac(5.0), 2) == 25.0


def test_pareto_divergent_moment():
    assert wt.moment(wt.Pareto(2.5), 2) == math.inf
    assert wt.moment(wt.Pareto(4.0), 3) == math.inf


def test_pareto_second_moment_against_quadrature():
    # independent route: scalar mpmath integral of w^2 against the density
    import mpmath as mp
    direct = mp.quad(lambda w: w ** 2 * 4 * w ** -5, [1, mp.inf])
    assert wt.moment(wt.Pareto(5.0), 2) == pytest.approx(2.0, rel=1e-15)
    assert float(direct) == pytest.approx(2.0, rel=1e-14)


def test_moment_order_checked():
    with pytest.raises(ValueError):
        wt.moment(wt.Dirac(1.0), 4)


@pytest.mark.parametrize("dist", CLOSED_FORM, ids=lambda d: d.spec())
@pytest.mark.parametrize("k", [1, 2, 3])
def test_expect_matches_moment(dist, k):
    m = wt.moment(dist, k)
    assert wt.expect(dist, lambda w: w ** k, 1e-10) == pytest.approx(m, rel=1e-8)


def test_pareto_identity_within_tolerance():
    tol = 1e-10
    assert abs(wt.expect(wt.Pareto(5.0), lambda w: w, tol) - 4 / 3) <= tol * (1 + 4 / 3)


def test_dirac_is_point_evaluation():
    assert wt.expect(wt.Dirac(2.5), np.sin, 1e-10) == math.sin(2.5)


def test_counterexample_cancellation():
    law = wt.TwoAtom(1.0, 5.0, 0.98158584)
    val = wt.expect(law, lambda w: w ** 3 * curvature_kernel(w, 7), 1e-12)
    assert abs(val) < 1e-8


def test_scalar_callable_accepted():
    assert wt.expect(wt.Uniform(0.0, 1.0), lambda w: math.exp(w), 1e-10) == pytest.approx(
        math.e - 1, rel=1e-10)


laws = st.one_of(
    st.builds(wt.Pareto, st.floats(4.5, 8.0), st.floats(0.5, 2.0)),
    st.builds(lambda a, d: wt.Uniform(a, a + d), st.floats(0.0, 2.0), st.floats(0.1, 3.0)),
    st.builds(wt.Gamma, st.floats(0.5, 4.0), st.floats(0.3, 2.0)),
    st.builds(wt.LogNormal, st.floats(-0.5, 0.5), st.floats(0.1, 0.8)),
    st.builds(wt.Rayleigh, st.floats(0.3, 2.0)),
)


@settings(max_examples=40, deadline=None)
@given(laws, st.lists(st.floats(-2, 2), min_size=4, max_size=4), st.floats(-3, 3))
def test_expect_linear(dist, coef, c):
    g1 = lambda w: coef[0] + coef[1] * w
    g2 = lambda w: coef[2] * np.exp(-w) + coef[3] * w * w
    lhs = wt.expect(dist, lambda w: g1(w) + c * g2(w), 1e-10)
    e1, e2 = wt.expect(dist, g1, 1e-10), wt.expect(dist, g2, 1e-10)
    bound = 2e-10 * (1 + abs(e1) + abs(c) * (1 + abs(e2)) + abs(lhs))
    assert abs(lhs - (e1 + c * e2)) <= bound


@settings(max_examples=40, deadline=None)
@given(st.one_of(laws, st.builds(wt.Dirac, st.floats(0.2, 5.0)),
                 st.builds(lambda x, c: wt.TwoAtom(x, 2 * x, c), st.floats(0.2, 3), st.floats(0.05, 0.95))),
       st.floats(0.2, 5.0))
def test_scale_map(dist, c):
    g = lambda w: np.exp(-w) * w
    lhs = wt.expect(dist.scaled(c), g, 1e-10)
    rhs = wt.expect(dist, lambda w: g(c * w), 1e-10)
    assert abs(lhs - rhs) <= 3e-10 * (1 + abs(rhs))


@pytest.mark.parametrize("text,expected", [
    ("dirac:lambda=5", wt.Dirac(5.0)),
    ("pareto:tau=5", wt.Pareto(5.0, 1.0)),
    ("pareto:tau=3.5,wmin=2", wt.Pareto(3.5, 2.0)),
    ("uniform:a=1,b=2", wt.Uniform(1.0, 2.0)),
    ("twoatom:x1=1,x2=5,c1=0.98158584", wt.TwoAtom(1.0, 5.0, 0.98158584)),
    ("gamma:k=2,theta=1", wt.Gamma(2.0, 1.0)),
    ("lognormal:mu=0,sigma=1", wt.LogNormal(0.0, 1.0)),
    ("rayleigh:sigma=1", wt.Rayleigh(1.0)),
])
def test_grammar(text, expected):
    parsed = wt.parse_distribution(text)
    assert parsed == expected
    assert wt.parse_distribution(parsed.spec()) == parsed


@pytest.mark.parametrize("text,key", [
    ("pareto:tau=5,foo=1", "foo"),
    ("pareto:tau=abc", "tau"),
    ("uniform:a=1", "b"),
    ("gamma:k=-1,theta=1", "k"),
    ("twoatom:x1=1,x2=5,c1=1.5", "c1"),
    ("pareto:tau=1.5", "tau"),
])
def test_grammar_errors_name_key(text, key):
    with pytest.raises(ValueError, match=key):
        wt.parse_distribution(text)


def test_unknown_family():
    with pytest.raises(ValueError, match="unknown distribution"):
        wt.parse_distribution("cauchy:x=1")


def test_invariants():
    with pytest.raises(ValueError):
        wt.TwoAtom(1.0, 5.0, 0.0)
    with pytest.raises(ValueError):
        wt.TwoAtom(5.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        wt.Pareto(2.0)
    assert wt.TwoAtom(1.0, 5.0, 0.25).c2 == 0.75
