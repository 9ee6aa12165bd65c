import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from annealed_potts.errors import NoSignChange, NonConvergence
from annealed_potts.quadrature import integrate, quad
from annealed_potts.roots import bisect, newton_bracketed


def test_polynomial_exact():
    # 15-point Kronrod is exact through degree 22
    assert quad(lambda x: x ** 22, 0.0, 1.0) == pytest.approx(1 / 23, rel=1e-15)


def test_endpoint_singularity():
    assert quad(lambda x: x ** -0.5, 0.0, 1.0, rel_tol=1e-12) == pytest.approx(2.0, rel=1e-11)


def test_stacked_integrands_share_partition():
    res = integrate(lambda x: np.vstack([np.sin(x), np.cos(x)]), [0.0, math.pi], rel_tol=1e-12)
    assert res.value == pytest.approx([2.0, 0.0], abs=1e-12)


def test_fixed_rule_reproduces_integral():
    res = integrate(np.exp, [0.0, 3.0], rel_tol=1e-13)
    nodes, wts = res.rule()
    assert float(np.exp(nodes) @ wts) == pytest.approx(math.expm1(3.0), rel=1e-13)


def test_budget_exhaustion():
    with pytest.raises(NonConvergence):
        integrate(lambda x: np.sign(np.sin(1.0 / x)) / x, [1e-12, 1.0], rel_tol=1e-14,
                  max_intervals=200)


def test_bad_breakpoints():
    with pytest.raises(ValueError):
        integrate(np.exp, [1.0, 0.0])


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 10.0))
def test_newton_matches_bisection(c):
    f = lambda x: x ** 3 - c
    r1 = newton_bracketed(f, lambda x: 3 * x * x, 0.0, 3.0, xtol=1e-14)
    r2 = bisect(f, 0.0, 3.0, xtol=1e-14)
    assert r1 == pytest.approx(c ** (1 / 3), abs=1e-12)
    assert r2 == pytest.approx(c ** (1 / 3), abs=1e-12)


def test_newton_survives_flat_derivative():
    # Newton from the midpoint would jump far outside the bracket
    root = newton_bracketed(math.atan, lambda x: 1 / (1 + x * x), -2.0, 40.0, xtol=1e-14)
    assert abs(root) < 1e-12


def test_no_sign_change():
    with pytest.raises(NoSignChange):
        bisect(lambda x: x * x + 1, -1.0, 1.0)
