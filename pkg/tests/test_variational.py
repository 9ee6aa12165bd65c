import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from annealed_potts import critical as cr
from annealed_potts import landscape as ls
from annealed_potts import variational as v
from annealed_potts.errors import TooLargeQ
from annealed_potts.weights import Dirac, Pareto, Uniform

ER7 = ls.PottsConfig(7, 0.0, Dirac(1.0))
ER7_BETA_C = math.log1p(12 / 5 * math.log(6))


def nearest_permutation_gap(y, target):
    return min(max(abs(a - b) for a, b in zip(y, p)) for p in itertools.permutations(target))


def test_er_below_critical():
    sol = v.solve(ER7, 0.9 * ER7_BETA_C)
    assert sol.s_star == 0.0
    assert sol.x1 == 1 / 7
    assert not sol.degenerate


def test_er_above_critical():
    eps = 1e-6
    sol = v.solve(ER7, ER7_BETA_C + eps)
    assert sol.s_star >= 5 / 6 - 1e-4
    assert sol.x1 > 1 / 7


def test_er_at_critical_is_degenerate():
    sol = v.solve(ls.PottsConfig(3, 0.0, Dirac(1.0)), math.log1p(4 * math.log(2)))
    assert sol.degenerate
    lo, hi = sol.branches
    assert lo == 0.0 and hi == pytest.approx(0.5, abs=1e-9)
    assert sol.s_star == hi


def test_pareto_colour_fraction():
    c = ls.PottsConfig(7, 0.0, Pareto(5.0))
    beta = 1.2 * cr.critical_point(c).beta_c
    sol = v.solve(c, beta)
    bp = math.expm1(beta)
    m = c.mean
    # direct form over the full colour vector
    y = sol.y_vector
    from annealed_potts.weights import expect
    direct = expect(c.dist, lambda w: 1 / (1 + 6 * np.exp(bp * (y[1] - y[0]) * w / m)))
    assert sol.x1 == pytest.approx(direct, rel=1e-9)
    assert sol.x1 > 1 / 7


def test_y_vector_shape():
    c = ls.PottsConfig(5, 0.0, Uniform(1.0, 3.0))
    y = v.y_vector(c, 0.3)
    assert sum(y) == pytest.approx(c.mean, rel=1e-14)
    assert y[0] == pytest.approx(c.mean / 5 * (1 + 4 * 0.3))
    assert all(yk == y[1] for yk in y[1:])


def test_colour_fractions_sum_to_one():
    c = ls.PottsConfig(4, 0.2, Pareto(5.0))
    beta = 1.0
    sol = v.solve(c, beta)
    bp = math.expm1(beta)
    y = sol.y_vector
    m = c.mean
    from annealed_potts.weights import expect

    def other(w):
        expo = bp * np.multiply.outer(y, w) / m + np.array([c.B, 0, 0, 0])[:, None]
        e = np.exp(expo - expo.max(axis=0))
        return e[1] / e.sum(axis=0)

    x_other = expect(c.dist, other)
    assert sol.x1 + 3 * x_other == pytest.approx(1.0, abs=1e-10)


CASES = [
    (ls.PottsConfig(7, 0.0, Dirac(1.0)), 1.5),
    (ls.PottsConfig(7, 0.0, Pareto(5.0)), 1.3),
    (ls.PottsConfig(3, 0.0, Uniform(1.0, 1.2)), 1.9),
    (ls.PottsConfig(7, 0.1, Dirac(1.0)), 1.7),
    (ls.PottsConfig(4, 0.05, Pareto(6.0)), 1.0),
]


@pytest.mark.parametrize("cfg,beta", CASES)
def test_output_is_stationary(cfg, beta):
    sol = v.solve(cfg, beta)
    d = ls.pressure_d1(cfg, beta, sol.s_star)
    if sol.s_star == 0.0:
        assert d <= 1e-8
    else:
        assert abs(d) <= 1e-8
    for s, p in sol.candidates:
        assert p <= sol.pressure + 1e-12


@pytest.mark.parametrize("cfg,beta", CASES)
def test_x1_bounds(cfg, beta):
    for b in (0.5 * beta, beta, 2 * beta):
        sol = v.solve(cfg, b)
        assert 1 / cfg.q <= sol.x1 < 1
        if sol.s_star == 0.0 and cfg.B == 0.0:
            assert sol.x1 == 1 / cfg.q


@settings(max_examples=25, deadline=None, derandomize=True)
@given(tau=st.floats(3.6, 8.0), q=st.integers(3, 9), B=st.sampled_from([0.0, 0.05, 0.2]),
       b1=st.floats(0.2, 3.0), b2=st.floats(0.2, 3.0))
def test_order_parameter_monotone(tau, q, B, b1, b2):
    c = ls.PottsConfig(q, B, Pareto(tau))
    if not v._zero_crossing_holds(c):
        return
    lo, hi = sorted((b1, b2))
    assert v.solve(c, lo).s_star <= v.solve(c, hi).s_star + 1e-12


def test_solve_rejects_nonpositive_beta():
    with pytest.raises(ValueError):
        v.solve(ER7, 0.0)


# ---------------------------------------------------------------- grid oracle

def test_grid_symmetric_point():
    c = ls.PottsConfig(3, 0.0, Dirac(1.0))
    g = v.grid_oracle(c, 0.3, 60)
    assert g.y_best == pytest.approx((1 / 3, 1 / 3, 1 / 3), abs=1e-12)
    assert g.value == pytest.approx(v.solve(c, 0.3).pressure, abs=1e-12)


@pytest.mark.parametrize("dist", [Dirac(1.0), Uniform(1.0, 1.2), Pareto(5.0)])
def test_grid_matches_solve_above_critical(dist):
    c = ls.PottsConfig(3, 0.0, dist)
    beta = 1.3 * cr.critical_point(c).beta_c
    sol = v.solve(c, beta)
    g = v.grid_oracle(c, beta, 400)
    assert abs(sol.pressure - g.value) <= 1e-4
    # the solver's optimum is at least as good as any grid point
    assert sol.pressure >= g.value - 1e-12
    assert nearest_permutation_gap(g.y_best, sol.y_vector) <= g.spacing
    assert g.ties >= 3
    assert v.full_objective(c, beta, g.y_best) == pytest.approx(g.value, abs=1e-10)


@settings(max_examples=5, deadline=None, derandomize=True)
@given(which=st.integers(0, 2), factor=st.floats(0.5, 2.0))
def test_grid_optimality(which, factor):
    dist = [Dirac(1.0), Uniform(1.0, 1.5), Pareto(6.0)][which]
    c = ls.PottsConfig(3, 0.0, dist)
    beta = factor * cr.critical_point(c).beta_c
    g = v.grid_oracle(c, beta, 200)
    sol = v.solve(c, beta)
    curvature = 3.0 * math.expm1(beta) / c.mean
    assert 0 <= sol.pressure - g.value + 1e-12 <= 2 * g.spacing ** 2 * curvature


def test_full_objective_is_permutation_invariant():
    c = ls.PottsConfig(4, 0.0, Pareto(5.0))
    y = (0.1, 0.5, 0.2, c.mean - 0.8)
    vals = [v.full_objective(c, 1.1, p) for p in itertools.permutations(y)]
    assert max(vals) - min(vals) < 1e-12


def test_full_objective_matches_reduced_pressure():
    c = ls.PottsConfig(5, 0.1, Uniform(1.0, 2.0))
    for s in (0.0, 0.4, 0.9):
        assert v.full_objective(c, 0.8, v.y_vector(c, s)) == pytest.approx(
            ls.pressure_reduced(c, 0.8, s), abs=1e-10)


def test_grid_oracle_limits():
    with pytest.raises(TooLargeQ):
        v.grid_oracle(ER7, 1.0, 40)
    with pytest.raises(ValueError):
        v.grid_oracle(ls.PottsConfig(3, 0.0, Dirac(1.0)), 1.0, 10)


# ---------------------------------------------------------------- sweeps

def test_er_sweep_single_jump():
    res = v.sweep(ER7, 1.0, 2.5, 76)
    assert len(res.jumps) == 1
    j = res.jumps[0]
    assert j.beta_left < ER7_BETA_C < j.beta_right
    assert sum(r.jump for r in res.rows) == 1
    betas = [r.beta for r in res.rows]
    assert betas == sorted(betas)
    s = [r.s_star for r in res.rows]
    assert all(a <= b for a, b in zip(s, s[1:]))


def test_second_order_pareto_sweep():
    c = ls.PottsConfig(7, 0.0, Pareto(3.05))
    bc = cr.classify(c).critical.beta_c
    res = v.sweep(c, 0.5 * bc, 1.5 * bc, 40)
    assert res.jumps == ()


def test_infinite_variance_sweep():
    res = v.sweep(ls.PottsConfig(3, 0.0, Pareto(2.5)), 0.05, 2.0, 20)
    assert all(r.s_star > 0 for r in res.rows)
    assert res.jumps == ()


def test_detect_jumps_rules():
    betas = np.linspace(0, 1, 11)
    assert v.detect_jumps(betas, [0] * 5 + [0.8] * 6) == [4]
    # steep but smooth rise
    assert v.detect_jumps(betas, [0, 0, 0, 0.1, 0.3, 0.5, 0.7, 0.8, 0.85, 0.9, 0.92]) == []


def test_sweep_validation():
    with pytest.raises(ValueError):
        v.sweep(ER7, 2.0, 1.0, 10)
    with pytest.raises(ValueError):
        v.sweep(ER7, 1.0, 2.0, 1)
