"""Critical temperatures and the classification of the transition."""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import landscape as ls
from . import variational
from .errors import (
    ConcaveRegime, DivergentSecondMoment, NonConvergence, NotZeroCrossing,
)
from .quadrature import integrate
from .roots import bisect, newton_bracketed
from .weights import Pareto

NEWTON_MAX_ITER = 200
# quadrature accuracy needed for the criticality function to resolve 1e-12 steps
NEWTON_QUAD_TOL = 1e-13


@dataclass(frozen=True)
class CriticalPoint:
    t_c: float
    beta_prime_c: float
    beta_c: float
    s_low: float
    s_high: float
    order: str
    iterations: int = 0
    history: tuple = ()
    uncertainty: float = 0.0


@dataclass(frozen=True)
class PhaseReport:
    regime: str
    critical: CriticalPoint | None
    detail: str
    jumps: tuple = ()


def _first_order(t_c, bp, s_low, s_high, **extra):
    return CriticalPoint(t_c, bp, math.log1p(bp), s_low, s_high, "first", **extra)


def newton_start(cfg):
    q = cfg.q
    return 2 * q * math.log(q) / ((q - 1) * cfg.mean)


def newton_tc(cfg):
    """Zero-field critical point from Newton's method on the criticality function.

    Started from an upper bound on t_c, the iterates decrease monotonically.
    """
    if cfg.B != 0.0:
        raise ValueError("newton_tc needs B = 0; use critical_point for B > 0")
    if math.isinf(cfg.dist.moment(2)):
        raise DivergentSecondMoment("E[W^2] is infinite: ordered at every temperature")
    rep = ls.zero_crossing(cfg)
    if not rep.unique:
        raise NotZeroCrossing(
            f"second derivative has {len(rep.sign_changes)} sign change(s)")
    tight = cfg.with_tol(min(cfg.rel_tol, NEWTON_QUAD_TOL))
    t = newton_start(cfg)
    history = [t]
    for _ in range(NEWTON_MAX_ITER):
        k, dk = ls.kappa_parts(tight, t)
        step = k / dk
        if abs(step) < cfg.root_tol and step < 0:
            # converged; an upward step of this size is roundoff
            break
        t -= step
        history.append(t)
        if abs(step) < cfg.root_tol:
            break
    else:
        raise NonConvergence(f"Newton did not converge in {NEWTON_MAX_ITER} iterations")
    f0 = ls.scr_f(tight, t)
    bp = t / f0
    return _first_order(t, bp, 0.0, f0, iterations=len(history) - 1,
                        history=tuple(history))


def critical_point(cfg):
    """Critical point under the zero-crossing condition, for 0 <= B < log(q-1)."""
    if cfg.concave:
        raise ConcaveRegime(f"B = {cfg.B} >= log(q-1): no transition")
    if cfg.B == 0.0:
        return newton_tc(cfg)
    lo, hi = ls.slope_bounds(cfg)
    count = [0]

    def area(bp):
        count[0] += 1
        return ls.equal_area_parts(cfg, bp)[0]

    def d_area(bp):
        return ls.equal_area_parts(cfg, bp)[1]

    # the area is negative at the lower slope bound and positive at the upper
    bp_c = newton_bracketed(area, d_area, lo, hi, xtol=cfg.root_tol * hi, fa=-1.0, fb=1.0)
    _, _, t1, t3 = ls.equal_area_parts(cfg, bp_c)
    return _first_order(t3, bp_c, t1 / bp_c, t3 / bp_c, iterations=count[0])


# ---------------------------------------------------------------- Pareto exponent

def pareto_limit_integral(q, r):
    """L_q(r): the integral over (0, inf) of x^r times the curvature kernel."""
    if not -1.0 < r < 0.0:
        raise ValueError(f"r must lie in (-1, 0), got {r!r}")
    p = 1.0 / (1.0 + r)
    # x = u^p on (0, 1) absorbs the x^r singularity
    head = integrate(lambda u: ls.curvature_kernel(u ** p, q), [0.0, 0.5, 1.0],
                     rel_tol=1e-13, abs_tol=1e-19).value * p
    x0 = math.log(q - 1)
    bps = sorted({1.0, 2.0, *(x for x in (x0 - 2, x0, x0 + 3) if 2 < x < 40), 40.0, 60.0})
    tail = integrate(lambda x: x ** r * ls.curvature_kernel(x, q), bps,
                     rel_tol=1e-13, abs_tol=1e-19).value
    return head + tail


def r_q_lower_bound(q):
    x0 = math.log(q - 1)
    c = 1.5 + (q - 2) / q * x0
    return math.sqrt(c * c - 2.0) - c


def r_q_asymptotic(q):
    x0 = math.log(q - 1)
    return -x0 / (q - 1 - 1.0 / (q - 1) - 2 * x0)


@dataclass(frozen=True)
class TauQ:
    tau_q: float
    r_q: float
    lower_bound: float
    asymptotic: float
    residual: float


def tau_q(q):
    """Pareto exponent separating second- from first-order transitions."""
    if isinstance(q, bool) or int(q) != q or q < 3:
        raise ValueError(f"q must be an integer >= 3, got {q!r}")
    return _tau_q(int(q))


@lru_cache(maxsize=None)
def _tau_q(q):
    lb = r_q_lower_bound(q)
    r = bisect(lambda x: pareto_limit_integral(q, x), lb + 1e-9, -1e-9, xtol=1e-10)
    return TauQ(3.0 - r, r, lb, r_q_asymptotic(q), pareto_limit_integral(q, r))


# ---------------------------------------------------------------- classification

SWEEP_STEPS = 120


def _second_order(cfg, detail):
    nu = cfg.dist.moment(2) / cfg.mean
    bp = cfg.q / nu
    cp = CriticalPoint(0.0, bp, math.log1p(bp), 0.0, 0.0, "second")
    return PhaseReport("second_order", cp, detail)


def _slope_window(cfg):
    """Range of beta' over which the line t/beta' can meet the landscape more than once."""
    rep = ls.zero_crossing(cfg)
    t = np.geomspace(rep.t_hi * 1e-4, rep.t_hi * 8, 2048)
    h = ls.landscape_many(cfg, t) / t
    inner = np.flatnonzero((h[1:-1] > h[:-2]) & (h[1:-1] > h[2:])) + 1
    valley = np.flatnonzero((h[1:-1] < h[:-2]) & (h[1:-1] < h[2:])) + 1
    h_max = h[inner].max() if inner.size else h.max()
    if cfg.B == 0.0:
        h_min = ls.scr_f_d1(cfg, 0.0)
    else:
        h_min = h[valley].min() if valley.size else h.min()
    return 1.0 / h_max, 1.0 / min(h_min, h_max)


def _refine_jump(cfg, jump, tol=1e-10):
    lo, hi = jump.beta_left, jump.beta_right
    mid_s = 0.5 * (jump.s_left + jump.s_right)
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if variational.solve(cfg, mid).s_star < mid_s:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _sweep_fallback(cfg):
    bp_lo, bp_hi = _slope_window(cfg)
    b_lo, b_hi = math.log1p(0.8 * bp_lo), math.log1p(1.25 * bp_hi)
    res = variational.sweep(cfg, b_lo, b_hi, SWEEP_STEPS)
    step = (b_hi - b_lo) / (SWEEP_STEPS - 1)
    if not res.jumps:
        return PhaseReport("second_order", None,
                           "zero-crossing fails; no jump found in the beta sweep "
                           f"over [{b_lo:.6g}, {b_hi:.6g}]")
    refined = []
    for j in res.jumps:
        lo, hi = _refine_jump(cfg, j)
        refined.append((lo, hi, j))
    lo, hi, j = max(refined, key=lambda x: x[2].s_right - x[2].s_left)
    beta_c = 0.5 * (lo + hi)
    bp = math.expm1(beta_c)
    below, above = variational.solve(cfg, lo), variational.solve(cfg, hi)
    cp = CriticalPoint(bp * above.s_star, bp, beta_c, below.s_star, above.s_star, "first",
                       uncertainty=max(0.5 * (hi - lo), 0.0))
    detail = (f"zero-crossing fails; {len(res.jumps)} jump(s) found in a beta sweep with "
              f"step {step:.3g}, largest refined by bisection; uniqueness of the jump "
              "is not established")
    jumps = tuple((a, b) for a, b, _ in refined)
    return PhaseReport("first_order", cp, detail, jumps)


def classify(cfg):
    """Regime of the transition, with its critical point when there is one."""
    if cfg.concave:
        return PhaseReport("concave_no_transition", None,
                           f"B = {cfg.B} >= log(q-1): unique stationary point, no transition")
    m2 = cfg.dist.moment(2)
    if cfg.B == 0.0 and math.isinf(m2):
        return PhaseReport("always_ordered", None,
                           "E[W^2] is infinite: spontaneous magnetisation at every beta")
    if cfg.B == 0.0 and isinstance(cfg.dist, Pareto):
        tq = tau_q(cfg.q)
        if cfg.dist.tau <= tq.tau_q:
            return _second_order(cfg, f"Pareto exponent {cfg.dist.tau} <= tau(q) = "
                                      f"{tq.tau_q:.10g}")
    try:
        ls.tangent_points(cfg)
    except NotZeroCrossing:
        rep = ls.zero_crossing(cfg)
        if not rep.sign_changes and rep.initial_sign < 0:
            if cfg.B == 0.0:
                return _second_order(cfg, "landscape concave on (0, inf)")
            return PhaseReport("concave_no_transition", None,
                               "landscape concave on (0, inf): unique stationary point")
        return _sweep_fallback(cfg)
    cp = critical_point(cfg)
    return PhaseReport("first_order", cp, "unique steep zero-crossing")
