"""The landscape function, reduced pressure and criticality function.

Throughout, ``y = t*W + B`` and ``z = exp(-y)``; all integrands are written in
terms of ``z`` so nothing overflows for large ``t``.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import weights
from .errors import (
    ConcaveRegime, MomentRequired, NoSignChange, NoSteepness, NotZeroCrossing,
    WrongRegime,
)
from .quadrature import integrate
from .roots import bisect, newton_bracketed

ROOT_TOL = 1e-12


@dataclass(frozen=True)
class PottsConfig:
    q: int
    B: float
    dist: weights.WeightDistribution
    rel_tol: float = 1e-10
    root_tol: float = ROOT_TOL

    def __post_init__(self):
        if isinstance(self.q, bool) or not isinstance(self.q, (int, np.integer)):
            raise ValueError(f"q must be an integer, got {self.q!r}")
        if self.q < 3:
            raise ValueError(f"q must be at least 3, got {self.q}")
        if not (math.isfinite(self.B) and self.B >= 0):
            raise ValueError(f"B must be a nonnegative real, got {self.B!r}")
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol!r}")
        if not self.root_tol > 0:
            raise ValueError(f"root_tol must be positive, got {self.root_tol!r}")
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "B", float(self.B))

    @property
    def mean(self):
        return self.dist.moment(1)

    @property
    def concave(self):
        """True when B >= log(q-1), where the landscape is concave."""
        return self.B >= math.log(self.q - 1)

    def with_tol(self, rel_tol):
        return PottsConfig(self.q, self.B, self.dist, rel_tol, self.root_tol)


def beta_prime(beta):
    return math.expm1(beta)


def beta_from_prime(bp):
    return math.log1p(bp)


# ---------------------------------------------------------------- integrands

def _stack(cfg, ts, orders):
    """Integrand for E[...] of each requested order at every t in ``ts``.

    Order 0 is the landscape, 1 and 2 its derivatives; rows are ordered
    ``[order][t]``.
    """
    q, B, mean = cfg.q, cfg.B, cfg.mean
    ts = np.atleast_1d(np.asarray(ts, dtype=float))

    def g(w):
        y = ts[:, None] * w[None, :] + B
        z = np.exp(-y)
        den = 1.0 + (q - 1) * z
        rows = []
        for k in orders:
            if k == 0:
                rows.append((w / mean) * (-np.expm1(-y)) / den)
            elif k == 1:
                rows.append((w * w / mean) * q * z / den ** 2)
            else:
                rows.append((q * w ** 3 / mean) * z * ((q - 1) * z - 1.0) / den ** 3)
        return np.concatenate(rows, axis=0)

    return g


def _at_zero(cfg, k):
    q, eB = cfg.q, math.exp(cfg.B)
    if k == 0:
        return math.expm1(cfg.B) / (eB + q - 1)
    mean = cfg.mean
    if k == 1:
        return cfg.dist.moment(2) / mean * q * eB / (eB + q - 1) ** 2
    m3 = cfg.dist.moment(3)
    if math.isinf(m3):
        raise MomentRequired("second derivative at t=0 needs a finite third moment")
    return q * m3 / mean * eB * (q - 1 - eB) / (eB + q - 1) ** 3


def landscape_values(cfg, t, orders=(0, 1, 2)):
    """Landscape and derivatives at a scalar ``t``, as a tuple in ``orders``."""
    t = float(t)
    if not t >= 0:
        raise ValueError(f"t must be nonnegative, got {t!r}")
    if t == 0.0:
        return tuple(_at_zero(cfg, k) for k in orders)
    vals = weights.expect(cfg.dist, _stack(cfg, [t], orders), cfg.rel_tol)
    return tuple(float(v) for v in np.atleast_1d(vals))


def landscape_many(cfg, ts, order=0):
    """Landscape (or a derivative) on an array of positive ``ts`` in one pass."""
    ts = np.asarray(ts, dtype=float)
    if ts.size == 0:
        return ts.copy()
    return np.atleast_1d(weights.expect(cfg.dist, _stack(cfg, ts, (order,)), cfg.rel_tol))


def scr_f(cfg, t):
    return landscape_values(cfg, t, (0,))[0]


def scr_f_d1(cfg, t):
    return landscape_values(cfg, t, (1,))[0]


def scr_f_d2(cfg, t):
    return landscape_values(cfg, t, (2,))[0]


# ---------------------------------------------------------------- pressure

def pressure_reduced(cfg, beta, s):
    """Reduced pressure p(s) at inverse temperature ``beta``."""
    s = _check_s(s)
    bp = beta_prime(beta)
    q, B, mean = cfg.q, cfg.B, cfg.mean
    # E[log(e^y + q - 1)] = E[y] + E[log1p((q-1) e^-y)], with E[y] exact
    tail = weights.expect(
        cfg.dist, lambda w: np.log1p((q - 1) * np.exp(-(bp * s * w + B))), cfg.rel_tol)
    return bp * s * mean + B + tail - bp * mean / (2 * q) * ((q - 1) * s * s + 2 * s - 1)


def pressure_d1(cfg, beta, s):
    s = _check_s(s)
    bp = beta_prime(beta)
    q = cfg.q
    return (q - 1) / q * bp * cfg.mean * (scr_f(cfg, s * bp) - s)


def _check_s(s):
    s = float(s)
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s!r}")
    return s


# ---------------------------------------------------------------- criticality

def _log_ratio(x, q):
    """log((e^x + q - 1)/q) for x >= 0 without overflow or cancellation."""
    small = x < 30.0
    xs = np.where(small, x, 0.0)
    return np.where(small, np.log1p(np.expm1(xs) / q),
                    x + np.log1p((q - 1) * np.exp(-x)) - math.log(q))


def _require_zero_field(cfg):
    if cfg.B != 0.0:
        raise ValueError("the criticality function is defined for B = 0 only")


def kappa_parts(cfg, t):
    """(K(t), K'(t)) evaluated from one shared quadrature."""
    _require_zero_field(cfg)
    t = float(t)
    q, mean = cfg.q, cfg.mean
    if t == 0.0:
        return 0.0, 0.0
    base = _stack(cfg, [t], (0, 1))

    def g(w):
        return np.concatenate([_log_ratio(t * w, q)[None, :] / mean, base(w)], axis=0)

    logterm, f0, f1 = (float(v) for v in weights.expect(cfg.dist, g, cfg.rel_tol))
    k = logterm - (q - 1) / (2 * q) * t * f0 - t / q
    dk = (q - 1) / (2 * q) * (f0 - t * f1)
    return k, dk


def kappa(cfg, t):
    return kappa_parts(cfg, t)[0]


def kappa_d1(cfg, t):
    _require_zero_field(cfg)
    f0, f1 = landscape_values(cfg, t, (0, 1))
    return (cfg.q - 1) / (2 * cfg.q) * (f0 - t * f1)


def kappa_d2(cfg, t):
    _require_zero_field(cfg)
    return -(cfg.q - 1) / (2 * cfg.q) * t * scr_f_d2(cfg, t)


# ---------------------------------------------------------------- inflection scan

@dataclass(frozen=True)
class ZeroCrossingReport:
    sign_changes: tuple
    unique: bool
    t_star: float | None
    steep: bool | None
    t_hi: float
    heuristic_ceiling: bool
    # sign of the second derivative on the first scanned grid point
    initial_sign: int = field(default=0)


GRID_POINTS = 2048


def _scan_ceiling(cfg):
    gap = math.log(cfg.q - 1) - cfg.B
    wmin = cfg.dist.support_min
    if wmin > 0:
        # beyond this every integrand value of the second derivative is negative
        return gap / wmin, False
    t_hi = 10.0 * gap / cfg.dist.quantile(0.01)
    for _ in range(60):
        if scr_f_d2(cfg, t_hi) < 0:
            return t_hi, True
        t_hi *= 2.0
    raise NotZeroCrossing("second derivative stays nonnegative on the scanned range")


@lru_cache(maxsize=256)
def zero_crossing(cfg):
    """Scan the sign of the second derivative of the landscape over (0, t_hi]."""
    if cfg.concave:
        raise ConcaveRegime(f"B = {cfg.B} >= log(q-1): the landscape is concave")
    t_hi, heuristic = _scan_ceiling(cfg)
    # a few percent past the ceiling so a crossing exactly on it is seen
    grid = np.geomspace(t_hi * 1e-6, t_hi * 1.01, GRID_POINTS)
    d2 = np.concatenate([landscape_many(cfg, chunk, order=2)
                         for chunk in np.array_split(grid, 8)])
    nz = np.flatnonzero(d2 != 0.0)
    signs = np.sign(d2[nz])
    flips = np.flatnonzero(signs[1:] != signs[:-1])
    changes = []
    for i in flips:
        a, b = grid[nz[i]], grid[nz[i + 1]]
        root = bisect(lambda t: scr_f_d2(cfg, t), a, b, xtol=1e-10,
                      fa=d2[nz[i]], fb=d2[nz[i + 1]])
        changes.append(float(root))
    initial = int(signs[0]) if signs.size else 0
    unique = len(changes) == 1 and initial > 0
    t_star = steep = None
    if unique:
        t_star = changes[0]
        f0, f1 = landscape_values(cfg, t_star, (0, 1))
        steep = bool(f1 > f0 / t_star)
    return ZeroCrossingReport(tuple(changes), unique, t_star, steep, float(t_hi),
                              heuristic, initial)


# ---------------------------------------------------------------- tangents

@dataclass(frozen=True)
class TangentPoints:
    t_a: float
    t_b: float


def _require_crossing(cfg):
    rep = zero_crossing(cfg)
    if not rep.unique:
        raise NotZeroCrossing(
            f"second derivative has {len(rep.sign_changes)} sign change(s); "
            "a unique zero-crossing is required")
    if cfg.B > 0 and not rep.steep:
        raise NoSteepness("the zero-crossing is not steep")
    return rep


def _tangent_gap(cfg, t):
    """F(t) - t F'(t) and its derivative -t F''(t)."""
    f0, f1, f2 = landscape_values(cfg, t)
    return f0 - t * f1, -t * f2


@lru_cache(maxsize=256)
def tangent_points(cfg):
    """Points where a line through the origin touches the landscape."""
    rep = _require_crossing(cfg)
    ts = rep.t_star
    gap_star = _tangent_gap(cfg, ts)[0]
    f = lambda t: _tangent_gap(cfg, t)[0]
    df = lambda t: _tangent_gap(cfg, t)[1]
    if cfg.B == 0.0:
        t_a = 0.0
    else:
        t_a = newton_bracketed(f, df, 0.0, ts, xtol=cfg.root_tol,
                               fa=_at_zero(cfg, 0), fb=gap_star)
    hi, g_hi = 2.0 * ts, f(2.0 * ts)
    while g_hi <= 0:
        hi *= 2.0
        g_hi = f(hi)
    t_b = newton_bracketed(f, df, ts, hi, xtol=cfg.root_tol, fa=gap_star, fb=g_hi)
    return TangentPoints(float(t_a), float(t_b))


def slope_bounds(cfg):
    """(1/F'(t_b), 1/F'(t_a)): the window of beta' with three stationary points."""
    tp = tangent_points(cfg)
    return 1.0 / scr_f_d1(cfg, tp.t_b), 1.0 / scr_f_d1(cfg, tp.t_a)


# ---------------------------------------------------------------- stationary points

TOUCH_TOL = 1e-12


def stationary_solutions(cfg, beta):
    """All t in [0, beta'] with F(t) = t / beta', in increasing order."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta!r}")
    bp = beta_prime(beta)
    tp = tangent_points(cfg)
    return _stationary_from_prime(cfg, bp, tp)


def _stationary_from_prime(cfg, bp, tp):
    c = 1.0 / bp
    s_a = scr_f_d1(cfg, tp.t_a)
    s_b = scr_f_d1(cfg, tp.t_b)
    touch_a = abs(c - s_a) <= TOUCH_TOL * c
    touch_b = abs(c - s_b) <= TOUCH_TOL * c

    delta = lambda t: scr_f(cfg, t) - t * c
    ddelta = lambda t: scr_f_d1(cfg, t) - c
    sols = []
    if cfg.B == 0.0:
        sols.append(0.0)
        # F(t)/t - c, whose limit at 0+ is F'(0)
        ratio = lambda t: scr_f(cfg, t) / t - c

        def dratio(t):
            f0, f1 = landscape_values(cfg, t, (0, 1))
            return (t * f1 - f0) / (t * t)

        middle = c < s_b and not touch_b and c > s_a and not touch_a
        if middle:
            sols.append(newton_bracketed(ratio, dratio, 0.0, tp.t_b, xtol=cfg.root_tol,
                                         fa=s_a - c, fb=s_b - c))
    else:
        if c > s_a and not touch_a:
            sols.append(newton_bracketed(delta, ddelta, 0.0, tp.t_a, xtol=cfg.root_tol,
                                         fa=_at_zero(cfg, 0),
                                         fb=tp.t_a * (s_a - c)))
        elif touch_a:
            sols.append(tp.t_a)
        if s_a < c < s_b and not (touch_a or touch_b):
            sols.append(newton_bracketed(delta, ddelta, tp.t_a, tp.t_b, xtol=cfg.root_tol,
                                         fa=tp.t_a * (s_a - c), fb=tp.t_b * (s_b - c)))
    if touch_b:
        sols.append(tp.t_b)
    elif c < s_b:
        hi = max(bp, tp.t_b)
        d_hi = delta(hi)
        if d_hi >= 0.0:
            # F(t) < 1 exactly; a nonnegative value is saturation roundoff at s = 1
            sols.append(hi)
        else:
            sols.append(newton_bracketed(delta, ddelta, tp.t_b, hi, xtol=cfg.root_tol,
                                         fa=tp.t_b * (s_b - c), fb=d_hi))
    return sorted(float(t) for t in sols)


# ---------------------------------------------------------------- equal area

def _area(cfg, bp, t1, t3):
    c = 1.0 / bp
    if t3 <= t1:
        return 0.0
    bps = np.linspace(t1, t3, 5)

    def f(tt):
        return landscape_many(cfg, tt, order=0)

    res = integrate(f, bps, rel_tol=cfg.rel_tol, abs_tol=cfg.rel_tol * (t3 - t1))
    return float(res.value) - c * (t3 * t3 - t1 * t1) / 2.0


def equal_area_R(cfg, beta):
    """Signed area between the landscape and the line t/beta' across the extreme roots."""
    bp = beta_prime(beta)
    sols = stationary_solutions(cfg, beta)
    if len(sols) < 2:
        raise WrongRegime(f"{len(sols)} stationary solution(s); equal area needs the "
                          "three-solution window")
    return _area(cfg, bp, sols[0], sols[-1])


def equal_area_parts(cfg, bp):
    """(R, dR/dbeta', t1, t3) at a given beta'."""
    sols = _stationary_from_prime(cfg, bp, tangent_points(cfg))
    if len(sols) < 2:
        raise WrongRegime(f"{len(sols)} stationary solution(s) at beta' = {bp}")
    t1, t3 = sols[0], sols[-1]
    return _area(cfg, bp, t1, t3), (t3 * t3 - t1 * t1) / (2 * bp * bp), t1, t3


# ---------------------------------------------------------------- counterexample

def curvature_kernel(x, q):
    """((q-1)e^x - e^{2x}) / (e^x + q - 1)^3, written in e^{-x}."""
    x = np.asarray(x, dtype=float)
    z = np.exp(-x)
    return z * ((q - 1) * z - 1.0) / (1.0 + (q - 1) * z) ** 3


@dataclass(frozen=True)
class Calibration:
    c1: float
    c2: float
    f_x1: float
    f_x2: float


def _cubic_kernel(s, q):
    return float(s ** 3 * curvature_kernel(s, q))


def calibrate_counterexample(q, x1, x2):
    """Masses of a two-atom law at x1 < x2 whose curvature integrand cancels at t = 1."""
    if q < 3:
        raise ValueError(f"q must be at least 3, got {q}")
    if not 0 < x1 < x2:
        raise ValueError(f"need 0 < x1 < x2, got x1={x1!r}, x2={x2!r}")
    f1, f2 = _cubic_kernel(x1, q), _cubic_kernel(x2, q)
    if not (f1 > 0 > f2):
        raise NoSignChange(f"s^3 a(s) must be positive at x1 and negative at x2; "
                           f"got {f1:.6g} and {f2:.6g}")
    c1 = -f2 / (f1 - f2)
    return Calibration(c1, f1 / (f1 - f2), f1, f2)
