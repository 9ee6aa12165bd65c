"""Variational problem for the pressure: reduced solver, grid oracle, beta sweeps."""

import itertools
from dataclasses import dataclass

import numpy as np

from . import landscape as ls
from . import weights
from .errors import NotZeroCrossing, TooLargeQ
from .quadrature import integrate
from .roots import newton_bracketed

DEGENERACY_TOL = 1e-10
SCAN_POINTS = 1024
X1_CEILING = float(np.nextafter(1.0, 0.0))


@dataclass(frozen=True)
class OrderParameterSolution:
    s_star: float
    t_star_scaled: float
    y_vector: tuple
    x1: float
    pressure: float
    degenerate: bool
    # (s, pressure) of every candidate that was compared
    candidates: tuple = ()
    # both optimal branches when degenerate
    branches: tuple = ()


def y_vector(cfg, s):
    m, q = cfg.mean, cfg.q
    return (m / q * (1 + (q - 1) * s),) + (m / q * (1 - s),) * (q - 1)


def colour_fraction(cfg, beta, s):
    """Limiting fraction of colour-1 spins on the branch s."""
    if s == 0.0 and cfg.B == 0.0:
        return 1.0 / cfg.q
    bp = ls.beta_prime(beta)
    q, B = cfg.q, cfg.B

    def other(w):
        z = (q - 1) * np.exp(-(bp * s * w + B))
        return z / (1.0 + z)

    # the complement keeps precision near 1; x1 < 1 holds exactly, so cap below 1
    x1 = 1.0 - float(weights.expect(cfg.dist, other, cfg.rel_tol))
    return min(x1, X1_CEILING)


def _zero_crossing_holds(cfg):
    if cfg.concave:
        return False
    try:
        ls.tangent_points(cfg)
    except NotZeroCrossing:
        return False
    return True


def _scan_roots(cfg, bp):
    """Stationary t in (0, bp] by a dense scan when the landscape shape is unknown."""
    c = 1.0 / bp
    grid = np.geomspace(bp * 1e-8, bp, SCAN_POINTS)
    f = ls.landscape_many(cfg, grid, order=0)
    if cfg.B == 0.0:
        vals = f / grid - c
        fun = lambda t: ls.scr_f(cfg, t) / t - c

        def dfun(t):
            f0, f1 = ls.landscape_values(cfg, t, (0, 1))
            return (t * f1 - f0) / (t * t)
    else:
        vals = f - grid * c
        fun = lambda t: ls.scr_f(cfg, t) - t * c
        dfun = lambda t: ls.scr_f_d1(cfg, t) - c
    roots = []
    for i in np.flatnonzero(np.sign(vals[1:]) * np.sign(vals[:-1]) < 0):
        roots.append(newton_bracketed(fun, dfun, grid[i], grid[i + 1], xtol=cfg.root_tol,
                                      fa=vals[i], fb=vals[i + 1]))
    roots += [grid[i] for i in np.flatnonzero(vals == 0.0)]
    if cfg.B > 0 and vals[0] < 0:
        # root below the first grid point
        roots.append(newton_bracketed(fun, dfun, 0.0, grid[0], xtol=cfg.root_tol,
                                      fa=ls.scr_f(cfg, 0.0), fb=vals[0]))
    return roots


def stationary_points(cfg, beta):
    """Stationary t values, exact under the zero-crossing shape, scanned otherwise."""
    bp = ls.beta_prime(beta)
    if _zero_crossing_holds(cfg):
        return ls.stationary_solutions(cfg, beta)
    return sorted(float(t) for t in _scan_roots(cfg, bp))


def _is_local_max(cfg, beta, s, h=1e-7):
    if s >= 1.0:
        return ls.pressure_d1(cfg, beta, 1.0) >= 0.0
    right = ls.pressure_d1(cfg, beta, min(s + h, 1.0))
    if s <= 0.0:
        return right <= 0.0
    return ls.pressure_d1(cfg, beta, max(s - h, 0.0)) >= 0.0 >= right


def solve(cfg, beta):
    """Maximise the reduced pressure over s in [0, 1]."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta!r}")
    bp = ls.beta_prime(beta)
    cand = {min(max(float(t) / bp, 0.0), 1.0) for t in stationary_points(cfg, beta)}
    # an endpoint can only be the maximiser if the derivative there points outward
    if ls.pressure_d1(cfg, beta, 0.0) <= 0.0:
        cand.add(0.0)
    if ls.pressure_d1(cfg, beta, 1.0) >= 0.0 or not cand:
        cand.add(1.0)
    scored = sorted(((ls.pressure_reduced(cfg, beta, s), s) for s in cand), reverse=True)
    best_p, best_s = scored[0]
    degenerate = False
    branches = ()
    for p, s in scored[1:]:
        if (abs(s - best_s) > 1e-8 and best_p - p <= DEGENERACY_TOL * (1 + abs(best_p))
                and _is_local_max(cfg, beta, s) and _is_local_max(cfg, beta, best_s)):
            degenerate = True
            lo, hi = sorted((s, best_s))
            branches = (lo, hi)
            best_s = hi
            best_p = max(p, best_p)
            break
    return OrderParameterSolution(
        s_star=best_s,
        t_star_scaled=bp * best_s,
        y_vector=y_vector(cfg, best_s),
        x1=colour_fraction(cfg, beta, best_s),
        pressure=best_p,
        degenerate=degenerate,
        candidates=tuple((s, p) for p, s in sorted(scored, key=lambda x: x[1])),
        branches=branches,
    )


# ---------------------------------------------------------------- grid oracle

@dataclass(frozen=True)
class GridOracleResult:
    y_best: tuple
    value: float
    spacing: float
    ties: int


def _simplex_grid(q, resolution):
    """Integer compositions of ``resolution`` into q nonnegative parts."""
    rows = []
    for head in itertools.product(range(resolution + 1), repeat=q - 1):
        rest = resolution - sum(head)
        if rest >= 0:
            rows.append(head + (rest,))
    return np.array(rows, dtype=float)


def _objective(cfg, beta, Y, nodes, wts):
    """F(y) - beta'/(2 E[W]) sum y_k^2 on rows of Y, with a fixed quadrature rule."""
    bp = ls.beta_prime(beta)
    m = cfg.mean
    field = np.zeros(cfg.q)
    field[0] = cfg.B
    expo = (bp / m) * Y[:, :, None] * nodes[None, None, :] + field[None, :, None]
    top = expo.max(axis=1, keepdims=True)
    lse = top[:, 0, :] + np.log(np.exp(expo - top).sum(axis=1))
    return lse @ wts - bp / (2 * m) * (Y * Y).sum(axis=1)


def _fixed_rule(cfg, beta):
    """Nodes and weights representing E[h(W)] for the grid objective."""
    dist = cfg.dist
    if isinstance(dist, weights.Dirac):
        return np.array([dist.lam]), np.array([1.0])
    if isinstance(dist, weights.TwoAtom):
        return np.array([dist.x1, dist.x2]), np.array([dist.c1, dist.c2])
    # adapt a partition on representative objective integrands, then freeze it
    bp = ls.beta_prime(beta)
    q, B = cfg.q, cfg.B
    probes = [0.0, 0.25, 0.5, 0.75, 1.0]

    def g(w):
        return np.vstack([np.logaddexp(bp * s * w + B, np.log(q - 1)) for s in probes])

    def rule_of(d):
        if isinstance(d, weights.Uniform):
            res = integrate(lambda w: g(w) / (d.b - d.a), [d.a, d.b], rel_tol=1e-12)
            nodes, wts = res.rule()
            return nodes, wts / (d.b - d.a)
        if isinstance(d, weights.Pareto):
            a = d.tau - 1
            bps = [0.0, *[10.0 ** -k for k in range(12, 0, -1)], 1.0]
            res = integrate(lambda v: g(d.wmin / v) * (a * v ** (a - 1)), bps, rel_tol=1e-12)
            v, wv = res.rule()
            return d.wmin / v, wv * a * v ** (a - 1)
        raise ValueError(f"grid oracle does not support the {d.variant} law")

    return rule_of(dist)


def grid_oracle(cfg, beta, resolution):
    """Brute-force maximiser of the full objective on a barycentric simplex grid."""
    if cfg.q > 4:
        raise TooLargeQ(f"grid oracle is limited to q <= 4, got q = {cfg.q}")
    if int(resolution) != resolution or resolution < 20:
        raise ValueError(f"resolution must be an integer >= 20, got {resolution!r}")
    resolution = int(resolution)
    m = cfg.mean
    nodes, wts = _fixed_rule(cfg, beta)
    grid = _simplex_grid(cfg.q, resolution) * (m / resolution)
    values = np.concatenate([_objective(cfg, beta, chunk, nodes, wts)
                             for chunk in np.array_split(grid, max(1, len(grid) // 4096))])
    best = int(np.argmax(values))
    top = values[best]
    ties = int(np.sum(values >= top - 1e-12 * (1 + abs(top))))
    return GridOracleResult(tuple(float(v) for v in grid[best]), float(top),
                            m / resolution, ties)


def full_objective(cfg, beta, y):
    """The full objective at one point y, with adaptive quadrature."""
    bp = ls.beta_prime(beta)
    m = cfg.mean
    y = np.asarray(y, dtype=float)
    field = np.zeros(cfg.q)
    field[0] = cfg.B

    def g(w):
        expo = (bp / m) * y[:, None] * w[None, :] + field[:, None]
        top = expo.max(axis=0)
        return top + np.log(np.exp(expo - top).sum(axis=0))

    return float(weights.expect(cfg.dist, g, cfg.rel_tol)) - bp / (2 * m) * float(y @ y)


# ---------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class SweepRow:
    beta: float
    s_star: float
    x1: float
    pressure: float
    jump: bool


@dataclass(frozen=True)
class Jump:
    beta_left: float
    beta_right: float
    s_left: float
    s_right: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    jumps: tuple


JUMP_FACTOR = 10.0


def _lower_branch(sol):
    # sweeps follow the branch continuous from below at a tie
    return sol.branches[0] if sol.degenerate else sol.s_star


def detect_jumps(betas, s_values):
    """Indices i where s jumps between rows i and i+1.

    A step counts as a jump when it exceeds ten times the larger of the median
    step and both neighbouring steps, so a steep but continuous rise (whose
    neighbours are comparable) is not flagged.
    """
    ds = np.diff(np.asarray(s_values, dtype=float))
    if ds.size == 0:
        return []
    mag = np.abs(ds)
    med = float(np.median(mag))
    left = np.concatenate([[0.0], mag[:-1]])
    right = np.concatenate([mag[1:], [0.0]])
    ref = np.maximum(np.maximum(left, right), max(med, 1e-9))
    return [int(i) for i in np.flatnonzero(ds > JUMP_FACTOR * ref)]


def sweep(cfg, beta_min, beta_max, steps):
    """Solve on an even beta grid and flag discontinuities of the order parameter."""
    if not 0 < beta_min < beta_max:
        raise ValueError("need 0 < beta_min < beta_max")
    if int(steps) != steps or steps < 2:
        raise ValueError(f"steps must be an integer >= 2, got {steps!r}")
    betas = np.linspace(beta_min, beta_max, int(steps))
    sols = [solve(cfg, float(b)) for b in betas]
    s_vals = [_lower_branch(s) for s in sols]
    flagged = set(detect_jumps(betas, s_vals))
    rows, jumps = [], []
    for i, (b, sol, s) in enumerate(zip(betas, sols, s_vals)):
        x1 = sol.x1 if s == sol.s_star else colour_fraction(cfg, float(b), s)
        rows.append(SweepRow(float(b), s, x1, sol.pressure, (i - 1) in flagged))
    for i in sorted(flagged):
        jumps.append(Jump(float(betas[i]), float(betas[i + 1]), s_vals[i], s_vals[i + 1]))
    return SweepResult(tuple(rows), tuple(jumps))
