"""Vertex-weight laws: closed-form moments and controlled-precision expectations.

Every law is an immutable dataclass.  ``expect`` takes a vectorised callable
``g`` (array in, array out); ``g`` may also return a stack of shape ``(m, n)``,
in which case ``m`` expectations are computed on a shared partition.
"""

import math
from dataclasses import dataclass, fields

import numpy as np
from scipy import special, stats

from .quadrature import integrate

INF = math.inf


def _apply(g, w):
    try:
        out = np.asarray(g(w), dtype=float)
    except TypeError:
        out = None
    if out is None or out.shape[-1:] != w.shape:
        # scalar-only callable
        out = np.vectorize(g, otypes=[float])(w)
    return out


def _check_positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be a positive real, got {value!r}")


def _quad_expect(integrand, breakpoints, rel_tol):
    res = integrate(integrand, breakpoints, rel_tol=0.5 * rel_tol, abs_tol=0.5 * rel_tol)
    return res.value


@dataclass(frozen=True)
class Dirac:
    lam: float

    variant = "dirac"

    def __post_init__(self):
        _check_positive("lambda", self.lam)

    def moment(self, k):
        return self.lam ** k

    def scaled(self, c):
        return Dirac(c * self.lam)

    @property
    def support_min(self):
        return self.lam

    def quantile(self, p):
        return self.lam

    def expect(self, g, rel_tol):
        return _sum_atoms(g, [self.lam], [1.0])

    def spec(self):
        return f"dirac:lambda={self.lam!r}"


@dataclass(frozen=True)
class TwoAtom:
    x1: float
    x2: float
    c1: float

    variant = "two_atom"

    def __post_init__(self):
        _check_positive("x1", self.x1)
        _check_positive("x2", self.x2)
        if not self.x2 > self.x1:
            raise ValueError(f"x2 must exceed x1, got x1={self.x1!r}, x2={self.x2!r}")
        if not 0.0 < self.c1 < 1.0:
            raise ValueError(f"c1 must lie in (0, 1), got {self.c1!r}")

    @property
    def c2(self):
        return 1.0 - self.c1

    def moment(self, k):
        return self.c1 * self.x1 ** k + self.c2 * self.x2 ** k

    def scaled(self, c):
        return TwoAtom(c * self.x1, c * self.x2, self.c1)

    @property
    def support_min(self):
        return self.x1

    def quantile(self, p):
        return self.x1 if p <= self.c1 else self.x2

    def expect(self, g, rel_tol):
        return _sum_atoms(g, [self.x1, self.x2], [self.c1, self.c2])

    def spec(self):
        return f"twoatom:x1={self.x1!r},x2={self.x2!r},c1={self.c1!r}"


def _sum_atoms(g, atoms, masses):
    vals = _apply(g, np.asarray(atoms, dtype=float))
    total = vals @ np.asarray(masses)
    return total if np.ndim(total) else float(total)


@dataclass(frozen=True)
class Pareto:
    tau: float
    wmin: float = 1.0

    variant = "pareto"

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau > 2):
            raise ValueError(f"tau must exceed 2, got {self.tau!r}")
        _check_positive("wmin", self.wmin)

    def moment(self, k):
        a = self.tau - 1
        if k >= a:
            return INF
        return a * self.wmin ** k / (a - k)

    def scaled(self, c):
        return Pareto(self.tau, c * self.wmin)

    @property
    def support_min(self):
        return self.wmin

    def quantile(self, p):
        return self.wmin * (1.0 - p) ** (-1.0 / (self.tau - 1))

    def expect(self, g, rel_tol):
        # v = wmin / w maps the tail onto (0, 1]; density picks up v^(tau-2)
        a = self.tau - 1

        def integrand(v):
            return _apply(g, self.wmin / v) * (a * v ** (a - 1))

        bps = [0.0, *[10.0 ** -k for k in range(12, 0, -1)], 1.0]
        return _quad_expect(integrand, bps, rel_tol)

    def spec(self):
        return f"pareto:tau={self.tau!r},wmin={self.wmin!r}"


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float

    variant = "uniform"

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a >= 0):
            raise ValueError(f"a must be a nonnegative real, got {self.a!r}")
        if not (math.isfinite(self.b) and self.b > self.a):
            raise ValueError(f"b must exceed a, got a={self.a!r}, b={self.b!r}")

    def moment(self, k):
        return (self.b ** (k + 1) - self.a ** (k + 1)) / ((k + 1) * (self.b - self.a))

    def scaled(self, c):
        return Uniform(c * self.a, c * self.b)

    @property
    def support_min(self):
        return self.a

    def quantile(self, p):
        return self.a + p * (self.b - self.a)

    def expect(self, g, rel_tol):
        h = 1.0 / (self.b - self.a)
        return _quad_expect(lambda w: _apply(g, w) * h, [self.a, self.b], rel_tol)

    def spec(self):
        return f"uniform:a={self.a!r},b={self.b!r}"


@dataclass(frozen=True)
class Gamma:
    shape: float
    scale: float

    variant = "gamma"

    def __post_init__(self):
        _check_positive("k", self.shape)
        _check_positive("theta", self.scale)

    def moment(self, k):
        return self.scale ** k * math.exp(math.lgamma(k + self.shape) - math.lgamma(self.shape))

    def scaled(self, c):
        return Gamma(self.shape, c * self.scale)

    @property
    def support_min(self):
        return 0.0

    def quantile(self, p):
        return float(stats.gamma.ppf(p, self.shape, scale=self.scale))

    def expect(self, g, rel_tol):
        k, th = self.shape, self.scale
        # far enough out that sf(w_max) * (1 + w_max)^4 is below 1e-30
        w_max = float(stats.gamma.isf(1e-36, k, scale=th))
        log_norm = -math.lgamma(k) - k * math.log(th)

        def integrand(w):
            logpdf = log_norm + special.xlogy(k - 1, w) - w / th
            return _apply(g, w) * np.exp(logpdf)

        bps = [0.0]
        if k < 1:
            bps += [th * 10.0 ** -j for j in range(12, 0, -1)]
        bps += [p for p in (th * k, th * (k + 10)) if bps[-1] < p < w_max]
        bps.append(w_max)
        return _quad_expect(integrand, bps, rel_tol)

    def spec(self):
        return f"gamma:k={self.shape!r},theta={self.scale!r}"


@dataclass(frozen=True)
class LogNormal:
    mu: float
    sigma: float

    variant = "lognormal"

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be a real number, got {self.mu!r}")
        _check_positive("sigma", self.sigma)

    def moment(self, k):
        return math.exp(k * self.mu + 0.5 * k * k * self.sigma ** 2)

    def scaled(self, c):
        return LogNormal(self.mu + math.log(c), self.sigma)

    @property
    def support_min(self):
        return 0.0

    def quantile(self, p):
        return math.exp(self.mu + self.sigma * float(special.ndtri(p)))

    def expect(self, g, rel_tol):
        mu, sig = self.mu, self.sigma
        c = 1.0 / math.sqrt(2 * math.pi)

        def integrand(z):
            return _apply(g, np.exp(mu + sig * z)) * (c * np.exp(-0.5 * z * z))

        # cubic growth shifts the mass of w^3 phi(z) to z = 3 sigma
        hi = 3 * sig + 12.0
        bps = [-12.0, 0.0, *([3 * sig] if sig > 0.5 else []), hi]
        return _quad_expect(integrand, sorted(set(bps)), rel_tol)

    def spec(self):
        return f"lognormal:mu={self.mu!r},sigma={self.sigma!r}"


@dataclass(frozen=True)
class Rayleigh:
    sigma: float

    variant = "rayleigh"

    def __post_init__(self):
        _check_positive("sigma", self.sigma)

    def moment(self, k):
        return self.sigma ** k * 2 ** (k / 2) * math.gamma(1 + k / 2)

    def scaled(self, c):
        return Rayleigh(c * self.sigma)

    @property
    def support_min(self):
        return 0.0

    def quantile(self, p):
        return self.sigma * math.sqrt(-2.0 * math.log1p(-p))

    def expect(self, g, rel_tol):
        s2 = self.sigma ** 2

        def integrand(w):
            return _apply(g, w) * (w / s2 * np.exp(-0.5 * w * w / s2))

        w_max = self.sigma * math.sqrt(2 * 90.0)
        return _quad_expect(integrand, [0.0, self.sigma, 4 * self.sigma, w_max], rel_tol)

    def spec(self):
        return f"rayleigh:sigma={self.sigma!r}"


WeightDistribution = Dirac | TwoAtom | Pareto | Uniform | Gamma | LogNormal | Rayleigh


def moment(dist, k):
    """E[W^k] in closed form; ``inf`` when the moment diverges."""
    if k not in (1, 2, 3):
        raise ValueError(f"moment order must be 1, 2 or 3, got {k!r}")
    return dist.moment(k)


def expect(dist, g, rel_tol=1e-10):
    """E[g(W)] with error at most ``rel_tol * (1 + |E[g(W)]|)``."""
    if not rel_tol > 1e-15:
        raise ValueError(f"rel_tol must exceed 1e-15, got {rel_tol!r}")
    return dist.expect(g, rel_tol)


# name in the mini-grammar -> (class, {key: field}, optional keys with defaults)
_GRAMMAR = {
    "dirac": (Dirac, {"lambda": "lam"}, {}),
    "pareto": (Pareto, {"tau": "tau", "wmin": "wmin"}, {"wmin": 1.0}),
    "uniform": (Uniform, {"a": "a", "b": "b"}, {}),
    "twoatom": (TwoAtom, {"x1": "x1", "x2": "x2", "c1": "c1"}, {}),
    "two_atom": (TwoAtom, {"x1": "x1", "x2": "x2", "c1": "c1"}, {}),
    "gamma": (Gamma, {"k": "shape", "theta": "scale"}, {}),
    "lognormal": (LogNormal, {"mu": "mu", "sigma": "sigma"}, {}),
    "rayleigh": (Rayleigh, {"sigma": "sigma"}, {}),
}


def parse_distribution(text):
    """Parse ``name:key=value,...`` into a distribution.

    Errors raise ``ValueError`` naming the offending key.
    """
    name, sep, body = text.strip().partition(":")
    name = name.strip().lower()
    if name not in _GRAMMAR:
        raise ValueError(f"unknown distribution {name!r}; expected one of "
                         + ", ".join(sorted(k for k in _GRAMMAR if k != "two_atom")))
    cls, keymap, defaults = _GRAMMAR[name]
    values = dict(defaults)
    for item in filter(None, (p.strip() for p in body.split(","))):
        key, eq, raw = item.partition("=")
        key = key.strip()
        if key not in keymap:
            raise ValueError(f"unknown key {key!r} for {name}")
        if not eq:
            raise ValueError(f"key {key!r} has no value")
        if key in values and key not in defaults:
            raise ValueError(f"key {key!r} given twice")
        try:
            values[key] = float(raw)
        except ValueError:
            raise ValueError(f"key {key!r} has non-numeric value {raw.strip()!r}") from None
    missing = [k for k in keymap if k not in values]
    if missing:
        raise ValueError(f"missing key {missing[0]!r} for {name}")
    try:
        return cls(**{keymap[k]: v for k, v in values.items()})
    except ValueError as exc:
        raise ValueError(f"{name}: {exc}") from None


def parameters(dist):
    """Field values of ``dist`` as a plain dict."""
    return {f.name: getattr(dist, f.name) for f in fields(dist)}
