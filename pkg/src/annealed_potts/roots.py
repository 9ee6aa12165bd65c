"""Bracketed scalar root finders."""

import math

from .errors import NoSignChange, NonConvergence


def _check_bracket(fa, fb, a, b):
    if fa == 0.0 or fb == 0.0:
        return
    if math.copysign(1.0, fa) == math.copysign(1.0, fb):
        raise NoSignChange(f"f has the same sign at {a!r} and {b!r}")


def bisect(f, a, b, xtol=1e-12, fa=None, fb=None, max_iter=400):
    """Plain bisection on ``[a, b]``; ``f(a)`` and ``f(b)`` must differ in sign."""
    fa = f(a) if fa is None else fa
    fb = f(b) if fb is None else fb
    _check_bracket(fa, fb, a, b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        if b - a <= xtol or m in (a, b):
            return m
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    raise NonConvergence("bisection did not reach tolerance")


def newton_bracketed(f, df, a, b, xtol=1e-12, fa=None, fb=None, x0=None, max_iter=200):
    """Safeguarded Newton iteration inside a sign-change bracket.

    A Newton step that leaves the current bracket, or that is longer than
    half the step before last, is replaced by bisection.
    """
    fa = f(a) if fa is None else fa
    fb = f(b) if fb is None else fb
    _check_bracket(fa, fb, a, b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    x = 0.5 * (a + b) if x0 is None else min(max(x0, a), b)
    step_old = step = b - a
    for _ in range(max_iter):
        fx = f(x)
        if fx == 0.0:
            return x
        if (fx < 0) == (fa < 0):
            a, fa = x, fx
        else:
            b, fb = x, fx
        d = df(x)
        x_new = x - fx / d if d != 0.0 and math.isfinite(d) else math.nan
        if not (a < x_new < b) or abs(x_new - x) > 0.5 * abs(step_old):
            x_new = 0.5 * (a + b)
        step_old, step = step, x_new - x
        if abs(step) < xtol or b - a < xtol:
            return x_new
        x = x_new
    raise NonConvergence("safeguarded Newton did not converge")
