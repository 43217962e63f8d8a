"""Low-level numerical kernels shared by the rest of the package.

Deterministic bracketed root finding, adaptive Simpson quadrature,
an overflow-safe sinh ratio, and least-squares slope fits on log-log
data.  Everything here is pure and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "AccuracyError",
    "Bracket",
    "BracketError",
    "EvaluationError",
    "SlopeFit",
    "find_root",
    "integrate",
    "loglog_slope",
    "sinh_ratio",
]


class BracketError(ValueError):
    """The interval handed to the root finder does not bracket a sign change."""


class EvaluationError(ArithmeticError):
    """A user-supplied callable returned NaN or a non-finite value."""


class AccuracyError(ArithmeticError):
    """The requested tolerance could not be met within the refinement budget."""


@dataclass(frozen=True)
class Bracket:
    """A validated sign-change interval [lo, hi] with the endpoint values.

    Construction enforces lo < hi, finite endpoints and values, and
    f_lo * f_hi <= 0 (a zero endpoint is allowed).
    """

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        for name in ("lo", "hi", "f_lo", "f_hi"):
            if not math.isfinite(getattr(self, name)):
                raise BracketError(f"non-finite bracket field {name!r}")
        if not self.lo < self.hi:
            raise BracketError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if not (self.f_lo <= 0.0 <= self.f_hi or self.f_hi <= 0.0 <= self.f_lo):
            raise BracketError(
                f"no sign change on [{self.lo}, {self.hi}]: "
                f"f_lo={self.f_lo}, f_hi={self.f_hi}"
            )

    @classmethod
    def from_function(cls, f: Callable[[float], float], lo: float, hi: float) -> "Bracket":
        """Evaluate ``f`` at both endpoints and validate the sign change."""
        return cls(lo, hi, f(lo), f(hi))


def _checked(f: Callable[[float], float], x: float) -> float:
    fx = f(x)
    if math.isnan(fx):
        raise EvaluationError(f"function returned NaN at x={x!r}")
    return fx


def find_root(
    f: Callable[[float], float],
    bracket: Bracket,
    rel_tol: float = 1e-14,
) -> float:
    """Locate the root of ``f`` inside a validated bracket.

    Bisection guarantees convergence; a secant candidate is tried on
    alternate iterations and accepted only when it falls strictly inside
    the current interval, so the iterate never leaves the bracket.  The
    returned point has the sign change confined to a width of
    ``rel_tol * max(1, |x|)``.  The iteration depends on function values
    only through signs and ratios, so scaling ``f`` by a positive
    constant returns the identical result.
    """
    if not rel_tol > 0.0:
        raise ValueError(f"rel_tol must be positive, got {rel_tol}")
    lo, hi = bracket.lo, bracket.hi
    f_lo, f_hi = bracket.f_lo, bracket.f_hi
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi

    use_secant = False
    for _ in range(4096):
        mid = 0.5 * (lo + hi)
        width = hi - lo
        if width <= rel_tol * max(1.0, abs(mid)) or not (lo < mid < hi):
            return mid
        x = mid
        if use_secant and f_hi != f_lo:
            sec = (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
            if lo < sec < hi:
                x = sec
        use_secant = not use_secant
        fx = _checked(f, x)
        if fx == 0.0:
            return x
        # keep the half that still brackets the sign change
        if (fx < 0.0) == (f_lo < 0.0):
            lo, f_lo = x, fx
        else:
            hi, f_hi = x, fx
    raise AccuracyError("root refinement budget exhausted")  # pragma: no cover


def _simpson(f, a, m, b, fa, fm, fb, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = _checked(f, lm)
    frm = _checked(f, rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = left + right - whole
    if abs(err) <= 15.0 * tol:
        return left + right + err / 15.0
    if depth <= 0:
        raise AccuracyError(
            f"quadrature did not converge on [{a}, {b}] at max refinement depth"
        )
    half = 0.5 * tol
    return _simpson(f, a, lm, m, fa, flm, fm, left, half, depth - 1) + _simpson(
        f, m, rm, b, fm, frm, fb, right, half, depth - 1
    )


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    abs_tol: float = 1e-12,
    max_depth: int = 50,
) -> float:
    """Adaptive Simpson quadrature of ``f`` over [a, b].

    The absolute error target is ``abs_tol``; intervals are split until
    the local Richardson estimate meets its share of the budget.  Raises
    AccuracyError if ``max_depth`` levels of refinement are not enough
    and EvaluationError if the integrand returns NaN.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("integration endpoints must be finite")
    if not abs_tol > 0.0:
        raise ValueError(f"abs_tol must be positive, got {abs_tol}")
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    m = 0.5 * (a + b)
    fa = _checked(f, a)
    fm = _checked(f, m)
    fb = _checked(f, b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return sign * _simpson(f, a, m, b, fa, fm, fb, whole, abs_tol, max_depth)


def sinh_ratio(a: float, b: float) -> float:
    """Overflow-safe sinh(a)/sinh(b) for 0 <= a <= b.

    Uses exp(a-b) * (1 - e^{-2a}) / (1 - e^{-2b}), every factor of which
    lies in [0, 1], so the result never overflows no matter how large b
    is.  The expm1 formulation keeps full precision for small arguments.
    """
    if not b > 0.0:
        raise ValueError(f"need b > 0, got b={b}")
    if not 0.0 <= a <= b:
        raise ValueError(f"need 0 <= a <= b, got a={a}, b={b}")
    if a == b:
        return 1.0
    num = -math.expm1(-2.0 * a)
    den = -math.expm1(-2.0 * b)
    return math.exp(a - b) * num / den


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares line through (ln x, ln y): slope, ln-intercept, fit quality."""

    slope: float
    intercept: float
    residual_rms: float
    n_points: int


def loglog_slope(points: Sequence[tuple[float, float]]) -> SlopeFit:
    """Fit ln(y) = slope * ln(x) + intercept by least squares.

    ``points`` is a sequence of (x, y) pairs, at least two of them, all
    strictly positive.  The residual_rms is the root-mean-square of the
    ln-space residuals and is 0 (to rounding) for exact power laws.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (x, y) pairs")
    if pts.shape[0] < 2:
        raise ValueError("need at least two points for a slope")
    xs = pts[:, 0]
    ys = pts[:, 1]
    if np.any(xs <= 0.0) or np.any(ys <= 0.0) or not (
        np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))
    ):
        raise ValueError("log-log fit needs finite, strictly positive data")
    lx = np.log(xs)
    ly = np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return SlopeFit(
        slope=float(slope),
        intercept=float(intercept),
        residual_rms=float(np.sqrt(np.mean(resid * resid))),
        n_points=int(xs.size),
    )
