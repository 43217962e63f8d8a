"""Eigenvalue spectra and eigenfunctions for binding in a reflecting ball.

Two radially symmetric models of a particle diffusing in a ball of
radius R and binding to a spherical target of radius r_b at the center:

* absorbing-boundary model: Dirichlet condition at r_b, eigenvalues
  alpha_n, eigenfunctions phi_n supported on [r_b, R];
* volume-reactivity model: reaction rate lambda inside r_b (scaled form
  lambda_hat = lambda/D), eigenvalues mu_n, eigenfunctions psi_n on
  [0, R].

Both spectra come from transcendental characteristic equations.  The
solvers here work with pole-free rescaled forms so ordinary bracketed
bisection applies, and all eigenfunction/normalization formulas are
written to stay finite for arbitrarily large reaction rates.

Eigenvalues carry units of inverse length squared; the time decay of a
mode is exp(-D * value * t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

from .numerics import Bracket, BracketError, EvaluationError, find_root, sinh_ratio

__all__ = [
    "EigenMode",
    "ExhaustionError",
    "Geometry",
    "ModeSet",
    "PoleError",
    "core_norm_sq",
    "core_weight",
    "doi_eigenvalues",
    "f_smol",
    "mode_norms",
    "phi",
    "psi",
    "reaction_kernel_A",
    "shell_norm_sq",
    "shell_weight",
    "smol_eigenvalues",
    "smol_poles",
]

SMOL = "smol"
DOI = "doi"


class PoleError(EvaluationError):
    """A characteristic function was evaluated at (or too near) a pole."""


class ExhaustionError(RuntimeError):
    """Fewer eigenvalues than requested could be isolated.

    Raised when a bracketing interval fails to pin down a sign change,
    which only happens for numerically degenerate spectra.  The
    ``partial`` attribute holds a ModeSet with every root located
    before the search gave up.
    """

    def __init__(self, message: str, partial: "ModeSet"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class Geometry:
    """Reaction radius r_b, ball radius R (micrometers), diffusivity D (um^2/s)."""

    r_b: float
    R: float
    D: float

    def __post_init__(self):
        if not (math.isfinite(self.r_b) and math.isfinite(self.R) and math.isfinite(self.D)):
            raise ValueError("geometry fields must be finite")
        if not 0.0 < self.r_b < self.R:
            raise ValueError(f"need 0 < r_b < R, got r_b={self.r_b}, R={self.R}")
        if not self.D > 0.0:
            raise ValueError(f"need D > 0, got D={self.D}")

    @property
    def kappa(self) -> float:
        """Shell fraction 1 - r_b/R used by the rescaled root equations."""
        return 1.0 - self.r_b / self.R

    @property
    def width(self) -> float:
        """Shell width R - r_b."""
        return self.R - self.r_b


@dataclass(frozen=True)
class EigenMode:
    """One eigenpair: 1-based index, eigenvalue (um^-2), normalization constant."""

    n: int
    value: float
    model: str
    norm_const: Optional[float] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"mode index must be >= 1, got {self.n}")
        if not (math.isfinite(self.value) and self.value >= 0.0):
            raise ValueError(f"eigenvalue must be finite and >= 0, got {self.value}")
        if self.model not in (SMOL, DOI):
            raise ValueError(f"unknown model tag {self.model!r}")
        if self.norm_const is not None and not self.norm_const > 0.0:
            raise ValueError(f"norm_const must be positive, got {self.norm_const}")


@dataclass(frozen=True)
class ModeSet:
    """An ordered, strictly increasing run of eigenmodes for one model."""

    geometry: Geometry
    model: str
    modes: tuple[EigenMode, ...]
    lambda_hat: Optional[float] = None
    partial: bool = False

    def __post_init__(self):
        if self.model not in (SMOL, DOI):
            raise ValueError(f"unknown model tag {self.model!r}")
        if self.model == DOI and self.lambda_hat is None:
            raise ValueError("volume-reactivity mode sets need lambda_hat")
        for i, mode in enumerate(self.modes):
            if mode.n != i + 1:
                raise ValueError("mode indices must run 1, 2, ... without gaps")
            if i > 0 and not mode.value > self.modes[i - 1].value:
                raise ValueError("eigenvalues must be strictly increasing")

    @property
    def count(self) -> int:
        return len(self.modes)

    def values(self) -> list[float]:
        return [m.value for m in self.modes]


# ---------------------------------------------------------------------------
# stable scalar kernels (series near zero, direct or exponential form else)

def _sinc(v: float) -> float:
    """sin(v)/v with the v=0 limit."""
    return 1.0 if v == 0.0 else math.sin(v) / v


def _shc(x: float) -> float:
    """sinh(x)/x with the x=0 limit; callers keep x below overflow range."""
    return 1.0 if x == 0.0 else math.sinh(x) / x


def _g1(v: float) -> float:
    """(1 - sin(v)/v), series below 0.1 to dodge the subtraction."""
    if abs(v) < 0.1:
        v2 = v * v
        return v2 / 6.0 * (1.0 - v2 / 20.0 * (1.0 - v2 / 42.0 * (1.0 - v2 / 72.0)))
    return 1.0 - math.sin(v) / v


def _g2(v: float) -> float:
    """(1 - cos(v))/v^2 via the exact half-angle identity."""
    s = _sinc(0.5 * v)
    return 0.5 * s * s


def _g3(v: float) -> float:
    """(v - sin(v))/v^3, series below 0.1."""
    if abs(v) < 0.1:
        v2 = v * v
        return (1.0 / 6.0) * (1.0 - v2 / 20.0 * (1.0 - v2 / 42.0 * (1.0 - v2 / 72.0)))
    return (v - math.sin(v)) / (v * v * v)


def _g6(v: float) -> float:
    """(sin(v)/v - cos(v))/v^2, series below 0.1."""
    if abs(v) < 0.1:
        v2 = v * v
        return 1.0 / 3.0 - v2 / 30.0 + v2 * v2 / 840.0 - v2 * v2 * v2 / 45360.0
    return (_sinc(v) - math.cos(v)) / (v * v)


def _s3(u: float) -> float:
    """(sinh(u) - u)/u^3; positive series below 0.5, direct above."""
    if abs(u) < 0.5:
        u2 = u * u
        return (
            1.0 / 6.0
            + u2 / 120.0
            + u2 * u2 / 5040.0
            + u2 * u2 * u2 / 362880.0
            + u2 * u2 * u2 * u2 / 39916800.0
        )
    return (math.sinh(u) - u) / (u * u * u)


def _c3(x: float) -> float:
    """(x cosh(x) - sinh(x))/x^3; positive series below 0.5, direct above."""
    if abs(x) < 0.5:
        x2 = x * x
        return 1.0 / 3.0 + x2 / 30.0 + x2 * x2 / 840.0 + x2 * x2 * x2 / 45360.0
    return (x * math.cosh(x) - math.sinh(x)) / (x * x * x)


def _g4(x: float) -> float:
    """coth(x)/x - 1/sinh(x)^2, finite for all x >= 0 (2/3 at x=0).

    Small x uses the exact rearrangement 4*s3(2x)/(sinh(x)/x)^2; large x
    uses E = exp(-2x) so nothing overflows.
    """
    if x < 0.5:
        shc = _shc(x)
        return 4.0 * _s3(2.0 * x) / (shc * shc)
    e = math.exp(-2.0 * x)
    one_minus = -math.expm1(-2.0 * x)
    return (1.0 + e) / (x * one_minus) - 4.0 * e / (one_minus * one_minus)


def _g7(x: float) -> float:
    """coth(x)/x - 1/x^2, finite for all x >= 0 (1/3 at x=0)."""
    if x < 0.5:
        return _c3(x) / _shc(x)
    return (x / math.tanh(x) - 1.0) / (x * x)


# ---------------------------------------------------------------------------
# characteristic functions

def _e1(geom: Geometry, mu: float) -> float:
    """Value of r*psi_out at r_b: (c/R) sinc(kc) - cos(kc), k=sqrt(mu), c=R-r_b."""
    k = math.sqrt(mu)
    kc = k * geom.width
    return (geom.width / geom.R) * _sinc(kc) - math.cos(kc)


def _e2(geom: Geometry, mu: float) -> float:
    """Radial derivative of r*psi_out at r_b: -cos(kc)/R - k sin(kc)."""
    k = math.sqrt(mu)
    kc = k * geom.width
    return -math.cos(kc) / geom.R - k * math.sin(kc)


def f_smol(geom: Geometry, mu: float) -> float:
    """Characteristic function whose roots are the absorbing-model eigenvalues.

    f(mu) = (R sqrt(mu) - tan(sqrt(mu) c)) / (R mu tan(sqrt(mu) c) + sqrt(mu))
    with c = R - r_b.  Tends to r_b as mu -> 0 and has simple poles at
    the beta_n (see smol_poles).
    """
    if not mu > 0.0:
        raise ValueError(f"need mu > 0, got {mu}")
    k = math.sqrt(mu)
    t = math.tan(k * geom.width)
    den = geom.R * mu * t + k
    if abs(den) < 1e-300:
        raise PoleError(f"characteristic function pole at mu={mu}")
    return (geom.R * k - t) / den


def reaction_kernel_A(geom: Geometry, mu: float, lambda_hat: float) -> float:
    """Reactive-core kernel A(mu, lambda_hat) of the matching condition.

    tanh(q r_b)/q with q = sqrt(lambda_hat - mu) below lambda_hat,
    tan(q r_b)/q above it, and the shared limit r_b at mu = lambda_hat.
    Monotone increasing in mu; the tan branch has poles where
    q r_b hits odd multiples of pi/2.
    """
    if mu < 0.0:
        raise ValueError(f"need mu >= 0, got {mu}")
    if not lambda_hat > 0.0:
        raise ValueError(f"need lambda_hat > 0, got {lambda_hat}")
    d = lambda_hat - mu
    if d > 0.0:
        q = math.sqrt(d)
        return math.tanh(q * geom.r_b) / q
    if d == 0.0:
        return geom.r_b
    q = math.sqrt(-d)
    x = q * geom.r_b
    nearest_pole = (math.floor(x / math.pi - 0.5) + 1.5) * math.pi
    half_pi = 0.5 * math.pi
    for pole in (nearest_pole - math.pi, nearest_pole):
        if pole >= half_pi and abs(x - pole) <= 1e-9 * max(1.0, x):
            raise PoleError(f"reaction kernel pole near mu={mu}")
    return math.tan(x) / q


def _pole_free_smol(kappa: float) -> Callable[[float], float]:
    # S(x) = sin(kx) - x cos(kx): entire, same roots as tan(kx) = x
    def S(x: float) -> float:
        return math.sin(kappa * x) - x * math.cos(kappa * x)

    return S


def _pole_free_den(kappa: float) -> Callable[[float], float]:
    # x sin(kx) + cos(kx): entire, roots are the poles of f
    def Dn(x: float) -> float:
        return x * math.sin(kappa * x) + math.cos(kappa * x)

    return Dn


def _smol_roots_x(geom: Geometry, count: int) -> list[float]:
    """Roots of sin(kx) = x cos(kx) in x = R sqrt(mu); one per tan branch."""
    kappa = geom.kappa
    S = _pole_free_smol(kappa)
    roots = []
    for n in range(1, count + 1):
        theta_lo = (2 * n - 3) * math.pi / (2.0 * kappa)
        theta_hi = (2 * n - 1) * math.pi / (2.0 * kappa)
        # S vanishes at x=0, so the first bracket starts just above it
        lo = theta_hi * 1e-12 if n == 1 else theta_lo
        br = Bracket.from_function(S, lo, theta_hi)
        roots.append(find_root(S, br))
    return roots


def _pole_roots_x(geom: Geometry, count: int) -> list[float]:
    kappa = geom.kappa
    Dn = _pole_free_den(kappa)
    roots = []
    for n in range(1, count + 1):
        lo = (2 * n - 1) * math.pi / (2.0 * kappa)
        hi = (2 * n + 1) * math.pi / (2.0 * kappa)
        br = Bracket.from_function(Dn, lo, hi)
        roots.append(find_root(Dn, br))
    return roots


def smol_eigenvalues(geom: Geometry, count: int) -> ModeSet:
    """First ``count`` absorbing-model eigenvalues alpha_n, ascending.

    Solved through the entire rescaled form sin(kx) - x cos(kx) with
    x = R sqrt(mu) and kappa = 1 - r_b/R; each tangent branch
    ((2n-3)pi/2k, (2n-1)pi/2k) provably holds exactly one root.
    """
    if count < 1:
        raise ValueError(f"need count >= 1, got {count}")
    xs = _smol_roots_x(geom, count)
    modes = tuple(
        EigenMode(n=i + 1, value=(x / geom.R) ** 2, model=SMOL) for i, x in enumerate(xs)
    )
    return ModeSet(geometry=geom, model=SMOL, modes=modes)


def smol_poles(geom: Geometry, count: int) -> list[float]:
    """First ``count`` poles beta_n of f_smol (um^-2), ascending.

    beta_n interlace the eigenvalues: alpha_n < beta_n < alpha_{n+1}.
    """
    if count < 1:
        raise ValueError(f"need count >= 1, got {count}")
    return [(y / geom.R) ** 2 for y in _pole_roots_x(geom, count)]


def _match(geom: Geometry, lambda_hat: float, mu: float) -> float:
    """Interface-matching function whose zeros are the reactive eigenvalues.

    A positive multiple of q*E1 - tanh(q r_b)*E2 rearranged to stay
    finite and smooth through mu = lambda_hat, where E1/E2 is the value/
    derivative of r*psi_out at r_b.  Below lambda_hat the hyperbolic
    weights are written with expm1 so large q never overflows; above it
    the trigonometric analog is used.
    """
    e1 = _e1(geom, mu)
    e2 = _e2(geom, mu)
    d = lambda_hat - mu
    if d > 0.0:
        q = math.sqrt(d)
        x = q * geom.r_b
        w_val = 0.5 * (1.0 + math.exp(-2.0 * x))
        w_der = -math.expm1(-2.0 * x) / (2.0 * q)
        return w_val * e1 - w_der * e2
    if d == 0.0:
        return e1 - geom.r_b * e2
    q = math.sqrt(-d)
    x = q * geom.r_b
    return math.cos(x) * e1 - geom.r_b * _sinc(x) * e2


def _neumann_ball_modes(geom: Geometry, count: int) -> ModeSet:
    # lambda_hat = 0: constant mode plus roots of tan(xi) = xi, xi = R sqrt(mu)
    values = [0.0]
    S = _pole_free_smol(1.0)
    for j in range(1, count):
        lo = (2 * j - 1) * math.pi / 2.0
        hi = (2 * j + 1) * math.pi / 2.0
        br = Bracket.from_function(S, lo, hi)
        values.append((find_root(S, br) / geom.R) ** 2)
    modes = tuple(EigenMode(n=i + 1, value=v, model=DOI) for i, v in enumerate(values))
    return ModeSet(geometry=geom, model=DOI, modes=modes, lambda_hat=0.0)


def doi_eigenvalues(geom: Geometry, lambda_hat: float, count: int) -> ModeSet:
    """First ``count`` volume-reactivity eigenvalues mu_n, ascending.

    Roots are isolated by Dirichlet bracketing: clamping the profile to
    zero at r_b splits the ball into a core piece with spectrum
    lambda_hat + (k pi / r_b)^2 and the absorbing-shell piece with
    spectrum alpha_m.  By the min-max principle the sorted union
    sigma_1 <= sigma_2 <= ... of those two spectra interlaces mu_n as
    sigma_{n-1} <= mu_n <= sigma_n, and the matching determinant
    changes sign exactly once per interval, so every eigenvalue gets a
    guaranteed bracket.  A degenerate interval (possible only if an
    eigenfunction vanishes identically at r_b) raises ExhaustionError
    carrying the partial ModeSet.
    """
    if count < 1:
        raise ValueError(f"need count >= 1, got {count}")
    if lambda_hat < 0.0:
        raise ValueError(f"need lambda_hat >= 0, got {lambda_hat}")
    if lambda_hat == 0.0:
        return _neumann_ball_modes(geom, count)

    alphas = [(x / geom.R) ** 2 for x in _smol_roots_x(geom, count)]
    deltas = [lambda_hat + (k * math.pi / geom.r_b) ** 2 for k in range(1, count + 1)]
    sigmas = sorted(alphas + deltas)[:count]
    M = lambda mu: _match(geom, lambda_hat, mu)

    def _give_up(roots: list[float], detail: str) -> ExhaustionError:
        partial_modes = tuple(
            EigenMode(n=i + 1, value=v, model=DOI) for i, v in enumerate(roots)
        )
        partial = ModeSet(
            geometry=geom,
            model=DOI,
            modes=partial_modes,
            lambda_hat=lambda_hat,
            partial=True,
        )
        return ExhaustionError(
            f"found {len(roots)} of {count} eigenvalues: {detail}", partial
        )

    roots: list[float] = []
    prev, f_prev = 0.0, M(0.0)
    for s in sigmas:
        lo, f_lo = prev, f_prev
        if roots and (f_lo == 0.0 or lo <= roots[-1]):
            # previous root landed on the shared endpoint; restart just above
            lo = prev * (1.0 + 1e-12)
            f_lo = M(lo)
        f_s = M(s)
        if s <= lo:
            root = s  # interval pinched shut by a spectral coincidence
        else:
            try:
                bracket = Bracket(lo=lo, hi=s, f_lo=f_lo, f_hi=f_s)
            except BracketError as exc:
                raise _give_up(roots, str(exc)) from exc
            root = find_root(M, bracket)
        if roots and root <= roots[-1]:
            raise _give_up(roots, f"bracket ({lo:g}, {s:g}) repeated root {root:g}")
        roots.append(root)
        prev, f_prev = s, f_s

    modes = tuple(EigenMode(n=i + 1, value=v, model=DOI) for i, v in enumerate(roots))
    return ModeSet(geometry=geom, model=DOI, modes=modes, lambda_hat=lambda_hat)


# ---------------------------------------------------------------------------
# eigenfunctions

def _outer(geom: Geometry, value: float, r: float) -> float:
    # (1/r) [ sin(k(R-r))/(Rk) - cos(k(R-r)) ] written with sinc so the
    # value -> -1/R limit at the eigenvalue 0 needs no special case
    k = math.sqrt(value)
    s = geom.R - r
    ks = k * s
    return ((s / geom.R) * _sinc(ks) - math.cos(ks)) / r


def phi(geom: Geometry, alpha_n: float, r: float) -> float:
    """Absorbing-model eigenfunction at radius r (zero below r_b)."""
    if not 0.0 <= r <= geom.R:
        raise ValueError(f"need 0 <= r <= R, got r={r}")
    if alpha_n < 0.0:
        raise ValueError(f"need alpha_n >= 0, got {alpha_n}")
    if r < geom.r_b:
        return 0.0
    return _outer(geom, alpha_n, r)


def _inner_coef_trig(geom: Geometry, lambda_hat: float, mu: float) -> tuple[float, float]:
    """Matching constant C for the oscillatory core C sin(q r)/r.

    Value continuity gives C = E1/sin(q r_b); derivative continuity
    gives C = E2/(q cos(q r_b)).  The value form keeps the profile
    continuous at r_b for any mu, so it is preferred; only when the
    core has a node at r_b (sin near zero, a 0/0 in the value form at
    an eigenvalue) does the derivative form take over.
    """
    qt = math.sqrt(mu - lambda_hat)
    x = qt * geom.r_b
    s = math.sin(x)
    if abs(s) >= 0.01 * min(1.0, x):
        C = _e1(geom, mu) / s
    else:
        C = _e2(geom, mu) / (qt * math.cos(x))
    return qt, C


def psi(geom: Geometry, lambda_hat: float, mu_n: float, r: float) -> float:
    """Volume-reactivity eigenfunction at radius r.

    Outside r_b this is the same radial profile as phi evaluated at
    mu_n; inside it is the regular core solution matched in value and
    derivative at r_b: a sinh profile below lambda_hat (computed with
    sinh_ratio so huge rates cannot overflow), a sinc profile above,
    and a constant exactly at the crossover.
    """
    if not 0.0 <= r <= geom.R:
        raise ValueError(f"need 0 <= r <= R, got r={r}")
    if mu_n < 0.0:
        raise ValueError(f"need mu_n >= 0, got {mu_n}")
    if lambda_hat < 0.0:
        raise ValueError(f"need lambda_hat >= 0, got {lambda_hat}")
    if r >= geom.r_b:
        return _outer(geom, mu_n, r)
    w = _e1(geom, mu_n)
    d = lambda_hat - mu_n
    if d > 0.0:
        q = math.sqrt(d)
        if r == 0.0:
            return w / (geom.r_b * _shc(q * geom.r_b))
        return w * sinh_ratio(q * r, q * geom.r_b) / r
    if d == 0.0:
        return w / geom.r_b
    qt, C = _inner_coef_trig(geom, lambda_hat, mu_n)
    return C * qt * _sinc(qt * r)


# ---------------------------------------------------------------------------
# closed-form norms and weights

def shell_norm_sq(geom: Geometry, z: float) -> float:
    """Exact integral of the outer profile squared, r^2-weighted, over [r_b, R].

    Positive for every z >= 0, decreasing from (R^3 - r_b^3)/(3 R^2)
    at z=0 toward (R - r_b)/2 as z grows.
    """
    if z < 0.0:
        raise ValueError(f"need z >= 0, got {z}")
    c = geom.width
    v = 2.0 * c * math.sqrt(z)
    return (
        0.5 * c * (1.0 + _sinc(v))
        + (2.0 * c**3 / geom.R**2) * _g3(v)
        - (2.0 * c**2 / geom.R) * _g2(v)
    )


def shell_weight(geom: Geometry, z: float) -> float:
    """Exact integral of the outer profile, r^2-weighted, over [r_b, R]."""
    if z < 0.0:
        raise ValueError(f"need z >= 0, got {z}")
    c = geom.width
    u = math.sqrt(z) * c
    return -(c**3 / geom.R) * _g6(u) - geom.r_b * c * _sinc(u)


def core_norm_sq(geom: Geometry, lambda_hat: float, mu: float) -> float:
    """Exact r^2-weighted squared norm of the core branch of psi over [0, r_b]."""
    if lambda_hat < 0.0 or mu < 0.0:
        raise ValueError("need lambda_hat >= 0 and mu >= 0")
    w = _e1(geom, mu)
    d = lambda_hat - mu
    half_rb = 0.5 * geom.r_b
    if d > 0.0:
        x = math.sqrt(d) * geom.r_b
        return w * w * half_rb * _g4(x)
    if d == 0.0:
        return w * w * geom.r_b / 3.0
    qt, C = _inner_coef_trig(geom, lambda_hat, mu)
    return C * C * half_rb * _g1(2.0 * qt * geom.r_b)


def core_weight(geom: Geometry, lambda_hat: float, mu: float) -> float:
    """Exact r^2-weighted integral of the core branch of psi over [0, r_b]."""
    if lambda_hat < 0.0 or mu < 0.0:
        raise ValueError("need lambda_hat >= 0 and mu >= 0")
    w = _e1(geom, mu)
    rb2 = geom.r_b * geom.r_b
    d = lambda_hat - mu
    if d > 0.0:
        x = math.sqrt(d) * geom.r_b
        return w * rb2 * _g7(x)
    if d == 0.0:
        return w * rb2 / 3.0
    qt, C = _inner_coef_trig(geom, lambda_hat, mu)
    x = qt * geom.r_b
    return C * rb2 * x * _g6(x)


def mode_norms(geom: Geometry, modes: ModeSet) -> ModeSet:
    """Fill each mode's normalization constant (reciprocal squared norm)."""
    filled = []
    for mode in modes.modes:
        if modes.model == SMOL:
            nsq = shell_norm_sq(geom, mode.value)
        else:
            nsq = core_norm_sq(geom, modes.lambda_hat, mode.value) + shell_norm_sq(
                geom, mode.value
            )
        filled.append(replace(mode, norm_const=1.0 / nsq))
    return replace(modes, modes=tuple(filled))
