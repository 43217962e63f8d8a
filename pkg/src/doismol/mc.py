"""Brownian-dynamics oracle for the binding problem.

Paths follow Euler-Maruyama steps in 3 Cartesian coordinates with
radial mirroring at the outer wall.  The absorbing model binds on first
entry into r <= r_b; the reactive model binds with probability
1 - exp(-lam*dt) per step spent strictly inside the trap.  Paths are
censored at t_max.

Each path draws from its own xoshiro256++ stream seeded from
(seed, path index) through a splitmix64 mix, so results are identical
regardless of execution order.  Normals come from a 128-box ziggurat
over those streams; the whole walk is compiled with numba.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .spectral import DOI, SMOL, Geometry

__all__ = ["BindingSample", "McConfig", "ecdf_at", "simulate"]

_MASK64 = (1 << 64) - 1

# splitmix64 constants
_SM_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_MUL2 = np.uint64(0x94D049BB133111EB)

# ziggurat layout for the standard normal: 128 boxes of equal area
_ZIG_R = 3.442619855899
_ZIG_V = 9.91256303526217e-3


def _zig_tables():
    x = np.zeros(129)
    f = math.exp(-0.5 * _ZIG_R * _ZIG_R)
    x[0] = _ZIG_V / f  # virtual width of the base box (rectangle + tail)
    x[1] = _ZIG_R
    for i in range(2, 128):
        x[i] = math.sqrt(-2.0 * math.log(_ZIG_V / x[i - 1] + math.exp(-0.5 * x[i - 1] ** 2)))
    ratio = x[1:] / x[:128]
    return x, ratio


_ZX, _ZRATIO = _zig_tables()
_INV53 = 1.0 / 9007199254740992.0  # 2^-53


@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _SM_MUL1
    z = (z ^ (z >> np.uint64(27))) * _SM_MUL2
    return z ^ (z >> np.uint64(31))


@njit(inline="always")
def _stream(seed, idx):
    # 256-bit xoshiro state from four mixed points of a splitmix walk
    z = _mix(seed ^ _mix(idx + _SM_GAMMA))
    s0 = _mix(z + _SM_GAMMA)
    s1 = _mix(z + np.uint64(2) * _SM_GAMMA)
    s2 = _mix(z + np.uint64(3) * _SM_GAMMA)
    s3 = _mix(z + np.uint64(4) * _SM_GAMMA)
    if s0 | s1 | s2 | s3 == np.uint64(0):
        s0 = _SM_GAMMA
    return s0, s1, s2, s3


@njit(inline="always")
def _next64(s0, s1, s2, s3):
    # xoshiro256++
    tmp = s0 + s3
    out = ((tmp << np.uint64(23)) | (tmp >> np.uint64(41))) + s0
    t = s1 << np.uint64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = (s3 << np.uint64(45)) | (s3 >> np.uint64(19))
    return out, s0, s1, s2, s3


@njit(inline="always")
def _u01(s0, s1, s2, s3):
    # uniform on (0, 1], safe as a log argument
    u, s0, s1, s2, s3 = _next64(s0, s1, s2, s3)
    return ((u >> np.uint64(11)) + np.uint64(1)) * _INV53, s0, s1, s2, s3


@njit(inline="always", fastmath=True)
def _normal(s0, s1, s2, s3):
    while True:
        u, s0, s1, s2, s3 = _next64(s0, s1, s2, s3)
        i = np.int64(u & np.uint64(127))
        u1 = (u >> np.uint64(11)) * _INV53 * 2.0 - 1.0
        if abs(u1) < _ZRATIO[i]:
            return u1 * _ZX[i], s0, s1, s2, s3
        if i == 0:
            # beyond the base box: exponential tail sampler
            while True:
                a, s0, s1, s2, s3 = _u01(s0, s1, s2, s3)
                b, s0, s1, s2, s3 = _u01(s0, s1, s2, s3)
                x = math.log(a) / _ZIG_R
                if -2.0 * math.log(b) >= x * x:
                    break
            if u1 < 0.0:
                return x - _ZIG_R, s0, s1, s2, s3
            return _ZIG_R - x, s0, s1, s2, s3
        x = u1 * _ZX[i]
        f0 = math.exp(-0.5 * (_ZX[i] * _ZX[i] - x * x))
        f1 = math.exp(-0.5 * (_ZX[i + 1] * _ZX[i + 1] - x * x))
        w, s0, s1, s2, s3 = _u01(s0, s1, s2, s3)
        if f0 + w * (f1 - f0) < 1.0:
            return x, s0, s1, s2, s3


@njit(cache=True, nogil=True, fastmath=True)
def _draw_normals(seed, n):
    out = np.empty(n)
    s0, s1, s2, s3 = _stream(seed, np.uint64(0))
    for i in range(n):
        out[i], s0, s1, s2, s3 = _normal(s0, s1, s2, s3)
    return out


@njit(cache=True, nogil=True, fastmath=True)
def _run_paths(n_paths, n_steps, step_len, r0, R, r_b, p_bind, interior, dt, t_max, seed):
    times = np.full(n_paths, t_max)
    bound = np.zeros(n_paths, dtype=np.bool_)
    rb_sq = r_b * r_b
    R_sq = R * R
    max_r_sq = 0.0
    for p in range(n_paths):
        s0, s1, s2, s3 = _stream(seed, np.uint64(p))
        x = 0.0
        y = 0.0
        z = r0
        for k in range(1, n_steps + 1):
            g, s0, s1, s2, s3 = _normal(s0, s1, s2, s3)
            x += step_len * g
            g, s0, s1, s2, s3 = _normal(s0, s1, s2, s3)
            y += step_len * g
            g, s0, s1, s2, s3 = _normal(s0, s1, s2, s3)
            z += step_len * g
            r_sq = x * x + y * y + z * z
            if r_sq > R_sq:
                r = math.sqrt(r_sq)
                scale = (2.0 * R - r) / r
                x *= scale
                y *= scale
                z *= scale
                r_sq = (2.0 * R - r) * (2.0 * R - r)
            if r_sq > max_r_sq:
                max_r_sq = r_sq
            if interior:
                if r_sq < rb_sq:
                    w, s0, s1, s2, s3 = _u01(s0, s1, s2, s3)
                    if w <= p_bind:
                        times[p] = min(k * dt, t_max)
                        bound[p] = True
                        break
            elif r_sq <= rb_sq:
                times[p] = min(k * dt, t_max)
                bound[p] = True
                break
    return times, bound, math.sqrt(max_r_sq)


@dataclass(frozen=True)
class McConfig:
    """Simulation parameters: model tag, step size, ensemble, censoring."""

    model: str
    dt: float
    n_paths: int
    seed: int
    t_max: float
    lam: float = 0.0  # reaction rate per second, reactive model only

    def __post_init__(self):
        if self.model not in (SMOL, DOI):
            raise ValueError(f"model must be {SMOL!r} or {DOI!r}, got {self.model!r}")
        if not self.dt > 0.0:
            raise ValueError(f"need dt > 0, got {self.dt}")
        if self.n_paths < 1:
            raise ValueError(f"need n_paths >= 1, got {self.n_paths}")
        if not self.t_max > 0.0:
            raise ValueError(f"need t_max > 0, got {self.t_max}")
        if self.model == DOI:
            if not self.lam >= 0.0:
                raise ValueError(f"need lam >= 0, got {self.lam}")
        elif self.lam != 0.0:
            raise ValueError("lam only applies to the doi model")


@dataclass(frozen=True, eq=False)
class BindingSample:
    """Per-path outcomes sorted by time, with restricted-mean statistics.

    ``times`` holds the binding time for bound paths and t_max for
    censored ones; ``bound`` is the parallel flag array.  The mean is
    the restricted mean E[min(T, t_max)] and the half-width is its 95%
    normal-theory confidence interval.
    """

    times: np.ndarray
    bound: np.ndarray
    n_bound: int
    mean_restricted: float
    ci95_halfwidth: float

    @property
    def n_paths(self) -> int:
        return len(self.times)

    @property
    def censored_fraction(self) -> float:
        return 1.0 - self.n_bound / self.n_paths


def simulate(geom: Geometry, r0: float, cfg: McConfig) -> BindingSample:
    """Run the configured ensemble from radius r0 and collect statistics."""
    if not geom.r_b < r0 <= geom.R:
        raise ValueError(f"need r_b < r0 <= R, got r0={r0}")
    step_len = math.sqrt(2.0 * geom.D * cfg.dt)
    if step_len > geom.r_b / 10.0:
        raise ValueError(
            f"dt too coarse: sqrt(2 D dt)={step_len:g} exceeds r_b/10={geom.r_b / 10.0:g}"
        )
    n_steps = int(cfg.t_max / cfg.dt + 1e-9)
    if n_steps < 1:
        raise ValueError("t_max is shorter than one step")
    p_bind = -math.expm1(-cfg.lam * cfg.dt) if cfg.model == DOI else 0.0
    times, bound, _ = _run_paths(
        cfg.n_paths,
        n_steps,
        step_len,
        r0,
        geom.R,
        geom.r_b,
        p_bind,
        cfg.model == DOI,
        cfg.dt,
        cfg.t_max,
        np.uint64(cfg.seed & _MASK64),
    )
    order = np.argsort(times, kind="stable")
    times = times[order]
    bound = bound[order]
    mean = float(times.mean())
    sd = float(times.std(ddof=1)) if cfg.n_paths > 1 else 0.0
    return BindingSample(
        times=times,
        bound=bound,
        n_bound=int(bound.sum()),
        mean_restricted=mean,
        ci95_halfwidth=1.96 * sd / math.sqrt(cfg.n_paths),
    )


def ecdf_at(sample: BindingSample, t: float) -> float:
    """Fraction of paths whose binding happened by time t."""
    bound_times = sample.times[sample.bound]
    return float(np.searchsorted(bound_times, t, side="right")) / sample.n_paths
