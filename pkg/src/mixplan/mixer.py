"""Velocity blending between the autonomous plan and a human operator.

The autonomy pursues the next planned region center. The operator's velocity
is added with a gain that rises smoothly from zero to one as the distance to
the nearest trap-inducing region grows from d_s to d_s + eps. Below d_s the
operator is cut out entirely and the autonomous command itself is projected
so it never closes in on an unsafe region boundary, which keeps the tracked
distance positive for every future tick.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .workspace import Point, Region, distance, outward_direction

Vec = tuple[float, float]


def rho(s: float) -> float:
    """Smooth bump edge: exp(-1/s) for positive s, zero otherwise."""
    if s <= 0.0:
        return 0.0
    return math.exp(-1.0 / s)


def kappa(d_t: float, d_s: float, eps: float) -> float:
    """Operator authority in [0, 1]. Zero whenever d_t <= d_s, one whenever
    d_t >= d_s + eps, smooth and strictly increasing in between."""
    if d_t <= d_s:
        return 0.0
    if d_t >= d_s + eps:
        return 1.0
    a = rho(d_t - d_s)
    b = rho(eps + d_s - d_t)
    den = a + b
    if den == 0.0:  # both edges underflowed; snap to the nearer end
        return 0.0 if (d_t - d_s) <= (eps + d_s - d_t) else 1.0
    return a / den


def _clamp(v: Vec, limit: float) -> Vec:
    n = math.hypot(v[0], v[1])
    if n <= limit or n == 0.0:
        return v
    s = limit / n
    return (v[0] * s, v[1] * s)


@dataclass(frozen=True)
class MixOutput:
    u: Vec
    u_r: Vec
    kappa: float
    d_t: float


def nav_control(
    x: Point,
    goal: Point,
    unsafe: Sequence[Region],
    gain: float,
    v_max: float,
    d_s: float,
    eps: float,
) -> Vec:
    """Clamped pursuit of the goal point with the inward component toward
    every nearby unsafe region removed. Distance to a convex region never
    decreases along the projected command, so the d_s band is never crossed
    from outside. When the projections cannot agree on a direction the
    command degrades to a full stop."""
    u = _clamp((gain * (goal[0] - x[0]), gain * (goal[1] - x[1])), v_max)
    if not unsafe:
        return u
    near = [
        (distance(r.shape, x), r.rid, r)
        for r in unsafe
    ]
    near = [e for e in near if e[0] <= d_s + eps]
    if not near:
        return u
    near.sort(key=lambda e: (e[0], e[1]))
    for _ in range(8):
        adjusted = False
        for _, _, r in near:
            n = outward_direction(r.shape, x)
            dot = u[0] * n[0] + u[1] * n[1]
            if dot < 0.0:
                u = (u[0] - dot * n[0], u[1] - dot * n[1])
                adjusted = True
        if not adjusted:
            break
    for _, _, r in near:
        n = outward_direction(r.shape, x)
        if u[0] * n[0] + u[1] * n[1] < -1e-12:
            return (0.0, 0.0)
    return u


def mix(
    x: Point,
    goal: Point,
    u_h: Optional[Vec],
    unsafe: Sequence[Region],
    gain: float,
    v_max: float,
    u_h_max: float,
    d_s: float,
    eps: float,
) -> MixOutput:
    """One blending step. d_t is the distance from x to the nearest unsafe
    region, infinite when there is none; the human term enters as
    kappa * u_h with u_h clamped to u_h_max."""
    d_t = math.inf
    for r in unsafe:
        d = distance(r.shape, x)
        if d < d_t:
            d_t = d
    u_r = nav_control(x, goal, unsafe, gain, v_max, d_s, eps)
    k = kappa(d_t, d_s, eps)
    if u_h is None or k == 0.0:
        return MixOutput(u_r, u_r, k, d_t)
    uh = _clamp(u_h, u_h_max)
    u = (u_r[0] + k * uh[0], u_r[1] + k * uh[1])
    return MixOutput(u, u_r, k, d_t)


def step(x: Point, u: Vec, dt: float) -> Point:
    return (x[0] + dt * u[0], x[1] + dt * u[1])
