"""Velocity blending: authority gate exactness, safe projection of the
autonomous command and worst-case operator pressure."""
from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixplan.mixer import MixOutput, kappa, mix, nav_control, rho, step
from mixplan.workspace import Disk, Polygon, Region, distance


def _disk(rid, cx, cy, r):
    return Region(rid=rid, shape=Disk((cx, cy), r), labels=frozenset())


# ------------------------------------------------------------ gate profile


def test_rho_vanishes_left_of_zero():
    assert rho(0.0) == 0.0
    assert rho(-3.0) == 0.0
    assert rho(1.0) == math.exp(-1.0)
    assert 0.0 < rho(0.1) < rho(0.5) < rho(5.0) < 1.0


def test_kappa_is_exact_on_both_plateaus():
    d_s, eps = 1.0, 0.5
    for d in (0.0, 0.3, 0.999999, 1.0):
        assert kappa(d, d_s, eps) == 0.0
    for d in (1.5, 1.5000001, 2.0, math.inf):
        assert kappa(d, d_s, eps) == 1.0


def test_kappa_is_half_at_band_center():
    assert kappa(1.25, 1.0, 0.5) == 0.5
    assert kappa(7.0, 5.0, 4.0) == 0.5


def test_kappa_strictly_increases_inside_band():
    d_s, eps = 2.0, 1.0
    xs = [d_s + eps * i / 20.0 for i in range(1, 20)]
    ys = [kappa(x, d_s, eps) for x in xs]
    for a, b in zip(ys, ys[1:]):
        assert a < b
    assert 0.0 < ys[0] and ys[-1] < 1.0


def test_kappa_snaps_when_both_edges_underflow():
    # exp(-1/s) underflows to zero for s below ~1/745, so a band much
    # narrower than that exercises the tie-break branch
    d_s, eps = 1.0, 1e-4
    assert kappa(d_s + 2e-5, d_s, eps) == 0.0
    assert kappa(d_s + 8e-5, d_s, eps) == 1.0


@settings(max_examples=200)
@given(
    d_s=st.floats(0.01, 10.0),
    eps=st.floats(0.01, 10.0),
    d_t=st.floats(0.0, 30.0),
)
def test_kappa_stays_in_unit_interval(d_s, eps, d_t):
    k = kappa(d_t, d_s, eps)
    assert 0.0 <= k <= 1.0
    if d_t <= d_s:
        assert k == 0.0
    if d_t >= d_s + eps:
        assert k == 1.0


# --------------------------------------------------------- safe projection


def test_projection_cancels_inward_pursuit():
    trap = _disk("bad", 0.0, 0.0, 1.0)
    u = nav_control(
        (2.0, 0.0), (0.0, 0.0), [trap], gain=1.0, v_max=1.0, d_s=1.5, eps=0.5
    )
    assert u == (0.0, 0.0)


def test_projection_keeps_tangential_motion():
    trap = _disk("bad", 0.0, 0.0, 1.0)
    u = nav_control(
        (2.0, 0.0), (2.0, 5.0), [trap], gain=1.0, v_max=1.0, d_s=1.5, eps=0.5
    )
    assert u == (0.0, 1.0)


def test_projection_ignores_far_regions():
    trap = _disk("bad", 100.0, 0.0, 1.0)
    u = nav_control(
        (2.0, 0.0), (0.0, 0.0), [trap], gain=1.0, v_max=1.0, d_s=1.5, eps=0.5
    )
    assert u == (-1.0, 0.0)


def test_opposed_walls_degrade_to_stop():
    left = _disk("l", -2.0, 0.0, 1.0)
    right = _disk("r", 2.0, 0.0, 1.0)
    u = nav_control(
        (0.0, 0.0), (5.0, 0.0), [left, right],
        gain=1.0, v_max=1.0, d_s=1.5, eps=0.5,
    )
    assert u == (0.0, 0.0)
    u = nav_control(
        (0.0, 0.0), (0.0, 5.0), [left, right],
        gain=1.0, v_max=1.0, d_s=1.5, eps=0.5,
    )
    assert u == (0.0, 1.0)


@settings(max_examples=300, deadline=None)
@given(
    angle=st.floats(0.0, 2.0 * math.pi),
    radial=st.floats(0.0, 0.9),
    gx=st.floats(-5.0, 5.0),
    gy=st.floats(-5.0, 5.0),
)
def test_projected_command_never_closes_on_a_disk(angle, radial, gx, gy):
    d_s, eps, dt = 1.0, 0.5, 0.05
    trap = _disk("bad", 0.0, 0.0, 1.0)
    # anywhere in the guarded band around the disk
    rr = 1.0 + radial * (d_s + eps)
    x = (rr * math.cos(angle), rr * math.sin(angle))
    u = nav_control(x, (gx, gy), [trap], gain=2.0, v_max=1.2, d_s=d_s, eps=eps)
    before = distance(trap.shape, x)
    after = distance(trap.shape, step(x, u, dt))
    assert after >= before - 1e-9


def test_projection_works_for_polygons():
    wall = Region(
        rid="w",
        shape=Polygon(((0.0, 0.0), (4.0, 0.0), (4.0, 1.0), (0.0, 1.0))),
        labels=frozenset(),
    )
    x = (2.0, 2.0)
    u = nav_control(x, (2.0, -2.0), [wall], gain=1.0, v_max=1.0, d_s=1.5, eps=0.5)
    before = distance(wall.shape, x)
    after = distance(wall.shape, step(x, u, 0.05))
    assert after >= before - 1e-9


# ----------------------------------------------------------------- blending


def test_full_authority_outside_band():
    out = mix(
        (3.0, 0.0), (3.0, 0.0), (0.0, 2.0), [_disk("bad", 0.0, 0.0, 1.0)],
        gain=1.0, v_max=1.2, u_h_max=1.0, d_s=1.0, eps=0.5,
    )
    assert out.d_t == 2.0
    assert out.kappa == 1.0
    assert out.u_r == (0.0, 0.0)
    assert out.u == (0.0, 1.0)  # operator clamp from 2 to u_h_max


def test_operator_cut_out_inside_safety_distance():
    out = mix(
        (1.9, 0.0), (1.9, 0.0), (5.0, 5.0), [_disk("bad", 0.0, 0.0, 1.0)],
        gain=1.0, v_max=1.2, u_h_max=1.5, d_s=1.0, eps=0.5,
    )
    assert out.d_t == pytest.approx(0.9)
    assert out.kappa == 0.0
    assert out.u == out.u_r


def test_half_authority_at_band_center():
    out = mix(
        (2.25, 0.0), (2.25, 0.0), (0.0, 1.0), [_disk("bad", 0.0, 0.0, 1.0)],
        gain=1.0, v_max=1.2, u_h_max=1.5, d_s=1.0, eps=0.5,
    )
    assert out.kappa == 0.5
    assert out.u == (0.0, 0.5)


def test_no_operator_input_passes_autonomy_through():
    out = mix(
        (3.0, 0.0), (7.0, 0.0), None, [],
        gain=1.0, v_max=1.2, u_h_max=1.5, d_s=1.0, eps=0.5,
    )
    assert out.d_t == math.inf
    assert out.kappa == 1.0
    assert out.u == out.u_r == (1.2, 0.0)


def test_d_t_takes_nearest_region():
    traps = [_disk("a", 10.0, 0.0, 1.0), _disk("b", -4.0, 0.0, 1.0)]
    out = mix(
        (0.0, 0.0), (0.0, 0.0), None, traps,
        gain=1.0, v_max=1.0, u_h_max=1.0, d_s=1.0, eps=0.5,
    )
    assert out.d_t == 3.0


def test_step_integrates_velocity():
    assert step((1.0, 2.0), (0.5, -1.0), 0.1) == (1.05, 1.9)


# -------------------------------------------------- worst-case operator push


def test_relentless_push_toward_trap_never_breaches():
    d_s, eps, dt = 1.0, 0.5, 0.05
    v_max, u_h_max = 1.2, 1.5
    trap = _disk("bad", 0.0, 0.0, 1.0)
    rng = random.Random(99)
    for _ in range(20):
        ang = rng.uniform(0.0, 2.0 * math.pi)
        x = (4.0 * math.cos(ang), 4.0 * math.sin(ang))
        goal = (6.0 * math.cos(ang + 1.0), 6.0 * math.sin(ang + 1.0))
        min_d = math.inf
        for _ in range(600):
            to_trap = (-x[0], -x[1])
            n = math.hypot(*to_trap)
            u_h = (u_h_max * to_trap[0] / n, u_h_max * to_trap[1] / n)
            out = mix(
                x, goal, u_h, [trap],
                gain=2.0, v_max=v_max, u_h_max=u_h_max, d_s=d_s, eps=eps,
            )
            # gate exactness at every tick
            if out.d_t <= d_s:
                assert out.kappa == 0.0
            if out.d_t >= d_s + eps:
                assert out.kappa == 1.0
            x = step(x, out.u, dt)
            min_d = min(min_d, distance(trap.shape, x))
        assert min_d > 0.0


def test_mix_output_is_plain_data():
    out = MixOutput((1.0, 0.0), (1.0, 0.0), 1.0, math.inf)
    assert out.u == (1.0, 0.0)
    with pytest.raises(AttributeError):
        out.kappa = 0.5
