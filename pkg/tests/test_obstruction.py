import dataclasses

import numpy as np
import pytest

from twistrenorm.config import TOL
from twistrenorm.errors import ChainViolation, ConeEscape, TwistViolation
from twistrenorm.ifs import cloud_points
from twistrenorm.obstruction import (HALF_PI, ConeParams, Direction, clash_experiment,
                                     pullback_direction, pushforward_direction, ratchet_step,
                                     tip_derivative_chain, twist_bound)
from twistrenorm.twistmap import ImplicitMap


@pytest.fixture(scope="module")
def cantor_pts(scope):
    return cloud_points(scope.scal, scope.m, 8)


@pytest.fixture(scope="module")
def cone(scope, cantor_pts):
    return twist_bound(scope.m, cantor_pts)


def test_directions():
    assert Direction.from_vector((1.0, 1.0)).side == "right"
    assert Direction.from_vector((1.0, -1.0)).side == "left"
    assert Direction.from_vector((-1.0, -1.0)).side == "right"
    assert Direction.from_degrees(90).side == "vertical"
    assert Direction.from_degrees(0).side == "horizontal"
    d = Direction.from_degrees(30)
    assert d.from_horizontal == pytest.approx(np.pi / 6)
    assert d.from_vertical == pytest.approx(np.pi / 3)
    np.testing.assert_allclose(Direction.from_vector(-d.vector()).vector(), d.vector())
    with pytest.raises(ValueError):
        Direction(0.3, "left")


def test_chain_identities(gen):
    chain = tip_derivative_chain(gen)
    for rec in chain.identities.values():
        assert rec["relative_error"] <= 1e-6
    assert chain.dXdx_tip < -1e-3
    assert chain.s2_10 > 1e-3 and chain.z2_10 > 1e-3
    assert chain.s2_sum > 1e-3 and chain.s1_lam1 > 1e-3


def test_chain_matches_differential(gen):
    J = ImplicitMap(gen).differential(0.0, 0.0)
    chain = tip_derivative_chain(gen)
    assert abs(chain.dXdx_tip - J[0, 0]) <= 1e-6 * abs(J[0, 0])


def test_chain_detects_wrong_scaling(gen):
    bad = dataclasses.replace(gen, lam=gen.lam + 0.01)
    with pytest.raises(ChainViolation):
        tip_derivative_chain(bad)


def test_shear_violates_twist(shear):
    m = ImplicitMap(shear)
    with pytest.raises(TwistViolation):
        twist_bound(m, np.array([[0.1, 0.0], [0.2, 0.1]]))


def test_twist_bound_near_tip(gen):
    m = ImplicitMap(gen)
    pts = np.column_stack([np.linspace(-1e-3, 1e-3, 11), np.zeros(11)])
    assert twist_bound(m, pts).twist_bound <= -1.0 + 1e-2


def test_twist_bound_is_stable_under_denser_sampling(scope, cone):
    dense = twist_bound(scope.m, cloud_points(scope.scal, scope.m, 11))
    assert abs(dense.twist_bound - cone.twist_bound) <= 0.05 * abs(cone.twist_bound)
    assert cone.twist_bound < 0.0


def test_cone_params_validated():
    with pytest.raises(ValueError):
        ConeParams(0.1, 0.3, 0.3)
    with pytest.raises(ValueError):
        ConeParams(-1.0, 1.0, 1.0)


def test_vertical_at_tip_turns_horizontal(scope, cone):
    _, out, _ = ratchet_step(scope.m, cone, scope.scal.tip, Direction.from_degrees(90))
    assert out.from_horizontal <= cone.horizontal_half_angle


def test_ratchet_flips_half(scope, cone, cantor_pts):
    rng = np.random.default_rng(1)
    d = Direction.from_angle(HALF_PI - 0.5 * cone.half_angle)
    for k in rng.choice(len(cantor_pts), 50, replace=False):
        p = cantor_pts[k]
        _, _, half = ratchet_step(scope.m, cone, p, d, "+")
        assert half == "-"
        _, _, half = ratchet_step(scope.m, cone, p, d, "+", inverse=True)
        assert half == "+"


def test_ratchet_rejects_outside_cone(scope, cone):
    with pytest.raises(ConeEscape):
        ratchet_step(scope.m, cone, scope.scal.tip, Direction.from_degrees(0))


@pytest.mark.parametrize("deg", [45.0, -30.0, 80.0])
def test_transport_closed_form(scope, deg):
    sc = scope.scal
    d = Direction.from_degrees(deg)
    for n in range(1, 15):
        r = (sc.mu / sc.lam) ** n
        v = pullback_direction(sc, n, d)
        assert v[1] / v[0] == pytest.approx(np.tan(d.angle) / r, rel=1e-12)
        w = pushforward_direction(sc, n, v)
        assert w[1] / w[0] == pytest.approx(np.tan(d.angle), rel=1e-12)


@pytest.mark.parametrize("deg", [45.0, 0.0, 90.0, -30.0])
def test_clash(scope, deg):
    rep = clash_experiment(scope.m, scope.scal, 20, Direction.from_degrees(deg), scope.diam,
                           scope.metric)
    assert rep.N is not None and rep.N <= 20
    assert rep.monotone_from_N and rep.sides_stable_from_N
    for step in rep.steps:
        if step.n >= rep.N:
            assert step.opposite and step.near_horizontal(TOL.clash_angle_deg) and step.close()


def test_horizontal_seed_first_image(scope, gen):
    rep = clash_experiment(scope.m, scope.scal, 5, Direction.from_degrees(0), scope.diam,
                           scope.metric)
    # dX/dx < 0 at the tip sends the horizontal to the left of the vertical
    assert rep.first_image.side == "left"
    assert tip_derivative_chain(gen).dXdx_tip < 0


def test_clash_orbit_points_match_iteration(scope):
    rep = clash_experiment(scope.m, scope.scal, 3, Direction.from_degrees(45), scope.diam,
                           scope.metric)
    m, tip = scope.m, scope.scal.tip
    for step in rep.steps[:2]:
        q = tuple(tip)
        for _ in range(2 ** step.n):
            q = m.forward(*q)
        assert np.allclose(q, step.plus_point, atol=1e-8)
