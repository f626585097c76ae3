import dataclasses

import numpy as np
import pytest

from twistrenorm.config import TOL
from twistrenorm.errors import InvalidSchedule, TwistRenormError
from twistrenorm.renorm import (GeneratingSystem, _residual, degree_continuation,
                                fd_jacobian, fixed_point_solve, midpoint_residual, pack,
                                renormalize, residual_vector, scaling_from_midpoint,
                                seed_system, solve_midpoint, validate_schedule)
from twistrenorm.series import BivariateSeries, _pad, _to_vec, evaluate, partial


def sum_series(d=3):
    return BivariateSeries.from_terms({(1, 0): 1.0, (0, 1): 1.0}, d)


@pytest.mark.parametrize("lam", [-0.25, -0.6])
def test_midpoint_of_sum_is_affine(lam):
    z = solve_midpoint(sum_series(), lam)
    expect = BivariateSeries.from_terms({(1, 0): -lam / 2, (0, 1): -lam / 2}, 3)
    np.testing.assert_allclose(z.coeffs, expect.coeffs, atol=1e-14)


def test_midpoint_of_second_argument_is_zero():
    z = solve_midpoint(BivariateSeries.from_terms({(0, 1): 1.0}, 3), -0.3)
    assert np.abs(z.coeffs).max() <= 1e-14


def test_renormalize_sum_by_hand():
    lam = -0.3
    Rs, z = renormalize(GeneratingSystem(sum_series(1), lam))
    mu = scaling_from_midpoint(z)
    assert mu == pytest.approx(-lam / 2, abs=1e-15)
    raw = BivariateSeries.from_terms({(0, 1): lam / 2, (1, 0): -lam / 2}, 1)
    np.testing.assert_allclose((Rs * mu).coeffs, raw.coeffs, atol=1e-15)


def test_fixed_point_is_self_consistent(gen):
    Rs, z = renormalize(gen)
    assert np.abs((Rs - gen.s).coeffs).max() <= 1e-8
    assert evaluate(z, 1.0, 0.0) == pytest.approx(1.0, abs=TOL.z_normalization)
    assert evaluate(z, 0.0, 1.0) == pytest.approx(1.0, abs=TOL.z_normalization)
    assert z.is_symmetric(1e-14)


def test_operator_is_not_locally_constant(gen):
    c = np.array(gen.s.coeffs)
    c[2, 1] += 1e-4
    g = GeneratingSystem(BivariateSeries(c, gen.domain), gen.lam, z=gen.z)
    Rs, _ = renormalize(g)
    assert np.abs((Rs - g.s).coeffs).max() > 1e-5


def test_scalings(gen, solved):
    rep = solved[1]
    assert abs(gen.lam + 0.249) <= 2e-3
    assert abs(gen.mu - 0.061) <= 2e-3
    assert abs(gen.mu - evaluate(partial(gen.z, 0), 1.0, 0.0)) <= 1e-9
    assert rep.gated and rep.converged


def test_resolve_is_idempotent(gen):
    g2, rep = fixed_point_solve(gen, gen.degree)
    assert abs(g2.lam - gen.lam) <= 1e-12


def test_midpoint_equation_on_grid(gen):
    assert midpoint_residual(gen.s, gen.lam, gen.z, 20) <= TOL.midpoint_grid


def test_normalizations(gen):
    e0, e1 = gen.gauge_errors()
    assert abs(e0) <= 1e-12 and abs(e1) <= 1e-12


def test_continuation_is_cauchy(solved):
    lams = [rep.lam for _, rep in solved[2]]
    assert [rep.degree for _, rep in solved[2]] == [6, 10, 14, 20]
    assert abs(lams[3] - lams[2]) < abs(lams[2] - lams[1])


def test_smoke_schedule_six():
    (g, rep), = degree_continuation([6], gate_final=False)
    assert rep.converged
    assert rep.residual_norm < 1e-5
    assert abs(g.lam + 0.249) < 5e-3


@pytest.mark.parametrize("bad", [[], [6, 6], [10, 6], [1, 4], [8, 12]])
def test_invalid_schedules(bad):
    with pytest.raises(InvalidSchedule):
        validate_schedule(bad)


def test_errors_carry_degree():
    tiny = dataclasses.replace(TOL, residual=1e-30)
    with pytest.raises(TwistRenormError) as info:
        degree_continuation([6], tol=tiny)
    assert info.value.context["degree"] == 6


def test_jacobian_matches_central_directional_derivative(rng):
    g = GeneratingSystem(seed_system(6).s, -0.25)
    g = fixed_point_solve(g, 6, gate=False)[0]
    J = fd_jacobian(g)
    v = pack(g)
    zvec = _to_vec(_pad(g.z.coeffs, g.degree))
    eps = 1e-5
    for _ in range(5):
        d = rng.normal(size=len(v))
        d /= np.linalg.norm(d)
        rp = _residual(v + eps * d, g.degree, zvec, TOL)[0]
        rm = _residual(v - eps * d, g.degree, zvec, TOL)[0]
        probe = (rp - rm) / (2 * eps)
        assert np.linalg.norm(J @ d - probe) <= 1e-5 * np.linalg.norm(probe)


def test_residual_vector_vanishes_at_fixed_point(gen):
    assert np.abs(residual_vector(gen)).max() < 1e-12


def test_seed_is_normalized():
    g = seed_system(6)
    # the exact midpoint is a square root; degree 6 only approximates it
    z = solve_midpoint(g.s, g.lam)
    assert evaluate(z, 1.0, 0.0) == pytest.approx(1.0, abs=TOL.z_normalization)
    assert scaling_from_midpoint(z) == pytest.approx(0.0625, abs=TOL.z_normalization)
    z = solve_midpoint(g.s, g.lam, degree=20)
    assert evaluate(z, 1.0, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_system_validation():
    s = sum_series()
    with pytest.raises(ValueError):
        GeneratingSystem(s, 0.2)
    with pytest.raises(ValueError):
        GeneratingSystem(s, -0.2, mu=1.5)


def test_system_dict_round_trip(gen):
    g = GeneratingSystem.from_dict(gen.to_dict())
    assert g.lam == gen.lam and g.mu == gen.mu
    np.testing.assert_array_equal(g.s.coeffs, gen.s.coeffs)
