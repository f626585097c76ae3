import numpy as np
import pytest

from twistrenorm.errors import DomainEscape
from twistrenorm.series import (BivariateSeries, add, evaluate, mul, partial, reciprocal,
                                scale, substitute_first)


def rand_series(rng, d, s=1.0):
    return BivariateSeries.from_vector(rng.normal(size=(d + 1) * (d + 2) // 2) * s, d)


def naive_eval(f, x, X):
    d = f.max_degree
    return sum(f.coeffs[i, j] * x ** i * X ** j for i in range(d + 1) for j in range(d + 1 - i))


def grid(n=10, r=1.0):
    return np.meshgrid(np.linspace(-r, r, n), np.linspace(-r, r, n), indexing="ij")


def test_eval_linear():
    f = BivariateSeries.from_terms({(1, 0): 1.0, (0, 1): 1.0}, 1)
    assert evaluate(f, 1.0, 0.0) == 1.0


def test_eval_antisymmetric_on_diagonal(shear):
    assert evaluate(shear, 0.3, 0.3) == 0.0


def test_eval_matches_naive_sum(rng):
    f = rand_series(rng, 6)
    assert abs(evaluate(f, 0.2, -0.4) - naive_eval(f, 0.2, -0.4)) <= 1e-14


def test_eval_broadcasts_scalar_against_array(rng):
    f = rand_series(rng, 3)
    xs = np.linspace(-1, 1, 5)
    np.testing.assert_allclose(evaluate(f, 0.5, xs), [evaluate(f, 0.5, v) for v in xs])


def test_partial_trivial(shear):
    xX = BivariateSeries.from_terms({(1, 1): 1.0}, 2)
    d = partial(xX, "first")
    np.testing.assert_array_equal(d.coeffs[:2, :2], [[0, 1], [0, 0]])
    assert evaluate(partial(shear, "second"), 0.7, -0.2) == 1.0


def test_mixed_partials_commute(rng):
    f = rand_series(rng, 7)
    a = partial(partial(f, "first"), "second")
    b = partial(partial(f, "second"), "first")
    np.testing.assert_array_equal(a.coeffs, b.coeffs)


def test_partial_matches_central_difference(rng):
    f = rand_series(rng, 5)
    h = 1e-6
    for axis, e in ((0, (h, 0)), (1, (0, h))):
        fd = (evaluate(f, 0.3 + e[0], -0.2 + e[1]) - evaluate(f, 0.3 - e[0], -0.2 - e[1])) / (2 * h)
        assert abs(evaluate(partial(f, axis), 0.3, -0.2) - fd) < 1e-7


def test_mul_monomials():
    x = BivariateSeries.from_terms({(1, 0): 1.0}, 2)
    X = BivariateSeries.from_terms({(0, 1): 1.0}, 2)
    np.testing.assert_array_equal(mul(x, X).coeffs, BivariateSeries.from_terms({(1, 1): 1.0}, 2).coeffs)


def test_add_negation_is_zero(rng):
    f = rand_series(rng, 5)
    assert np.all((f + scale(f, -1.0)).coeffs == 0.0)


def test_mul_pointwise_oracle(rng):
    f, g = rand_series(rng, 3), rand_series(rng, 3)
    prod = mul(f.padded(6), g.padded(6))
    assert prod.truncation == 0.0
    xx, XX = grid()
    assert np.abs(evaluate(prod, xx, XX) - evaluate(f, xx, XX) * evaluate(g, xx, XX)).max() <= 1e-12


def test_mul_tracks_truncation(rng):
    f, g = rand_series(rng, 3), rand_series(rng, 3)
    assert mul(f, g).truncation > 0.0


def test_reciprocal(rng):
    f = BivariateSeries.from_terms({(0, 0): 2.0, (1, 0): 0.3, (0, 1): -0.2}, 8)
    r = reciprocal(f)
    xx, XX = grid(r=0.3)
    assert np.abs(evaluate(r, xx, XX) * evaluate(f, xx, XX) - 1.0).max() < 1e-6


def test_linear_operations_commute_with_eval_and_partial(rng):
    f, g = rand_series(rng, 4), rand_series(rng, 4)
    xx, XX = grid()
    np.testing.assert_allclose(evaluate(add(f, scale(g, 2.5)), xx, XX),
                               evaluate(f, xx, XX) + 2.5 * evaluate(g, xx, XX), atol=1e-13)
    np.testing.assert_allclose(partial(add(f, g), 0).coeffs,
                               (partial(f, 0) + partial(g, 0)).coeffs, atol=0)


def test_substitute_projection_returns_inner(rng):
    f = BivariateSeries.from_terms({(1, 0): 1.0}, 4)
    z = rand_series(rng, 4, 0.1)
    np.testing.assert_allclose(substitute_first(f, z, -0.3).coeffs, z.coeffs, atol=0)


def test_substitute_second_argument_scales():
    f = BivariateSeries.from_terms({(0, 1): 1.0}, 3)
    z = BivariateSeries.from_terms({(1, 0): 0.4, (2, 1): 0.1}, 3)
    out = substitute_first(f, z, -0.249)
    np.testing.assert_allclose(out.coeffs, BivariateSeries.from_terms({(0, 1): -0.249}, 3).coeffs)


def test_substitute_pointwise_oracle(rng):
    f, z = rand_series(rng, 4, 0.3), rand_series(rng, 4, 0.05)
    a = -0.3
    xx, XX = grid()
    # the truncated composition equals the full one only up to dropped terms,
    # so compare with the untruncated composition computed at degree 16
    full = substitute_first(f.padded(16), z.padded(16), a)
    assert full.truncation == 0.0
    ref = evaluate(f, evaluate(z, xx, XX), a * XX)
    assert np.abs(evaluate(full, xx, XX) - ref).max() <= 1e-10


def test_substitute_linear_in_outer(rng):
    f, g, z = rand_series(rng, 4), rand_series(rng, 4), rand_series(rng, 4, 0.1)
    lhs = substitute_first(add(f, scale(g, 3.0)), z, 0.5)
    rhs = add(substitute_first(f, z, 0.5), scale(substitute_first(g, z, 0.5), 3.0))
    np.testing.assert_allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)


def test_substitute_domain_escape():
    f = BivariateSeries.from_terms({(1, 0): 1.0}, 2)
    z = BivariateSeries.from_terms({(0, 0): 3.0}, 2)
    with pytest.raises(DomainEscape):
        substitute_first(f, z, 0.5)


def test_invalid_coefficients_rejected():
    with pytest.raises(ValueError):
        BivariateSeries([[0.0, 1.0], [1.0, 1.0]])
    with pytest.raises(ValueError):
        BivariateSeries([[np.nan]])


def test_dict_round_trip(rng):
    f = rand_series(rng, 5)
    g = BivariateSeries.from_dict(f.to_dict())
    np.testing.assert_array_equal(f.coeffs, g.coeffs)
    assert g.domain == f.domain
