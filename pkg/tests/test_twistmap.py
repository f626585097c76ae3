import warnings

import numpy as np
import pytest

from twistrenorm.errors import DomainEscape, MultipleRootsWarning, NoRoot, SingularTwist
from twistrenorm.series import BivariateSeries, evaluate, partial
from twistrenorm.twistmap import OK, T, ImplicitMap
from twistrenorm.verify import sample_map_points


@pytest.fixture(scope="module")
def fmap(gen):
    return ImplicitMap(gen)


@pytest.fixture(scope="module")
def pts(gen):
    p = sample_map_points(gen.s, 200, np.random.default_rng(3))
    _, _, st = ImplicitMap(gen).forward_many(p[:, 0], p[:, 1])
    assert np.all(st == OK)
    return p


def test_shear_forward_backward(shear):
    m = ImplicitMap(shear)
    assert m.forward(0.2, 0.3) == pytest.approx((0.5, 0.3), abs=1e-15)
    assert m.backward(0.2, 0.3) == pytest.approx((-0.1, 0.3), abs=1e-15)


def test_shear_differential_exact(shear):
    np.testing.assert_array_equal(ImplicitMap(shear).differential(0.1, -0.2), [[1, 1], [0, 1]])


def test_tip_image(gen, fmap):
    X, Y = fmap.forward(0.0, 0.0)
    assert X == pytest.approx(1.0, abs=1e-12)
    assert Y == pytest.approx(evaluate(gen.s, 0.0, 1.0), abs=1e-12)


def test_round_trip(fmap, pts):
    for x, y in pts[:100]:
        assert np.allclose(fmap.backward(*fmap.forward(x, y)), (x, y), atol=1e-10, rtol=0)


def test_reversibility(fmap, pts):
    X, Y, _ = fmap.forward_many(pts[:, 0], pts[:, 1])
    x2, y2, _ = fmap.forward_many(X, -Y)
    assert np.abs(np.column_stack([x2, -y2]) - pts).max() <= 1e-10


def test_determinant_is_one(fmap, pts):
    J, st = fmap.differential_many(pts[:, 0], pts[:, 1])
    assert np.all(st == OK)
    assert np.abs(np.linalg.det(J) - 1.0).max() <= 1e-9


def test_differential_matches_finite_differences(fmap, pts):
    h = 1e-6
    for x, y in pts[:50]:
        J = fmap.differential(x, y)
        fd = np.column_stack([
            (np.array(fmap.forward(x + h, y)) - fmap.forward(x - h, y)) / (2 * h),
            (np.array(fmap.forward(x, y + h)) - fmap.forward(x, y - h)) / (2 * h)])
        assert np.abs(fd - J).max() <= 1e-5 * max(1.0, np.abs(J).max())


def test_vectorized_agrees_with_scalar(fmap, pts):
    X, Y, _ = fmap.forward_many(pts[:10, 0], pts[:10, 1])
    for k in range(10):
        np.testing.assert_allclose(fmap.forward(*pts[k]), (X[k], Y[k]), rtol=0, atol=1e-14)


def test_negative_twist(gen, fmap, pts):
    tw, _ = fmap.twist_many(pts[:, 0], pts[:, 1])
    assert np.all(tw < 0.0)
    assert fmap.twist(0.0, 0.0) == pytest.approx(-1.0, abs=1e-9)
    xx = np.linspace(-1, 1, 21)
    assert np.all(evaluate(partial(gen.s, 0), *np.meshgrid(xx, xx)) > 0.0)


def test_inverse_differential(fmap, pts):
    for x, y in pts[:20]:
        X, Y = fmap.forward(x, y)
        np.testing.assert_allclose(fmap.inverse_differential(X, Y) @ fmap.differential(x, y),
                                   np.eye(2), atol=1e-10)


def test_reflection_conjugacy(fmap):
    J = fmap.differential(0.1, 0.05)
    np.testing.assert_array_equal(T @ T, np.eye(2))
    X, Y = fmap.forward(0.1, 0.05)
    np.testing.assert_allclose(T @ fmap.differential(X, -Y) @ T @ J, np.eye(2), atol=1e-10)


def test_shift_conjugates(gen, fmap):
    c = 0.3
    sm = fmap.with_shift(c)
    X, Y = fmap.forward(0.1, 0.2)
    assert sm.forward(0.1 + c, 0.2) == pytest.approx((X + c, Y), abs=1e-13)


def test_multiple_roots_warn():
    m = ImplicitMap(BivariateSeries.from_terms({(2, 0): 1.0, (0, 0): -0.25}, 2))
    with pytest.warns(MultipleRootsWarning):
        X, _ = m.forward(0.0, 0.0)
    assert abs(X) == pytest.approx(0.5)


def test_no_root():
    m = ImplicitMap(BivariateSeries.from_terms({(2, 0): 1.0, (0, 0): 1.0}, 2))
    with pytest.raises(NoRoot):
        m.forward(0.0, 0.0)


def test_singular_twist():
    # a triple root: Newton only creeps towards it, so s_1 is small but not tiny
    m = ImplicitMap(BivariateSeries.from_terms({(3, 0): 1.0}, 3), singular_twist=1e-6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(SingularTwist):
            m.differential(0.0, 0.0)


def test_outside_domain(fmap):
    with pytest.raises(DomainEscape):
        fmap.forward(5.0, 0.0)
