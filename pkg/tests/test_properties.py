"""Property-based checks of the algebraic and geometric invariants."""
import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from twistrenorm.curve import PolylineCurve, hausdorff_to_cloud
from twistrenorm.ifs import DyadicWord, WeightedMetric, hausdorff, odometer_index
from twistrenorm.obstruction import Direction
from twistrenorm.series import BivariateSeries, add, evaluate, mul, partial, scale, substitute_first
from twistrenorm.twistmap import OK, ImplicitMap

coef = st.floats(-2, 2, allow_nan=False, allow_infinity=False)
unit = st.floats(-1, 1, allow_nan=False, allow_infinity=False)


@st.composite
def series(draw, d=None, s=1.0):
    d = draw(st.integers(0, 5)) if d is None else d
    vec = draw(arrays(float, (d + 1) * (d + 2) // 2, elements=coef))
    return BivariateSeries.from_vector(vec * s, d)


@given(series(d=4), series(d=4), unit, unit)
def test_mul_commutes_and_matches_pointwise(f, g, x, X):
    fg, gf = mul(f.padded(8), g.padded(8)), mul(g.padded(8), f.padded(8))
    np.testing.assert_allclose(fg.coeffs, gf.coeffs, rtol=1e-14, atol=1e-13)
    assert evaluate(fg, x, X) == pytest.approx(evaluate(f, x, X) * evaluate(g, x, X),
                                               rel=1e-12, abs=1e-11)


@given(series(d=5), series(d=5), coef, unit, unit)
def test_eval_and_partial_are_linear(f, g, a, x, X):
    h = add(f, scale(g, a))
    assert evaluate(h, x, X) == pytest.approx(evaluate(f, x, X) + a * evaluate(g, x, X),
                                              abs=1e-12)
    for axis in (0, 1):
        np.testing.assert_allclose(partial(h, axis).coeffs,
                                   (partial(f, axis) + scale(partial(g, axis), a)).coeffs,
                                   atol=1e-13)


@given(series(d=4), series(d=4, s=0.1), st.floats(-0.9, 0.9), unit, unit)
def test_substitution_is_pointwise_composition(f, z, a, x, X):
    full = substitute_first(f.padded(16), z.padded(16), a, check_domain=False)
    ref = evaluate(f, evaluate(z, x, X), a * X)
    assert evaluate(full, x, X) == pytest.approx(ref, abs=1e-10)


@given(series(d=3), series(d=3), series(d=3, s=0.1), coef)
def test_substitution_is_linear_in_outer(f, g, z, c):
    sub = lambda h: substitute_first(h, z, -0.25, check_domain=False)
    lhs = sub(add(f, scale(g, c)))
    rhs = add(sub(f), scale(sub(g), c))
    np.testing.assert_allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)


@given(series(d=6))
def test_mixed_partials(f):
    np.testing.assert_array_equal(partial(partial(f, 0), 1).coeffs,
                                  partial(partial(f, 1), 0).coeffs)


@given(st.integers(1, 12).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 2 ** n - 1))))
def test_word_index_round_trip(nk):
    n, k = nk
    w = DyadicWord.from_index(k, n)
    assert w.index() == k and DyadicWord.parse(str(w)) == w


@given(st.integers(1, 10))
def test_odometer_is_a_single_cycle(n):
    seen, k = set(), 0
    for _ in range(2 ** n):
        seen.add(k)
        k = odometer_index(k, n)
    assert k == 0 and len(seen) == 2 ** n


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(0.01, 100))
def test_direction_ignores_scale_and_orientation(u, w, c):
    if abs(u) + abs(w) < 1e-6:
        return
    d = Direction.from_vector((u, w))
    e = Direction.from_vector((-c * u, -c * w))
    assert d.side == e.side and d.angle == pytest.approx(e.angle, abs=1e-12)
    assert -np.pi / 2 < d.angle <= np.pi / 2


@given(arrays(float, (3, 2), elements=st.floats(-10, 10)), st.floats(0.05, 20))
def test_weighted_metric_triangle(p, kappa):
    m = WeightedMetric(kappa)
    assert m.dist(p[0], p[2]) <= m.dist(p[0], p[1]) + m.dist(p[1], p[2]) + 1e-9


@given(arrays(float, (12, 2), elements=st.floats(-5, 5)),
       arrays(float, (12, 2), elements=st.floats(-5, 5)))
def test_hausdorff_symmetric_and_zero_on_self(a, b):
    assert hausdorff(a, b) == hausdorff(b, a)
    assert hausdorff(a, a) == 0.0


@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=30), st.data())
def test_polyline_lipschitz_is_max_pairwise(steps, data):
    t = np.concatenate([[0.0], np.cumsum(steps)])
    t /= t[-1]
    t[-1] = 1.0
    if np.any(np.diff(t) <= 0):
        return
    p = data.draw(arrays(float, (len(t), 2), elements=st.floats(-3, 3)))
    c = PolylineCurve(t, p)
    i, j = np.triu_indices(len(t), 1)
    pairs = np.linalg.norm(p[j] - p[i], axis=1) / (t[j] - t[i])
    assert c.lip == pytest.approx(pairs.max(), rel=1e-12, abs=1e-12)
    assert hausdorff_to_cloud(c, p) <= 1e-12


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9))
def test_map_symplectic_and_reversible(gen, x, X):
    m = ImplicitMap(gen)
    y = -evaluate(gen.s, X, x)
    Xf, Yf, s = m.forward_many(x, y)
    assert int(s) == OK and float(Xf) == pytest.approx(X, abs=1e-10)
    J = m.differential(x, y)
    assert abs(np.linalg.det(J) - 1.0) <= 1e-9
    assert J[0, 1] < 0.0
    assert np.allclose(m.backward(float(Xf), float(Yf)), (x, y), atol=1e-9)
