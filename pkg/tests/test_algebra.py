import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asymcert.algebra import (
    ConvexityStatus,
    Polynomial,
    certify_convexity,
    homogeneous_decompose,
    leading_order,
    quadratic_form,
)

from oracles import naive_eval, random_poly


@st.composite
def polynomials(draw, max_n=6, max_deg=5):
    n = draw(st.integers(1, max_n))
    deg = draw(st.integers(0, max_deg))
    k = draw(st.integers(1, 6))
    terms = {}
    for _ in range(k):
        e = draw(st.lists(st.integers(0, deg), min_size=n, max_size=n))
        if sum(e) > deg:
            continue
        terms[tuple(e)] = terms.get(tuple(e), 0.0) + draw(st.integers(-5, 5))
    return Polynomial(n, terms)


def vectors(n, bound=3.0):
    return st.lists(st.floats(-bound, bound), min_size=n, max_size=n).map(np.array)


def test_eval_and_call():
    p = Polynomial(2, {(2, 0): 1.0, (0, 1): 1.0})
    assert p.eval([2.0, 3.0]) == 7.0
    assert p(np.array([2.0, 3.0])) == 7.0
    assert p.degree == 2


def test_terms_merge_and_drop_zero():
    p = Polynomial(2, [(1.0, (1, 0)), (-1.0, (1, 0)), (2.0, (0, 1))])
    assert p.as_dict() == {(0, 1): 2.0}
    assert Polynomial.zero(3).is_zero()


def test_bad_terms():
    with pytest.raises(ValueError):
        Polynomial(2, {(1,): 1.0})
    with pytest.raises(ValueError):
        Polynomial(2, {(-1, 0): 1.0})
    with pytest.raises(ValueError):
        Polynomial(0, {})


def test_arithmetic():
    x = Polynomial.variable(2, 0)
    y = Polynomial.variable(2, 1)
    p = (x + y) * (x - y)
    assert p.as_dict() == {(2, 0): 1.0, (0, 2): -1.0}
    assert (p + 1).eval([0, 0]) == 1.0
    with pytest.raises(ValueError):
        x + Polynomial.variable(3, 0)


def test_reconstruction_corpus():
    rng = np.random.default_rng(0)
    for _ in range(200):
        h = random_poly(rng, max_n=6, max_deg=5)
        parts = homogeneous_decompose(h)
        assert len(parts) == h.degree + 1
        for _ in range(50):
            x = rng.standard_normal(h.dimension)
            total = sum(p.part.eval(x) for p in parts)
            assert abs(total - h.eval(x)) <= 1e-9 * (1 + abs(h.eval(x)))


def test_eval_matches_naive():
    rng = np.random.default_rng(1)
    for _ in range(50):
        h = random_poly(rng)
        x = rng.standard_normal(h.dimension)
        assert h.eval(x) == pytest.approx(naive_eval(h.as_dict(), x), rel=1e-12, abs=1e-12)


@given(polynomials(), st.sampled_from([0.5, 2.0, -3.0]), st.data())
def test_homogeneity(h, t, data):
    x = data.draw(vectors(h.dimension))
    for p in homogeneous_decompose(h):
        scale = 1 + np.abs(p.part.coefficients()).sum() * max(1.0, np.abs(x).max()) ** p.order * abs(t) ** p.order
        assert abs(p.part.eval(t * x) - t**p.order * p.part.eval(x)) <= 1e-8 * scale


@given(polynomials(), st.data())
def test_grad_matches_central_differences(h, data):
    x = data.draw(vectors(h.dimension, 2.0))
    g = h.grad(x)
    eps = 1e-6
    for i in range(h.dimension):
        e = np.zeros(h.dimension)
        e[i] = eps
        fd = (h.eval(x + e) - h.eval(x - e)) / (2 * eps)
        scale = 1 + np.abs(h.coefficients()).sum() * (1 + np.abs(x).max()) ** h.degree
        assert abs(g[i] - fd) <= 1e-6 * scale


@given(polynomials(), st.floats(0.1, 50.0), st.data())
def test_leading_order_scale_invariant(h, lam, data):
    d = data.draw(vectors(h.dimension))
    assert leading_order(h, lam * d) == leading_order(h, d) or leading_order(h, d) is None


def test_leading_order_examples():
    h = Polynomial(2, {(2, 0): 1.0, (0, 1): 1.0})
    assert leading_order(h, [1.0, 0.0]) == 2
    assert leading_order(h, [0.0, -1.0]) == 1
    assert leading_order(h, [0.0, 0.0]) is None
    assert leading_order(Polynomial.constant(2, 3.0), [1.0, 1.0]) is None


def test_quadratic_form_roundtrip():
    rng = np.random.default_rng(2)
    for _ in range(20):
        n = int(rng.integers(1, 5))
        M = rng.standard_normal((n, n))
        Q = M + M.T
        c = rng.standard_normal(n)
        h = Polynomial.quadratic(Q, c, 1.5)
        Q2, c2, c0 = quadratic_form(h)
        assert np.allclose(Q, Q2) and np.allclose(c, c2) and c0 == 1.5
        x = rng.standard_normal(n)
        assert h.eval(x) == pytest.approx(0.5 * x @ Q @ x + c @ x + 1.5)


def test_certify_convexity():
    assert certify_convexity(Polynomial(2, {(2, 0): 1, (0, 2): 1})) is ConvexityStatus.PROVEN_CONVEX
    assert certify_convexity(Polynomial(2, {(1, 1): 1})) is ConvexityStatus.NOT_CONVEX
    assert certify_convexity(Polynomial(1, {(1,): 3})) is ConvexityStatus.PROVEN_CONVEX
    quartic = Polynomial(1, {(4,): 1})
    assert certify_convexity(quartic) is ConvexityStatus.UNKNOWN
    assert certify_convexity(quartic, asserted=True) is ConvexityStatus.ASSERTED
    assert ConvexityStatus.ASSERTED.usable and not ConvexityStatus.UNKNOWN.usable


def test_immutable_and_hashable():
    p = Polynomial(2, {(1, 0): 1.0})
    q = Polynomial(2, {(1, 0): 1.0})
    assert p == q and hash(p) == hash(q)
    with pytest.raises(AttributeError):
        p.foo = 1
