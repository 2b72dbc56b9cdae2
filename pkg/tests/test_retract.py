import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymcert.algebra import ConvexityStatus, Polynomial
from asymcert.asymptotics import ConeKind
from asymcert.core import Membership
from asymcert.functions import Exp, FunctionSpec, NegSqrt, OracleSet, PolyExpr, Polyhedron, SublevelSet, Sum
from asymcert.retract import (
    FalsifierBudget,
    Violation,
    constancy_space,
    convex_poly_retractive_cone,
    falsify_fun_retractive,
    falsify_set_retractive,
    function_retractive_cone,
    level_set_retractive_falsifier,
    lineality_space,
    set_retractive_inner,
)

from conftest import asu_paul, luo_zhang, poly
from oracles import brute_constancy

IN, OUT = Membership.IN, Membership.OUT


def _assert_set_witness(X, d, w):
    assert w is not None
    assert len(w.points) >= 5
    for x in w.points:
        assert X.contains(x)
        assert not X.contains(x - w.rho * np.asarray(d, dtype=float))


def test_parabola_epigraph_witness():
    epi = SublevelSet(poly(2, {(2, 0): 1, (0, 1): -1}))
    res = falsify_set_retractive(epi, [0, 1])
    _assert_set_witness(epi, [0, 1], res.witness)
    for x, t in zip(res.witness.points, res.witness.times):
        assert x[1] == pytest.approx(t)
        assert x[0] == pytest.approx(np.sqrt(t), rel=0.5)
    assert res.witness.violation is Violation.SET_EXIT


def test_neg_sqrt_epigraph_witness():
    g = FunctionSpec(2, expr=Sum([NegSqrt(2, 0), PolyExpr(Polynomial(2, {(0, 1): -1}))]))
    epi = SublevelSet(g)
    res = falsify_set_retractive(epi, [1, 0])
    _assert_set_witness(epi, [1, 0], res.witness)
    for x in res.witness.points:
        assert x[1] == pytest.approx(-np.sqrt(x[0]), rel=0.5)


@pytest.mark.parametrize("d", [(0.0, 1.0), (0.0, -1.0)])
def test_oracle_set_witness(d):
    X = OracleSet(2, lambda x: x[0] ** 2 <= abs(x[1]))
    res = falsify_set_retractive(X, d)
    _assert_set_witness(X, d, res.witness)


def test_polyhedra_never_yield_witnesses():
    P = Polyhedron([[-1.0, 0.0], [0.0, -1.0], [1.0, -1.0]], [0.0, 0.0, 1.0])
    for d in ([0.0, 1.0], [1.0, 1.0], [0.5, 1.0]):
        res = falsify_set_retractive(P, d, FalsifierBudget(curve_families=4))
        assert not res.found and res.curves_tried > 0
    # not in the asymptotic cone: precondition fails honestly
    assert "precondition" in falsify_set_retractive(P, [1.0, 0.0]).note


def test_function_witnesses():
    f = FunctionSpec(1, expr=NegSqrt(1, 0))
    res = falsify_fun_retractive(f, [1.0])
    assert res.found and res.witness.violation is Violation.FUNCTION_INCREASE
    for x in res.witness.points:
        assert f(x - res.witness.rho) > f(x)
    e = FunctionSpec(1, expr=Exp(PolyExpr(Polynomial.variable(1, 0))))
    assert falsify_fun_retractive(e, [-1.0]).found
    lin = poly(2, {(1, 0): 1})
    assert not falsify_fun_retractive(lin, [0.0, 3.0]).found
    assert falsify_fun_retractive(lin, [-1.0, 3.0]).found  # f(x - d) = f(x) + 1


def test_level_set_falsifier():
    f = poly(2, {(2, 0): 1, (0, 1): -1})
    assert level_set_retractive_falsifier(f, 0.0, [0, 1]).found
    assert not level_set_retractive_falsifier(poly(2, {(1, 0): 1}), 1.0, [-1, 0]).found


def test_budget_validation():
    with pytest.raises(ValueError):
        FalsifierBudget(ray_scalings=3)
    with pytest.raises(ValueError):
        FalsifierBudget(rho_grid=(1.0, 0.0))
    with pytest.raises(ValueError):
        FalsifierBudget(curve_families=-1)
    assert FalsifierBudget().rhos(np.array([3.0, 4.0])) == [1.0, 5.0, 10.0]
    assert FalsifierBudget().rhos(np.array([1.0, 0.0])) == [1.0, 10.0]
    with pytest.raises(ValueError):
        falsify_set_retractive(Polyhedron.whole_space(2), [0.0, 0.0])


def test_constancy_space_quadratic():
    h = poly(3, {(2, 0, 0): 1, (1, 1, 0): 2, (0, 2, 0): 1, (0, 0, 1): 1})  # (x+y)^2 + z
    C = constancy_space(h.polynomial)
    assert C.kind is ConeKind.LINEAR_SUBSPACE
    assert C.contains([1, -1, 0]) is IN and C.contains([0, 0, 1]) is OUT
    lin = lineality_space([[1.0, 1.0, 0.0]], [1.0])
    assert lin.contains([1, -1, 5]) is IN and lin.contains([1, 0, 0]) is OUT


def _linear_form(u):
    return sum((Polynomial.variable(3, i) * float(c) for i, c in enumerate(u) if c), Polynomial(3, {}))


small_vec = st.lists(st.integers(-2, 2), min_size=3, max_size=3)


@settings(max_examples=30)
@given(st.lists(small_vec, min_size=0, max_size=2), small_vec, small_vec,
       st.sampled_from([(1, 0, 0), (0, 1, 0), (1, -1, 0), (1, 1, 1), (2, -1, 1), (0, 1, -2)]), st.integers(0, 1000))
def test_constancy_space_matches_brute_force(rows, u, c, d, seed):
    # convex: sum of squared forms, a quartic form and a linear part
    h = _linear_form(c)
    for r in rows:
        q = _linear_form(r)
        h = h + q * q
    q = _linear_form(u)
    h = h + q * q * q * q
    got = constancy_space(h).contains(d)
    assert got in (IN, OUT)
    assert (got is IN) == brute_constancy(h, d, np.random.default_rng(seed), points=200)


def test_convex_poly_retractive_cone():
    h = Polynomial(2, {(2, 0): 1})
    cone = convex_poly_retractive_cone(h, ConvexityStatus.PROVEN_CONVEX)
    assert cone.contains([0, -1]) is IN and cone.contains([1, 0]) is OUT
    assert convex_poly_retractive_cone(Polynomial(2, {(2, 0): 1, (0, 1): 1}), "ASSERTED").kind is ConeKind.ZERO
    with pytest.raises(ValueError):
        convex_poly_retractive_cone(Polynomial(2, {(1, 1): 1}), ConvexityStatus.NOT_CONVEX)


def test_retractive_cones_of_examples():
    X = luo_zhang().feasible_set
    inner = set_retractive_inner(X)
    assert inner is not None and inner.inner
    f = function_retractive_cone(luo_zhang().objective)
    assert f.contains([0, 0, 1, 1]) is OUT  # f grows along it
    assert set_retractive_inner(asu_paul().feasible_set) is None or set_retractive_inner(asu_paul().feasible_set).contains([0, 1]) is not OUT


def test_constancy_of_parabolic_constraints():
    # x1^2 - x3 is constant along d iff d1 = d3 = 0; the two constraints share only 0
    g1, g2 = (g.polynomial for g in luo_zhang().constraints)
    C1, C2 = constancy_space(g1), constancy_space(g2)
    assert C1.contains([0, 1, 0, 1]) is IN
    assert C1.contains([0, 0, 1, 0]) is OUT and C1.contains([1, 0, 0, 0]) is OUT
    assert C1.basis.shape[1] == C2.basis.shape[1] == 2
    assert np.linalg.matrix_rank(np.hstack([C1.basis, C2.basis])) == 4
