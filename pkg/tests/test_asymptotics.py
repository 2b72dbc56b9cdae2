import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asymcert.algebra import Polynomial
from asymcert.asymptotics import (
    ConeDescriptor,
    ConeKind,
    InfeasibleSetError,
    SamplingSchedule,
    asymptotic_cone_of_set,
    cone_generators,
    estimate_asymptotic,
    function_asymptotic_cone,
    find_polyhedron_point,
    poly_asymptotic,
    poly_asymptotic_cone,
    polyhedral_asymptotic_cone,
)
from asymcert.core import Membership, Tier
from asymcert.functions import Abs, Exp, FunctionSpec, OracleSet, PolyExpr, Power, Scale, SqrtAbs, SublevelSet, Sum

from conftest import luo_zhang, poly
from oracles import in_cone_hull, random_cone_member, random_poly

IN, OUT, UNK = Membership.IN, Membership.OUT, Membership.UNKNOWN


def matrices(max_m=6, max_n=4):
    return st.integers(1, max_n).flatmap(
        lambda n: st.integers(0, max_m).flatmap(
            lambda m: st.lists(
                st.lists(st.integers(-3, 3).map(float), min_size=n, max_size=n), min_size=m, max_size=m
            ).map(lambda rows: np.array(rows, dtype=float).reshape(m, n))
        )
    )


@given(matrices(), st.integers(0, 2**16))
def test_generators_span_the_cone(A, seed):
    n = A.shape[1]
    rays, lin = cone_generators(A, n)
    for r in rays:
        assert np.all(A @ r <= 1e-9)
        assert abs(np.linalg.norm(r) - 1) < 1e-9
    if A.shape[0]:
        assert np.allclose(A @ lin, 0, atol=1e-9)
    rng = np.random.default_rng(seed)
    for _ in range(5):
        d = random_cone_member(A, rng) if A.shape[0] else rng.standard_normal(n)
        assert in_cone_hull(d, rays, lin)


@given(matrices(), st.floats(0.01, 100.0), st.integers(0, 100))
def test_membership_is_scale_invariant(A, lam, seed):
    cone = ConeDescriptor.polyhedral(A, A.shape[1])
    for d in cone.sample_directions(16, seed) + [np.random.default_rng(seed).standard_normal(A.shape[1])]:
        assert cone.contains(lam * d) is cone.contains(d)


def test_generators_sorted_and_deterministic():
    A = np.array([[-1.0, 0.0], [0.0, -1.0]])
    rays, lin = cone_generators(A, 2)
    assert [list(r) for r in rays] == [[1.0, 0.0], [0.0, 1.0]]
    assert lin.shape == (2, 0)
    c1 = ConeDescriptor.polyhedral(A, 2)
    assert [list(d) for d in c1.sample_directions(8, 3)] == [list(d) for d in c1.sample_directions(8, 3)]


def test_cone_kinds_and_flags():
    n = 3
    z = ConeDescriptor.zero(n)
    assert z.contains([0, 0, 0]) is IN and z.contains([1, 0, 0]) is OUT
    s = ConeDescriptor.subspace(np.array([[1.0], [1.0], [0.0]]), n)
    assert s.contains([2, 2, 0]) is IN and s.contains([1, 0, 0]) is OUT
    assert ConeDescriptor.subspace(np.zeros((3, 0)), n).kind is ConeKind.ZERO
    assert ConeDescriptor.polyhedral(np.vstack([np.eye(3), -np.eye(3)]), n).kind is ConeKind.ZERO
    outer = ConeDescriptor.polyhedral([[1.0, 0, 0]], n, outer=True)
    assert outer.contains([-1, 0, 0]) is UNK and outer.contains([1, 0, 0]) is OUT
    inner = ConeDescriptor.polyhedral([[1.0, 0, 0]], n, inner=True)
    assert inner.contains([-1, 0, 0]) is IN and inner.contains([1, 0, 0]) is UNK
    both = ConeDescriptor.intersection([s, ConeDescriptor.polyhedral([[-1.0, 0, 0]], n)])
    assert both.contains([1, 1, 0]) is IN and both.contains([-1, -1, 0]) is OUT
    assert both.generators()[0][0] == pytest.approx(np.array([1, 1, 0]) / math.sqrt(2))


def test_to_json_is_plain():
    import json

    c = ConeDescriptor.polyhedral([[-1.0, 0.0]], 2)
    out = json.loads(json.dumps(c.to_json()))
    assert out["kind"] == "POLYHEDRAL" and out["extreme_rays"] == [[0.0, -1.0], [0.0, 1.0]] or "lineality_basis" in out


def test_polyhedral_asymptotic_cone():
    cone = polyhedral_asymptotic_cone([[-1.0, 0.0], [0.0, -1.0]], [0.0, 0.0])
    assert cone.contains([1, 2]) is IN and cone.contains([-1, 0]) is OUT
    with pytest.raises(InfeasibleSetError):
        polyhedral_asymptotic_cone([[1.0], [-1.0]], [-1.0, -1.0])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert polyhedral_asymptotic_cone([[1.0], [-1.0]], [-1.0, -1.0], on_infeasible="zero").kind is ConeKind.ZERO
    assert polyhedral_asymptotic_cone(np.zeros((1, 2)), [1.0]).contains([5, 5]) is IN


def test_find_polyhedron_point():
    A = np.array([[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    x = find_polyhedron_point(A, np.array([1.0, 0.0, 0.0]))
    assert np.all(A @ x <= np.array([1.0, 0.0, 0.0]) + 1e-8)
    assert find_polyhedron_point(np.array([[1.0], [-1.0]]), np.array([0.0, -1.0])) is None


@pytest.mark.parametrize(
    "terms, d, expected",
    [
        ({(2, 0): 1, (0, 1): 1}, (0.0, -1.0), -1.0),
        ({(2, 0): 1, (0, 1): 1}, (1.0, 0.0), math.inf),
        ({(2, 0): -1}, (1.0, 0.0), -math.inf),
        ({(1, 1): 3, (0, 0): 7}, (1.0, 0.0), 0.0),
        ({(0, 0): 2}, (1.0, 1.0), 0.0),
    ],
)
def test_poly_asymptotic_closed_form(terms, d, expected):
    assert poly_asymptotic(Polynomial(2, terms), d).as_float() == expected


def test_luo_zhang_objective_vanishes_on_witness_family():
    f = luo_zhang().objective.polynomial
    for d3 in (0.5, 1.0, 7.0):
        assert poly_asymptotic(f, [0, 0, d3, 0]).as_float() == 0.0


def test_estimator_examples():
    e = FunctionSpec(1, expr=Exp(PolyExpr(Polynomial.variable(1, 0))))
    assert estimate_asymptotic(e, np.array([1.0])).lower_trend.as_float() == math.inf
    assert estimate_asymptotic(e, np.array([-1.0])).lower_trend.as_float() == pytest.approx(0.0, abs=1e-6)
    s = FunctionSpec(1, expr=SqrtAbs(PolyExpr(Polynomial.variable(1, 0))))
    rep = estimate_asymptotic(s, np.array([1.0]))
    assert rep.lower_trend.is_finite and abs(rep.lower_trend.as_float()) < 1e-5
    q = poly(1, {(2,): -1})
    assert estimate_asymptotic(q, np.array([1.0])).lower_trend.as_float() == -math.inf


def test_estimator_matches_closed_form_on_sample():
    rng = np.random.default_rng(99)
    sched = SamplingSchedule()
    for _ in range(25):
        h = random_poly(rng)
        f = FunctionSpec(h.dimension, polynomial=h)
        for j in range(4):
            d = rng.standard_normal(h.dimension)
            d /= np.linalg.norm(d)
            cf = poly_asymptotic(h, d)
            est = estimate_asymptotic(f, d, sched, seed=j).lower_trend
            if cf.is_finite:
                assert est.is_finite and est.as_float() == pytest.approx(cf.as_float(), rel=1e-2, abs=1e-2)
            else:
                assert not est.is_finite and np.sign(est.as_float()) == np.sign(cf.as_float())


def test_schedule_validation():
    assert SamplingSchedule(t0=1, growth=3, steps=3).times().tolist() == [1.0, 3.0, 9.0]
    with pytest.raises(ValueError):
        SamplingSchedule(growth=1.0)


def test_convex_quadratic_cones():
    sq = poly(2, {(2, 0): 1, (0, 2): 1})
    assert function_asymptotic_cone(sq).kind is ConeKind.ZERO
    f = poly(2, {(2, 0): 1, (0, 1): 1})
    K = function_asymptotic_cone(f)
    assert K.generators()[0][0] == pytest.approx([0.0, -1.0])
    lin = poly(2, {(1, 0): 1, (0, 1): 1})
    assert function_asymptotic_cone(lin).contains([1, -1]) is IN
    assert function_asymptotic_cone(lin).contains([1, 0]) is OUT


def test_nonconvex_polynomial_cone_is_sound():
    f = luo_zhang().objective
    K = function_asymptotic_cone(f)
    assert K.contains([0, 0, 1, 0]) is IN
    assert K.contains([0, 0, 1, 1]) is OUT
    # leading part d1^2 - 2 d1 d2 decides the ray
    assert K.contains([1, 1, 0, 0]) is IN
    assert K.contains([1, -1, 0, 0]) is OUT
    assert K.contains([1, 0, 0, 0]) is OUT
    assert poly_asymptotic_cone(f.polynomial).tier is Tier.PROVEN


def test_luo_zhang_set_cone():
    prob = luo_zhang()
    cone = asymptotic_cone_of_set(prob.feasible_set)
    rays, lin = cone.generators()
    assert [list(r) for r in rays] == [[0, 0, 1, 0], [0, 0, 0, 1]]
    assert lin.shape[1] == 0


def test_nonconvex_sets_get_outer_or_sampled_cones():
    g = FunctionSpec(2, expr=Sum([SqrtAbs(PolyExpr(Polynomial.variable(2, 0))), PolyExpr(Polynomial(2, {(0, 1): -1}))]))
    cone = asymptotic_cone_of_set(SublevelSet(g))
    assert cone.contains([0, -1]) is OUT
    assert cone.contains([0, 1]) is not OUT
    O = OracleSet(2, lambda x: x[0] ** 2 <= abs(x[1]))
    oc = asymptotic_cone_of_set(O)
    assert oc.tier is Tier.SAMPLED
    assert oc.contains([0, 1]) is IN and oc.contains([0, -1]) is IN
    assert oc.contains([1, 0]) is OUT and oc.contains([1, 1]) is OUT


def test_abs_sublevel_oracle_cone():
    g = FunctionSpec(2, expr=Sum([Power(PolyExpr(Polynomial.variable(2, 0)), 2), Scale(-1.0, Abs(PolyExpr(Polynomial.variable(2, 1))))]))
    cone = asymptotic_cone_of_set(SublevelSet(g))
    assert cone.outer
    assert cone.contains([1, 0]) is not IN
    assert cone.contains([0, 1]) is not OUT
