import math

import numpy as np
import pytest

from asymcert.certify import certify
from asymcert.decay import classify_decay
from asymcert.functions import Polyhedron
from asymcert.pathsolver import (
    FEAS_TOL,
    InnerSolverError,
    PathStatus,
    RegSchedule,
    regularization_path,
    solve_regularized,
)
from asymcert.problem import ProblemSpec

from conftest import asu_paul, exp_line, luo_zhang, neg_sqrt, poly
from oracles import grid_min_1d


def _path(prob, seed=0, **kw):
    p = classify_decay(prob.objective, prob.feasible_set, seed, estimate=False).p
    return regularization_path(prob, RegSchedule(exponent_p=p, **kw), seed)


def test_schedule():
    s = RegSchedule(r0=2.0, decay_factor=0.25, max_steps=3)
    assert s.radii().tolist() == [2.0, 0.5, 0.125]
    for bad in (dict(r0=0.0), dict(decay_factor=1.0), dict(max_steps=0), dict(exponent_p=-1.0)):
        with pytest.raises(ValueError):
            RegSchedule(**bad)


def test_square_converges_to_origin():
    tr = _path(ProblemSpec(poly(1, {(2,): 1})))
    assert tr.status is PathStatus.CONVERGED
    assert abs(tr.x_star[0]) < 1e-6 and tr.f_star < 1e-10


def test_neg_sqrt_regularized_minimizer():
    # d/dx (-sqrt x + r x^2) = 0  at  x = (1 / (4 r))**(2/3)
    r = 0.1
    x = solve_regularized(neg_sqrt(), 1.0, r)
    assert x[0] == pytest.approx((1 / (4 * r)) ** (2 / 3), rel=1e-5)
    grid, _ = grid_min_1d(lambda t: -math.sqrt(t) + r * t * t, 0.0, 10.0)
    assert x[0] == pytest.approx(grid, abs=1e-5)


def test_exp_regularized_minimizer():
    r = 0.25
    x = solve_regularized(exp_line(), 1.0, r)
    grid, _ = grid_min_1d(lambda t: math.exp(t) + r * t * t, -10.0, 10.0)
    assert x[0] == pytest.approx(grid, abs=1e-6)


def test_sqrt_constrained_example_converges():
    tr = _path(asu_paul())
    assert tr.status is PathStatus.CONVERGED
    assert tr.x_star == pytest.approx([0.0, 0.0], abs=1e-5)
    assert tr.f_star == pytest.approx(0.0, abs=1e-8)


@pytest.mark.parametrize("make, sign", [(neg_sqrt, 1.0), (exp_line, -1.0)])
def test_unattained_examples_diverge(make, sign):
    tr = _path(make())
    assert tr.status is PathStatus.DIVERGENT
    assert np.sign(tr.direction[0]) == sign
    assert "caveat" in tr.to_json()


@pytest.mark.parametrize("make", [asu_paul, neg_sqrt, exp_line])
def test_iterates_respect_probe_bound_and_feasibility(make):
    prob = make()
    tr = _path(prob, max_steps=10)
    x0 = prob.probe(0)
    f0 = prob.objective(x0)
    for s in tr.iterates:
        q = tr.exponent_p + 1
        assert s.f_value <= f0 + s.r * np.linalg.norm(x0) ** q + 1e-8
        assert s.reg_value == pytest.approx(prob.objective(s.x) + s.r * np.linalg.norm(s.x) ** q, rel=1e-12, abs=1e-12)
        assert prob.feasible_set.contains(s.x) or all(g(s.x) <= FEAS_TOL for g in prob.constraints)


def test_path_is_deterministic():
    a = _path(asu_paul(), seed=3, max_steps=8).to_json()
    b = _path(asu_paul(), seed=3, max_steps=8).to_json()
    assert a == b


def test_inner_solver_errors():
    with pytest.raises(ValueError):
        solve_regularized(asu_paul(), 1.0, 0.0)
    # a nonconvex constraint with no feasible point
    prob = ProblemSpec(poly(1, {(1,): 1}), constraints=[poly(1, {(2,): 1, (0,): 1})], probe_points=[[0.0]])
    with pytest.raises(InnerSolverError):
        solve_regularized(prob, 1.0, 0.5, starts=[np.array([0.0]), np.array([1.0])])


@pytest.mark.parametrize(
    "prob",
    [
        ProblemSpec(poly(2, {(1, 1): 1}), C=Polyhedron.box([-1, -1], [1, 1])),
        ProblemSpec(poly(2, {(1, 0): 1, (0, 1): 1}), C=Polyhedron([[-1.0, 0.0], [0.0, -1.0]], [0.0, 0.0])),
        ProblemSpec(poly(2, {(0, 1): 1}), C=Polyhedron([[0.0, -1.0]], [0.0])),
        luo_zhang(poly(4, {(0, 0, 1, 0): 1, (0, 0, 0, 1): 1})),
    ],
    ids=["box", "quadrant", "half_plane", "linear_on_parabolas"],
)
def test_proven_instances_converge(prob):
    assert certify(prob).verdict.proven
    tr = _path(prob)
    assert tr.status is PathStatus.CONVERGED
