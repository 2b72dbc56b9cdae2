from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from asymcert.algebra import Polynomial
from asymcert.functions import FunctionSpec, NegSqrt, Exp, PolyExpr, Polyhedron, SqrtAbs, Sum
from asymcert.problem import ProblemSpec

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("repo")

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"


def poly(n, terms):
    return FunctionSpec(n, polynomial=Polynomial(n, terms))


def luo_zhang(objective=None):
    f = objective or poly(4, {(1, 1, 0, 0): -2, (0, 0, 1, 1): 1, (2, 0, 0, 0): 1})
    g1 = poly(4, {(2, 0, 0, 0): 1, (0, 0, 1, 0): -1})
    g2 = poly(4, {(0, 2, 0, 0): 1, (0, 0, 0, 1): -1})
    return ProblemSpec(f, constraints=[g1, g2], name="luo_zhang")


def asu_paul():
    g = FunctionSpec(2, expr=Sum([SqrtAbs(PolyExpr(Polynomial.variable(2, 0))), PolyExpr(Polynomial(2, {(0, 1): -1}))]))
    f = poly(2, {(2, 0): 1, (0, 1): 1})
    return ProblemSpec(f, constraints=[g], name="asu_paul")


def neg_sqrt():
    return ProblemSpec(FunctionSpec(1, expr=NegSqrt(1, 0)), C=Polyhedron([[-1.0]], [0.0]), name="neg_sqrt")


def exp_line():
    return ProblemSpec(FunctionSpec(1, expr=Exp(PolyExpr(Polynomial.variable(1, 0)))), name="exp")


@pytest.fixture(scope="session")
def problems_dir():
    return PROBLEMS


@pytest.fixture(scope="session")
def lz_solve_report():
    """The Luo-Zhang path is the slowest run in the suite; share it."""
    from asymcert.cli import run
    from asymcert.io import parse_problem

    return run("solve", parse_problem(PROBLEMS / "luo_zhang.prob"), seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
