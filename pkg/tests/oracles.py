"""Independent reference computations for the test suite."""

import itertools

import numpy as np
from scipy.optimize import linprog, nnls

from asymcert.algebra import Polynomial


def random_poly(rng, max_n=5, max_deg=4, max_terms=6, coef=5):
    n = int(rng.integers(1, max_n + 1))
    deg = int(rng.integers(0, max_deg + 1))
    terms = {}
    for _ in range(int(rng.integers(1, max_terms + 1))):
        e = [0] * n
        for _ in range(int(rng.integers(0, deg + 1))):
            e[int(rng.integers(n))] += 1
        terms[tuple(e)] = terms.get(tuple(e), 0.0) + float(rng.integers(-coef, coef + 1))
    return Polynomial(n, terms)


def naive_eval(terms: dict, x) -> float:
    return sum(c * np.prod([xi**e for xi, e in zip(x, ex)]) for ex, c in terms.items())


def kkt_oracle(Q, c, A, b):
    """Minimum of ``0.5 x'Qx + c'x`` over ``Ax <= b`` by active-set enumeration.

    Every equality-constrained KKT system is solved by least squares; the
    best feasible stationary point is the optimum of a bounded convex QP.
    """
    n, m = len(c), len(b)
    best = np.inf
    for k in range(m + 1):
        for S in itertools.combinations(range(m), k):
            AS = A[list(S)]
            K = np.block([[Q, AS.T], [AS, np.zeros((k, k))]])
            rhs = np.concatenate([-c, b[list(S)]])
            sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
            if np.linalg.norm(K @ sol - rhs) > 1e-8 * (1 + np.linalg.norm(rhs)):
                continue
            x = sol[:n]
            if np.all(A @ x <= b + 1e-9):
                best = min(best, 0.5 * x @ Q @ x + c @ x)
    return best


def lp_vertex_oracle(c, A, b):
    """Minimum of ``c'x`` over a bounded-below polyhedron by vertex enumeration.

    Falls back to lines of the lineality space: when ``A`` has a nullspace
    the objective is constant along it for bounded problems, so the
    polyhedron is intersected with its orthogonal complement first.
    """
    n = A.shape[1]
    N = np.linalg.svd(A)[2][np.linalg.matrix_rank(A):] if A.size else np.eye(n)
    rows = np.vstack([A, N, -N]) if N.size else A
    rhs = np.concatenate([b, np.zeros(2 * N.shape[0])]) if N.size else b
    best = np.inf
    for S in itertools.combinations(range(rows.shape[0]), n):
        M = rows[list(S)]
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, rhs[list(S)])
        if np.all(A @ x <= b + 1e-9):
            best = min(best, float(c @ x))
    return best


def grid_min_1d(fun, lo, hi, n=200_001, rounds=3):
    """Dense grid search with two local refinements."""
    for _ in range(rounds):
        xs = np.linspace(lo, hi, n)
        vals = np.array([fun(x) for x in xs])
        k = int(np.argmin(vals))
        lo, hi = xs[max(k - 2, 0)], xs[min(k + 2, n - 1)]
        n = 2001
    return xs[k], vals[k]


def in_cone_hull(d, rays, lin, tol=1e-7):
    """Is ``d`` a nonnegative combination of ``rays`` plus a lineality part?"""
    n = d.size
    cols = list(rays) + [lin[:, j] for j in range(lin.shape[1])] + [-lin[:, j] for j in range(lin.shape[1])]
    if not cols:
        return np.linalg.norm(d) <= tol
    M = np.array(cols).T.reshape(n, -1)
    _, res = nnls(M, d)
    return res <= tol * max(1.0, np.linalg.norm(d))


def random_cone_member(A, rng):
    """Maximize a random linear functional over ``{Ad <= 0, |d|_inf <= 1}``."""
    n = A.shape[1]
    res = linprog(-rng.standard_normal(n), A_ub=A, b_ub=np.zeros(A.shape[0]), bounds=[(-1, 1)] * n, method="highs")
    return res.x


def brute_constancy(h: Polynomial, d, rng, points=1000, tol=1e-7) -> bool:
    """``h(x + s d) == h(x)`` on sampled ``(x, s)``."""
    n = h.dimension
    for _ in range(points):
        x = rng.standard_normal(n) * 3
        s = rng.standard_normal() * 3
        a, b = h.eval(x + s * np.asarray(d)), h.eval(x)
        if abs(a - b) > tol * (1 + abs(a) + abs(b)):
            return False
    return True


def lp_bounded_oracle(c, A) -> bool:
    """``c'x`` is bounded below on a nonempty ``{Ax <= b}`` iff ``-c`` is in the row cone."""
    if A.size == 0:
        return not np.any(c)
    lam, res = nnls(A.T, -np.asarray(c, dtype=float))
    return res <= 1e-8 * (1 + np.linalg.norm(c))


def random_qp(rng):
    """Bounded-below convex QP ``(Q, c, A, b)`` with a strictly feasible point."""
    n = int(rng.integers(1, 4))
    m = int(rng.integers(1, 7))
    r = int(rng.integers(0, n + 1))
    L = rng.standard_normal((n, r))
    Q = L @ L.T
    A = rng.standard_normal((m, n))
    x0 = rng.standard_normal(n)
    b = A @ x0 + rng.uniform(0, 1, m)
    lam = rng.uniform(0, 1, m) * (rng.random(m) < 0.6)
    w = rng.standard_normal(n)
    c = Q @ w - A.T @ lam  # dual feasible, so bounded below
    return Q, c, A, b
