"""Asymptotic functions and asymptotic cones.

Closed forms cover polynomials and polyhedra. Black-box functions and
oracle sets get seeded estimators whose answers are tagged ``Sampled``.

Every :class:`ConeDescriptor` answers membership queries with a sound
three-valued :class:`~asymcert.core.Membership`. A descriptor flagged
``outer`` only describes a superset of the true cone, so its ``IN``
answers are downgraded to ``UNKNOWN``; ``inner`` does the same for
``OUT``.
"""

from __future__ import annotations

import enum
import itertools
import math
import sys
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .algebra import ZERO_TOL, ConvexityStatus, Polynomial, homogeneous_decompose, leading_order, quadratic_form
from .core import ExtendedReal, Membership, Tier, check_matrix, check_vector, weakest_tier
from .curves import DIRECTION_TOL, boundary_curves, direction_deviation, offset_curves, offset_vectors, probe_times
from .functions import (
    FunctionSpec,
    IntersectionSet,
    OracleSet,
    Polyhedron,
    SetSpec,
    SublevelSet,
)

__all__ = [
    "ConeKind",
    "ConeDescriptor",
    "SamplingSchedule",
    "EstimateReport",
    "InfeasibleSetError",
    "DIVERGENCE_THRESHOLD",
    "poly_asymptotic",
    "estimate_asymptotic",
    "polyhedral_asymptotic_cone",
    "asymptotic_cone_of_set",
    "poly_asymptotic_cone",
    "function_asymptotic_cone",
    "cone_generators",
    "find_polyhedron_point",
    "is_set_convex",
]

DIVERGENCE_THRESHOLD = 1e8
TAIL = 5
CONE_TOL = 1e-9


class InfeasibleSetError(ValueError):
    """The feasibility probe found no point in a set that must be nonempty."""


class ConeKind(str, enum.Enum):
    ZERO = "ZERO"
    LINEAR_SUBSPACE = "LINEAR_SUBSPACE"
    POLYHEDRAL = "POLYHEDRAL"
    INTERSECTION = "INTERSECTION"
    ORACLE = "ORACLE"


def _scale_tol(d: np.ndarray, tol: float) -> float:
    return tol * max(1.0, float(np.linalg.norm(d)))


class ConeDescriptor:
    """A closed cone in ``R^n`` described exactly or through an oracle.

    Use the classmethods :meth:`zero`, :meth:`subspace`, :meth:`polyhedral`,
    :meth:`intersection` and :meth:`oracle` rather than the constructor.

    Attributes
    ----------
    kind : ConeKind
    dimension : int
    basis : ndarray, shape (n, k)
        Orthonormal basis for ``LINEAR_SUBSPACE``.
    A : ndarray, shape (m, n)
        Rows of ``{d | A d <= 0}`` for ``POLYHEDRAL``.
    members : tuple of ConeDescriptor
    outer, inner : bool
        The description is only a superset (``outer``) or subset (``inner``)
        of the cone it stands for.
    tier : Tier
        Strength of the evidence behind the description.
    label : str
        Human-readable description used in reports.
    """

    def __init__(
        self,
        kind: ConeKind,
        dimension: int,
        *,
        basis=None,
        A=None,
        members: Sequence["ConeDescriptor"] = (),
        oracle: Callable[[np.ndarray], Membership] | None = None,
        outer: bool = False,
        inner: bool = False,
        tier: Tier = Tier.PROVEN,
        label: str = "",
    ):
        self.kind = ConeKind(kind)
        self.dimension = int(dimension)
        self.basis = None if basis is None else np.asarray(basis, dtype=float).reshape(self.dimension, -1)
        self.A = None if A is None else check_matrix(A, self.dimension, "A")
        self.members = tuple(members)
        self._oracle = oracle
        self.outer = bool(outer)
        self.inner = bool(inner)
        self.tier = Tier(tier)
        self.label = label or self.kind.value
        self._generators = None
        for m in self.members:
            if m.dimension != self.dimension:
                raise ValueError("intersection members must share the ambient dimension")

    # construction
    @classmethod
    def zero(cls, n: int, **kw) -> "ConeDescriptor":
        return cls(ConeKind.ZERO, n, label=kw.pop("label", "{0}"), **kw)

    @classmethod
    def whole_space(cls, n: int, **kw) -> "ConeDescriptor":
        return cls(ConeKind.POLYHEDRAL, n, A=np.zeros((0, n)), label=kw.pop("label", "R^n"), **kw)

    @classmethod
    def subspace(cls, basis, n: int, **kw) -> "ConeDescriptor":
        B = np.asarray(basis, dtype=float).reshape(n, -1)
        if B.shape[1]:
            B = _orth(B)
        if B.shape[1] == 0:
            return cls.zero(n, **kw)
        return cls(ConeKind.LINEAR_SUBSPACE, n, basis=B, **kw)

    @classmethod
    def polyhedral(cls, A, n: int, **kw) -> "ConeDescriptor":
        """``{d | A d <= 0}``; collapses to ``ZERO`` when the cone is trivial."""
        A = check_matrix(A, n, "A")
        rays, lin = cone_generators(A, n)
        if not rays and lin.shape[1] == 0:
            kw["label"] = "{0}"
            return cls.zero(n, **kw)
        out = cls(ConeKind.POLYHEDRAL, n, A=A, **kw)
        out._generators = (rays, lin)
        return out

    @classmethod
    def intersection(cls, members: Sequence["ConeDescriptor"], **kw) -> "ConeDescriptor":
        members = list(members)
        if not members:
            raise ValueError("empty intersection")
        flat: list[ConeDescriptor] = []
        for m in members:
            if m.kind is ConeKind.INTERSECTION and m.outer == kw.get("outer", False):
                flat.extend(m.members)
            else:
                flat.append(m)
        if len(flat) == 1 and not kw:
            return flat[0]
        kw.setdefault("tier", weakest_tier(*(m.tier for m in flat)))
        kw.setdefault("outer", any(m.outer for m in flat))
        kw.setdefault("inner", any(m.inner for m in flat))
        kw.setdefault("label", " & ".join(m.label for m in flat))
        return cls(ConeKind.INTERSECTION, flat[0].dimension, members=flat, **kw)

    @classmethod
    def oracle(cls, n: int, test: Callable[[np.ndarray], Membership], **kw) -> "ConeDescriptor":
        return cls(ConeKind.ORACLE, n, oracle=test, **kw)

    # membership
    def raw_contains(self, d, tol: float = CONE_TOL) -> Membership:
        """Membership in the described set, ignoring the outer/inner flags."""
        d = check_vector(d, self.dimension, "d")
        if not np.any(d):
            return Membership.IN
        eps = _scale_tol(d, tol)
        if self.kind is ConeKind.ZERO:
            return Membership.OUT
        if self.kind is ConeKind.LINEAR_SUBSPACE:
            r = d - self.basis @ (self.basis.T @ d)
            return Membership.IN if np.linalg.norm(r) <= eps else Membership.OUT
        if self.kind is ConeKind.POLYHEDRAL:
            if self.A.shape[0] == 0:
                return Membership.IN
            scale = np.abs(self.A) @ np.abs(d)
            return Membership.IN if np.all(self.A @ d <= tol * np.maximum(1.0, scale)) else Membership.OUT
        if self.kind is ConeKind.INTERSECTION:
            answers = [m.contains(d, tol) for m in self.members]
            if Membership.OUT in answers:
                return Membership.OUT
            if all(a is Membership.IN for a in answers):
                return Membership.IN
            return Membership.UNKNOWN
        return self._oracle(d)

    def contains(self, d, tol: float = CONE_TOL) -> Membership:
        """Sound membership in the cone this descriptor stands for."""
        m = self.raw_contains(d, tol)
        if m is Membership.IN and self.outer and np.any(d):
            return Membership.UNKNOWN
        if m is Membership.OUT and self.inner:
            return Membership.UNKNOWN
        return m

    # exact representations
    @property
    def is_exact(self) -> bool:
        if self.outer or self.inner:
            return False
        if self.kind is ConeKind.INTERSECTION:
            return all(m.is_exact for m in self.members)
        return True

    def polyhedral_rows(self) -> np.ndarray | None:
        """Rows ``A`` with ``cone = {d | A d <= 0}``, when the kind allows it."""
        n = self.dimension
        if self.kind is ConeKind.ZERO:
            return np.vstack([np.eye(n), -np.eye(n)])
        if self.kind is ConeKind.LINEAR_SUBSPACE:
            N = null_space(self.basis.T)
            return np.vstack([N.T, -N.T]).reshape(-1, n)
        if self.kind is ConeKind.POLYHEDRAL:
            return self.A
        if self.kind is ConeKind.INTERSECTION:
            rows = [m.polyhedral_rows() for m in self.members]
            if any(r is None for r in rows):
                return None
            return np.vstack(rows)
        return None

    def generators(self) -> tuple[list[np.ndarray], np.ndarray] | None:
        """Extreme rays and a lineality basis for row-representable cones."""
        if self._generators is None:
            rows = self.polyhedral_rows()
            if rows is None:
                return None
            self._generators = cone_generators(rows, self.dimension)
        return self._generators

    def sample_directions(self, count: int = 256, seed: int = 0) -> list[np.ndarray]:
        """Generators (both signs of the lineality basis) followed by seeded interior samples."""
        gen = self.generators()
        if gen is None:
            return []
        rays, lin = gen
        out = list(rays)
        for j in range(lin.shape[1]):
            out.append(lin[:, j].copy())
            out.append(-lin[:, j])
        if not out:
            return []
        rng = np.random.default_rng(seed)
        for _ in range(count):
            d = np.zeros(self.dimension)
            if rays:
                w = rng.exponential(size=len(rays))
                d += sum(wi * r for wi, r in zip(w, rays))
            if lin.shape[1]:
                d += lin @ rng.standard_normal(lin.shape[1])
            nd = np.linalg.norm(d)
            if nd > 1e-12:
                out.append(d / nd)
        return out

    def to_json(self) -> dict:
        out: dict = {
            "kind": self.kind.value,
            "label": self.label,
            "tier": self.tier.value,
            "outer": self.outer,
            "inner": self.inner,
        }
        if self.kind is ConeKind.LINEAR_SUBSPACE:
            out["basis"] = _round_list(self.basis.T)
        elif self.kind is ConeKind.POLYHEDRAL:
            out["A"] = _round_list(self.A)
        elif self.kind is ConeKind.INTERSECTION:
            out["members"] = [m.to_json() for m in self.members]
        gen = self.generators() if self.kind is not ConeKind.ORACLE else None
        if gen is not None:
            out["extreme_rays"] = _round_list(np.array(gen[0]).reshape(-1, self.dimension))
            out["lineality_basis"] = _round_list(gen[1].T)
        return out

    def __repr__(self) -> str:
        flags = "".join(f",{f}" for f in ("outer", "inner") if getattr(self, f))
        return f"ConeDescriptor({self.kind.value}, n={self.dimension}{flags}, {self.label!r})"


def _round_list(M: np.ndarray) -> list:
    # 12 significant digits keep reports stable against last-bit noise
    return [[float(f"{v:.12g}") + 0.0 for v in row] for row in np.atleast_2d(M)]


def _orth(B: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    if B.size == 0:
        return B
    U, s, _ = np.linalg.svd(B, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s.max())))
    return U[:, :rank]


# ---------------------------------------------------------------------------
# extreme rays


def _null(M: np.ndarray, n: int) -> np.ndarray:
    if M.shape[0] == 0:
        return np.eye(n)
    return null_space(M, rcond=1e-10)


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v) > 1e-12))
    return v if v[i] > 0 else -v


def cone_generators(A, n: int, tol: float = 1e-9) -> tuple[list[np.ndarray], np.ndarray]:
    """Extreme rays and lineality basis of ``{d | A d <= 0}``.

    The lineality space is ``null(A)``. The pointed remainder lives in its
    orthogonal complement, where every extreme ray is cut out by ``r - 1``
    linearly independent active rows. Those subsets are enumerated, which
    is fine at the problem sizes this package targets (``n <= 8``).

    Rays come back as unit vectors sorted in descending lexicographic order.
    """
    A = check_matrix(A, n, "A")
    # normalise and deduplicate rows
    rows = []
    for a in A:
        na = np.linalg.norm(a)
        if na <= tol:
            continue
        a = a / na
        if not any(np.allclose(a, b, atol=1e-12) for b in rows):
            rows.append(a)
    A = np.array(rows).reshape(-1, n)
    L = _orth(_null(A, n)) if A.shape[0] else np.eye(n)
    if L.shape[1]:
        L = np.column_stack([_canonical_sign(L[:, j]) for j in range(L.shape[1])])
    W = _null(L.T, n) if L.shape[1] else np.eye(n)
    r = W.shape[1]
    if r == 0:
        return [], L
    M = A @ W
    rays: list[np.ndarray] = []

    def _try(y):
        z = W @ y
        nz = np.linalg.norm(z)
        if nz <= tol:
            return
        z = z / nz
        if np.all(A @ z <= 1e-9):
            if not any(np.allclose(z, q, atol=1e-9) for q in rays):
                rays.append(z)

    if r == 1:
        for s in (1.0, -1.0):
            _try(np.array([s]))
    else:
        m = M.shape[0]
        for subset in itertools.combinations(range(m), r - 1):
            S = M[list(subset)]
            if np.linalg.matrix_rank(S, tol=1e-10) != r - 1:
                continue
            y = null_space(S, rcond=1e-10)[:, 0]
            _try(y)
            _try(-y)
    rays = [np.where(np.abs(q) < 1e-13, 0.0, q) for q in rays]
    rays.sort(key=lambda q: tuple(-np.round(q, 12)))
    return rays, L


# ---------------------------------------------------------------------------
# asymptotic function of a polynomial


def poly_asymptotic(h: Polynomial, d, tol: float = ZERO_TOL) -> ExtendedReal:
    """Closed-form limit of ``h(t d) / t`` by leading order.

    ``MINUS_INF``/``PLUS_INF`` when the leading order is at least two and
    its part is negative/positive at ``d``, ``phi_1(d)`` when the leading
    order is one, and ``0`` when no part of positive order survives.

    This is the exact asymptotic function of ``h`` when ``h`` is convex or
    of degree at most one. For other polynomials it is the limit along the
    ray only, hence an upper bound; :func:`asymcert.functions.poly_bound`
    gives the matching lower bound.
    """
    d = check_vector(d, h.dimension, "d")
    mu = leading_order(h, d, tol)
    if mu is None:
        return ExtendedReal.finite(0.0)
    val = homogeneous_decompose(h)[mu].part.eval(d)
    if mu == 1:
        return ExtendedReal.finite(val)
    return ExtendedReal.plus_inf() if val > 0 else ExtendedReal.minus_inf()


# ---------------------------------------------------------------------------
# estimator


@dataclass(frozen=True)
class SamplingSchedule:
    """Geometric sampling ``t_k = t0 * growth**k`` for ``k < steps``.

    ``perturbation_radius`` is the radius of the perturbed directions at
    ``t = 1``; it shrinks like ``1 / t_k``.
    """

    t0: float = 4.0
    growth: float = 2.0
    steps: int = 40
    perturbation_radius: float = 1.0
    perturbations: int = 8

    def __post_init__(self):
        if not (self.t0 > 0 and self.growth > 1 and self.steps >= 1 and self.perturbation_radius >= 0):
            raise ValueError("invalid sampling schedule")

    def times(self) -> np.ndarray:
        return self.t0 * self.growth ** np.arange(self.steps)


@dataclass
class EstimateReport:
    """Outcome of :func:`estimate_asymptotic`.

    ``samples[k]`` is the smallest ratio ``f(t_k d') / t_k`` seen at step
    ``k`` (``inf`` when every evaluation left the domain). ``skipped`` lists
    ``(step, perturbation)`` pairs whose evaluation failed.
    """

    lower_trend: ExtendedReal
    samples: list[float]
    times: list[float] = field(default_factory=list)
    skipped: list[tuple[int, int]] = field(default_factory=list)


def _tail_class(tail: Sequence[float]) -> ExtendedReal | None:
    if len(tail) < TAIL:
        return None
    inc = all(b >= a for a, b in zip(tail, tail[1:]))
    dec = all(b <= a for a, b in zip(tail, tail[1:]))
    if inc and tail[0] > DIVERGENCE_THRESHOLD:
        return ExtendedReal.plus_inf()
    if dec and tail[0] < -DIVERGENCE_THRESHOLD:
        return ExtendedReal.minus_inf()
    return None


def estimate_asymptotic(
    f: FunctionSpec,
    d,
    schedule: SamplingSchedule | None = None,
    seed: int = 0,
) -> EstimateReport:
    """Sample ``f(t_k d'_k) / t_k`` along perturbed directions.

    The reported value is the minimum over the last five steps, an upper
    bound on the liminf: only a restricted family of sequences is tried, so
    the estimate never proves anything about ``f_inf(d)`` from below. A
    tail that is monotone and beyond ``1e8`` in size is classified as
    ``PLUS_INF`` or ``MINUS_INF``. Evaluations that fail or return NaN are
    skipped and recorded; ``inf`` values are kept (points off the domain).
    """
    schedule = schedule or SamplingSchedule()
    d = check_vector(d, f.dimension, "d")
    if not np.any(d):
        return EstimateReport(ExtendedReal.finite(0.0), [], [], [])
    rng = np.random.default_rng(seed)
    nd = float(np.linalg.norm(d))
    times = schedule.times()
    samples: list[float] = []
    skipped: list[tuple[int, int]] = []
    for k, t in enumerate(times):
        dirs = [d]
        if schedule.perturbations and schedule.perturbation_radius > 0:
            u = rng.standard_normal((schedule.perturbations, d.size))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
            dirs += list(d + (schedule.perturbation_radius * nd / t) * u)
        best = math.inf
        for j, dp in enumerate(dirs):
            try:
                v = f.value(t * dp)
            except Exception:  # noqa: BLE001 - opaque evaluators may raise anything
                skipped.append((k, j))
                continue
            if math.isnan(v):
                skipped.append((k, j))
                continue
            if abs(v) >= sys.float_info.max:
                v = math.copysign(math.inf, v)  # saturated overflow
            best = min(best, v / t)
        samples.append(best)
    tail = samples[-TAIL:]
    cls = _tail_class(tail)
    if cls is None:
        if all(v == math.inf for v in tail):
            cls = ExtendedReal.plus_inf()
        else:
            finite = [v for v in tail if math.isfinite(v)]
            if finite:
                cls = ExtendedReal.finite(min(finite))
            else:
                cls = ExtendedReal.minus_inf() if min(tail) == -math.inf else ExtendedReal.plus_inf()
    return EstimateReport(cls, samples, [float(t) for t in times], skipped)


# ---------------------------------------------------------------------------
# cones of sets


def _cyclic_projection(A, b, iterations: int, tol: float) -> np.ndarray | None:
    n = A.shape[1]
    x = np.zeros(n)
    norms2 = np.einsum("ij,ij->i", A, A)
    slack = tol * (1.0 + np.abs(b))
    for _ in range(iterations):
        r = A @ x - b
        if np.all(r <= slack):
            return x
        for i in range(A.shape[0]):
            if norms2[i] == 0:
                continue
            ri = A[i] @ x - b[i]
            if ri > 0:
                x = x - (ri / norms2[i]) * A[i]
    return x if np.all(A @ x - b <= slack) else None


def find_polyhedron_point(A, b, iterations: int = 10_000, tol: float = 1e-8) -> np.ndarray | None:
    """A point of ``{x | A x <= b}`` or ``None`` when the polyhedron is empty.

    Solves the Chebyshev-center LP ``max s`` subject to
    ``A x + s ||a_i|| <= b`` and ``0 <= s <= 1``, which lands away from
    the boundary when there is room. Cyclic projections from the origin
    serve as the fallback when the LP solver reports a numerical failure.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.zeros(n)
    norms = np.linalg.norm(A, axis=1)
    res = linprog(
        np.concatenate([np.zeros(n), [-1.0]]),
        A_ub=np.hstack([A, norms[:, None]]),
        b_ub=b,
        bounds=[(None, None)] * n + [(0.0, 1.0)],
        method="highs",
    )
    if res.status == 2:
        return None
    if res.status == 0:
        x = res.x[:n]
        if np.all(A @ x - b <= tol * (1.0 + np.abs(b))):
            return x
    return _cyclic_projection(A, b, iterations, tol)


def polyhedral_asymptotic_cone(A, b, on_infeasible: str = "raise") -> ConeDescriptor:
    """``X_inf = {d | A d <= 0}`` for a nonempty ``X = {x | A x <= b}``.

    Parameters
    ----------
    on_infeasible : {"raise", "zero"}
        What to do when the feasibility probe fails: raise
        :class:`InfeasibleSetError`, or warn and return ``ZERO`` (the
        asymptotic cone of the empty set).
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[-1] if A.ndim == 2 else np.asarray(b).size
    A = check_matrix(A, n, "A")
    b = check_vector(b, A.shape[0], "b") if A.shape[0] else np.zeros(0)
    if not np.any(np.abs(A) > 0) and np.all(b >= 0):
        return ConeDescriptor.whole_space(n)
    if find_polyhedron_point(A, b) is None:
        if on_infeasible == "zero":
            warnings.warn("polyhedron looks infeasible; reporting the cone {0}", RuntimeWarning, stacklevel=2)
            return ConeDescriptor.zero(n, label="{0} (empty set)")
        raise InfeasibleSetError("feasibility probe found no point of {x | Ax <= b}")
    return ConeDescriptor.polyhedral(A, n, label="{d | Ad <= 0}")


def is_set_convex(X: SetSpec) -> bool:
    """Structural convexity: polyhedra and sublevel sets of convex functions."""
    if isinstance(X, Polyhedron):
        return True
    if isinstance(X, SublevelSet):
        return X.g.is_convex
    if isinstance(X, IntersectionSet):
        return all(is_set_convex(p) for p in X.parts)
    return False


def _sublevel_nonempty(g: FunctionSpec, level: float) -> bool | None:
    """Decide ``L_level(g) != {}`` for convex quadratics; ``None`` otherwise."""
    p = g.polynomial
    if p is None or p.degree > 2 or not g.is_convex:
        return None
    Q, c, c0 = quadratic_form(p)
    if not np.any(Q):
        return bool(np.any(c)) or c0 <= level
    x, *_ = np.linalg.lstsq(Q, -c, rcond=None)
    if np.linalg.norm(Q @ x + c) > 1e-9 * (1.0 + np.linalg.norm(c)):
        return True  # unbounded below along a recession direction
    return p.eval(x) <= level + 1e-12 * (1.0 + abs(level))


def _convex_poly_sublevel_cone(g: FunctionSpec, tier: Tier) -> ConeDescriptor:
    n = g.dimension
    p = g.polynomial
    if p.degree <= 2:
        Q, c, _ = quadratic_form(p)
        A = np.vstack([Q, -Q, c[None, :]])
        return ConeDescriptor.polyhedral(A, n, tier=tier, label="{d | Qd = 0, c.d <= 0}")

    def _test(d):
        return Membership.IN if poly_asymptotic(p, d).as_float() <= 0 else Membership.OUT

    return ConeDescriptor.oracle(n, _test, tier=tier, label="{d | g_inf(d) <= 0}")


def _bound_cone_test(g: FunctionSpec) -> Callable[[np.ndarray], Membership]:
    """Membership in ``K(g) = {g_inf <= 0}`` from the bound calculus."""

    def _test(d):
        bd = g.asymptotic_bound(d)
        eps = _scale_tol(d, CONE_TOL)
        if bd.upper <= eps:
            return Membership.IN
        if bd.lower > eps:
            return Membership.OUT
        return Membership.UNKNOWN

    return _test


def _sampled_set_test(X: SetSpec, seed: int, n_vectors: int = 4) -> Callable[[np.ndarray], Membership]:
    """Sampled membership in ``X_inf``: does some probe curve stay in ``X``?"""
    times = probe_times()[-TAIL:]

    def _test(d):
        vs = offset_vectors(d, n_vectors, seed)
        curves = list(offset_curves(d, vs)) + list(boundary_curves(d, vs, X.contains))
        for cv in curves:
            ok = True
            for t in times:
                x = cv.point(t)
                if x is None or not X.contains(x) or direction_deviation(x, t, d) > DIRECTION_TOL:
                    ok = False
                    break
            if ok:
                return Membership.IN
        return Membership.OUT

    return _test


def asymptotic_cone_of_set(X: SetSpec, seed: int = 0) -> ConeDescriptor:
    """Asymptotic cone of a constraint set.

    Polyhedra and sublevel sets of convex polynomials are exact. Sublevel
    sets of other functions come back as an ``ORACLE`` flagged ``outer``
    (they sit inside ``K(g)``). Intersections are exact when every piece is
    closed and convex, otherwise ``outer``. Pure membership oracles get a
    sampled cone with tier ``Sampled``.
    """
    n = X.dimension
    if isinstance(X, Polyhedron):
        return polyhedral_asymptotic_cone(X.A, X.b)
    if isinstance(X, SublevelSet):
        g = X.g
        if g.polynomial is not None and g.is_convex:
            if _sublevel_nonempty(g, X.level) is False:
                warnings.warn("sublevel set is empty; reporting the cone {0}", RuntimeWarning, stacklevel=2)
                return ConeDescriptor.zero(n, label="{0} (empty set)")
            if g.polynomial.degree <= 1:
                Q_c = quadratic_form(g.polynomial)[1]
                return ConeDescriptor.polyhedral(Q_c[None, :], n, tier=g.convexity_tier, label="{d | a.d <= 0}")
            return _convex_poly_sublevel_cone(g, g.convexity_tier)
        test = _bound_cone_test(g)
        if g.is_convex and g.bound_tier is not Tier.UNKNOWN:
            # level sets of closed convex functions have cone K(g) exactly
            return ConeDescriptor.oracle(n, test, tier=weakest_tier(g.convexity_tier, g.bound_tier), label="K(g)")
        if g.bound_tier is Tier.UNKNOWN:
            return ConeDescriptor.oracle(n, _sampled_set_test(X, seed), tier=Tier.SAMPLED, outer=False, label="sampled X_inf")
        return ConeDescriptor.oracle(n, test, outer=True, tier=g.bound_tier, label="K(g) (outer)")
    if isinstance(X, IntersectionSet):
        cones = [asymptotic_cone_of_set(p, seed) for p in X.parts]
        exact = all(is_set_convex(p) for p in X.parts)
        return ConeDescriptor.intersection(cones, outer=(not exact) or any(c.outer for c in cones))
    if isinstance(X, OracleSet):
        return ConeDescriptor.oracle(n, _sampled_set_test(X, seed), tier=Tier.SAMPLED, label=f"sampled X_inf of {X.name}")
    raise TypeError(f"unsupported set type {type(X).__name__}")


# ---------------------------------------------------------------------------
# cones of functions


def poly_asymptotic_cone(f: Polynomial, convexity: ConvexityStatus | None = None) -> ConeDescriptor:
    """``K(f) = {d | f_inf(d) <= 0}`` for a polynomial.

    Convex polynomials of degree at most two get the exact polyhedral form
    ``{d | Qd = 0, c.d <= 0}`` (``ZERO`` when that is trivial). Everything
    else is an ``ORACLE`` whose answers are sound: the ray limit decides
    ``IN``, and ``OUT`` needs a positive lower bound.
    """
    from .algebra import certify_convexity

    n = f.dimension
    status = convexity if convexity is not None else certify_convexity(f)
    if f.degree == 0:
        return ConeDescriptor.whole_space(n, label="R^n")
    if f.degree <= 2 and status.usable:
        Q, c, _ = quadratic_form(f)
        if f.degree == 1:
            return ConeDescriptor.polyhedral(c[None, :], n, label="{d | c.d <= 0}")
        return ConeDescriptor.polyhedral(np.vstack([Q, -Q, c[None, :]]), n, label="{d | Qd = 0, c.d <= 0}")
    convex = status.usable
    tier = Tier.ASSERTED if status is ConvexityStatus.ASSERTED else Tier.PROVEN
    from .functions import poly_bound

    def _test(d):
        bd = poly_bound(f, d, convex)
        eps = _scale_tol(d, CONE_TOL)
        if bd.upper <= eps:
            return Membership.IN
        if bd.lower > eps:
            return Membership.OUT
        return Membership.UNKNOWN

    label = "{d | f_inf(d) <= 0}"
    if f.degree == 2:
        label = "{phi2(d) < 0} | {phi2(d) = 0, phi1(d) <= 0}"
    return ConeDescriptor.oracle(n, _test, tier=tier, label=label)


def function_asymptotic_cone(f: FunctionSpec, seed: int = 0, schedule: SamplingSchedule | None = None) -> ConeDescriptor:
    """``K(f)`` for any :class:`FunctionSpec`.

    Polynomials go through :func:`poly_asymptotic_cone`; expression trees
    and black boxes with declared bounds use the bound calculus; opaque
    black boxes fall back to the estimator (tier ``Sampled``).
    """
    n = f.dimension
    if f.polynomial is not None:
        return poly_asymptotic_cone(f.polynomial, f.convexity)
    if f.bound_tier is not Tier.UNKNOWN:
        return ConeDescriptor.oracle(n, _bound_cone_test(f), tier=f.bound_tier, label="K(f)")
    schedule = schedule or SamplingSchedule()

    def _test(d):
        est = estimate_asymptotic(f, d, schedule, seed).lower_trend
        return Membership.IN if est.as_float() <= _scale_tol(d, 1e-6) else Membership.OUT

    return ConeDescriptor.oracle(n, _test, tier=Tier.SAMPLED, label="sampled K(f)")
