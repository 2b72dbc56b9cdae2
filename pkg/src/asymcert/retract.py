"""Retractive cones: exact where a characterization exists, falsified elsewhere.

A direction ``d`` is retractive for ``X`` when every sequence in ``X``
escaping along ``d`` can eventually be pulled back by ``rho d`` without
leaving ``X``; the function version asks that the pulled-back value does
not increase. Polyhedra and convex polynomials have closed forms. For
everything else the falsifiers below hunt for sequences that break the
definition. Not finding one proves nothing.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import null_space

from .algebra import ConvexityStatus, Polynomial, homogeneous_decompose, quadratic_form
from .asymptotics import (
    CONE_TOL,
    ConeDescriptor,
    InfeasibleSetError,
    find_polyhedron_point,
    is_set_convex,
    polyhedral_asymptotic_cone,
)
from .core import Membership, Tier, check_matrix, check_vector, weakest_tier
from .curves import (
    DIRECTION_TOL,
    Curve,
    boundary_curves,
    direction_deviation,
    offset_curves,
    offset_vectors,
    probe_times,
)
from .functions import MEMBERSHIP_TOL, FunctionSpec, IntersectionSet, Polyhedron, SetSpec, SublevelSet

__all__ = [
    "Violation",
    "RetractionWitness",
    "FalsifierBudget",
    "FalsifierResult",
    "polyhedron_retractive_cone",
    "lineality_space",
    "convex_poly_retractive_cone",
    "constancy_space",
    "falsify_set_retractive",
    "falsify_fun_retractive",
    "intersect_retractive",
    "level_set_retractive_falsifier",
    "set_retractive_inner",
    "function_retractive_cone",
]

PERSISTENCE = 5
UNDERFLOW = 1e-300
INCREASE_TOL = 1e-12
# step-back points must be outside even at this looser tolerance, so that
# curves traced along the tolerance-inflated boundary cannot exit by round-off
EXIT_TOL = 10 * MEMBERSHIP_TOL


class Violation(str, enum.Enum):
    SET_EXIT = "SET_EXIT"
    FUNCTION_INCREASE = "FUNCTION_INCREASE"


@dataclass(frozen=True)
class RetractionWitness:
    """A sequence that refutes retractiveness of ``direction``.

    ``points`` are the tail iterates ``x_k`` (all inside ``X`` or ``dom f``)
    and ``times`` the matching ``t_k``.
    """

    direction: np.ndarray
    rho: float
    points: tuple[np.ndarray, ...]
    violation: Violation
    times: tuple[float, ...] = ()
    curve: str = ""

    def to_json(self) -> dict:
        return {
            "direction": [float(v) for v in self.direction],
            "rho": float(self.rho),
            "violation": self.violation.value,
            "curve": self.curve,
            "times": [float(t) for t in self.times],
            "points": [[float(f"{v:.12g}") + 0.0 for v in p] for p in self.points],
        }


@dataclass(frozen=True)
class FalsifierBudget:
    """Search effort for the falsifiers.

    Attributes
    ----------
    ray_scalings : int
        Number of probe times ``t_k = 2**k``, ``k = 2, 3, ...``.
    rho_grid : tuple of float, optional
        Step-back sizes. ``None`` means ``(1, ||d||, 10)``.
    curve_families : int
        Number of offset vectors ``v``; each spawns twelve offset curves and
        two boundary-tracing curves.
    seed : int
    """

    ray_scalings: int = 31
    rho_grid: tuple[float, ...] | None = None
    curve_families: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.ray_scalings < PERSISTENCE or self.curve_families < 0:
            raise ValueError("budget must allow at least five probe times")
        if self.rho_grid is not None and any(r <= 0 for r in self.rho_grid):
            raise ValueError("rho values must be positive")

    def rhos(self, d: np.ndarray) -> list[float]:
        if self.rho_grid is not None:
            return list(self.rho_grid)
        out = []
        for r in (1.0, float(np.linalg.norm(d)), 10.0):
            if not any(abs(r - q) <= 1e-12 * q for q in out):
                out.append(r)
        return out

    def to_json(self) -> dict:
        return {
            "ray_scalings": self.ray_scalings,
            "rho_grid": None if self.rho_grid is None else list(self.rho_grid),
            "curve_families": self.curve_families,
            "seed": self.seed,
        }


@dataclass
class FalsifierResult:
    """Outcome of a falsifier run; ``witness is None`` means none was found."""

    witness: RetractionWitness | None
    budget: FalsifierBudget
    note: str = ""
    curves_tried: int = 0

    @property
    def found(self) -> bool:
        return self.witness is not None

    def to_json(self) -> dict:
        return {
            "witness": None if self.witness is None else self.witness.to_json(),
            "budget": self.budget.to_json(),
            "note": self.note,
            "curves_tried": self.curves_tried,
        }


# ---------------------------------------------------------------------------
# exact cones


def polyhedron_retractive_cone(A, b) -> ConeDescriptor:
    """``R(X) = X_inf = {d | A d <= 0}`` for a nonempty polyhedron."""
    cone = polyhedral_asymptotic_cone(A, b)
    cone.label = "R(X) = " + cone.label
    return cone


def lineality_space(A, b=None) -> ConeDescriptor:
    """``Lin(X) = {d | A d = 0}``; ``b`` enables the feasibility check."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        n = A.shape[-1] if A.ndim == 2 else (len(b) if b is not None else 0)
        if n == 0:
            raise ValueError("cannot infer the dimension from an empty matrix")
        return ConeDescriptor.whole_space(n, label="Lin = R^n")
    A = check_matrix(A, None, "A")
    n = A.shape[1]
    if b is not None and find_polyhedron_point(A, check_vector(b, A.shape[0], "b")) is None:
        raise InfeasibleSetError("feasibility probe found no point of {x | Ax <= b}")
    return ConeDescriptor.subspace(null_space(A, rcond=1e-10), n, label="{d | Ad = 0}")


def constancy_space(h: Polynomial) -> ConeDescriptor:
    """``{d | phi_i(d) = 0 for all i >= 1}`` without any convexity check.

    For a convex polynomial this is both the constancy space and the
    retractive cone. For degree at most two it is the joint nullspace of
    the quadratic-form matrix and the linear part.
    """
    n = h.dimension
    if h.degree <= 2:
        Q, c, _ = quadratic_form(h)
        M = np.vstack([Q, c[None, :]])
        if not np.any(M):
            return ConeDescriptor.whole_space(n, label="C(h) = R^n")
        return ConeDescriptor.subspace(null_space(M, rcond=1e-10), n, label="{d | Qd = 0, c.d = 0}")
    parts = homogeneous_decompose(h)[1:]

    def _test(d):
        from .algebra import _is_zero_value  # scale-aware zero test shared with leading_order

        for hp in parts:
            if hp.part.is_zero():
                continue
            if not _is_zero_value(hp.part.eval(d), hp.part, d, hp.order, 1e-9):
                return Membership.OUT
        return Membership.IN

    return ConeDescriptor.oracle(n, _test, label="{d | phi_i(d) = 0, i >= 1}")


def convex_poly_retractive_cone(h: Polynomial, convexity: ConvexityStatus) -> ConeDescriptor:
    """``R(h) = C(h)`` for a convex polynomial ``h``.

    Raises
    ------
    ValueError
        If ``convexity`` is not ``PROVEN_CONVEX`` or ``ASSERTED``.
    """
    convexity = ConvexityStatus(convexity)
    if not convexity.usable:
        raise ValueError(f"convex_poly_retractive_cone needs a convex polynomial, got {convexity.value}")
    cone = constancy_space(h)
    cone.tier = Tier.PROVEN if convexity is ConvexityStatus.PROVEN_CONVEX else Tier.ASSERTED
    return cone


def intersect_retractive(cones: Sequence[ConeDescriptor], ambient_cone_equality: bool) -> ConeDescriptor:
    """``cap R(X_i)`` as an inner approximation of ``R(cap X_i)``.

    The inclusion needs ``(cap X_i)_inf = cap (X_i)_inf``. Without that the
    result is still returned but with tier ``Unknown``.
    """
    cones = list(cones)
    if len(cones) == 1:
        only = cones[0]
        if not ambient_cone_equality:
            only = ConeDescriptor.intersection([only], tier=Tier.UNKNOWN, label=only.label)
        return only
    tier = weakest_tier(*(c.tier for c in cones)) if ambient_cone_equality else Tier.UNKNOWN
    return ConeDescriptor.intersection(cones, inner=True, tier=tier)


def set_retractive_inner(X: SetSpec) -> ConeDescriptor | None:
    """A sound inner approximation of ``R(X)``, or ``None`` when unavailable.

    Polyhedra are exact. For ``L_0(g)`` with ``g`` convex, ``C(g)`` lies in
    ``R(g)`` and hence in ``R(L_0(g))``. Intersections of convex pieces
    combine piecewise.
    """
    if isinstance(X, Polyhedron):
        if X.n_rows == 0:
            return ConeDescriptor.whole_space(X.dimension)
        return ConeDescriptor.polyhedral(X.A, X.dimension, label="R(C) = {d | Ad <= 0}")
    if isinstance(X, SublevelSet):
        g = X.g
        if not g.is_convex:
            return None
        if g.polynomial is not None:
            cone = constancy_space(g.polynomial)
            cone.tier = g.convexity_tier
            cone.inner = g.polynomial.degree > 1
            cone.label = "C(g) inside R(L0(g))"
            if g.polynomial.degree <= 1:
                Q_c = quadratic_form(g.polynomial)[1]
                return ConeDescriptor.polyhedral(Q_c[None, :], X.dimension, tier=g.convexity_tier)
            return cone
        if g.bound_tier is Tier.UNKNOWN:
            return None
        return ConeDescriptor.oracle(
            X.dimension,
            _constancy_test(g),
            inner=True,
            tier=weakest_tier(g.convexity_tier, g.bound_tier),
            label="C(g) inside R(L0(g))",
        )
    if isinstance(X, IntersectionSet):
        parts = [set_retractive_inner(p) for p in X.parts]
        if any(p is None for p in parts):
            return None
        return intersect_retractive(parts, ambient_cone_equality=is_set_convex(X))
    return None


def _constancy_test(f: FunctionSpec):
    def _test(d):
        eps = CONE_TOL * max(1.0, float(np.linalg.norm(d)))
        b_plus, b_minus = f.asymptotic_bound(d), f.asymptotic_bound(-np.asarray(d))
        if abs(b_plus.lower) <= eps and abs(b_plus.upper) <= eps and abs(b_minus.lower) <= eps and abs(b_minus.upper) <= eps:
            return Membership.IN
        return Membership.UNKNOWN

    return _test


def function_retractive_cone(f: FunctionSpec) -> ConeDescriptor:
    """Sound three-valued description of ``R(f)``.

    Convex polynomials: ``C(f)`` exactly. Other convex functions: ``IN`` on
    the constancy space, ``OUT`` where ``f_inf(d) != 0``. Nonconvex
    functions: ``OUT`` where ``f_inf(d) > 0`` and ``UNKNOWN`` otherwise.
    """
    n = f.dimension
    if f.polynomial is not None and f.is_convex:
        return convex_poly_retractive_cone(f.polynomial, f.convexity)
    convex = f.is_convex
    const = _constancy_test(f)

    def _test(d):
        eps = CONE_TOL * max(1.0, float(np.linalg.norm(d)))
        bd = f.asymptotic_bound(d)
        if bd.lower > eps:
            return Membership.OUT
        if convex:
            if bd.upper < -eps:
                return Membership.OUT
            return const(d)
        return Membership.UNKNOWN

    tier = weakest_tier(f.bound_tier, f.convexity_tier) if convex else f.bound_tier
    return ConeDescriptor.oracle(n, _test, tier=tier, label="R(f)")


# ---------------------------------------------------------------------------
# falsifiers


def _curves(d: np.ndarray, budget: FalsifierBudget, contains) -> list[Curve]:
    vs = offset_vectors(d, budget.curve_families, budget.seed)
    out = list(offset_curves(d, vs))
    if contains is not None:
        out += list(boundary_curves(d, vs, contains))
    return out


def _check_direction(d, n: int) -> np.ndarray:
    d = check_vector(d, n, "d")
    if not np.any(d):
        raise ValueError("direction must be nonzero")
    return d


def falsify_set_retractive(X: SetSpec, d, budget: FalsifierBudget | None = None) -> FalsifierResult:
    """Search for ``x_k in X`` along ``d`` with ``x_k - rho d`` outside ``X``.

    A witness needs the curve to be inside ``X`` and within the direction
    tolerance at each of the last five probe times, and the step-back point
    to be outside at all of them, with a tenfold looser membership
    tolerance.
    """
    budget = budget or FalsifierBudget()
    d = _check_direction(d, X.dimension)
    times = probe_times(2, budget.ray_scalings)[-PERSISTENCE:]
    curves = _curves(d, budget, X.contains)
    tails: list[tuple[Curve, list[np.ndarray]]] = []
    for cv in curves:
        pts = []
        for t in times:
            x = cv.point(t)
            if x is None or not X.contains(x) or direction_deviation(x, t, d) > DIRECTION_TOL:
                pts = None
                break
            pts.append(x)
        if pts is not None:
            tails.append((cv, pts))
    if not tails:
        return FalsifierResult(None, budget, "no probe curve stays in X along d (precondition failed)", len(curves))
    for rho in budget.rhos(d):
        for cv, pts in tails:
            if all(not X.contains(x - rho * d, EXIT_TOL) for x in pts):
                w = RetractionWitness(d.copy(), rho, tuple(pts), Violation.SET_EXIT, tuple(float(t) for t in times), cv.label)
                return FalsifierResult(w, budget, "", len(curves))
    return FalsifierResult(None, budget, "no witness within budget", len(curves))


def _fun_tail(f: FunctionSpec, cv: Curve, times: np.ndarray, d: np.ndarray, rho: float):
    """Last ``PERSISTENCE`` informative comparisons along ``cv``.

    An index is informative when ``f(x_k)`` is finite and not both values
    have underflowed. Points of the final five probe times must lie in
    ``dom f``; otherwise the curve is rejected.
    """
    last = times[-PERSISTENCE:]
    for t in last:
        x = cv.point(t)
        if x is None or not math.isfinite(f.value(x)):
            return None
    picked = []
    for t in reversed(times):
        x = cv.point(t)
        if x is None or direction_deviation(x, t, d) > DIRECTION_TOL:
            continue
        fx = f.value(x)
        if not math.isfinite(fx):
            continue
        fy = f.value(x - rho * d)
        if abs(fx) < UNDERFLOW and (abs(fy) < UNDERFLOW):
            continue
        picked.append((t, x, fx, fy))
        if len(picked) == PERSISTENCE:
            break
    if len(picked) < PERSISTENCE:
        return None
    return picked[::-1]


def falsify_fun_retractive(f: FunctionSpec, d, budget: FalsifierBudget | None = None) -> FalsifierResult:
    """Search for ``x_k`` in ``dom f`` along ``d`` with ``f(x_k - rho d) > f(x_k)``.

    The increase must beat ``1e-12`` times the rounding scale of the two
    evaluations at each of the last five informative probe times. Leaving
    the domain (``f = inf``) counts as an increase.
    """
    budget = budget or FalsifierBudget()
    d = _check_direction(d, f.dimension)
    times = probe_times(2, budget.ray_scalings)
    curves = _curves(d, budget, None)
    for rho in budget.rhos(d):
        for cv in curves:
            tail = _fun_tail(f, cv, times, d, rho)
            if tail is None:
                continue
            ok = True
            for t, x, fx, fy in tail:
                if fy == math.inf:
                    continue
                margin = INCREASE_TOL * max(f.magnitude(x), f.magnitude(x - rho * d), 1e-300)
                if not fy - fx > margin:
                    ok = False
                    break
            if ok:
                w = RetractionWitness(
                    d.copy(),
                    rho,
                    tuple(x for _, x, _, _ in tail),
                    Violation.FUNCTION_INCREASE,
                    tuple(float(t) for t, *_ in tail),
                    cv.label,
                )
                return FalsifierResult(w, budget, "", len(curves))
    return FalsifierResult(None, budget, "no witness within budget", len(curves))


def level_set_retractive_falsifier(f: FunctionSpec, gamma: float, d, budget: FalsifierBudget | None = None) -> FalsifierResult:
    """:func:`falsify_set_retractive` on ``L_gamma(f) = {x | f(x) <= gamma}``."""
    return falsify_set_retractive(SublevelSet(f, gamma), d, budget)
