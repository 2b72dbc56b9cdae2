"""Objective and constraint functions, plus constraint sets.

Functions come in three flavours: plain polynomials, expression trees
built from a small registry of non-polynomial primitives, and opaque
callables. Expression trees carry a bound calculus for the asymptotic
function ``f_inf(d) = liminf f(t d') / t`` so that cone membership can be
decided soundly where the primitives allow it.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebra import ConvexityStatus, Polynomial, certify_convexity, homogeneous_decompose, leading_order, ZERO_TOL
from .core import Tier, check_matrix, check_vector

__all__ = [
    "Bound",
    "Expr",
    "PolyExpr",
    "SqrtAbs",
    "Exp",
    "Abs",
    "Norm",
    "NegSqrt",
    "NormMinusCoord",
    "ExpNegSqrtProd",
    "Sum",
    "Scale",
    "Product",
    "Power",
    "FunctionSpec",
    "SetSpec",
    "Polyhedron",
    "SublevelSet",
    "IntersectionSet",
    "OracleSet",
    "poly_bound",
    "numerical_gradient",
    "MEMBERSHIP_TOL",
]

INF = math.inf
MEMBERSHIP_TOL = 1e-12


@dataclass(frozen=True)
class Bound:
    """Interval ``[lower, upper]`` enclosing ``f_inf(d)``.

    ``limit`` means ``f(t d') / t`` converges to the common value uniformly
    as ``t -> inf`` and ``d' -> d``; it is what makes sums exact.
    """

    lower: float
    upper: float
    limit: bool = False

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    @classmethod
    def point(cls, v: float, limit: bool = False) -> "Bound":
        return cls(v, v, limit and math.isfinite(v))

    @classmethod
    def unknown(cls) -> "Bound":
        return cls(-INF, INF, False)


def _add(a: float, b: float, absorb: float) -> float:
    # inf - inf carries no information; fall back to the uninformative side
    if math.isinf(a) and math.isinf(b) and a != b:
        return absorb
    return a + b


def poly_bound(h: Polynomial, d: np.ndarray, convex: bool, tol: float = ZERO_TOL) -> Bound:
    """Bounds on ``h_inf(d)`` for a polynomial.

    The ray value ``lim h(td)/t`` (the closed form by leading order) is
    always an upper bound. It is exact for convex ``h`` and for degree at
    most one. Otherwise only a strictly signed top-degree part pins the
    value down.
    """
    mu = leading_order(h, d, tol)
    parts = homogeneous_decompose(h)
    if mu is None:
        ray = 0.0
    elif mu == 1:
        ray = parts[1].part.eval(d)
    else:
        ray = INF if parts[mu].part.eval(d) > 0 else -INF
    if h.degree <= 1:
        return Bound.point(ray, limit=True)
    if convex:
        return Bound(ray, ray, False)
    p = h.degree
    if mu == p:
        return Bound(ray, ray, False)
    return Bound(-INF, ray, False)


def _as_expr(obj, n: int) -> "Expr":
    if isinstance(obj, Expr):
        return obj
    if isinstance(obj, Polynomial):
        return PolyExpr(obj)
    if isinstance(obj, (int, float)):
        return PolyExpr(Polynomial.constant(n, float(obj)))
    raise TypeError(f"cannot interpret {obj!r} as an expression")


class Expr:
    """Base class for expression nodes in ``dimension`` variables."""

    dimension: int

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def grad(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def magnitude(self, x: np.ndarray) -> float:
        """Rough size of the terms summed to form the value (rounding scale)."""
        v = self.value(x)
        return abs(v) if math.isfinite(v) else INF

    def bound(self, d: np.ndarray) -> Bound:
        return Bound.unknown()

    def convexity(self) -> ConvexityStatus:
        return ConvexityStatus.UNKNOWN

    def domain_rows(self) -> list[tuple[np.ndarray, float]]:
        """Linear inequalities ``a.x <= b`` describing the domain."""
        return []

    def as_polynomial(self) -> Polynomial | None:
        return None

    def to_json(self) -> dict:
        raise NotImplementedError

    # operator sugar for building trees in Python
    def __add__(self, other):
        return Sum([self, _as_expr(other, self.dimension)])

    __radd__ = __add__

    def __neg__(self):
        return Scale(-1.0, self)

    def __sub__(self, other):
        return Sum([self, Scale(-1.0, _as_expr(other, self.dimension))])

    def __rsub__(self, other):
        return Sum([_as_expr(other, self.dimension), Scale(-1.0, self)])

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Scale(float(other), self)
        return Product(self, _as_expr(other, self.dimension))

    __rmul__ = __mul__


class PolyExpr(Expr):
    def __init__(self, poly: Polynomial):
        self.poly = poly
        self.dimension = poly.dimension
        self._convex = certify_convexity(poly)

    def value(self, x):
        return self.poly.eval(x)

    def grad(self, x):
        return self.poly.grad(x)

    def magnitude(self, x):
        if self.poly.is_zero():
            return 0.0
        x = np.asarray(x, dtype=float)
        exps = np.array([t.exponents for t in self.poly.terms])
        return float(np.abs(self.poly.coefficients()) @ np.abs(np.prod(x[None, :] ** exps, axis=1)))

    def bound(self, d):
        return poly_bound(self.poly, d, self._convex is ConvexityStatus.PROVEN_CONVEX)

    def convexity(self):
        return self._convex

    def as_polynomial(self):
        return self.poly

    def to_json(self):
        return {"op": "poly", "terms": _poly_terms_json(self.poly)}


def _poly_terms_json(p: Polynomial) -> list:
    return [{"coeff": t.coefficient, "exponents": list(t.exponents)} for t in p.terms]


def _affine_parts(e: Expr):
    """Return ``(a, b)`` when ``e`` is affine, else ``None``."""
    p = e.as_polynomial()
    if p is None or p.degree > 1:
        return None
    n = p.dimension
    a = np.zeros(n)
    b = 0.0
    for t in p.terms:
        if t.degree == 0:
            b += t.coefficient
        else:
            a[t.exponents.index(1)] += t.coefficient
    return a, b


class SqrtAbs(Expr):
    """``sqrt(|arg|)``."""

    def __init__(self, arg: Expr):
        self.arg = arg
        self.dimension = arg.dimension

    def value(self, x):
        v = self.arg.value(x)
        return math.sqrt(abs(v)) if math.isfinite(v) else INF

    def grad(self, x):
        v = self.arg.value(x)
        if v == 0:
            return np.zeros(self.dimension)
        return (np.sign(v) / (2.0 * math.sqrt(abs(v)))) * self.arg.grad(x)

    def magnitude(self, x):
        return math.sqrt(self.arg.magnitude(x))

    def bound(self, d):
        p = self.arg.as_polynomial()
        if p is not None and p.degree <= 2:
            phi2 = p.homogeneous_part(2).eval(d) if p.degree == 2 else 0.0
            return Bound.point(math.sqrt(abs(phi2)), limit=True)
        return Bound(0.0, INF, False)

    def convexity(self):
        aff = _affine_parts(self.arg)
        if aff is None:
            return ConvexityStatus.UNKNOWN
        return ConvexityStatus.NOT_CONVEX if np.any(aff[0]) else ConvexityStatus.PROVEN_CONVEX

    def domain_rows(self):
        return self.arg.domain_rows()

    def to_json(self):
        return {"op": "sqrt_abs", "arg": self.arg.to_json()}


class Exp(Expr):
    """``exp(arg)``."""

    def __init__(self, arg: Expr):
        self.arg = arg
        self.dimension = arg.dimension

    def value(self, x):
        v = self.arg.value(x)
        if v == INF:
            return INF
        try:
            return math.exp(v)
        except OverflowError:
            # saturate: INF is reserved for points outside the domain
            return sys.float_info.max

    def grad(self, x):
        return self.value(x) * self.arg.grad(x)

    def bound(self, d):
        aff = _affine_parts(self.arg)
        if aff is not None:
            a, _ = aff
            slope = float(a @ d)
            scale = ZERO_TOL * max(1.0, float(np.abs(a).sum())) * max(1.0, float(np.max(np.abs(d))))
            if slope > scale:
                return Bound(INF, INF, False)
            if slope < -scale:
                return Bound.point(0.0, limit=True)
            return Bound(0.0, 0.0, False)
        inner = self.arg.bound(d)
        lower = INF if inner.lower > 0 else 0.0
        upper = 0.0 if inner.upper < 0 else INF
        if inner.limit and inner.lower < 0:
            return Bound.point(0.0, limit=True)
        return Bound(lower, max(lower, upper), False)

    def convexity(self):
        c = self.arg.convexity()
        return ConvexityStatus.PROVEN_CONVEX if c is ConvexityStatus.PROVEN_CONVEX else ConvexityStatus.UNKNOWN

    def domain_rows(self):
        return self.arg.domain_rows()

    def to_json(self):
        return {"op": "exp", "arg": self.arg.to_json()}


class Abs(Expr):
    def __init__(self, arg: Expr):
        self.arg = arg
        self.dimension = arg.dimension

    def value(self, x):
        return abs(self.arg.value(x))

    def grad(self, x):
        return np.sign(self.arg.value(x)) * self.arg.grad(x)

    def magnitude(self, x):
        return self.arg.magnitude(x)

    def bound(self, d):
        inner = self.arg.bound(d)
        if inner.limit:
            return Bound.point(abs(inner.lower), limit=True)
        return Bound(max(0.0, inner.lower), INF, False)

    def convexity(self):
        return ConvexityStatus.PROVEN_CONVEX if _affine_parts(self.arg) is not None else ConvexityStatus.UNKNOWN

    def domain_rows(self):
        return self.arg.domain_rows()

    def to_json(self):
        return {"op": "abs", "arg": self.arg.to_json()}


class Norm(Expr):
    """Euclidean norm of the full vector."""

    def __init__(self, dimension: int):
        self.dimension = int(dimension)

    def value(self, x):
        return float(np.linalg.norm(x))

    def grad(self, x):
        r = float(np.linalg.norm(x))
        return np.zeros(self.dimension) if r == 0 else np.asarray(x, dtype=float) / r

    def bound(self, d):
        return Bound.point(float(np.linalg.norm(d)), limit=True)

    def convexity(self):
        return ConvexityStatus.PROVEN_CONVEX

    def to_json(self):
        return {"builtin": "norm"}


class NegSqrt(Expr):
    """``-sqrt(x_i)`` on ``x_i >= 0``."""

    def __init__(self, dimension: int, index: int = 0):
        self.dimension = int(dimension)
        self.index = int(index)

    def value(self, x):
        xi = float(x[self.index])
        return -math.sqrt(xi) if xi >= 0 else INF

    def grad(self, x):
        g = np.zeros(self.dimension)
        xi = float(x[self.index])
        if xi > 0:
            g[self.index] = -0.5 / math.sqrt(xi)
        return g

    def bound(self, d):
        if d[self.index] < 0:
            return Bound(INF, INF, False)
        return Bound(0.0, 0.0, d[self.index] > 0)

    def convexity(self):
        return ConvexityStatus.PROVEN_CONVEX

    def domain_rows(self):
        a = np.zeros(self.dimension)
        a[self.index] = -1.0
        return [(a, 0.0)]

    def to_json(self):
        return {"builtin": "neg_sqrt", "index": self.index}


class NormMinusCoord(Expr):
    """``||x|| - x_i``, evaluated without cancellation for large ``x_i``."""

    def __init__(self, dimension: int, index: int = 0):
        self.dimension = int(dimension)
        self.index = int(index)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        xi = x[self.index]
        r = float(np.linalg.norm(x))
        if xi > 0:
            rest = float(np.sum(np.delete(x, self.index) ** 2))
            return rest / (r + xi) if r + xi > 0 else 0.0
        return r - xi

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x))
        g = x / r if r > 0 else np.zeros(self.dimension)
        g = g.copy()
        g[self.index] -= 1.0
        return g

    def bound(self, d):
        return Bound.point(float(np.linalg.norm(d) - d[self.index]), limit=True)

    def convexity(self):
        return ConvexityStatus.PROVEN_CONVEX

    def to_json(self):
        return {"builtin": "norm_minus_coord", "index": self.index}


class ExpNegSqrtProd(Expr):
    """``exp(-sqrt(x_i x_j))`` on ``x_i, x_j >= 0``."""

    def __init__(self, dimension: int, i: int = 0, j: int = 1):
        self.dimension = int(dimension)
        self.i, self.j = int(i), int(j)

    def value(self, x):
        a, b = float(x[self.i]), float(x[self.j])
        if a < 0 or b < 0:
            return INF
        return math.exp(-math.sqrt(a * b))

    def grad(self, x):
        a, b = float(x[self.i]), float(x[self.j])
        g = np.zeros(self.dimension)
        s = math.sqrt(max(a * b, 0.0))
        if s > 0:
            v = math.exp(-s)
            g[self.i] = -v * b / (2 * s)
            g[self.j] = -v * a / (2 * s)
        return g

    def bound(self, d):
        if d[self.i] < 0 or d[self.j] < 0:
            return Bound(INF, INF, False)
        return Bound(0.0, 0.0, False)

    def convexity(self):
        return ConvexityStatus.PROVEN_CONVEX

    def domain_rows(self):
        rows = []
        for k in (self.i, self.j):
            a = np.zeros(self.dimension)
            a[k] = -1.0
            rows.append((a, 0.0))
        return rows

    def to_json(self):
        return {"builtin": "exp_neg_sqrt_prod", "i": self.i, "j": self.j}


class Sum(Expr):
    def __init__(self, children: Sequence[Expr]):
        flat: list[Expr] = []
        for c in children:
            flat.extend(c.children if isinstance(c, Sum) else [c])
        if not flat:
            raise ValueError("empty sum")
        dims = {c.dimension for c in flat}
        if len(dims) != 1:
            raise ValueError("summands must share the dimension")
        # merge polynomial summands so the polynomial calculus sees them whole
        polys = [c.as_polynomial() for c in flat if isinstance(c, PolyExpr)]
        rest = [c for c in flat if not isinstance(c, PolyExpr)]
        merged = []
        if polys:
            total = polys[0]
            for p in polys[1:]:
                total = total + p
            merged.append(PolyExpr(total))
        self.children = tuple(merged + rest)
        self.dimension = dims.pop()

    def value(self, x):
        total = 0.0
        for c in self.children:
            v = c.value(x)
            if v == INF:
                return INF
            total += v
        return total

    def grad(self, x):
        return sum((c.grad(x) for c in self.children), np.zeros(self.dimension))

    def magnitude(self, x):
        return sum(c.magnitude(x) for c in self.children)

    def bound(self, d):
        bs = [c.bound(d) for c in self.children]
        lower = 0.0
        for b in bs:
            lower = _add(lower, b.lower, -INF)
        non_limit = sum(1 for b in bs if not b.limit)
        if non_limit <= 1:
            upper = 0.0
            for b in bs:
                upper = _add(upper, b.upper, INF)
        else:
            upper = INF
        upper = max(upper, lower)
        return Bound(lower, upper, non_limit == 0 and math.isfinite(lower))

    def convexity(self):
        if all(c.convexity() is ConvexityStatus.PROVEN_CONVEX for c in self.children):
            return ConvexityStatus.PROVEN_CONVEX
        return ConvexityStatus.UNKNOWN

    def domain_rows(self):
        rows = []
        for c in self.children:
            rows.extend(c.domain_rows())
        return rows

    def as_polynomial(self):
        polys = [c.as_polynomial() for c in self.children]
        if any(p is None for p in polys):
            return None
        out = polys[0]
        for p in polys[1:]:
            out = out + p
        return out

    def to_json(self):
        return {"op": "add", "args": [c.to_json() for c in self.children]}


class Scale(Expr):
    def __init__(self, c: float, arg: Expr):
        self.c = float(c)
        self.arg = arg
        self.dimension = arg.dimension

    def value(self, x):
        v = self.arg.value(x)
        if v == INF:
            return INF
        return self.c * v

    def grad(self, x):
        return self.c * self.arg.grad(x)

    def magnitude(self, x):
        return abs(self.c) * self.arg.magnitude(x)

    def bound(self, d):
        b = self.arg.bound(d)
        c = self.c
        if c == 0:
            return Bound.point(0.0, limit=True)
        if c > 0:
            return Bound(c * b.lower, c * b.upper, b.limit)
        if b.limit:
            return Bound.point(c * b.lower, limit=True)
        if b.lower == INF:
            return Bound(-INF, -INF, False)
        return Bound.unknown()

    def convexity(self):
        if self.c >= 0:
            return self.arg.convexity()
        p = self.arg.as_polynomial()
        if p is not None:
            return certify_convexity(p * self.c)
        return ConvexityStatus.UNKNOWN

    def domain_rows(self):
        return self.arg.domain_rows()

    def as_polynomial(self):
        p = self.arg.as_polynomial()
        return None if p is None else p * self.c

    def to_json(self):
        return {"op": "scale", "c": self.c, "arg": self.arg.to_json()}


class Product(Expr):
    def __init__(self, a: Expr, b: Expr):
        if a.dimension != b.dimension:
            raise ValueError("factors must share the dimension")
        self.a, self.b = a, b
        self.dimension = a.dimension

    def value(self, x):
        va, vb = self.a.value(x), self.b.value(x)
        if va == INF or vb == INF:
            return INF
        return va * vb

    def grad(self, x):
        return self.a.value(x) * self.b.grad(x) + self.b.value(x) * self.a.grad(x)

    def magnitude(self, x):
        return self.a.magnitude(x) * self.b.magnitude(x)

    def domain_rows(self):
        return self.a.domain_rows() + self.b.domain_rows()

    def as_polynomial(self):
        pa, pb = self.a.as_polynomial(), self.b.as_polynomial()
        if pa is None or pb is None:
            return None
        return pa * pb

    def to_json(self):
        return {"op": "mul", "args": [self.a.to_json(), self.b.to_json()]}


class Power(Expr):
    def __init__(self, arg: Expr, k: int):
        if int(k) != k or k < 0:
            raise ValueError("power must be a nonnegative integer")
        self.arg = arg
        self.k = int(k)
        self.dimension = arg.dimension

    def value(self, x):
        v = self.arg.value(x)
        if v == INF:
            return INF
        return v ** self.k

    def grad(self, x):
        if self.k == 0:
            return np.zeros(self.dimension)
        return self.k * self.arg.value(x) ** (self.k - 1) * self.arg.grad(x)

    def magnitude(self, x):
        return self.arg.magnitude(x) ** self.k

    def bound(self, d):
        if self.k % 2 == 0:
            return Bound(0.0, INF, False)
        return Bound.unknown()

    def domain_rows(self):
        return self.arg.domain_rows()

    def as_polynomial(self):
        p = self.arg.as_polynomial()
        if p is None:
            return None
        out = Polynomial.constant(p.dimension, 1.0)
        for _ in range(self.k):
            out = out * p
        return out

    def to_json(self):
        return {"op": "pow", "arg": self.arg.to_json(), "k": self.k}


def numerical_gradient(fun: Callable[[np.ndarray], float], x: np.ndarray) -> np.ndarray:
    """Central differences with step ``1e-6 * (1 + ||x||)``."""
    x = np.asarray(x, dtype=float)
    h = 1e-6 * (1.0 + float(np.linalg.norm(x)))
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


class FunctionSpec:
    """A proper closed function on R^n, extended by ``+inf`` off its domain.

    Parameters
    ----------
    dimension : int
    polynomial : Polynomial, optional
        Makes this a ``POLY`` function.
    expr : Expr, optional
        Expression tree; gives exact gradients and asymptotic bounds.
    evaluator, gradient : callable, optional
        Opaque black box. ``evaluator`` may return ``inf`` or raise outside
        its domain.
    domain : SetSpec, optional
        Extra domain restriction for black boxes.
    convexity : ConvexityStatus, optional
        Overrides the detected status. Pass ``ASSERTED`` to vouch for
        convexity of a degree >= 3 polynomial or an opaque black box.
    asymptotic : callable, optional
        ``d -> (lower, upper)`` trusted bounds on ``f_inf(d)`` for black
        boxes; they are treated as user assertions.
    lipschitz_order : int, optional
        User assertion that the ``p``-th derivative is Lipschitz.
    finite_min : bool
        User assertion that ``f`` has a finite minimum on the feasible set.
    """

    def __init__(
        self,
        dimension: int,
        *,
        polynomial: Polynomial | None = None,
        expr: Expr | None = None,
        evaluator: Callable | None = None,
        gradient: Callable | None = None,
        domain: "SetSpec | None" = None,
        convexity: ConvexityStatus | None = None,
        asymptotic: Callable | None = None,
        lipschitz_order: int | None = None,
        finite_min: bool = False,
        name: str = "",
    ):
        self.dimension = int(dimension)
        given = sum(v is not None for v in (polynomial, expr, evaluator))
        if given != 1:
            raise ValueError("exactly one of polynomial, expr, evaluator is required")
        if expr is not None:
            p = expr.as_polynomial()
            if p is not None and not expr.domain_rows():
                polynomial, expr = p, None
        if polynomial is not None and polynomial.dimension != self.dimension:
            raise ValueError("polynomial dimension mismatch")
        if expr is not None and expr.dimension != self.dimension:
            raise ValueError("expression dimension mismatch")
        if domain is not None and domain.dimension != self.dimension:
            raise ValueError("domain dimension mismatch")
        self.polynomial = polynomial
        self.expr = expr
        self._evaluator = evaluator
        self._gradient = gradient
        self.domain = domain
        self._asymptotic = asymptotic
        self.lipschitz_order = lipschitz_order
        self.finite_min = bool(finite_min)
        self.name = name
        if convexity is None:
            if polynomial is not None:
                convexity = certify_convexity(polynomial)
            elif expr is not None:
                convexity = expr.convexity()
            else:
                convexity = ConvexityStatus.UNKNOWN
        elif convexity is ConvexityStatus.ASSERTED and polynomial is not None:
            detected = certify_convexity(polynomial, asserted=True)
            # a decided quadratic never gets overridden by a user flag
            convexity = detected
        self.convexity = convexity

    # kind and cheap predicates
    @property
    def kind(self) -> str:
        return "POLY" if self.polynomial is not None else "BLACKBOX"

    @property
    def is_convex(self) -> bool:
        return self.convexity.usable

    @property
    def convexity_tier(self) -> Tier:
        if self.convexity is ConvexityStatus.PROVEN_CONVEX:
            return Tier.PROVEN
        if self.convexity is ConvexityStatus.ASSERTED:
            return Tier.ASSERTED
        return Tier.UNKNOWN

    @property
    def bound_tier(self) -> Tier:
        """Tier of the asymptotic bounds returned by :meth:`asymptotic_bound`."""
        if self.polynomial is not None or self.expr is not None:
            if self.polynomial is not None and self.convexity is ConvexityStatus.ASSERTED:
                return Tier.ASSERTED
            return Tier.PROVEN
        return Tier.ASSERTED if self._asymptotic is not None else Tier.UNKNOWN

    def domain_rows(self) -> list[tuple[np.ndarray, float]]:
        return self.expr.domain_rows() if self.expr is not None else []

    # evaluation
    def in_domain(self, x: np.ndarray) -> bool:
        return math.isfinite(self.value(x))

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.polynomial is not None:
            return self.polynomial.eval(x)
        if self.domain is not None and not self.domain.contains(x):
            return INF
        if self.expr is not None:
            return self.expr.value(x)
        try:
            v = float(self._evaluator(x))
        except (ValueError, ArithmeticError):
            return INF
        return INF if math.isnan(v) else v

    __call__ = value

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.polynomial is not None:
            return self.polynomial.grad(x)
        if self.expr is not None:
            return np.asarray(self.expr.grad(x), dtype=float)
        if self._gradient is not None:
            return np.asarray(self._gradient(x), dtype=float)
        return numerical_gradient(self.value, x)

    @property
    def has_gradient(self) -> bool:
        return self._evaluator is None or self._gradient is not None

    def magnitude(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.polynomial is not None:
            return PolyExpr(self.polynomial).magnitude(x)
        if self.expr is not None:
            return self.expr.magnitude(x)
        return abs(self.value(x))

    def asymptotic_bound(self, d) -> Bound:
        d = np.asarray(d, dtype=float)
        if not np.any(d):
            return Bound.point(0.0, limit=False)
        if self.polynomial is not None:
            return poly_bound(self.polynomial, d, self.is_convex)
        if self.expr is not None:
            for a, _ in self.domain_rows():
                if a @ d > ZERO_TOL * max(1.0, float(np.abs(a).sum())):
                    return Bound(INF, INF, False)
            return self.expr.bound(d)
        if self._asymptotic is not None:
            lo, hi = self._asymptotic(d)
            return Bound(float(lo), float(hi), False)
        return Bound.unknown()

    def to_json(self) -> dict:
        if self.polynomial is not None:
            out = {"kind": "poly", "terms": _poly_terms_json(self.polynomial)}
        elif self.expr is not None:
            out = {"kind": "expr", "expr": self.expr.to_json()}
        else:
            out = {"kind": "blackbox", "name": self.name}
        out["convexity"] = self.convexity.value
        return out

    def __repr__(self) -> str:
        return f"FunctionSpec({self.kind}, n={self.dimension}, {self.convexity.value})"


# ---------------------------------------------------------------------------
# constraint sets


class SetSpec:
    dimension: int

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        raise NotImplementedError

    def violation(self, x) -> float:
        """Nonnegative infeasibility measure (0 inside)."""
        return 0.0 if self.contains(x) else INF

    def to_json(self) -> dict:
        raise NotImplementedError


class Polyhedron(SetSpec):
    """``{x | A x <= b}``; ``A`` may have zero rows (the whole space)."""

    def __init__(self, A, b, dimension: int | None = None):
        n = dimension
        if n is None:
            n = np.asarray(A).shape[-1] if np.asarray(A).size else None
        self.A = check_matrix(A, n, "A")
        self.b = check_vector(b, self.A.shape[0], "b") if self.A.shape[0] else np.zeros(0)
        self.dimension = self.A.shape[1]

    @classmethod
    def whole_space(cls, n: int) -> "Polyhedron":
        return cls(np.zeros((0, n)), np.zeros(0), n)

    @classmethod
    def box(cls, lower, upper) -> "Polyhedron":
        lo = np.asarray(lower, dtype=float)
        hi = np.asarray(upper, dtype=float)
        n = lo.size
        rows, rhs = [], []
        for i in range(n):
            if math.isfinite(hi[i]):
                e = np.zeros(n)
                e[i] = 1.0
                rows.append(e)
                rhs.append(hi[i])
            if math.isfinite(lo[i]):
                e = np.zeros(n)
                e[i] = -1.0
                rows.append(e)
                rhs.append(-lo[i])
        return cls(np.array(rows).reshape(-1, n), np.array(rhs), n)

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def residual(self, x) -> np.ndarray:
        return self.A @ np.asarray(x, dtype=float) - self.b

    def contains(self, x, tol=MEMBERSHIP_TOL):
        if not self.n_rows:
            return True
        x = np.asarray(x, dtype=float)
        scale = 1.0 + np.abs(self.A) @ np.abs(x) + np.abs(self.b)
        return bool(np.all(self.residual(x) <= tol * scale))

    def violation(self, x):
        if not self.n_rows:
            return 0.0
        return float(max(0.0, np.max(self.residual(x))))

    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        return Polyhedron(np.vstack([self.A, other.A]), np.concatenate([self.b, other.b]), self.dimension)

    def to_json(self):
        return {"kind": "polyhedron", "A": self.A.tolist(), "b": self.b.tolist()}


class SublevelSet(SetSpec):
    """``{x | g(x) <= level}``."""

    def __init__(self, g: FunctionSpec, level: float = 0.0):
        self.g = g
        self.level = float(level)
        self.dimension = g.dimension

    def contains(self, x, tol=MEMBERSHIP_TOL):
        v = self.g.value(x)
        if not math.isfinite(v):
            return False
        return v - self.level <= tol * (1.0 + self.g.magnitude(x) + abs(self.level))

    def violation(self, x):
        v = self.g.value(x)
        if not math.isfinite(v):
            return INF
        return max(0.0, v - self.level)

    def to_json(self):
        return {"kind": "sublevel", "g": self.g.to_json(), "level": self.level}


class IntersectionSet(SetSpec):
    def __init__(self, parts: Sequence[SetSpec]):
        parts = list(parts)
        if not parts:
            raise ValueError("empty intersection")
        dims = {p.dimension for p in parts}
        if len(dims) != 1:
            raise ValueError("intersection members must share the dimension")
        self.parts = tuple(parts)
        self.dimension = dims.pop()

    def contains(self, x, tol=MEMBERSHIP_TOL):
        return all(p.contains(x, tol) for p in self.parts)

    def violation(self, x):
        return max(p.violation(x) for p in self.parts)

    def to_json(self):
        return {"kind": "intersection", "parts": [p.to_json() for p in self.parts]}


class OracleSet(SetSpec):
    """A closed set known only through a membership test."""

    def __init__(self, dimension: int, membership: Callable[[np.ndarray], bool], name: str = "oracle"):
        self.dimension = int(dimension)
        self._membership = membership
        self.name = name

    def contains(self, x, tol=MEMBERSHIP_TOL):
        return bool(self._membership(np.asarray(x, dtype=float)))

    def to_json(self):
        return {"kind": "oracle", "name": self.name}
