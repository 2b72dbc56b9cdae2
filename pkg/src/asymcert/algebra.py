"""Sparse multivariate polynomials with homogeneous decomposition.

Polynomials are stored as a mapping from exponent tuples to nonzero
coefficients. Every object here is immutable once built.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "ConvexityStatus",
    "Monomial",
    "Polynomial",
    "HomogeneousPart",
    "ZERO_TOL",
    "homogeneous_decompose",
    "leading_order",
    "certify_convexity",
    "quadratic_form",
]

ZERO_TOL = 1e-9


class ConvexityStatus(str, enum.Enum):
    PROVEN_CONVEX = "PROVEN_CONVEX"
    NOT_CONVEX = "NOT_CONVEX"
    ASSERTED = "ASSERTED"
    UNKNOWN = "UNKNOWN"

    @property
    def usable(self) -> bool:
        """True when downstream convex-only results may be applied."""
        return self in (ConvexityStatus.PROVEN_CONVEX, ConvexityStatus.ASSERTED)


@dataclass(frozen=True)
class Monomial:
    """A single nonzero term ``coefficient * prod(x_j ** e_j)``."""

    coefficient: float
    exponents: tuple[int, ...]

    def __post_init__(self):
        if self.coefficient == 0:
            raise ValueError("monomial coefficient must be nonzero")
        if any((not isinstance(e, (int, np.integer))) or e < 0 for e in self.exponents):
            raise ValueError("exponents must be nonnegative integers")

    @property
    def degree(self) -> int:
        return int(sum(self.exponents))


def _as_vector(x, n: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.shape[0] != n:
        raise ValueError(f"dimension mismatch: expected {n}, got {arr.shape[0]}")
    return arr


class Polynomial:
    """Immutable sparse polynomial in ``dimension`` variables.

    Parameters
    ----------
    dimension : int
        Number of variables.
    terms : mapping or iterable
        Either ``{exponents: coefficient}`` or an iterable of
        ``(coefficient, exponents)`` pairs. Repeated exponent vectors are
        summed and zero coefficients dropped.

    Examples
    --------
    >>> p = Polynomial(2, {(2, 0): 1.0, (0, 1): 1.0})
    >>> p(np.array([2.0, 3.0]))
    7.0
    """

    __slots__ = ("_dim", "_terms", "_keys", "_exps", "_coefs", "_degree", "_dcache")

    def __init__(self, dimension: int, terms: Mapping | Iterable = ()):
        if int(dimension) < 1:
            raise ValueError("dimension must be positive")
        n = int(dimension)
        acc: dict[tuple[int, ...], float] = {}
        items = terms.items() if isinstance(terms, Mapping) else ((e, c) for c, e in terms)
        for exps, coef in items:
            key = tuple(int(e) for e in exps)
            if len(key) != n:
                raise ValueError(f"exponent vector {key} has wrong length for dimension {n}")
            if any(e < 0 for e in key):
                raise ValueError("exponents must be nonnegative")
            acc[key] = acc.get(key, 0.0) + float(coef)
        clean = {k: v for k, v in acc.items() if v != 0.0}
        self._dim = n
        self._keys = tuple(sorted(clean))
        self._terms = {k: clean[k] for k in self._keys}
        if self._keys:
            self._exps = np.array(self._keys, dtype=np.int64)
            self._coefs = np.array([clean[k] for k in self._keys], dtype=float)
        else:
            self._exps = np.zeros((0, n), dtype=np.int64)
            self._coefs = np.zeros(0)
        self._degree = int(self._exps.sum(axis=1).max()) if self._keys else 0
        self._dcache = None

    # construction helpers
    @classmethod
    def zero(cls, dimension: int) -> "Polynomial":
        return cls(dimension, {})

    @classmethod
    def constant(cls, dimension: int, value: float) -> "Polynomial":
        return cls(dimension, {(0,) * dimension: value})

    @classmethod
    def variable(cls, dimension: int, index: int) -> "Polynomial":
        e = [0] * dimension
        e[index] = 1
        return cls(dimension, {tuple(e): 1.0})

    @classmethod
    def linear(cls, c: Sequence[float], const: float = 0.0) -> "Polynomial":
        n = len(c)
        terms = {}
        for j, cj in enumerate(c):
            e = [0] * n
            e[j] = 1
            terms[tuple(e)] = float(cj)
        terms[(0,) * n] = float(const)
        return cls(n, terms)

    @classmethod
    def quadratic(cls, Q, c=None, const: float = 0.0) -> "Polynomial":
        """Build ``0.5 x'Qx + c'x + const``."""
        Q = np.asarray(Q, dtype=float)
        n = Q.shape[0]
        Q = 0.5 * (Q + Q.T)
        terms: dict[tuple[int, ...], float] = {}
        for i in range(n):
            for j in range(i, n):
                e = [0] * n
                e[i] += 1
                e[j] += 1
                coef = 0.5 * Q[i, i] if i == j else Q[i, j]
                terms[tuple(e)] = terms.get(tuple(e), 0.0) + coef
        if c is not None:
            for j, cj in enumerate(np.asarray(c, dtype=float)):
                e = [0] * n
                e[j] = 1
                terms[tuple(e)] = terms.get(tuple(e), 0.0) + cj
        terms[(0,) * n] = terms.get((0,) * n, 0.0) + const
        return cls(n, terms)

    # accessors
    @property
    def dimension(self) -> int:
        return self._dim

    @property
    def degree(self) -> int:
        return self._degree

    @property
    def terms(self) -> tuple[Monomial, ...]:
        return tuple(Monomial(self._terms[k], k) for k in self._keys)

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return dict(self._terms)

    def coefficients(self) -> np.ndarray:
        return self._coefs.copy()

    def is_zero(self) -> bool:
        return not self._keys

    def __len__(self) -> int:
        return len(self._keys)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self._dim == other._dim
            and self._terms == other._terms
        )

    def __hash__(self) -> int:
        return hash((self._dim, tuple(self._terms.items())))

    def __repr__(self) -> str:
        if not self._keys:
            return f"Polynomial({self._dim}, 0)"
        return f"Polynomial({self._dim}, {self._terms!r})"

    # arithmetic
    def __add__(self, other) -> "Polynomial":
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self._dim, other)
        self._check_same(other)
        merged = dict(self._terms)
        for k, v in other._terms.items():
            merged[k] = merged.get(k, 0.0) + v
        return Polynomial(self._dim, merged)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self._dim, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, float)):
            return Polynomial(self._dim, {k: v * other for k, v in self._terms.items()})
        self._check_same(other)
        out: dict[tuple[int, ...], float] = {}
        for ka, va in self._terms.items():
            for kb, vb in other._terms.items():
                k = tuple(a + b for a, b in zip(ka, kb))
                out[k] = out.get(k, 0.0) + va * vb
        return Polynomial(self._dim, out)

    __rmul__ = __mul__

    def _check_same(self, other: "Polynomial"):
        if not isinstance(other, Polynomial) or other._dim != self._dim:
            raise ValueError("polynomials must share the same dimension")

    # evaluation
    def eval(self, x) -> float:
        """Evaluate at a point ``x`` of length ``dimension``."""
        x = _as_vector(x, self._dim)
        if not self._keys:
            return 0.0
        return float(self._coefs @ np.prod(x[None, :] ** self._exps, axis=1))

    __call__ = eval

    def _derivative_table(self):
        # all partial derivatives stacked: (variable index, coefficient, exponents)
        if self._dcache is None:
            idx, coefs, exps = [], [], []
            for j in range(self._dim):
                ej = self._exps[:, j]
                mask = ej > 0
                lowered = self._exps[mask].copy()
                lowered[:, j] -= 1
                idx.extend([j] * int(mask.sum()))
                coefs.extend(self._coefs[mask] * ej[mask])
                exps.extend(lowered)
            self._dcache = (
                np.array(idx, dtype=np.int64),
                np.array(coefs, dtype=float),
                np.array(exps, dtype=np.int64).reshape(-1, self._dim),
            )
        return self._dcache

    def grad(self, x) -> np.ndarray:
        """Exact gradient at ``x``."""
        x = _as_vector(x, self._dim)
        idx, coefs, exps = self._derivative_table()
        if not idx.size:
            return np.zeros(self._dim)
        vals = coefs * np.prod(x[None, :] ** exps, axis=1)
        return np.bincount(idx, weights=vals, minlength=self._dim).astype(float)

    def derivative(self, index: int) -> "Polynomial":
        out = {}
        for k, v in self._terms.items():
            if k[index] > 0:
                kk = list(k)
                kk[index] -= 1
                out[tuple(kk)] = v * k[index]
        return Polynomial(self._dim, out)

    def homogeneous_part(self, order: int) -> "Polynomial":
        return Polynomial(
            self._dim, {k: v for k, v in self._terms.items() if sum(k) == order}
        )


@dataclass(frozen=True)
class HomogeneousPart:
    order: int
    part: Polynomial


def homogeneous_decompose(h: Polynomial) -> list[HomogeneousPart]:
    """Split ``h`` into parts of each total degree ``0..h.degree``.

    Missing orders are returned as zero polynomials, so the list always
    has length ``h.degree + 1``.
    """
    return [HomogeneousPart(i, h.homogeneous_part(i)) for i in range(h.degree + 1)]


def _is_zero_value(value: float, part: Polynomial, d: np.ndarray, order: int, tol: float) -> bool:
    scale = np.abs(part.coefficients()).sum() * max(1.0, float(np.max(np.abs(d)))) ** order
    return abs(value) <= tol * scale


def leading_order(h: Polynomial, d, tol: float = ZERO_TOL) -> int | None:
    """Largest order ``i >= 1`` whose homogeneous part is nonzero at ``d``.

    Returns ``None`` when every part of positive order vanishes at ``d``
    up to the scale-aware tolerance.
    """
    d = _as_vector(d, h.dimension)
    for part in reversed(homogeneous_decompose(h)[1:]):
        if part.part.is_zero():
            continue
        val = part.part.eval(d)
        if not _is_zero_value(val, part.part, d, part.order, tol):
            return part.order
    return None


def quadratic_form(h: Polynomial) -> tuple[np.ndarray, np.ndarray, float]:
    """Return ``(Q, c, c0)`` with ``h(x) = 0.5 x'Qx + c'x + c0``.

    Only valid for degree at most 2.
    """
    if h.degree > 2:
        raise ValueError("quadratic_form needs degree <= 2")
    n = h.dimension
    Q = np.zeros((n, n))
    c = np.zeros(n)
    c0 = 0.0
    for k, v in h.as_dict().items():
        nz = [i for i, e in enumerate(k) if e > 0]
        deg = sum(k)
        if deg == 0:
            c0 += v
        elif deg == 1:
            c[nz[0]] += v
        elif len(nz) == 1:
            Q[nz[0], nz[0]] += 2.0 * v
        else:
            i, j = nz
            Q[i, j] += v
            Q[j, i] += v
    return Q, c, c0


def certify_convexity(h: Polynomial, asserted: bool = False) -> ConvexityStatus:
    """Decide convexity where it is cheap, otherwise defer to the user.

    Degree <= 2 is settled by the Hessian eigenvalues. For higher degree
    the answer is ``ASSERTED`` when the caller vouches for convexity, and
    ``UNKNOWN`` otherwise.
    """
    if h.degree <= 1:
        return ConvexityStatus.PROVEN_CONVEX
    if h.degree == 2:
        Q, _, _ = quadratic_form(h)
        scale = max(1.0, float(np.abs(Q).max()))
        lam = float(np.linalg.eigvalsh(Q).min())
        if lam >= -ZERO_TOL * scale:
            return ConvexityStatus.PROVEN_CONVEX
        return ConvexityStatus.NOT_CONVEX
    return ConvexityStatus.ASSERTED if asserted else ConvexityStatus.UNKNOWN
