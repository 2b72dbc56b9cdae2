"""Small shared value types: extended reals, evidence tiers, memberships."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ExtendedReal",
    "Tier",
    "Membership",
    "weakest_tier",
    "check_vector",
    "check_matrix",
]


class _Tag(str, enum.Enum):
    FINITE = "FINITE"
    PLUS_INF = "PLUS_INF"
    MINUS_INF = "MINUS_INF"


@dataclass(frozen=True)
class ExtendedReal:
    """A value in the extended real line.

    ``FINITE`` always carries a finite float; the infinite tags carry no
    value.
    """

    tag: _Tag
    value: float = 0.0

    Tag = _Tag

    def __post_init__(self):
        if self.tag is _Tag.FINITE and not math.isfinite(self.value):
            raise ValueError("FINITE extended real needs a finite value")

    @classmethod
    def finite(cls, value: float) -> "ExtendedReal":
        return cls(_Tag.FINITE, float(value))

    @classmethod
    def plus_inf(cls) -> "ExtendedReal":
        return cls(_Tag.PLUS_INF)

    @classmethod
    def minus_inf(cls) -> "ExtendedReal":
        return cls(_Tag.MINUS_INF)

    @classmethod
    def from_float(cls, value: float) -> "ExtendedReal":
        if value == math.inf:
            return cls.plus_inf()
        if value == -math.inf:
            return cls.minus_inf()
        if math.isnan(value):
            raise ValueError("NaN is not an extended real")
        return cls.finite(value)

    @property
    def is_finite(self) -> bool:
        return self.tag is _Tag.FINITE

    def as_float(self) -> float:
        if self.tag is _Tag.PLUS_INF:
            return math.inf
        if self.tag is _Tag.MINUS_INF:
            return -math.inf
        return self.value

    def __float__(self) -> float:
        return self.as_float()

    def scale(self, lam: float) -> "ExtendedReal":
        """Multiply by ``lam >= 0`` (``0 * inf`` is taken as 0)."""
        if lam < 0:
            raise ValueError("scale factor must be nonnegative")
        if lam == 0:
            return ExtendedReal.finite(0.0)
        if self.is_finite:
            return ExtendedReal.finite(self.value * lam)
        return self

    def to_json(self):
        if self.is_finite:
            return {"tag": "FINITE", "value": self.value}
        return {"tag": self.tag.value}

    def __str__(self) -> str:
        if self.is_finite:
            return f"{self.value:.6g}"
        return "+inf" if self.tag is _Tag.PLUS_INF else "-inf"


class Tier(str, enum.Enum):
    """How a piece of evidence was obtained, strongest first."""

    PROVEN = "Proven"
    ASSERTED = "Asserted"
    SAMPLED = "Sampled"
    UNKNOWN = "Unknown"

    @property
    def rank(self) -> int:
        return _TIER_ORDER.index(self)


_TIER_ORDER = [Tier.PROVEN, Tier.ASSERTED, Tier.SAMPLED, Tier.UNKNOWN]


def weakest_tier(*tiers: Tier) -> Tier:
    """Return the weakest tier among the arguments (PROVEN if empty)."""
    out = Tier.PROVEN
    for t in tiers:
        if t.rank > out.rank:
            out = t
    return out


class Membership(str, enum.Enum):
    IN = "IN"
    OUT = "OUT"
    UNKNOWN = "UNKNOWN"


def check_vector(x, n: int | None = None, name: str = "x") -> np.ndarray:
    """Coerce to a finite 1-D float array, optionally of length ``n``."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def check_matrix(A, n: int | None = None, name: str = "A") -> np.ndarray:
    """Coerce to a 2-D float array with ``n`` columns (empty allowed)."""
    arr = np.asarray(A, dtype=float)
    if arr.size == 0:
        if n is None:
            raise ValueError(f"cannot infer column count of empty {name}")
        return np.zeros((0, n))
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional")
    if n is not None and arr.shape[1] != n:
        raise ValueError(f"{name} has {arr.shape[1]} columns, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr
