"""Probe sequences that escape to infinity in a prescribed direction.

Both the retractiveness falsifiers and the sampled set-cone oracle walk
along families ``x_k = t_k d + c * t_k**alpha * v`` and along boundary
points found by bisection next to the ray.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

__all__ = [
    "OFFSET_POWERS",
    "OFFSET_SCALES",
    "DIRECTION_TOL",
    "Curve",
    "probe_times",
    "offset_vectors",
    "offset_curves",
    "boundary_curves",
    "direction_deviation",
]

OFFSET_POWERS = (0.0, 0.5, 0.6)
OFFSET_SCALES = (1.0, -1.0, 2.0, -2.0)
DIRECTION_TOL = 1e-3
# fraction of t*||d|| searched sideways when tracing the boundary
BOUNDARY_BRACKET = 5e-4
BISECTION_STEPS = 60


@dataclass(frozen=True)
class Curve:
    """A named map ``t -> point`` (``None`` where the curve is undefined)."""

    label: str
    point: Callable[[float], "np.ndarray | None"]


def probe_times(first: int = 2, count: int = 31) -> np.ndarray:
    """``t_k = 2**k`` for ``k = first .. first + count - 1``."""
    return 2.0 ** np.arange(first, first + count)


def offset_vectors(d: np.ndarray, count: int, seed: int) -> list[np.ndarray]:
    """Unit vectors orthogonal to ``d``: coordinate axes first, then random.

    The axes are projected onto the orthogonal complement of ``d``; ones
    that collapse or duplicate an earlier vector are dropped.
    """
    d = np.asarray(d, dtype=float)
    n = d.size
    u = d / np.linalg.norm(d)
    out: list[np.ndarray] = []

    def _push(v):
        v = v - (v @ u) * u
        nv = np.linalg.norm(v)
        if nv < 1e-8:
            return
        v = v / nv
        if any(abs(abs(v @ w) - 1.0) < 1e-10 for w in out):
            return
        out.append(v)

    for i in range(n):
        if len(out) >= count:
            break
        e = np.zeros(n)
        e[i] = 1.0
        _push(e)
    rng = np.random.default_rng(seed)
    tries = 0
    while len(out) < count and tries < 20 * count and n > 1:
        _push(rng.standard_normal(n))
        tries += 1
    return out[:count]


def offset_curves(d: np.ndarray, vectors: list[np.ndarray]) -> Iterator[Curve]:
    """The pure ray followed by every sublinear offset family."""
    d = np.asarray(d, dtype=float)
    yield Curve("ray", lambda t: t * d)
    for iv, v in enumerate(vectors):
        for alpha in OFFSET_POWERS:
            for c in OFFSET_SCALES:
                yield Curve(
                    f"offset(v{iv},alpha={alpha:g},c={c:g})",
                    lambda t, v=v, a=alpha, c=c: t * d + c * t**a * v,
                )


def boundary_curves(d: np.ndarray, vectors: list[np.ndarray], contains: Callable[[np.ndarray], bool]) -> Iterator[Curve]:
    """Boundary points next to the ray, one curve per signed offset vector.

    For each ``t`` the ray point ``t d`` must be inside; we bisect along
    ``v`` on ``[0, S]`` with ``S = 5e-4 * t * ||d||`` and return the last
    inside point. Undefined when the bracket does not straddle the boundary.
    """
    d = np.asarray(d, dtype=float)
    nd = float(np.linalg.norm(d))
    for iv, v in enumerate(vectors):
        for sign in (1.0, -1.0):
            w = sign * v

            def _pt(t, w=w):
                base = t * d
                if not contains(base):
                    return None
                hi = BOUNDARY_BRACKET * t * nd
                if contains(base + hi * w):
                    return None
                lo = 0.0
                for _ in range(BISECTION_STEPS):
                    mid = 0.5 * (lo + hi)
                    if mid <= lo or mid >= hi:
                        break
                    if contains(base + mid * w):
                        lo = mid
                    else:
                        hi = mid
                return base + lo * w

            yield Curve(f"boundary({'+' if sign > 0 else '-'}v{iv})", _pt)


def direction_deviation(x: np.ndarray, t: float, d: np.ndarray) -> float:
    """Relative gap ``||x/t - d|| / ||d||``."""
    return float(np.linalg.norm(np.asarray(x) / t - d) / np.linalg.norm(d))
