"""Asymptotically bounded decay: which gauge keeps ``f`` from falling too fast.

``f`` has bounded decay on ``X`` with respect to ``g`` when
``liminf f(x) / g(x) > -inf`` as ``||x|| -> inf`` inside ``X``. The
exponent ``p`` of the gauge ``||x||**p`` feeds the regularizer
``||x||**(p+1)`` used by the certifier and the path solver.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import (
    DIVERGENCE_THRESHOLD,
    TAIL,
    ConeDescriptor,
    InfeasibleSetError,
    SamplingSchedule,
    asymptotic_cone_of_set,
    estimate_asymptotic,
    find_polyhedron_point,
)
from .core import Membership, Tier
from .curves import boundary_curves, offset_vectors
from .functions import FunctionSpec, Polyhedron, SetSpec

__all__ = [
    "GaugeKind",
    "DecayRule",
    "DecayCertificate",
    "MINUS_INF_EVIDENCE",
    "classify_decay",
    "estimate_decay_constant",
    "probe_feasible_point",
]


class GaugeKind(str, enum.Enum):
    NORM_POWER = "NORM_POWER"
    USER_COERCIVE = "USER_COERCIVE"
    UNKNOWN = "UNKNOWN"


class DecayRule(str, enum.Enum):
    POLYNOMIAL_ORDER = "POLYNOMIAL_ORDER"
    CONVEXITY = "CONVEXITY"
    LIPSCHITZ_DERIVATIVE = "LIPSCHITZ_DERIVATIVE"
    NONNEG_ASYMPTOTIC = "NONNEG_ASYMPTOTIC"
    FINITE_MIN_ASSERTED = "FINITE_MIN_ASSERTED"
    USER = "USER"
    NONE = "NONE"


class _MinusInfEvidence:
    """Sentinel: sampled ratios diverged to ``-inf``."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "MINUS_INF_EVIDENCE"


MINUS_INF_EVIDENCE = _MinusInfEvidence()


@dataclass(frozen=True)
class DecayCertificate:
    """Gauge, the rule that produced it, and how strong the evidence is.

    ``p`` is the exponent of ``NORM_POWER``. For ``USER_COERCIVE`` the
    gauge function is stored in ``gauge_function``. ``order`` is the
    derivative order of the ``LIPSCHITZ_DERIVATIVE`` rule.
    """

    gauge: GaugeKind
    rule: DecayRule
    tier: Tier
    p: float | None = None
    constant_estimate: float | None = None
    order: int | None = None
    gauge_function: FunctionSpec | None = None

    def __post_init__(self):
        if self.p is not None and self.p < 0:
            raise ValueError("decay exponent must be nonnegative")

    @property
    def known(self) -> bool:
        return self.gauge is not GaugeKind.UNKNOWN

    def to_json(self) -> dict:
        est = self.constant_estimate
        if est is MINUS_INF_EVIDENCE:
            est_json = "MINUS_INF_EVIDENCE"
        elif est is None:
            est_json = None
        elif math.isinf(est):
            est_json = "+inf" if est > 0 else "-inf"
        else:
            est_json = float(f"{est:.10g}")
        out = {
            "gauge": self.gauge.value,
            "rule": self.rule.value,
            "tier": self.tier.value,
            "p": self.p,
            "constant_estimate": est_json,
        }
        if self.order is not None:
            out["order"] = self.order
        return out


def probe_feasible_point(f: FunctionSpec, X: SetSpec, seed: int = 0, extra=()) -> np.ndarray:
    """A point of ``X`` where ``f`` is finite, or :class:`InfeasibleSetError`.

    Tries the supplied candidates, the origin, a projection point for the
    polyhedral part, then seeded Gaussian points at a few scales.
    """
    n = X.dimension
    cands = [np.asarray(c, dtype=float) for c in extra] + [np.zeros(n)]
    polys = [X] if isinstance(X, Polyhedron) else [p for p in getattr(X, "parts", ()) if isinstance(p, Polyhedron)]
    for P in polys:
        x = find_polyhedron_point(P.A, P.b)
        if x is not None:
            cands.append(x)
    rng = np.random.default_rng(seed)
    for scale in (1.0, 10.0, 100.0):
        cands.extend(scale * rng.standard_normal((64, n)))
    for x in cands:
        if X.contains(x) and math.isfinite(f.value(x)):
            return x
    raise InfeasibleSetError("no point of X inside dom f was found by the probe")


def _candidate_directions(X: SetSpec, cone: ConeDescriptor, seed: int, extra: int = 16) -> list[np.ndarray]:
    n = X.dimension
    dirs = cone.sample_directions(8, seed) if cone.generators() is not None else []
    if dirs or cone.generators() is not None:
        return dirs
    rng = np.random.default_rng(seed)
    base = [s * e for e in np.eye(n) for s in (1.0, -1.0)]
    base += [v / np.linalg.norm(v) for v in rng.standard_normal((extra, n))]
    return [d for d in base if cone.raw_contains(d) is not Membership.OUT]


def _ratio_tail(f: FunctionSpec, X: SetSpec, point, times, p: float):
    vals = []
    for t in times:
        x = point(t)
        if x is None or not X.contains(x):
            return None
        v = f.value(x)
        if not math.isfinite(v):
            return None
        vals.append(v / max(1.0, float(np.linalg.norm(x))) ** p)
    return vals


def estimate_decay_constant(
    f: FunctionSpec,
    X: SetSpec,
    p: float,
    schedule: SamplingSchedule | None = None,
    seed: int = 0,
):
    """Minimal tail of ``f(x) / max(1, ||x||)**p`` along sampled escape paths.

    Paths are rays in sampled directions of ``X_inf`` plus boundary-tracing
    curves next to them. Returns ``MINUS_INF_EVIDENCE`` when some path has
    a monotone tail below ``-1e8``, ``inf`` when no sampled path escapes
    inside ``X`` (for instance when ``X`` is bounded).
    """
    schedule = schedule or SamplingSchedule()
    cone = asymptotic_cone_of_set(X, seed)
    times = schedule.times()[-TAIL:]
    best = math.inf
    for d in _candidate_directions(X, cone, seed):
        paths = [lambda t, d=d: t * d]
        vs = offset_vectors(d, 2, seed) if d.size > 1 else []
        paths += [c.point for c in boundary_curves(d, vs, X.contains)]
        for path in paths:
            tail = _ratio_tail(f, X, path, times, p)
            if tail is None:
                continue
            dec = all(b <= a for a, b in zip(tail, tail[1:]))
            if dec and tail[-1] < -DIVERGENCE_THRESHOLD:
                return MINUS_INF_EVIDENCE
            best = min(best, min(tail))
    return best


def _sampled_nonneg_asymptotic(f: FunctionSpec, X: SetSpec, seed: int) -> bool:
    cone = asymptotic_cone_of_set(X, seed)
    dirs = _candidate_directions(X, cone, seed)
    sched = SamplingSchedule(steps=24)
    for d in dirs:
        est = estimate_asymptotic(f, d, sched, seed).lower_trend.as_float()
        if est < -1e-6 * max(1.0, float(np.linalg.norm(d))):
            return False
    return True


def classify_decay(
    f: FunctionSpec,
    X: SetSpec,
    seed: int = 0,
    probe=None,
    coercive_gauge: FunctionSpec | None = None,
    estimate: bool = True,
) -> DecayCertificate:
    """Pick the first decay rule that applies, strongest first.

    Order: polynomial degree, convexity, asserted Lipschitz derivative,
    sampled ``f_inf >= 0`` on ``X_inf``, asserted finite minimum. A
    user-supplied coercive gauge overrides all of them with rule ``USER``.

    Raises
    ------
    InfeasibleSetError
        When no point of ``X`` in the domain of ``f`` can be found.
    """
    probe_feasible_point(f, X, seed, extra=() if probe is None else [probe])

    def _est(p):
        return estimate_decay_constant(f, X, p, seed=seed) if estimate else None

    if coercive_gauge is not None:
        return DecayCertificate(GaugeKind.USER_COERCIVE, DecayRule.USER, Tier.ASSERTED, gauge_function=coercive_gauge)
    if f.polynomial is not None:
        m = f.polynomial.degree
        return DecayCertificate(GaugeKind.NORM_POWER, DecayRule.POLYNOMIAL_ORDER, Tier.PROVEN, p=float(m), constant_estimate=_est(m))
    if f.is_convex:
        return DecayCertificate(GaugeKind.NORM_POWER, DecayRule.CONVEXITY, f.convexity_tier, p=1.0, constant_estimate=_est(1.0))
    if f.lipschitz_order is not None:
        q = int(f.lipschitz_order)
        return DecayCertificate(
            GaugeKind.NORM_POWER, DecayRule.LIPSCHITZ_DERIVATIVE, Tier.ASSERTED, p=float(q + 1), order=q, constant_estimate=_est(q + 1)
        )
    if _sampled_nonneg_asymptotic(f, X, seed):
        return DecayCertificate(GaugeKind.NORM_POWER, DecayRule.NONNEG_ASYMPTOTIC, Tier.SAMPLED, p=1.0, constant_estimate=_est(1.0))
    if f.finite_min:
        return DecayCertificate(GaugeKind.NORM_POWER, DecayRule.FINITE_MIN_ASSERTED, Tier.ASSERTED, p=1.0, constant_estimate=_est(1.0))
    return DecayCertificate(GaugeKind.UNKNOWN, DecayRule.NONE, Tier.SAMPLED)
