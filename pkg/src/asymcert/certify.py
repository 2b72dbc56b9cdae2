"""Existence certificates: decide cone inclusions with tiered evidence.

Every existence theorem used here has the shape ``left cone ⊆ right cone``
plus a decay requirement on ``f``. :func:`check_inclusion` settles such an
inclusion in one of three ways:

* **holds**: the left cone is exactly ``{0}``, or every generator of a
  polyhedral superset of the left cone lies in a convex subset of each
  right cone;
* **fails**: some direction provably (or demonstrably, via a falsifier
  witness) sits in the left cone but outside a right cone;
* **undecided**: anything else.

Sampled evidence can refute a condition but never prove one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import quadratic_form
from .asymptotics import (
    ConeDescriptor,
    ConeKind,
    SamplingSchedule,
    asymptotic_cone_of_set,
    estimate_asymptotic,
    function_asymptotic_cone,
    _sampled_set_test,
)
from .core import Membership, Tier, weakest_tier
from .decay import DecayCertificate, GaugeKind, classify_decay
from .functions import FunctionSpec, SetSpec, SublevelSet
from .problem import ProblemSpec
from .retract import (
    FalsifierBudget,
    FalsifierResult,
    RetractionWitness,
    constancy_space,
    falsify_fun_retractive,
    falsify_set_retractive,
    function_retractive_cone,
    level_set_retractive_falsifier,
    lineality_space,
    set_retractive_inner,
    _constancy_test,
)

__all__ = [
    "Verdict",
    "TrailEntry",
    "Certificate",
    "LeftPiece",
    "RightPiece",
    "InclusionResult",
    "check_inclusion",
    "certify_compact",
    "certify_main",
    "certify_coercive_g",
    "certify_convex_structured",
    "certify_functional",
    "certify",
    "audit_certificate",
    "gradient_growth",
    "VIOLATED_MESSAGE",
]

INTERIOR_SAMPLES = 256
MAX_FALSIFY = 16
VIOLATED_MESSAGE = "condition violated; existence undecided; see solver evidence"


class Verdict(str, enum.Enum):
    PROVEN_EXISTS = "PROVEN_EXISTS"
    PROVEN_EXISTS_COMPACT = "PROVEN_EXISTS_COMPACT"
    PROVEN_UNDER_ASSERTIONS = "PROVEN_UNDER_ASSERTIONS"
    VIOLATED = "VIOLATED"
    UNKNOWN = "UNKNOWN"

    @property
    def proven(self) -> bool:
        return self in (Verdict.PROVEN_EXISTS, Verdict.PROVEN_EXISTS_COMPACT, Verdict.PROVEN_UNDER_ASSERTIONS)


@dataclass(frozen=True)
class TrailEntry:
    condition: str
    evidence: str
    tier: Tier

    def to_json(self) -> dict:
        return {"condition": self.condition, "evidence": self.evidence, "tier": self.tier.value}


@dataclass
class Certificate:
    """Verdict plus the evidence that produced it.

    ``trail`` holds only the entries the verdict rests on. ``notes`` keep
    everything else: abandoned theorems, the reverse-inclusion sanity
    check, routing decisions.
    """

    verdict: Verdict
    theorem_used: str
    trail: list[TrailEntry]
    decay: DecayCertificate | None = None
    witness: dict | None = None
    notes: list[str] = field(default_factory=list)
    cones: dict[str, ConeDescriptor] = field(default_factory=dict)

    @property
    def message(self) -> str:
        if self.verdict is Verdict.VIOLATED:
            return VIOLATED_MESSAGE
        if self.verdict.proven:
            return "a minimizer exists"
        return "existence undecided"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "theorem_used": self.theorem_used,
            "message": self.message,
            "condition_trail": [t.to_json() for t in self.trail],
            "decay": None if self.decay is None else self.decay.to_json(),
            "witness": self.witness,
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------------------
# inclusion engine


@dataclass
class LeftPiece:
    """One cone of the left-hand intersection.

    ``sampler`` gives sampled evidence that ``d`` lies in the true cone when
    the descriptor itself cannot decide.
    """

    name: str
    cone: ConeDescriptor
    sampler: Callable[[np.ndarray], Membership] | None = None


@dataclass
class RightPiece:
    """One cone of the right-hand intersection.

    ``cone`` must answer soundly; its ``IN`` answers are assumed to come
    from a convex subset of the true cone, so checking generators is
    enough. ``falsifier`` hunts for a numerical witness of ``d`` lying
    outside.
    """

    name: str
    cone: ConeDescriptor | None
    falsifier: Callable[[np.ndarray], FalsifierResult] | None = None


class InclusionStatus(str, enum.Enum):
    HOLDS = "HOLDS"
    FAILS = "FAILS"
    UNDECIDED = "UNDECIDED"


@dataclass
class InclusionResult:
    status: InclusionStatus
    tier: Tier
    evidence: str
    witness: dict | None = None
    checked: int = 0


def _row_blocks(cone: ConeDescriptor) -> list[tuple[np.ndarray, Tier]]:
    """Rows of polyhedral supersets available inside ``cone``."""
    if cone.inner or cone.tier in (Tier.SAMPLED, Tier.UNKNOWN):
        return []
    if cone.kind is ConeKind.INTERSECTION:
        out = []
        for m in cone.members:
            out.extend(_row_blocks(m))
        return out
    if cone.outer:
        return []
    rows = cone.polyhedral_rows()
    return [] if rows is None else [(rows, cone.tier)]


def _is_row_exact(cone: ConeDescriptor) -> bool:
    """The whole cone equals the intersection of its row blocks."""
    if cone.inner or cone.outer or cone.tier in (Tier.SAMPLED, Tier.UNKNOWN):
        return False
    if cone.kind is ConeKind.INTERSECTION:
        return all(_is_row_exact(m) for m in cone.members)
    return cone.polyhedral_rows() is not None


def _round_dir(d: np.ndarray) -> list[float]:
    return [float(f"{v:.12g}") + 0.0 for v in d]


def _left_membership(pieces: list[LeftPiece], d: np.ndarray) -> tuple[Membership, Tier]:
    answers = [(p, p.cone.contains(d)) for p in pieces]
    sound_out = [p for p, m in answers if m is Membership.OUT and p.cone.tier not in (Tier.SAMPLED, Tier.UNKNOWN)]
    if sound_out:
        return Membership.OUT, sound_out[0].cone.tier
    if any(m is Membership.OUT for _, m in answers):
        return Membership.OUT, Tier.SAMPLED
    tiers = []
    for p, m in answers:
        if m is Membership.IN:
            tiers.append(p.cone.tier)
            continue
        if p.sampler is None:
            return Membership.UNKNOWN, Tier.UNKNOWN
        s = p.sampler(d)
        if s is not Membership.IN:
            return Membership.OUT if s is Membership.OUT else Membership.UNKNOWN, Tier.SAMPLED
        tiers.append(Tier.SAMPLED)
    return Membership.IN, weakest_tier(*tiers)


def check_inclusion(
    left: list[LeftPiece],
    right: list[RightPiece],
    seed: int = 0,
    samples: int = INTERIOR_SAMPLES,
) -> InclusionResult:
    """Decide ``cap(left) ⊆ cap(right)``; see the module docstring."""
    n = left[0].cone.dimension
    blocks: list[tuple[np.ndarray, Tier]] = []
    for p in left:
        blocks.extend(_row_blocks(p.cone))
    rows = np.vstack([b for b, _ in blocks]) if blocks else np.zeros((0, n))
    row_tier = weakest_tier(*(t for _, t in blocks))
    P = ConeDescriptor.polyhedral(rows, n) if rows.shape[0] else ConeDescriptor.whole_space(n)
    others = [p for p in left if not _is_row_exact(p.cone)]

    if P.kind is ConeKind.ZERO:
        return InclusionResult(InclusionStatus.HOLDS, row_tier, "left cone is {0} (polyhedral cone algebra)")

    rays, lin = P.generators()
    gens = list(rays) + [s * lin[:, j] for j in range(lin.shape[1]) for s in (1.0, -1.0)]

    # a single ray or line that the remaining pieces soundly exclude
    if others and (len(rays), lin.shape[1]) in ((1, 0), (0, 1)):
        excl_tiers = []
        for d in gens:
            m, t = _left_membership(others, d)
            if m is not Membership.OUT or t in (Tier.SAMPLED, Tier.UNKNOWN):
                break
            excl_tiers.append(t)
        else:
            return InclusionResult(
                InclusionStatus.HOLDS,
                weakest_tier(row_tier, *excl_tiers),
                "left cone is {0}: its polyhedral part is one ray/line, excluded by exact bounds",
            )

    # every generator of the polyhedral superset inside each right piece
    gen_tiers = []
    proved = bool(gens)
    for d in gens:
        for rp in right:
            m = rp.cone.contains(d) if rp.cone is not None else Membership.UNKNOWN
            if m is not Membership.IN or rp.cone.tier in (Tier.SAMPLED, Tier.UNKNOWN):
                proved = False
                break
            gen_tiers.append(rp.cone.tier)
        if not proved:
            break
    if proved:
        return InclusionResult(
            InclusionStatus.HOLDS,
            weakest_tier(row_tier, *gen_tiers),
            f"all {len(gens)} generators of the left cone lie in every right cone",
            checked=len(gens),
        )

    # look for a violating direction
    cands = P.sample_directions(samples, seed)
    falsified = 0
    inside = 0
    for d in cands:
        m, ltier = _left_membership(left, d)
        if m is not Membership.IN:
            continue
        inside += 1
        for rp in right:
            r = rp.cone.contains(d) if rp.cone is not None else Membership.UNKNOWN
            if r is Membership.OUT and rp.cone.tier not in (Tier.SAMPLED, Tier.UNKNOWN):
                w = None
                if rp.falsifier is not None:
                    res = rp.falsifier(d)
                    w = res.witness
                return _fail(d, rp, ltier, rp.cone.tier, "exact characterization", w)
        if falsified >= MAX_FALSIFY:
            continue
        falsified += 1
        for rp in right:
            r = rp.cone.contains(d) if rp.cone is not None else Membership.UNKNOWN
            if r is Membership.IN and rp.cone.tier not in (Tier.SAMPLED, Tier.UNKNOWN):
                continue
            if rp.falsifier is None:
                continue
            res = rp.falsifier(d)
            if res.found:
                return _fail(d, rp, ltier, Tier.SAMPLED, "falsifier witness", res.witness)
    return InclusionResult(
        InclusionStatus.UNDECIDED,
        Tier.SAMPLED,
        f"no violation among {inside} sampled left-cone directions ({falsified} falsified)",
        checked=inside,
    )


def _fail(d, rp: RightPiece, ltier: Tier, rtier: Tier, how: str, w: RetractionWitness | None) -> InclusionResult:
    tier = weakest_tier(ltier, rtier)
    witness = {
        "direction": _round_dir(d),
        "outside": rp.name,
        "evidence": how,
        "retraction_witness": None if w is None else w.to_json(),
    }
    return InclusionResult(InclusionStatus.FAILS, tier, f"direction {_round_dir(d)} is in the left cone but not in {rp.name} ({how})", witness)


# ---------------------------------------------------------------------------
# building blocks for the theorems


def _set_sampler(X: SetSpec, seed: int):
    return _sampled_set_test(X, seed)


def _fun_sampler(f: FunctionSpec, seed: int):
    sched = SamplingSchedule(steps=24)

    def _s(d):
        est = estimate_asymptotic(f, d, sched, seed).lower_trend.as_float()
        return Membership.IN if est <= 1e-6 * max(1.0, float(np.linalg.norm(d))) else Membership.OUT

    return _s


def _left_K(f: FunctionSpec, seed: int, name: str = "K(f)") -> LeftPiece:
    return LeftPiece(name, function_asymptotic_cone(f, seed), _fun_sampler(f, seed))


def _left_set(X: SetSpec, seed: int, name: str) -> LeftPiece:
    return LeftPiece(name, asymptotic_cone_of_set(X, seed), _set_sampler(X, seed))


def _right_fun(f: FunctionSpec, budget: FalsifierBudget, name: str = "R(f)") -> RightPiece:
    return RightPiece(name, function_retractive_cone(f), lambda d: falsify_fun_retractive(f, d, budget))


def _right_constancy(f: FunctionSpec, name: str = "C(f)") -> RightPiece:
    """``C(f)`` for convex ``f``: exact for polynomials, inner otherwise."""
    if f.polynomial is not None:
        cone = constancy_space(f.polynomial)
        cone.tier = f.convexity_tier
    else:
        cone = ConeDescriptor.oracle(f.dimension, _constancy_test(f), inner=True,
                                     tier=weakest_tier(f.convexity_tier, f.bound_tier), label="C(f)")
    return RightPiece(name, cone, None)


def _right_set(X: SetSpec, budget: FalsifierBudget, name: str = "R(X)") -> RightPiece:
    return RightPiece(name, set_retractive_inner(X), lambda d: falsify_set_retractive(X, d, budget))


def _right_level(g: FunctionSpec, budget: FalsifierBudget, name: str) -> RightPiece:
    return RightPiece(name, set_retractive_inner(SublevelSet(g)), lambda d: level_set_retractive_falsifier(g, 0.0, d, budget))


def _C_piece(prob: ProblemSpec) -> LeftPiece:
    C = prob.C
    cone = ConeDescriptor.whole_space(prob.dimension) if C.n_rows == 0 else ConeDescriptor.polyhedral(C.A, prob.dimension, label="C_inf")
    return LeftPiece("C_inf", cone)


def _C_right(prob: ProblemSpec, name: str = "R(C)") -> RightPiece:
    piece = _C_piece(prob)
    return RightPiece(name, piece.cone, lambda d: falsify_set_retractive(prob.C, d))


def _support_verdict(support_tier: Tier, compact: bool = False) -> Verdict:
    if support_tier is Tier.PROVEN:
        return Verdict.PROVEN_EXISTS_COMPACT if compact else Verdict.PROVEN_EXISTS
    if support_tier is Tier.ASSERTED:
        return Verdict.PROVEN_UNDER_ASSERTIONS
    return Verdict.UNKNOWN


def _decay_entry(decay: DecayCertificate) -> TrailEntry:
    if decay.gauge is GaugeKind.NORM_POWER:
        ev = f"{decay.rule.value}: gauge ||x||^{decay.p:g}"
    elif decay.gauge is GaugeKind.USER_COERCIVE:
        ev = f"{decay.rule.value}: user coercive gauge"
    else:
        ev = "no decay rule applies"
    return TrailEntry("bounded decay", ev, decay.tier if decay.known else Tier.UNKNOWN)


def _from_inclusion(theorem: str, condition: str, res: InclusionResult, decay: DecayCertificate | None,
                    cones: dict, notes: list[str]) -> Certificate:
    if res.status is InclusionStatus.FAILS:
        return Certificate(Verdict.VIOLATED, theorem, [TrailEntry(condition, res.evidence, res.tier)], decay, res.witness, notes, cones)
    trail = [TrailEntry(condition, res.evidence, res.tier)]
    if decay is not None:
        trail.insert(0, _decay_entry(decay))
    if res.status is InclusionStatus.HOLDS:
        verdict = _support_verdict(weakest_tier(*(t.tier for t in trail)))
        if verdict is Verdict.UNKNOWN:
            notes = notes + ["inclusion holds but part of the support is only sampled"]
        return Certificate(verdict, theorem, trail, decay, None, notes, cones)
    return Certificate(Verdict.UNKNOWN, theorem, trail, decay, None, notes, cones)


def _decay(prob: ProblemSpec, seed: int) -> DecayCertificate:
    return classify_decay(prob.objective, prob.feasible_set, seed, probe=prob.probe(seed),
                          coercive_gauge=None, estimate=False)


def _reverse_check(left: list[LeftPiece], right: list[RightPiece], seed: int) -> str:
    """Sample the right cone and test left membership (the reverse inclusion).

    The right-hand set always sits inside the left-hand one, so equality is
    expected whenever the forward inclusion holds. Only exact row pieces of
    the right side are sampled; their intersection is a superset of the
    right cone, so a mismatch is conclusive only when every piece is exact.
    """
    n = left[0].cone.dimension
    exact = [rp.cone for rp in right if rp.cone is not None and _is_row_exact(rp.cone)]
    if not exact:
        return "reverse inclusion: no exact right cone, skipped"
    R = ConeDescriptor.polyhedral(np.vstack([c.polyhedral_rows() for c in exact]), n)
    if R.kind is ConeKind.ZERO:
        return "reverse inclusion: consistent, right cone is {0}"
    dirs = R.sample_directions(64, seed)
    bad = [d for d in dirs if _left_membership(left, d)[0] is Membership.OUT]
    if not bad:
        return f"reverse inclusion: consistent on {len(dirs)} right-cone samples"
    if len(exact) == len(right):
        return f"reverse inclusion: {len(bad)} of {len(dirs)} right-cone samples fall outside the left cone"
    return "reverse inclusion: inconclusive, right cone only bounded from outside"


# ---------------------------------------------------------------------------
# theorems


def certify_compact(prob: ProblemSpec, seed: int = 0) -> Certificate:
    """Compact case: ``X_inf ∩ K(f) = {0}`` gives a nonempty compact solution set.

    Only an exact (not outer) description of ``X_inf`` is used. A nonzero
    direction in the intersection only disables this theorem; it never
    yields ``VIOLATED``.
    """
    prob.probe(seed)
    X = prob.feasible_set
    xc = asymptotic_cone_of_set(X, seed)
    cones = {"X_inf": xc, "K(f)": function_asymptotic_cone(prob.objective, seed)}
    if xc.outer or xc.tier in (Tier.SAMPLED, Tier.UNKNOWN):
        return Certificate(Verdict.UNKNOWN, "compact", [TrailEntry("X_inf ∩ K(f) = {0}", "X_inf only known as a superset or by sampling", Tier.UNKNOWN)],
                           notes=["compact case needs an exact X_inf"], cones=cones)
    left = [_left_set(X, seed, "X_inf"), _left_K(prob.objective, seed)]
    # an impossible right cone {0}: the inclusion then says the left cone is {0}
    zero = RightPiece("{0}", ConeDescriptor.zero(prob.dimension))
    res = check_inclusion(left, [zero], seed)
    entry = TrailEntry("X_inf ∩ K(f) = {0}", res.evidence, res.tier)
    if res.status is InclusionStatus.HOLDS:
        verdict = _support_verdict(res.tier, compact=True)
        return Certificate(verdict, "compact", [entry], cones=cones)
    note = "compact case disabled: " + (res.evidence if res.status is InclusionStatus.FAILS else "no proof that the intersection is {0}")
    return Certificate(Verdict.UNKNOWN, "compact", [entry], notes=[note], cones=cones)


def certify_main(prob: ProblemSpec, seed: int = 0, budget: FalsifierBudget | None = None,
                 decay: DecayCertificate | None = None) -> Certificate:
    """Bounded decay plus ``X_inf ∩ K(f) ⊆ R(X) ∩ R(f)``."""
    budget = budget or FalsifierBudget(seed=seed)
    decay = decay or _decay(prob, seed)
    X, f = prob.feasible_set, prob.objective
    left = [_left_set(X, seed, "X_inf"), _left_K(f, seed)]
    right = [_right_fun(f, budget), _right_set(X, budget)]
    cones = {"X_inf": left[0].cone, "K(f)": left[1].cone}
    if decay.gauge is not GaugeKind.NORM_POWER:
        return Certificate(Verdict.UNKNOWN, "main", [_decay_entry(decay)], decay,
                           notes=["no norm-power decay certificate"], cones=cones)
    res = check_inclusion(left, right, seed)
    cert = _from_inclusion("main", "X_inf ∩ K(f) ⊆ R(X) ∩ R(f)", res, decay, cones, [])
    if cert.verdict.proven:
        cert.notes.append(_reverse_check(left, right, seed))
    return cert


def gradient_growth(g: FunctionSpec, d, times=None, curve=None) -> float:
    """Sampled ``limsup <grad g(x_k), d> / t_k`` along ``x_k = t_k d`` (or ``curve``)."""
    d = np.asarray(d, dtype=float)
    times = np.asarray(times if times is not None else 2.0 ** np.arange(20, 33))
    vals = []
    for t in times:
        x = curve(t) if curve is not None else t * d
        vals.append(float(g.gradient(x) @ d) / t)
    return max(vals[-5:])


def _quadratic_gauge_limit(g: FunctionSpec, d) -> float | None:
    p = g.polynomial
    if p is None or p.degree > 2:
        return None
    Q, _, _ = quadratic_form(p)
    return float(d @ Q @ d)


def certify_coercive_g(prob: ProblemSpec, g: FunctionSpec | None = None, seed: int = 0,
                       budget: FalsifierBudget | None = None) -> Certificate:
    """Main inclusion with a user coercive gauge ``g`` and the gradient condition.

    ``limsup <grad g(x_k), d> / t_k > 0`` is needed for nonzero ``d`` in the
    right cone. For quadratic ``g`` the limit is exactly ``d'Gd``; for
    anything else it is sampled, which leaves the verdict ``UNKNOWN``. The
    Lipschitz gradient of ``g`` and the decay with respect to ``g`` are user
    assertions, so the best verdict is ``PROVEN_UNDER_ASSERTIONS``.
    """
    g = g or prob.coercive_gauge
    if g is None:
        raise ValueError("certify_coercive_g needs a coercive gauge g")
    if not g.has_gradient:
        raise ValueError("coercive gauge must supply a gradient")
    budget = budget or FalsifierBudget(seed=seed)
    prob.probe(seed)
    X, f = prob.feasible_set, prob.objective
    decay = classify_decay(f, X, seed, probe=prob.probe(seed), coercive_gauge=g, estimate=False)
    left = [_left_set(X, seed, "X_inf"), _left_K(f, seed)]
    right = [_right_fun(f, budget), _right_set(X, budget)]
    cones = {"X_inf": left[0].cone, "K(f)": left[1].cone}
    res = check_inclusion(left, right, seed)
    theorem = "coercive_g"
    cond = "X_inf ∩ K(f) ⊆ R(X) ∩ R(f)"
    if res.status is InclusionStatus.FAILS:
        return _from_inclusion(theorem, cond, res, decay, cones, [])
    trail = [_decay_entry(decay), TrailEntry(cond, res.evidence, res.tier)]
    if res.status is not InclusionStatus.HOLDS:
        return Certificate(Verdict.UNKNOWN, theorem, trail, decay, notes=[], cones=cones)
    # gradient condition on the nonzero directions of the left cone
    blocks = []
    for p in left:
        blocks.extend(_row_blocks(p.cone))
    n = prob.dimension
    P = ConeDescriptor.polyhedral(np.vstack([b for b, _ in blocks]), n) if blocks else ConeDescriptor.whole_space(n)
    dirs = []
    if P.kind is not ConeKind.ZERO:
        dirs = [d for d in P.sample_directions(32, seed) if _left_membership(left, d)[0] is not Membership.OUT]
    if not dirs:
        trail.append(TrailEntry("limsup <grad g(x_k), d>/t_k > 0", "vacuous: no nonzero direction", Tier.PROVEN))
    else:
        exact = [_quadratic_gauge_limit(g, d) for d in dirs]
        if all(v is not None for v in exact):
            ok = all(v > 0 for v in exact)
            trail.append(TrailEntry("limsup <grad g(x_k), d>/t_k > 0", f"exact limit d'Gd on {len(dirs)} directions", Tier.PROVEN if ok else Tier.UNKNOWN))
            if not ok:
                return Certificate(Verdict.UNKNOWN, theorem, trail, decay, notes=["gradient condition fails"], cones=cones)
        else:
            vals = [gradient_growth(g, d) for d in dirs]
            ok = all(v > 1e-9 for v in vals)
            trail.append(TrailEntry("limsup <grad g(x_k), d>/t_k > 0", f"sampled minimum {min(vals):.3g}", Tier.SAMPLED))
            note = "gradient condition only sampled" if ok else "sampled gradient condition fails"
            return Certificate(Verdict.UNKNOWN, theorem, trail, decay, notes=[note], cones=cones)
    trail.append(TrailEntry("Lipschitz gradient of g", "user assertion", Tier.ASSERTED))
    verdict = _support_verdict(weakest_tier(*(t.tier for t in trail)))
    if verdict is Verdict.PROVEN_EXISTS:
        verdict = Verdict.PROVEN_UNDER_ASSERTIONS
    return Certificate(verdict, theorem, trail, decay, notes=[], cones=cones)


def certify_convex_structured(prob: ProblemSpec, seed: int = 0, budget: FalsifierBudget | None = None) -> Certificate:
    """Convex problem over ``C ∩ {g_j <= 0}``, or convex ``f`` on a nonconvex set.

    With every piece convex the polyhedral-``C`` condition
    ``C_inf ∩ K(g_j) ∩ K(f) ⊆ C_inf ∩ R(L_0(g_j)) ∩ R(f)`` is checked. With
    convex ``f`` but a nonconvex set, ``X_inf ∩ K(f) ⊆ R(X) ∩ C(f)`` is used.
    Nonconvex ``f`` is handed to :func:`certify_functional`.
    """
    budget = budget or FalsifierBudget(seed=seed)
    f = prob.objective
    if not f.is_convex:
        cert = certify_functional(prob, seed, budget)
        cert.notes.insert(0, "objective not convex: delegated to the functional-constraint theorems")
        return cert
    prob.probe(seed)
    decay = _decay(prob, seed)
    if prob.constraints_convex:
        left = [_C_piece(prob)] + [_left_K(g, seed, f"K(g_{j + 1})") for j, g in enumerate(prob.constraints)] + [_left_K(f, seed)]
        right = [_right_fun(f, budget), _C_right(prob, "C_inf")]
        right += [_right_level(g, budget, f"R(L0(g_{j + 1}))") for j, g in enumerate(prob.constraints)]
        cond = "C_inf ∩ K(g_j) ∩ K(f) ⊆ C_inf ∩ R(L0(g_j)) ∩ R(f)" if prob.constraints else "C_inf ∩ K(f) ⊆ C_inf ∩ R(f)"
        theorem = "convex_structured_polyhedral"
    else:
        X = prob.feasible_set
        left = [_left_set(X, seed, "X_inf"), _left_K(f, seed)]
        right = [_right_constancy(f), _right_set(X, budget)]
        cond = "X_inf ∩ K(f) ⊆ R(X) ∩ C(f)"
        theorem = "convex_objective_nonconvex_set"
    cones = {p.name: p.cone for p in left}
    res = check_inclusion(left, right, seed)
    cert = _from_inclusion(theorem, cond, res, decay, cones, [])
    if theorem == "convex_objective_nonconvex_set" and not cert.verdict.proven and cert.verdict is not Verdict.VIOLATED:
        sub = certify_functional(prob, seed, budget)
        sub.notes.insert(0, f"{theorem}: {res.evidence}")
        return sub
    return cert


def _functional_conditions(prob: ProblemSpec, seed: int, budget: FalsifierBudget):
    f = prob.objective
    X = prob.feasible_set
    gs = prob.constraints
    Cp = _C_piece(prob)
    Kf = _left_K(f, seed)
    Lg = [_left_set(SublevelSet(g), seed, f"(L0(g_{j + 1}))_inf") for j, g in enumerate(gs)]
    Kg = [_left_K(g, seed, f"K(g_{j + 1})") for j, g in enumerate(gs)]
    Rf = _right_fun(f, budget)
    RX = _right_set(X, budget)
    conds = [
        ("functional_C1", "C_inf ∩ (L0(g_j))_inf ∩ K(f) ⊆ R(X) ∩ R(f)", [Cp] + Lg + [Kf], [Rf, RX]),
        ("functional_C2", "C_inf ∩ K(g_j) ∩ K(f) ⊆ R(X) ∩ R(f)", [Cp] + Kg + [Kf], [Rf, RX]),
    ]
    if all(g.is_convex for g in gs) and not prob.oracles:
        RL = [_right_level(g, budget, f"R(L0(g_{j + 1}))") for j, g in enumerate(gs)]
        conds.append(("functional_C3", "C_inf ∩ K(g_j) ∩ K(f) ⊆ R(C) ∩ R(L0(g_j)) ∩ R(f)", [Cp] + Kg + [Kf], [Rf, _C_right(prob)] + RL))
        lin = RightPiece("Lin(C)", lineality_space(prob.C.A) if prob.C.n_rows else ConeDescriptor.whole_space(prob.dimension))
        Cg = [_right_constancy(g, f"C(g_{j + 1})") for j, g in enumerate(gs)]
        conds.append(("functional_C4", "C_inf ∩ K(g_j) ∩ K(f) ⊆ Lin(C) ∩ C(g_j) ∩ R(f)", [Cp] + Kg + [Kf], [Rf, lin] + Cg))
        if prob.C.n_rows == 0 and gs and all(g.polynomial is not None for g in gs):
            conds.append(("convex_polynomial_corollary", "∩ K(g_j) ∩ K(f) ⊆ ∩ R(g_j) ∩ R(f)", Kg + [Kf], [Rf] + Cg))
    return conds


def certify_functional(prob: ProblemSpec, seed: int = 0, budget: FalsifierBudget | None = None,
                       decay: DecayCertificate | None = None) -> Certificate:
    """Constraint sets ``C ∩ {g_j <= 0}``: conditions C1 and C2, then C3, C4 and
    the convex-polynomial corollary when the ``g_j`` are convex.

    The first condition that holds gives the verdict. C1 has the largest
    left cone among these and, with C2, the largest right cone, so a
    direction refuting C1 refutes every other condition; such a refutation
    is reported as ``VIOLATED`` right away. A refutation of a later
    condition is reported only when no condition holds.
    """
    budget = budget or FalsifierBudget(seed=seed)
    decay = decay or _decay(prob, seed)
    notes: list[str] = []
    cones: dict = {}
    failures: list[tuple[str, str, InclusionResult]] = []
    undecided: list[tuple[str, str, InclusionResult]] = []
    if decay.gauge is GaugeKind.UNKNOWN:
        return Certificate(Verdict.UNKNOWN, "functional", [_decay_entry(decay)], decay, notes=["no decay certificate"])
    for theorem, cond, left, right in _functional_conditions(prob, seed, budget):
        for p in left:
            cones.setdefault(p.name, p.cone)
        res = check_inclusion(left, right, seed)
        if res.status is InclusionStatus.HOLDS:
            cert = _from_inclusion(theorem, cond, res, decay, cones, notes)
            if cert.verdict.proven:
                return cert
            notes.append(f"{theorem}: holds but support not proven")
            undecided.append((theorem, cond, res))
            continue
        if res.status is InclusionStatus.FAILS:
            if theorem == "functional_C1":
                cert = _from_inclusion(theorem, cond, res, decay, cones, notes)
                cert.notes.append("a C1 counterexample refutes C2, C3, C4 and the corollary as well")
                return cert
            failures.append((theorem, cond, res))
            notes.append(f"{theorem}: refuted")
        else:
            notes.append(f"{theorem}: {res.evidence}")
            undecided.append((theorem, cond, res))
    if failures:
        theorem, cond, res = failures[0]
        return _from_inclusion(theorem, cond, res, decay, cones, notes)
    if undecided:
        theorem, cond, res = undecided[0]
        return Certificate(Verdict.UNKNOWN, "functional", [_decay_entry(decay), TrailEntry(cond, res.evidence, res.tier)], decay, notes=notes, cones=cones)
    return Certificate(Verdict.UNKNOWN, "functional", [_decay_entry(decay)], decay, notes=notes, cones=cones)


def certify(prob: ProblemSpec, seed: int = 0, budget: FalsifierBudget | None = None) -> Certificate:
    """Route through compact, structured-convex, functional and main theorems.

    The first decisive (proven or violated) certificate wins; earlier
    attempts are summarized in its notes.
    """
    budget = budget or FalsifierBudget(seed=seed)
    history: list[str] = []
    decay = _decay(prob, seed)

    def _finish(cert: Certificate) -> Certificate:
        if cert.decay is None:
            cert.decay = decay
        cert.notes = history + cert.notes
        return cert

    cert = certify_compact(prob, seed)
    if cert.verdict.proven:
        return _finish(cert)
    history.append("compact: " + (cert.notes[-1] if cert.notes else cert.verdict.value))
    cert = certify_convex_structured(prob, seed, budget)
    if cert.verdict.proven or cert.verdict is Verdict.VIOLATED:
        return _finish(cert)
    history.append(f"{cert.theorem_used}: {cert.verdict.value}")
    if prob.objective.is_convex:
        # the structured theorem did not delegate; try the functional family explicitly
        cert = certify_functional(prob, seed, budget, decay)
        if cert.verdict.proven or cert.verdict is Verdict.VIOLATED:
            return _finish(cert)
        history.append(f"{cert.theorem_used}: {cert.verdict.value}")
    if prob.coercive_gauge is not None:
        cert = certify_coercive_g(prob, None, seed, budget)
        if cert.verdict.proven or cert.verdict is Verdict.VIOLATED:
            return _finish(cert)
        history.append(f"coercive_g: {cert.verdict.value}")
    cert = certify_main(prob, seed, budget, decay)
    return _finish(cert)


def audit_certificate(cert: Certificate) -> list[str]:
    """Trail-structure problems; an empty list means the certificate is sound.

    ``PROVEN_EXISTS*`` needs every trail entry at tier ``Proven``;
    ``PROVEN_UNDER_ASSERTIONS`` tolerates ``Asserted`` but nothing weaker.
    """
    issues = []
    if cert.verdict in (Verdict.PROVEN_EXISTS, Verdict.PROVEN_EXISTS_COMPACT):
        allowed = {Tier.PROVEN}
    elif cert.verdict is Verdict.PROVEN_UNDER_ASSERTIONS:
        allowed = {Tier.PROVEN, Tier.ASSERTED}
    else:
        allowed = None
    if allowed is not None:
        if not cert.trail:
            issues.append("proven verdict with an empty trail")
        for e in cert.trail:
            if e.tier not in allowed:
                issues.append(f"{cert.verdict.value} cites {e.tier.value} evidence: {e.condition}")
    if cert.verdict is Verdict.VIOLATED and not cert.witness:
        issues.append("VIOLATED without a witness")
    return issues
