"""Problem container: ``inf f(x)`` over ``C`` intersected with ``{g_j <= 0}``."""

from __future__ import annotations

import hashlib
import json
from typing import Sequence

import numpy as np

from .algebra import ConvexityStatus
from .decay import probe_feasible_point
from .functions import FunctionSpec, IntersectionSet, OracleSet, Polyhedron, SetSpec, SublevelSet

__all__ = ["ProblemSpec"]


def _affine_row(g: FunctionSpec):
    """``(a, beta)`` with ``g(x) <= 0  <=>  a.x <= beta`` for affine ``g``."""
    p = g.polynomial
    if p is None or p.degree > 1:
        return None
    n = g.dimension
    a = np.zeros(n)
    b = 0.0
    for t in p.terms:
        if t.degree == 0:
            b += t.coefficient
        else:
            a[t.exponents.index(1)] += t.coefficient
    return a, -b


class ProblemSpec:
    """``inf f(x)`` subject to ``x in C``, ``g_j(x) <= 0`` and optional oracle sets.

    Affine ``g_j`` are folded into the polyhedron ``C`` so that the exact
    polyhedral machinery sees them.

    Parameters
    ----------
    objective : FunctionSpec
    C : Polyhedron, optional
        Defaults to the whole space.
    constraints : sequence of FunctionSpec
        Functional inequalities ``g_j(x) <= 0``.
    oracles : sequence of OracleSet
        Extra closed sets known only through membership.
    coercive_gauge : FunctionSpec, optional
        User-supplied coercive ``g`` for the coercive-gauge theorem.
    probe_points : sequence of vectors
        Candidate feasible points tried before the automatic probe.
    """

    def __init__(
        self,
        objective: FunctionSpec,
        *,
        C: Polyhedron | None = None,
        constraints: Sequence[FunctionSpec] = (),
        oracles: Sequence[OracleSet] = (),
        coercive_gauge: FunctionSpec | None = None,
        probe_points: Sequence = (),
        name: str = "",
        source: dict | None = None,
    ):
        n = objective.dimension
        self.dimension = n
        self.objective = objective
        C = C if C is not None else Polyhedron.whole_space(n)
        if C.dimension != n:
            raise ValueError("C has the wrong dimension")
        rows, rhs, kept = [C.A], [C.b], []
        for g in constraints:
            if g.dimension != n:
                raise ValueError("constraint dimension mismatch")
            aff = _affine_row(g)
            if aff is None:
                kept.append(g)
            elif np.any(aff[0]):
                rows.append(aff[0][None, :])
                rhs.append(np.array([aff[1]]))
            elif aff[1] < 0:
                # a constant positive constraint: record it as an infeasible row
                rows.append(np.zeros((1, n)))
                rhs.append(np.array([aff[1]]))
        self.C = Polyhedron(np.vstack(rows), np.concatenate(rhs), n)
        self.constraints = tuple(kept)
        self.oracles = tuple(oracles)
        for o in self.oracles:
            if o.dimension != n:
                raise ValueError("oracle dimension mismatch")
        if coercive_gauge is not None and coercive_gauge.dimension != n:
            raise ValueError("coercive gauge dimension mismatch")
        self.coercive_gauge = coercive_gauge
        self.name = name
        self.source = source
        self._probe_candidates = [np.asarray(p, dtype=float) for p in probe_points]
        self._probe = None

    @property
    def feasible_set(self) -> SetSpec:
        parts: list[SetSpec] = []
        if self.C.n_rows or not (self.constraints or self.oracles):
            parts.append(self.C)
        parts += [SublevelSet(g) for g in self.constraints]
        parts += list(self.oracles)
        return parts[0] if len(parts) == 1 else IntersectionSet(parts)

    @property
    def is_polyhedral(self) -> bool:
        return not self.constraints and not self.oracles

    @property
    def constraints_convex(self) -> bool:
        return all(g.is_convex for g in self.constraints) and not self.oracles

    def probe(self, seed: int = 0) -> np.ndarray:
        """A stored feasible point in ``dom f`` (computed on first use)."""
        if self._probe is None:
            self._probe = probe_feasible_point(self.objective, self.feasible_set, seed, self._probe_candidates)
        return self._probe

    def assertions(self) -> dict:
        """User assertions echoed into report provenance."""
        out = {}
        f = self.objective
        if f.convexity is ConvexityStatus.ASSERTED:
            out["objective.convex"] = True
        if f.finite_min:
            out["objective.finite_min"] = True
        if f.lipschitz_order is not None:
            out["objective.lipschitz_order"] = f.lipschitz_order
        for j, g in enumerate(self.constraints):
            if g.convexity is ConvexityStatus.ASSERTED:
                out[f"constraints[{j}].convex"] = True
        return out

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "objective": self.objective.to_json(),
            "C": self.C.to_json(),
            "constraints": [g.to_json() for g in self.constraints],
            "oracles": [o.to_json() for o in self.oracles],
        }

    def digest(self) -> str:
        """SHA-256 of the canonical source (or of the structural JSON)."""
        payload = self.source if self.source is not None else self.to_json()
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def __repr__(self) -> str:
        return f"ProblemSpec({self.name or 'unnamed'}, n={self.dimension}, {len(self.constraints)} g_j, {self.C.n_rows} rows)"
