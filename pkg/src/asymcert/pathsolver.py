"""Regularization path: minimize ``f + r ||x||**(p+1)`` for ``r -> 0``.

When the existence conditions hold the regularized minimizers stay
bounded and accumulate at a solution. When they do not, the path usually
runs off to infinity and its direction is reported as evidence.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .problem import ProblemSpec

__all__ = [
    "PathStatus",
    "RegSchedule",
    "PathStep",
    "SolveTrace",
    "InnerSolverError",
    "solve_regularized",
    "regularization_path",
    "FEAS_TOL",
]

FEAS_TOL = 1e-8
MU_START = 10.0
MU_MAX = 1e12
N_STARTS = 16
WARM_EXTRA_STARTS = 3
MAX_ITER = 5000
STEP_TOL = 1e-6
DIVERGENCE_NORM = 1e6
GROWTH = 1.5
DECREASE_FLOOR = 1e-13
REG_GAP = 1e-6


class InnerSolverError(RuntimeError):
    """No feasible point came out of any start of the inner solver."""


class PathStatus(str, enum.Enum):
    CONVERGED = "CONVERGED"
    DIVERGENT = "DIVERGENT"
    BUDGET_EXHAUSTED = "BUDGET_EXHAUSTED"


@dataclass(frozen=True)
class RegSchedule:
    """``r_k = r0 * decay_factor**k`` for ``k < max_steps``; regularizer power ``p + 1``."""

    r0: float = 1.0
    decay_factor: float = 0.5
    max_steps: int = 30
    exponent_p: float = 1.0

    def __post_init__(self):
        if not (self.r0 > 0 and 0 < self.decay_factor < 1 and self.max_steps >= 1 and self.exponent_p >= 0):
            raise ValueError("invalid regularization schedule")

    def radii(self) -> np.ndarray:
        return self.r0 * self.decay_factor ** np.arange(self.max_steps)


@dataclass(frozen=True)
class PathStep:
    r: float
    x: np.ndarray
    reg_value: float
    f_value: float

    def to_json(self) -> dict:
        return {
            "r": float(self.r),
            "x": [float(f"{v:.12g}") + 0.0 for v in self.x],
            "reg_value": float(f"{self.reg_value:.12g}"),
            "f_value": float(f"{self.f_value:.12g}"),
        }


@dataclass
class SolveTrace:
    """Iterates of the path plus the diagnosis.

    ``x_star``/``f_star`` are set for ``CONVERGED``; ``direction`` for
    ``DIVERGENT``. ``best_f`` is the smallest objective value seen.
    """

    iterates: list[PathStep]
    status: PathStatus
    exponent_p: float
    x_star: np.ndarray | None = None
    f_star: float | None = None
    direction: np.ndarray | None = None
    reason: str = ""
    best_f: float = math.inf
    best_x: np.ndarray | None = None

    def to_json(self, full: bool = True) -> dict:
        def _vec(v):
            return None if v is None else [float(f"{c:.12g}") + 0.0 for c in v]

        out = {
            "status": self.status.value,
            "exponent_p": self.exponent_p,
            "steps": len(self.iterates),
            "reason": self.reason,
            "x_star": _vec(self.x_star),
            "f_star": None if self.f_star is None else float(f"{self.f_star:.12g}"),
            "direction": _vec(self.direction),
            "best_f": float(f"{self.best_f:.12g}"),
            "best_x": _vec(self.best_x),
        }
        if self.status is PathStatus.DIVERGENT:
            out["caveat"] = "divergence is evidence, not proof, that no minimizer exists"
        if full:
            out["iterates"] = [s.to_json() for s in self.iterates]
        return out


# ---------------------------------------------------------------------------
# inner solver


def _split_rows(prob: ProblemSpec):
    """Separate coordinate bounds from general linear rows.

    Rows of the form ``+-x_i <= b`` become L-BFGS-B bounds; domain rows of
    the objective are included so the iterates never leave ``dom f``.
    """
    n = prob.dimension
    A, b = prob.C.A, prob.C.b
    dom = prob.objective.domain_rows()
    if dom:
        A = np.vstack([A] + [a[None, :] for a, _ in dom])
        b = np.concatenate([b, [beta for _, beta in dom]])
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    general = []
    for a, beta in zip(A, b):
        nz = np.flatnonzero(a)
        if len(nz) == 1:
            i = int(nz[0])
            v = beta / a[i]
            if a[i] > 0:
                hi[i] = min(hi[i], v)
            else:
                lo[i] = max(lo[i], v)
        elif len(nz) == 0:
            if beta < 0:
                raise InnerSolverError("constraint 0 <= negative number is infeasible")
        else:
            general.append((a, beta))
    if np.any(lo > hi):
        raise InnerSolverError("box bounds are inconsistent")
    GA = np.array([a for a, _ in general]).reshape(-1, n)
    Gb = np.array([beta for _, beta in general])
    return lo, hi, GA, Gb


class _Inner:
    """Penalized regularized objective for one ``(prob, r, p)``."""

    def __init__(self, prob: ProblemSpec, p: float):
        self.prob = prob
        self.f = prob.objective
        self.q = p + 1.0
        self.lo, self.hi, self.GA, self.Gb = _split_rows(prob)
        self.gs = prob.constraints
        self.mu_hint = MU_START
        self.bounds = list(zip(np.where(np.isfinite(self.lo), self.lo, None), np.where(np.isfinite(self.hi), self.hi, None)))

    def clip(self, x):
        return np.clip(x, self.lo, self.hi)

    def reg(self, x, r):
        return r * float(np.linalg.norm(x)) ** self.q

    def reg_grad(self, x, r):
        nx = float(np.linalg.norm(x))
        if nx == 0:
            return np.zeros_like(x)
        return r * self.q * nx ** (self.q - 2.0) * x

    def residuals(self, x) -> np.ndarray:
        """Constraint values that must be ``<= 0`` (bounds excluded)."""
        out = []
        if self.GA.shape[0]:
            out.extend(self.GA @ x - self.Gb)
        out.extend(g.value(x) for g in self.gs)
        return np.array(out, dtype=float)

    def jacobian(self, x) -> np.ndarray:
        rows = [a for a in self.GA]
        rows += [g.gradient(x) for g in self.gs]
        return np.array(rows, dtype=float).reshape(-1, x.size)

    def violation(self, x) -> float:
        box = float(max(0.0, np.max(self.lo - x, initial=0.0), np.max(x - self.hi, initial=0.0)))
        res = self.residuals(x)
        v = float(np.max(res, initial=0.0)) if res.size else 0.0
        if not math.isfinite(v):
            return math.inf
        return max(box, v, 0.0)

    def objective(self, r, mu):
        f = self.f

        def fun(x):
            fx = f.value(x)
            if not math.isfinite(fx):
                return 1e300, np.zeros_like(x)
            val = fx + self.reg(x, r)
            grad = f.gradient(x) + self.reg_grad(x, r)
            res = self.residuals(x)
            if res.size:
                pos = np.maximum(res, 0.0)
                if not np.all(np.isfinite(pos)):
                    return 1e300, np.zeros_like(x)
                if np.any(pos > 0):
                    val += mu * float(pos @ pos)
                    J = self.jacobian(x)
                    grad = grad + 2.0 * mu * (pos @ J)
            if not (math.isfinite(val) and np.all(np.isfinite(grad))):
                return 1e300, np.zeros_like(x)
            return val, grad

        return fun

    def polish(self, x, iters: int = 50):
        """Gauss-Newton steps onto the violated constraints."""
        for _ in range(iters):
            res = self.residuals(x)
            if not res.size:
                return self.clip(x)
            viol = res > 0
            if not np.any(viol) or float(np.max(res)) <= 0.1 * FEAS_TOL:
                return x
            J = self.jacobian(x)[viol]
            target = res[viol] + 1e-3 * FEAS_TOL
            step, *_ = np.linalg.lstsq(J, -target, rcond=None)
            x = self.clip(x + step)
        return x

    def local_solve(self, x0, r):
        x = self.clip(np.asarray(x0, dtype=float))
        if not self.gs and not self.GA.shape[0]:
            res = minimize(self.objective(r, 0.0), x, jac=True, method="L-BFGS-B", bounds=self.bounds,
                           options={"maxiter": MAX_ITER, "ftol": 1e-15, "gtol": 1e-10})
            return self.clip(res.x)
        # warm-started solves resume the penalty weight a few doublings back
        mu = max(MU_START, self.mu_hint / 8.0)
        while True:
            res = minimize(self.objective(r, mu), x, jac=True, method="L-BFGS-B", bounds=self.bounds,
                           options={"maxiter": MAX_ITER, "ftol": 1e-15, "gtol": 1e-10})
            x = self.clip(res.x)
            v = self.violation(x)
            if v <= FEAS_TOL:
                self.mu_hint = mu
                return x
            if v <= 1e-5 or mu >= MU_MAX:
                y = self.polish(x)
                if self.violation(y) <= FEAS_TOL:
                    self.mu_hint = mu
                    return y
                if mu >= MU_MAX:
                    return x
            mu = min(2.0 * mu, MU_MAX)


def _starts(prob: ProblemSpec, inner: _Inner, seed: int, count: int, scale: float = 1.0, anchor=None) -> list[np.ndarray]:
    n = prob.dimension
    rng = np.random.default_rng(seed)
    out: list[np.ndarray] = []
    if anchor is not None:
        out.append(np.asarray(anchor, dtype=float))
    else:
        try:
            out.append(prob.probe(seed))
        except ValueError:
            pass
        out.append(inner.clip(np.zeros(n)))
    while len(out) < count:
        base = out[0] if out else np.zeros(n)
        d = rng.standard_normal(n)
        d /= np.linalg.norm(d)
        radius = scale * float(rng.choice([0.5, 1.0, 3.0, 10.0]))
        out.append(inner.clip(base + radius * d))
    return out[:count]


def _best_of(inner: _Inner, starts, r):
    best = None
    for x0 in starts:
        x = inner.local_solve(x0, r)
        if inner.violation(x) > FEAS_TOL or not prob_in_extra_sets(inner.prob, x):
            continue
        fx = inner.f.value(x)
        if not math.isfinite(fx):
            continue
        val = fx + inner.reg(x, r)
        if best is None or val < best[0]:
            best = (val, x, fx)
    return best


def prob_in_extra_sets(prob: ProblemSpec, x) -> bool:
    return all(o.contains(x) for o in prob.oracles)


def solve_regularized(prob: ProblemSpec, p: float, r: float, seed: int = 0, starts=None) -> np.ndarray:
    """Best feasible point of ``f + r ||x||**(p+1)`` over 16 seeded starts.

    Bounds are handled natively; general linear rows and the ``g_j`` go
    through a quadratic penalty ``mu * max(0, g)**2`` with ``mu`` doubling
    from 10, followed by a Gauss-Newton polish onto the violated
    constraints. Returned points satisfy all constraints to ``1e-8``.

    Raises
    ------
    InnerSolverError
        When no start ends at a feasible point.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    inner = _Inner(prob, p)
    if starts is None:
        starts = _starts(prob, inner, seed, N_STARTS)
    best = _best_of(inner, starts, r)
    if best is None:
        raise InnerSolverError("no feasible point found by the inner solver")
    return best[1]


def _steady_drift(norms: list[float], xs: list[np.ndarray], window: int = 5) -> bool:
    """Norm increasing by comparable increments along a fixed direction."""
    if len(norms) < window + 1:
        return False
    tail = norms[-(window + 1):]
    inc = np.diff(tail)
    if np.any(inc <= 0):
        return False
    if inc.max() > 2.0 * inc.min():
        return False
    units = [x / np.linalg.norm(x) for x in xs[-(window + 1):] if np.linalg.norm(x) > 0]
    if len(units) < window + 1:
        return False
    return all(np.linalg.norm(u - units[-1]) <= 1e-3 for u in units)


def regularization_path(prob: ProblemSpec, schedule: RegSchedule | None = None, seed: int = 0,
                        step_tol: float = STEP_TOL) -> SolveTrace:
    """Follow the regularized minimizers along ``r_k``.

    The first step uses 16 seeded starts; later steps warm-start from the
    previous minimizer plus three seeded restarts around it. A step whose
    best point improves the regularized value at the warm start by less
    than ``1e-13`` (relative) keeps the warm start, so round-off in flat
    directions does not masquerade as motion.

    Stops ``CONVERGED`` after three consecutive moves of at most ``1e-6``
    once the regularizer contributes at most ``1e-6 (1 + |f|)``; without
    that gap test an active constraint can pin early iterates in place.
    Stops ``DIVERGENT`` when ``||x|| > 1e6`` or the norm grew by at least 1.5x in
    each of the last five steps. After the schedule runs out a steady drift
    along a fixed direction is also reported as ``DIVERGENT``; anything else
    is ``BUDGET_EXHAUSTED``. ``step_tol`` replaces the ``1e-6`` move size.
    """
    schedule = schedule or RegSchedule()
    p = schedule.exponent_p
    inner = _Inner(prob, p)
    steps: list[PathStep] = []
    xs: list[np.ndarray] = []
    norms: list[float] = []
    small_moves = 0
    best_f, best_x = math.inf, None
    prev = None
    for k, r in enumerate(schedule.radii()):
        if prev is None:
            starts = _starts(prob, inner, seed, N_STARTS)
        else:
            scale = max(1.0, 0.5 * float(np.linalg.norm(prev)))
            starts = _starts(prob, inner, seed + k, 1 + WARM_EXTRA_STARTS, scale=scale, anchor=prev)
        best = _best_of(inner, starts, float(r))
        if best is None:
            raise InnerSolverError(f"inner solver found no feasible point at step {k}")
        val, x, fx = best
        if prev is not None:
            # keep the warm start unless the new point is measurably better
            f_prev = inner.f.value(prev)
            val_prev = f_prev + inner.reg(prev, r)
            if val >= val_prev - DECREASE_FLOOR * (1.0 + abs(val_prev)):
                val, x, fx = val_prev, prev.copy(), f_prev
        steps.append(PathStep(float(r), x.copy(), float(fx + inner.reg(x, r)), float(fx)))
        if fx < best_f:
            best_f, best_x = float(fx), x.copy()
        xs.append(x)
        nx = float(np.linalg.norm(x))
        norms.append(nx)
        if prev is not None:
            small_moves = small_moves + 1 if np.linalg.norm(x - prev) <= step_tol else 0
        prev = x
        trace_kw = dict(iterates=steps, exponent_p=p, best_f=best_f, best_x=best_x)
        if small_moves >= 3 and inner.reg(x, r) <= REG_GAP * (1.0 + abs(fx)):
            return SolveTrace(status=PathStatus.CONVERGED, x_star=x.copy(), f_star=float(fx),
                              reason=f"three consecutive steps moved by at most {step_tol:g} with a negligible regularizer", **trace_kw)
        if nx > DIVERGENCE_NORM:
            return SolveTrace(status=PathStatus.DIVERGENT, direction=x / nx, reason="||x|| exceeded 1e6", **trace_kw)
        if len(norms) >= 6 and all(norms[i] >= GROWTH * norms[i - 1] > 0 for i in range(len(norms) - 5, len(norms))):
            return SolveTrace(status=PathStatus.DIVERGENT, direction=x / nx,
                              reason="norm grew by at least 1.5x in five consecutive steps", **trace_kw)
    trace_kw = dict(iterates=steps, exponent_p=p, best_f=best_f, best_x=best_x)
    if _steady_drift(norms, xs):
        x = xs[-1]
        return SolveTrace(status=PathStatus.DIVERGENT, direction=x / np.linalg.norm(x),
                          reason="steady drift along a fixed direction", **trace_kw)
    return SolveTrace(status=PathStatus.BUDGET_EXHAUSTED, reason="schedule exhausted without convergence", **trace_kw)
