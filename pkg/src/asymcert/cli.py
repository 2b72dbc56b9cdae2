"""Command line: ``asymcert {certify, solve, analyze-cones} FILE [flags]``.

Exit codes: 0 for a proven verdict (or a converged path, or a finished
cone analysis), 10 for ``VIOLATED``, 20 for ``UNKNOWN`` (or an exhausted
path budget), 30 for a divergent path, 1 for input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import __version__
from .asymptotics import ConeDescriptor, InfeasibleSetError, asymptotic_cone_of_set, function_asymptotic_cone
from .certify import Verdict, certify
from .decay import classify_decay
from .io import ProblemFileError, load_overrides, parse_problem
from .pathsolver import STEP_TOL, InnerSolverError, PathStatus, RegSchedule, regularization_path
from .problem import ProblemSpec
from .retract import FalsifierBudget, constancy_space, function_retractive_cone, set_retractive_inner

__all__ = ["main", "build_parser", "run", "EXIT_CODES"]

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VIOLATED = 10
EXIT_UNKNOWN = 20
EXIT_DIVERGENT = 30

EXIT_CODES = {
    Verdict.PROVEN_EXISTS: EXIT_OK,
    Verdict.PROVEN_EXISTS_COMPACT: EXIT_OK,
    Verdict.PROVEN_UNDER_ASSERTIONS: EXIT_OK,
    Verdict.VIOLATED: EXIT_VIOLATED,
    Verdict.UNKNOWN: EXIT_UNKNOWN,
    PathStatus.CONVERGED: EXIT_OK,
    PathStatus.DIVERGENT: EXIT_DIVERGENT,
    PathStatus.BUDGET_EXHAUSTED: EXIT_UNKNOWN,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="asymcert", description="Existence certificates for minimizers via asymptotic cones.")
    parser.add_argument("--version", action="version", version=f"asymcert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (
        ("certify", "decide the existence conditions"),
        ("solve", "classify decay and follow the regularization path"),
        ("analyze-cones", "print asymptotic and retractive cone summaries"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("problem", help="problem file (JSON)")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default: file override, then $ASYMCERT_SEED, then 0)")
        p.add_argument("--budget", type=int, default=None, help="falsifier curve families")
        p.add_argument("--tol", type=float, default=None, help="path convergence step size")
        p.add_argument("--max-reg-steps", type=int, default=None, help="regularization path length")
        p.add_argument("--report", choices=("json", "text"), default="text")
        p.add_argument("--dump-trace", action="store_true", help="include the full iterate table")
    return parser


def _seed(flag, overrides) -> int:
    if flag is not None:
        return int(flag)
    if "seed" in overrides:
        return int(overrides["seed"])
    env = os.environ.get("ASYMCERT_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ProblemFileError(f"ASYMCERT_SEED is not an integer: {env!r}", "<environment>") from None
    return 0


def _cone_summary(cone: ConeDescriptor | None, seed: int) -> dict | None:
    if cone is None:
        return None
    out = cone.to_json()
    out["sample_count"] = len(cone.sample_directions(256, seed))
    return out


def cone_summaries(prob: ProblemSpec, seed: int = 0) -> dict:
    """Descriptors of the cones the certifier works with."""
    X, f = prob.feasible_set, prob.objective
    xc = asymptotic_cone_of_set(X, seed)
    kf = function_asymptotic_cone(f, seed)
    out = {
        "X_inf": _cone_summary(xc, seed),
        "K(f)": _cone_summary(kf, seed),
        "X_inf & K(f)": _cone_summary(ConeDescriptor.intersection([xc, kf], label="X_inf & K(f)"), seed),
        "R(X) inner": _cone_summary(set_retractive_inner(X), seed),
        "R(f)": _cone_summary(function_retractive_cone(f), seed),
    }
    for j, g in enumerate(prob.constraints):
        out[f"K(g_{j + 1})"] = _cone_summary(function_asymptotic_cone(g, seed), seed)
        if g.polynomial is not None and g.is_convex:
            out[f"C(g_{j + 1})"] = _cone_summary(constancy_space(g.polynomial), seed)
    return out


def run(command: str, prob: ProblemSpec, *, seed: int = 0, budget: int | None = None, tol: float | None = None,
        max_reg_steps: int | None = None, dump_trace: bool = False, overrides: dict | None = None) -> tuple[dict, int]:
    """Execute one subcommand; returns the report and the exit code."""
    overrides = overrides or {}
    budget = budget if budget is not None else overrides.get("budget")
    tol = tol if tol is not None else overrides.get("tol", STEP_TOL)
    steps = max_reg_steps if max_reg_steps is not None else overrides.get("max_reg_steps", 30)
    fb = FalsifierBudget(curve_families=budget, seed=seed) if budget is not None else FalsifierBudget(seed=seed)
    report: dict = {
        "tool": {"name": "asymcert", "version": __version__},
        "command": command,
        "problem": prob.name,
        "spec_digest": prob.digest(),
        "seed": seed,
        "assertions": prob.assertions(),
        "flags": {"budget": fb.to_json(), "tol": tol, "max_reg_steps": steps},
    }
    prob.probe(seed)
    report["probe_point"] = [float(f"{v:.12g}") + 0.0 for v in prob.probe(seed)]
    if command == "certify":
        cert = certify(prob, seed, fb)
        report["certificate"] = cert.to_json()
        report["decay"] = None if cert.decay is None else cert.decay.to_json()
        report["cones"] = {k: _cone_summary(c, seed) for k, c in sorted(cert.cones.items())}
        return report, EXIT_CODES[cert.verdict]
    if command == "solve":
        decay = classify_decay(prob.objective, prob.feasible_set, seed, probe=prob.probe(seed))
        report["decay"] = decay.to_json()
        p = decay.p if decay.p is not None else 1.0
        if decay.p is None:
            report["notes"] = ["no norm-power decay certificate; the path uses p = 1"]
        sched = overrides.get("schedule", {})
        schedule = RegSchedule(r0=sched.get("r0", 1.0), decay_factor=sched.get("decay_factor", 0.5),
                               max_steps=max(1, int(steps)), exponent_p=p)
        report["schedule"] = {"r0": schedule.r0, "decay_factor": schedule.decay_factor,
                              "max_steps": schedule.max_steps, "exponent_p": schedule.exponent_p}
        trace = regularization_path(prob, schedule, seed, step_tol=tol)
        report["trace"] = trace.to_json(full=dump_trace)
        report["f_values"] = [float(f"{s.f_value:.12g}") for s in trace.iterates]
        return report, EXIT_CODES[trace.status]
    if command == "analyze-cones":
        report["cones"] = cone_summaries(prob, seed)
        return report, EXIT_OK
    raise ValueError(f"unknown command {command!r}")


def _fmt_vec(v) -> str:
    return "(" + ", ".join(f"{c:.6g}" for c in v) + ")"


def render_text(report: dict) -> str:
    lines = [f"asymcert {report['tool']['version']}  {report['command']}  {report['problem']}  seed={report['seed']}",
             f"spec digest {report['spec_digest']}"]
    cert = report.get("certificate")
    if cert is not None:
        lines.append(f"verdict: {cert['verdict']} ({cert['theorem_used']}): {cert['message']}")
        for e in cert["condition_trail"]:
            lines.append(f"  [{e['tier']}] {e['condition']}: {e['evidence']}")
        w = cert.get("witness")
        if w:
            lines.append(f"  witness direction {_fmt_vec(w['direction'])} outside {w['outside']} ({w['evidence']})")
            rw = w.get("retraction_witness")
            if rw:
                lines.append(f"  retraction witness: {rw['violation']} on curve {rw['curve']}, rho={rw['rho']:g}")
        for n in cert["notes"]:
            lines.append(f"  note: {n}")
    if report.get("decay"):
        d = report["decay"]
        lines.append(f"decay: {d['gauge']} p={d['p']} via {d['rule']} [{d['tier']}]")
    tr = report.get("trace")
    if tr is not None:
        lines.append(f"path: {tr['status']} after {tr['steps']} steps: {tr['reason']}")
        if tr["x_star"] is not None:
            lines.append(f"  x* = {_fmt_vec(tr['x_star'])}, f* = {tr['f_star']:.6g}")
        if tr["direction"] is not None:
            lines.append(f"  direction estimate {_fmt_vec(tr['direction'])}")
        lines.append(f"  best f = {tr['best_f']:.6g}")
        if "caveat" in tr:
            lines.append(f"  caveat: {tr['caveat']}")
        for it in tr.get("iterates", []):
            lines.append(f"  r={it['r']:.3e}  f={it['f_value']:.10g}  reg={it['reg_value']:.10g}  x={_fmt_vec(it['x'])}")
    if report["command"] == "analyze-cones":
        for name, c in report["cones"].items():
            if c is None:
                lines.append(f"{name}: unavailable")
                continue
            flags = "".join(f" {k}" for k in ("outer", "inner") if c[k])
            lines.append(f"{name}: {c['kind']} {c['label']} [{c['tier']}]{flags}")
            if "extreme_rays" in c:
                lines.append(f"  rays {c['extreme_rays']}  lineality {c['lineality_basis']}  samples {c['sample_count']}")
    return "\n".join(lines)


def dumps(report: dict) -> str:
    """Deterministic JSON text of a report."""
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        prob = parse_problem(args.problem)
        overrides = load_overrides(prob.source)
        seed = _seed(args.seed, overrides)
        report, code = run(args.command, prob, seed=seed, budget=args.budget, tol=args.tol,
                           max_reg_steps=args.max_reg_steps, dump_trace=args.dump_trace, overrides=overrides)
    except (ProblemFileError, InfeasibleSetError, InnerSolverError, ValueError) as exc:
        print(f"asymcert: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(dumps(report) if args.report == "json" else render_text(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
