"""Problem files: a JSON schema for ``inf f(x)`` over ``C ∩ {g_j <= 0}``.

Top-level keys::

    name            optional string
    dimension       int, required
    objective       expression, required
    constraints     {"linear": [{"a": [...], "b": beta}, ...],
                     "inequalities": [expression, ...],      # g_j(x) <= 0
                     "box": {"lower": [...], "upper": [...]}} # null = unbounded
    assertions      {"objective": {"convex", "finite_min", "lipschitz_order"},
                     "inequalities": [{"index": j, "convex": true}, ...]}
    coercive_gauge  expression (needs a gradient, so no opaque nodes)
    probe_points    list of vectors tried first by the feasibility probe
    overrides       {"seed", "budget", "tol", "max_reg_steps",
                     "schedule": {"r0", "decay_factor"}}

Expressions are JSON objects with exactly one node key::

    {"poly": [{"coeff": c, "exponents": [e_1, ..., e_n]}, ...]}
    {"const": c}            {"var": i}
    {"sum": [e, ...]}       {"mul": [e, ...]}      {"neg": e}
    {"scale": c, "of": e}   {"pow": e, "k": k}
    {"sqrt_abs": e}         {"exp": e}             {"abs": e}
    {"builtin": name, ...}  # see BUILTINS

Errors raise :class:`ProblemFileError` anchored at a line and column.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import ConvexityStatus, Polynomial
from .functions import (
    Abs,
    Exp,
    ExpNegSqrtProd,
    Expr,
    FunctionSpec,
    Norm,
    NegSqrt,
    NormMinusCoord,
    PolyExpr,
    Polyhedron,
    Power,
    Product,
    Scale,
    SqrtAbs,
    Sum,
)
from .problem import ProblemSpec

__all__ = ["ProblemFileError", "BUILTINS", "parse_problem", "parse_problem_text", "load_overrides"]

BUILTINS = ("sqrt_abs", "neg_sqrt", "exp_linear", "norm", "norm_minus_coord", "exp_neg_sqrt_prod")
TOP_KEYS = {"name", "dimension", "objective", "constraints", "assertions", "coercive_gauge", "probe_points", "overrides"}
OVERRIDE_KEYS = {"seed", "budget", "tol", "max_reg_steps", "schedule"}


class ProblemFileError(ValueError):
    """Invalid problem file; ``line``/``col`` are 1-based."""

    def __init__(self, msg: str, source: str = "<string>", line: int = 1, col: int = 1, path=()):
        self.msg = msg
        self.source = source
        self.line = line
        self.col = col
        self.path = tuple(path)
        super().__init__(f"{source}:{line}:{col}: {msg}")


# ---------------------------------------------------------------------------
# locating a JSON path in the source text


def _skip_ws(text: str, i: int) -> int:
    while i < len(text) and text[i] in " \t\r\n":
        i += 1
    return i


def _value_end(text: str, i: int, dec: json.JSONDecoder) -> int:
    return dec.raw_decode(text, i)[1]


def _offset(text: str, path) -> int:
    """Character offset of the value at ``path`` (best effort; 0 on failure)."""
    dec = json.JSONDecoder()
    i = _skip_ws(text, 0)
    try:
        for key in path:
            if isinstance(key, str):
                if text[i] != "{":
                    return i
                i = _skip_ws(text, i + 1)
                while text[i] != "}":
                    k, i = dec.raw_decode(text, i)
                    i = _skip_ws(text, i)
                    i = _skip_ws(text, i + 1)  # colon
                    if k == key:
                        break
                    i = _skip_ws(text, _value_end(text, i, dec))
                    if text[i] == ",":
                        i = _skip_ws(text, i + 1)
                else:
                    return i
            else:
                if text[i] != "[":
                    return i
                i = _skip_ws(text, i + 1)
                for _ in range(key):
                    i = _skip_ws(text, _value_end(text, i, dec))
                    if text[i] == ",":
                        i = _skip_ws(text, i + 1)
    except (IndexError, ValueError):
        return 0
    return i


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


# ---------------------------------------------------------------------------
# parsing


class _Parser:
    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source
        self.n = 0

    def fail(self, msg: str, path) -> ProblemFileError:
        line, col = _line_col(self.text, _offset(self.text, path))
        return ProblemFileError(msg, self.source, line, col, path)

    def number(self, v, path, integer: bool = False):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise self.fail("expected a finite number", path)
        if integer and int(v) != v:
            raise self.fail("expected an integer", path)
        return int(v) if integer else float(v)

    def index(self, v, path) -> int:
        i = self.number(v, path, integer=True)
        if not 0 <= i < self.n:
            raise self.fail(f"variable index {i} out of range for dimension {self.n}", path)
        return i

    def vector(self, v, path, allow_null: bool = False) -> np.ndarray:
        if not isinstance(v, list):
            raise self.fail("expected a list of numbers", path)
        if len(v) != self.n:
            raise self.fail(f"dimension mismatch: expected {self.n} entries, got {len(v)}", path)
        out = []
        for k, c in enumerate(v):
            if c is None and allow_null:
                out.append(math.nan)
            else:
                out.append(self.number(c, path + (k,)))
        return np.array(out, dtype=float)

    def poly(self, terms, path) -> Polynomial:
        if not isinstance(terms, list):
            raise self.fail("polynomial must be a list of {coeff, exponents} records", path)
        acc: dict[tuple[int, ...], float] = {}
        for k, t in enumerate(terms):
            tp = path + (k,)
            if not isinstance(t, dict) or set(t) != {"coeff", "exponents"}:
                raise self.fail("term must have exactly the keys coeff and exponents", tp)
            c = self.number(t["coeff"], tp + ("coeff",))
            e = t["exponents"]
            if not isinstance(e, list) or len(e) != self.n:
                raise self.fail(f"dimension mismatch: exponents need {self.n} entries", tp + ("exponents",))
            ex = tuple(self.number(v, tp + ("exponents", j), integer=True) for j, v in enumerate(e))
            if any(v < 0 for v in ex):
                raise self.fail("exponents must be nonnegative", tp + ("exponents",))
            acc[ex] = acc.get(ex, 0.0) + c
        return Polynomial(self.n, acc)

    def builtin(self, node: dict, path) -> Expr:
        name = node.get("builtin")
        n = self.n
        params = {k: v for k, v in node.items() if k != "builtin"}

        def _only(*allowed):
            extra = set(params) - set(allowed)
            if extra:
                raise self.fail(f"unknown parameter {sorted(extra)[0]!r} for builtin {name!r}", path + (sorted(extra)[0],))

        if name == "sqrt_abs":
            _only("index")
            return SqrtAbs(PolyExpr(Polynomial.variable(n, self.index(params.get("index", 0), path + ("index",)))))
        if name == "neg_sqrt":
            _only("index")
            return NegSqrt(n, self.index(params.get("index", 0), path + ("index",)))
        if name == "norm_minus_coord":
            _only("index")
            return NormMinusCoord(n, self.index(params.get("index", 0), path + ("index",)))
        if name == "norm":
            _only()
            return Norm(n)
        if name == "exp_neg_sqrt_prod":
            _only("i", "j")
            i = self.index(params.get("i", 0), path + ("i",))
            j = self.index(params.get("j", 1), path + ("j",))
            return ExpNegSqrtProd(n, i, j)
        if name == "exp_linear":
            _only("a", "b")
            a = self.vector(params.get("a", [1.0] + [0.0] * (n - 1)), path + ("a",))
            b = self.number(params.get("b", 0.0), path + ("b",))
            terms = {tuple(int(k == i) for k in range(n)): float(a[i]) for i in range(n) if a[i]}
            terms[(0,) * n] = terms.get((0,) * n, 0.0) + b
            return Exp(PolyExpr(Polynomial(n, terms)))
        raise self.fail(f"unknown builtin {name!r}; known builtins: {', '.join(BUILTINS)}", path + ("builtin",))

    def expr(self, node, path) -> Expr:
        if not isinstance(node, dict) or not node:
            raise self.fail("expression must be a JSON object", path)
        n = self.n
        if "builtin" in node:
            return self.builtin(node, path)
        if "scale" in node:
            if set(node) != {"scale", "of"}:
                raise self.fail("scale node needs exactly the keys scale and of", path)
            return Scale(self.number(node["scale"], path + ("scale",)), self.expr(node["of"], path + ("of",)))
        if "pow" in node:
            if set(node) != {"pow", "k"}:
                raise self.fail("pow node needs exactly the keys pow and k", path)
            k = self.number(node["k"], path + ("k",), integer=True)
            if k < 0:
                raise self.fail("power must be nonnegative", path + ("k",))
            return Power(self.expr(node["pow"], path + ("pow",)), k)
        if len(node) != 1:
            raise self.fail(f"expression node must have one key, got {sorted(node)}", path)
        (key, val), = node.items()
        sub = path + (key,)
        if key == "poly":
            return PolyExpr(self.poly(val, sub))
        if key == "const":
            return PolyExpr(Polynomial.constant(n, self.number(val, sub)))
        if key == "var":
            return PolyExpr(Polynomial.variable(n, self.index(val, sub)))
        if key in ("sum", "mul"):
            if not isinstance(val, list) or not val:
                raise self.fail(f"{key} needs a nonempty list", sub)
            kids = [self.expr(v, sub + (k,)) for k, v in enumerate(val)]
            if key == "sum":
                return kids[0] if len(kids) == 1 else Sum(kids)
            out = kids[0]
            for k in kids[1:]:
                out = Product(out, k)
            return out
        if key == "neg":
            return Scale(-1.0, self.expr(val, sub))
        if key == "sqrt_abs":
            return SqrtAbs(self.expr(val, sub))
        if key == "exp":
            return Exp(self.expr(val, sub))
        if key == "abs":
            return Abs(self.expr(val, sub))
        raise self.fail(f"unknown expression node {key!r}", sub)

    def function(self, node, path, flags: dict | None = None, name: str = "") -> FunctionSpec:
        e = self.expr(node, path)
        flags = flags or {}
        kw: dict[str, Any] = {"name": name}
        if flags.get("convex"):
            kw["convexity"] = ConvexityStatus.ASSERTED
        if flags.get("finite_min"):
            kw["finite_min"] = True
        if flags.get("lipschitz_order") is not None:
            kw["lipschitz_order"] = int(flags["lipschitz_order"])
        p = e.as_polynomial()
        if p is not None and not e.domain_rows():
            return FunctionSpec(self.n, polynomial=p, **kw)
        return FunctionSpec(self.n, expr=e, **kw)


def _flags(p: _Parser, node, path, allowed) -> dict:
    if node is None:
        return {}
    if not isinstance(node, dict):
        raise p.fail("assertions must be an object", path)
    for k, v in node.items():
        if k not in allowed:
            raise p.fail(f"unknown assertion {k!r}", path + (k,))
        if k == "lipschitz_order":
            if p.number(v, path + (k,), integer=True) < 0:
                raise p.fail("lipschitz_order must be nonnegative", path + (k,))
        elif k != "index" and not isinstance(v, bool):
            raise p.fail(f"assertion {k!r} must be true or false", path + (k,))
    return node


def parse_problem_text(text: str, source: str = "<string>") -> ProblemSpec:
    """Parse problem-file text; see the module docstring for the schema."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"syntax error: {exc.msg}", source, exc.lineno, exc.colno) from None
    p = _Parser(text, source)
    if not isinstance(data, dict):
        raise p.fail("problem file must hold a JSON object", ())
    for k in data:
        if k not in TOP_KEYS:
            raise p.fail(f"unknown top-level key {k!r}", (k,))
    if "dimension" not in data:
        raise p.fail("missing required key 'dimension'", ())
    n = p.number(data["dimension"], ("dimension",), integer=True)
    if n < 1:
        raise p.fail("dimension must be positive", ("dimension",))
    p.n = n
    if "objective" not in data:
        raise p.fail("missing required key 'objective'", ())

    asserts = data.get("assertions") or {}
    if not isinstance(asserts, dict):
        raise p.fail("assertions must be an object", ("assertions",))
    for k in asserts:
        if k not in ("objective", "inequalities"):
            raise p.fail(f"unknown assertions section {k!r}", ("assertions", k))
    obj_flags = _flags(p, asserts.get("objective"), ("assertions", "objective"), {"convex", "finite_min", "lipschitz_order"})
    ineq_flags: dict[int, dict] = {}
    for k, entry in enumerate(asserts.get("inequalities") or []):
        fl = _flags(p, entry, ("assertions", "inequalities", k), {"index", "convex"})
        if "index" not in fl:
            raise p.fail("inequality assertion needs an index", ("assertions", "inequalities", k))
        ineq_flags[int(fl["index"])] = fl

    objective = p.function(data["objective"], ("objective",), obj_flags, name="f")

    cons = data.get("constraints") or {}
    if not isinstance(cons, dict):
        raise p.fail("constraints must be an object", ("constraints",))
    rows, rhs = [], []
    for k in cons:
        if k not in ("linear", "inequalities", "box"):
            raise p.fail(f"unknown constraint kind {k!r}", ("constraints", k))
    for k, row in enumerate(cons.get("linear") or []):
        path = ("constraints", "linear", k)
        if not isinstance(row, dict) or set(row) != {"a", "b"}:
            raise p.fail("linear row must have exactly the keys a and b", path)
        rows.append(p.vector(row["a"], path + ("a",)))
        rhs.append(p.number(row["b"], path + ("b",)))
    box = cons.get("box")
    if box is not None:
        if not isinstance(box, dict) or not set(box) <= {"lower", "upper"}:
            raise p.fail("box must have keys lower and/or upper", ("constraints", "box"))
        for key, sign in (("lower", -1.0), ("upper", 1.0)):
            if key not in box:
                continue
            v = p.vector(box[key], ("constraints", "box", key), allow_null=True)
            for i, c in enumerate(v):
                if not math.isnan(c):
                    a = np.zeros(n)
                    a[i] = sign
                    rows.append(a)
                    rhs.append(sign * c)
        if "lower" in box and "upper" in box:
            lo = p.vector(box["lower"], ("constraints", "box", "lower"), allow_null=True)
            hi = p.vector(box["upper"], ("constraints", "box", "upper"), allow_null=True)
            if np.any(lo > hi):
                raise p.fail("box lower bound exceeds upper bound", ("constraints", "box"))
    ineqs = cons.get("inequalities") or []
    if not isinstance(ineqs, list):
        raise p.fail("inequalities must be a list", ("constraints", "inequalities"))
    for j in ineq_flags:
        if not 0 <= j < len(ineqs):
            raise p.fail(f"assertion index {j} has no matching inequality", ("assertions", "inequalities"))
    gs = [p.function(g, ("constraints", "inequalities", j), ineq_flags.get(j), name=f"g_{j + 1}") for j, g in enumerate(ineqs)]
    C = Polyhedron(np.array(rows).reshape(-1, n), np.array(rhs, dtype=float), n) if rows else None

    gauge = None
    if data.get("coercive_gauge") is not None:
        gauge = p.function(data["coercive_gauge"], ("coercive_gauge",), name="g")
    probes = [p.vector(v, ("probe_points", k)) for k, v in enumerate(data.get("probe_points") or [])]
    load_overrides(data, p)
    name = data.get("name") or Path(source).stem
    if not isinstance(name, str):
        raise p.fail("name must be a string", ("name",))
    return ProblemSpec(objective, C=C, constraints=gs, coercive_gauge=gauge, probe_points=probes,
                       name=name, source=data)


def load_overrides(data: dict, parser: _Parser | None = None) -> dict:
    """Validated solver/certifier overrides from a parsed problem file."""
    p = parser or _Parser(json.dumps(data), "<overrides>")
    ov = data.get("overrides") or {}
    if not isinstance(ov, dict):
        raise p.fail("overrides must be an object", ("overrides",))
    out: dict[str, Any] = {}
    for k, v in ov.items():
        path = ("overrides", k)
        if k not in OVERRIDE_KEYS:
            raise p.fail(f"unknown override {k!r}", path)
        if k in ("seed", "budget", "max_reg_steps"):
            out[k] = p.number(v, path, integer=True)
            if out[k] < 0:
                raise p.fail(f"{k} must be nonnegative", path)
        elif k == "tol":
            out[k] = p.number(v, path)
            if out[k] <= 0:
                raise p.fail("tol must be positive", path)
        else:
            if not isinstance(v, dict) or not set(v) <= {"r0", "decay_factor"}:
                raise p.fail("schedule accepts r0 and decay_factor", path)
            out[k] = {kk: p.number(vv, path + (kk,)) for kk, vv in v.items()}
    return out


def parse_problem(path) -> ProblemSpec:
    """Read and validate a problem file.

    Raises
    ------
    ProblemFileError
        Syntax errors, dimension mismatches and unknown builtins, each with
        a line and column.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ProblemFileError(f"cannot read file: {exc.strerror}", str(path)) from None
    return parse_problem_text(text, str(path))
