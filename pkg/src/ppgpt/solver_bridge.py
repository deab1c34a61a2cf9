"""External SMT solver bridge over the SMT-LIB v2 text protocol.

A Formula is encoded to a deterministic script, handed to a solver child
process on stdin, and the answer parsed back into a SolverVerdict. Any
solver that speaks SMT-LIB v2 on stdin works; by default the bridge uses
a native z3 from PATH and falls back to the bundled Node.js shim backed
by the z3-solver WASM build.

Identical scripts are answered from an in-process cache, which matters
because a WASM solver pays its startup cost on every query.
"""

from __future__ import annotations

import shlex
import shutil
import subprocess
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Union

from .symexec.terms import (
    App,
    BoolConst,
    ConstArr,
    IntConst,
    Sym,
    Term,
    collect_apps,
    collect_syms,
)

__all__ = [
    "Formula",
    "Sat",
    "Unsat",
    "Unknown",
    "SolverVerdict",
    "SolverConfig",
    "encode_formula",
    "check_sat",
    "check_sat_many",
    "eval_term",
    "eval_formula",
    "clear_cache",
    "default_solver_cmd",
]


@dataclass
class Formula:
    """A conjunction to check for satisfiability.

    declarations may list extra symbols to declare even if they do not
    occur in any assertion; everything occurring in the assertions or
    axioms is declared automatically.
    """

    assertions: list = field(default_factory=list)
    axioms: list = field(default_factory=list)
    declarations: list = field(default_factory=list)


@dataclass
class Sat:
    model: dict


@dataclass
class Unsat:
    pass


@dataclass
class Unknown:
    reason: str


SolverVerdict = Union[Sat, Unsat, Unknown]


@dataclass(frozen=True)
class SolverConfig:
    cmd: Optional[tuple] = None
    timeout_ms: int = 10000


def default_solver_cmd() -> list[str]:
    """Prefer a native z3 on PATH; otherwise use the bundled Node shim."""
    z3 = shutil.which("z3")
    if z3:
        return [z3, "-in", "-smt2"]
    node = shutil.which("node")
    if node:
        shim = resources.files("ppgpt").joinpath("data/z3smt2.js")
        return [node, str(shim)]
    raise RuntimeError(
        "no SMT solver available: install z3 or Node.js (plus `npm install` "
        "for the z3-solver package), or configure solver.cmd"
    )


# -- encoding ------------------------------------------------------------------


def _sort_sexpr(sort) -> str:
    if isinstance(sort, tuple):
        return f"(Array {_sort_sexpr(sort[1])} {_sort_sexpr(sort[2])})"
    return sort


def term_to_sexpr(t: Term) -> str:
    if isinstance(t, IntConst):
        return str(t.value) if t.value >= 0 else f"(- {-t.value})"
    if isinstance(t, BoolConst):
        return "true" if t.value else "false"
    if isinstance(t, Sym):
        return t.name
    if isinstance(t, ConstArr):
        return f"((as const {_sort_sexpr(t.sort)}) {term_to_sexpr(t.default)})"
    if isinstance(t, App):
        args = " ".join(term_to_sexpr(a) for a in t.args)
        return f"({t.op} {args})"
    raise TypeError(f"cannot encode {t!r}")


def encode_formula(formula: Formula) -> str:
    """Render a complete SMT-LIB v2 script. Deterministic: declarations are
    sorted by name, assertions keep their given order."""
    everything = list(formula.axioms) + list(formula.assertions)
    syms = collect_syms(everything)
    for extra in formula.declarations:
        syms.setdefault(extra.name, extra)
    ufs = {}
    for app in collect_apps(everything, "sha3$"):
        ufs[app.op] = len(app.args)

    lines = ["(set-logic ALL)"]
    for op in sorted(ufs):
        arity = ufs[op]
        params = " ".join(["Int"] * arity)
        lines.append(f"(declare-fun {op} ({params}) Int)")
    for name in sorted(syms):
        lines.append(f"(declare-fun {name} () {_sort_sexpr(syms[name].sort)})")
    for ax in formula.axioms:
        lines.append(f"(assert {term_to_sexpr(ax)})")
    for a in formula.assertions:
        lines.append(f"(assert {term_to_sexpr(a)})")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"


# -- solving -------------------------------------------------------------------

_CACHE: dict[tuple, SolverVerdict] = {}


def clear_cache() -> None:
    _CACHE.clear()


def check_sat(
    formula: Formula, config: Optional[Union[SolverConfig, int]] = None
) -> SolverVerdict:
    if isinstance(config, int):
        config = SolverConfig(timeout_ms=config)
    config = config or SolverConfig()
    script = encode_formula(formula)
    cmd = list(config.cmd) if config.cmd else default_solver_cmd()
    key = (tuple(cmd), script)
    if key in _CACHE:
        return _CACHE[key]

    try:
        proc = subprocess.run(
            cmd,
            input=script.encode("utf-8"),
            capture_output=True,
            timeout=config.timeout_ms / 1000.0,
        )
    except subprocess.TimeoutExpired:
        return Unknown("timeout")
    except OSError as exc:
        return Unknown(f"solver launch failed: {exc}")

    out = proc.stdout.decode("utf-8", "replace")
    verdict = _parse_solver_output(out, proc.returncode, proc.stderr)
    # Timeouts and launch failures are transient; only settled answers and
    # structural failures are worth remembering.
    _CACHE[key] = verdict
    return verdict


def _parse_solver_output(out: str, returncode: int, stderr: bytes) -> SolverVerdict:
    lines = [ln.strip() for ln in out.splitlines() if ln.strip()]
    status = lines[0] if lines else ""
    if status == "unsat":
        return Unsat()
    if status == "unknown":
        return Unknown("solver returned unknown")
    if status == "sat":
        rest = "\n".join(lines[1:])
        try:
            model = parse_model(rest)
        except ValueError as exc:
            return Unknown(f"model parse failed: {exc}")
        return Sat(model)
    detail = stderr.decode("utf-8", "replace").strip() or out.strip() or f"exit {returncode}"
    return Unknown(f"solver error: {detail[:500]}")


def check_sat_many(
    formulas: list[Formula], config: Optional[SolverConfig] = None
) -> list[SolverVerdict]:
    """Answer several independent queries in one solver process.

    Each formula runs inside its own (push)/(pop) frame separated by echo
    markers, so one process startup is paid for the whole batch. Results
    are cached individually, exactly as check_sat would cache them.
    """
    config = config or SolverConfig()
    cmd = list(config.cmd) if config.cmd else default_solver_cmd()
    scripts = [encode_formula(f) for f in formulas]
    verdicts: list[Optional[SolverVerdict]] = [None] * len(formulas)
    todo: list[int] = []
    for i, script in enumerate(scripts):
        key = (tuple(cmd), script)
        if key in _CACHE:
            verdicts[i] = _CACHE[key]
        else:
            todo.append(i)
    if not todo:
        return verdicts

    parts = ["(set-logic ALL)"]
    for i in todo:
        body = scripts[i].split("\n", 1)[1]  # drop the per-script set-logic
        parts.append(f'(echo "=== {i} ===")')
        parts.append("(push 1)")
        parts.append(body.rstrip("\n"))
        parts.append("(pop 1)")
    batch_script = "\n".join(parts) + "\n"

    budget = config.timeout_ms * max(1, len(todo)) / 1000.0
    try:
        proc = subprocess.run(
            cmd,
            input=batch_script.encode("utf-8"),
            capture_output=True,
            timeout=budget,
        )
    except subprocess.TimeoutExpired:
        for i in todo:
            verdicts[i] = Unknown("timeout")
        return verdicts
    except OSError as exc:
        for i in todo:
            verdicts[i] = Unknown(f"solver launch failed: {exc}")
        return verdicts

    out = proc.stdout.decode("utf-8", "replace")
    segments: dict[int, list[str]] = {}
    current: Optional[int] = None
    for line in out.splitlines():
        stripped = line.strip()
        if stripped.startswith("=== ") and stripped.endswith(" ==="):
            try:
                current = int(stripped[4:-4])
            except ValueError:
                current = None
            if current is not None:
                segments[current] = []
            continue
        if current is not None:
            segments[current].append(line)
    for i in todo:
        seg = "\n".join(segments.get(i, []))
        seg_clean = "\n".join(
            ln for ln in seg.splitlines() if not ln.strip().startswith("(error")
        )
        verdict = _parse_solver_output(seg_clean, proc.returncode, proc.stderr)
        key = (tuple(cmd), scripts[i])
        _CACHE[key] = verdict
        verdicts[i] = verdict
    return verdicts


# -- model parsing -------------------------------------------------------------


def _tokenize_sexpr(text: str) -> list[str]:
    toks, i, n = [], 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            toks.append(c)
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            toks.append(text[i : j + 1])
            i = j + 1
        elif c == "|":
            j = i + 1
            while j < n and text[j] != "|":
                j += 1
            toks.append(text[i : j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            toks.append(text[i:j])
            i = j
    return toks


def _read_sexprs(toks: list[str]):
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(toks):
            raise ValueError("unexpected end of model")
        tok = toks[pos]
        pos += 1
        if tok == "(":
            items = []
            while pos < len(toks) and toks[pos] != ")":
                items.append(read())
            if pos >= len(toks):
                raise ValueError("unbalanced parentheses in model")
            pos += 1
            return items
        if tok == ")":
            raise ValueError("unbalanced parentheses in model")
        return tok

    exprs = []
    while pos < len(toks):
        exprs.append(read())
    return exprs


class UFModel:
    """An uninterpreted function's interpretation: explicit cases plus a
    default for every other argument tuple."""

    def __init__(self, default, cases: dict):
        self.default = default
        self.cases = cases

    def __call__(self, *args):
        return self.cases.get(tuple(args), self.default)

    def __eq__(self, other):
        return (
            isinstance(other, UFModel)
            and self.default == other.default
            and self.cases == other.cases
        )

    def __repr__(self):
        return f"UFModel(default={self.default!r}, cases={self.cases!r})"


class ArrayModel:
    """An array value: a default plus explicit entries."""

    def __init__(self, default, entries: dict):
        self.default = default
        self.entries = entries

    def get(self, key):
        return self.entries.get(key, self.default)

    def set(self, key, value):
        e = dict(self.entries)
        e[key] = value
        return ArrayModel(self.default, e)

    def __eq__(self, other):
        return (
            isinstance(other, ArrayModel)
            and self.default == other.default
            and self.entries == other.entries
        )

    def __repr__(self):
        return f"ArrayModel(default={self.default!r}, entries={self.entries!r})"


def _ground_value(sx, env: Optional[dict] = None):
    """Evaluate a ground model s-expression to int, bool, or ArrayModel."""
    env = env or {}
    if isinstance(sx, str):
        if sx == "true":
            return True
        if sx == "false":
            return False
        if sx in env:
            return env[sx]
        try:
            return int(sx)
        except ValueError:
            raise ValueError(f"unexpected atom in model: {sx}")
    if not sx:
        raise ValueError("empty s-expression in model")
    head = sx[0]
    if head == "-" and len(sx) == 2:
        return -_ground_value(sx[1], env)
    if head == "+":
        return sum(_ground_value(a, env) for a in sx[1:])
    if head == "ite":
        return _ground_value(sx[2], env) if _ground_value(sx[1], env) else _ground_value(sx[3], env)
    if head == "=":
        return _ground_value(sx[1], env) == _ground_value(sx[2], env)
    if head == "and":
        return all(_ground_value(a, env) for a in sx[1:])
    if head == "or":
        return any(_ground_value(a, env) for a in sx[1:])
    if head == "not":
        return not _ground_value(sx[1], env)
    if head == "store":
        base = _ground_value(sx[1], env)
        return base.set(_ground_value(sx[2], env), _ground_value(sx[3], env))
    if isinstance(head, list) and len(head) == 3 and head[0] == "as" and head[1] == "const":
        return ArrayModel(_ground_value(sx[1], env), {})
    if head == "lambda":
        raise ValueError("lambda-form array in model")
    raise ValueError(f"unexpected model construct: {head}")


def _uf_from_body(params: list[str], body, env: Optional[dict] = None) -> UFModel:
    """Interpret an ite-chain define-fun body as explicit cases + default."""
    cases: dict = {}

    def match(cond) -> Optional[tuple]:
        # (= x!0 k) or (and (= x!0 k0) (= x!1 k1) ...)
        eqs = [cond] if cond[0] == "=" else cond[1:] if cond[0] == "and" else None
        if eqs is None:
            return None
        by_param = {}
        for eq in eqs:
            if not (isinstance(eq, list) and eq[0] == "=" and isinstance(eq[1], str)):
                return None
            by_param[eq[1]] = _ground_value(eq[2], env)
        try:
            return tuple(by_param[p] for p in params)
        except KeyError:
            return None

    node = body
    while isinstance(node, list) and node and node[0] == "ite":
        key = match(node[1])
        if key is None:
            raise ValueError("unrecognized ite guard in function model")
        if key not in cases:
            cases[key] = _ground_value(node[2], env)
        node = node[3]
    return UFModel(_ground_value(node, env), cases)


def parse_model(text: str) -> dict:
    """Parse (get-model) output into {name: int | bool | ArrayModel | UFModel}.

    Accepts both the bare define-fun list and the legacy (model ...) wrapper.
    """
    exprs = _read_sexprs(_tokenize_sexpr(text))
    defs = []
    for e in exprs:
        if isinstance(e, list) and e and e[0] == "model":
            defs.extend(e[1:])
        elif isinstance(e, list) and e and e[0] == "define-fun":
            defs.append(e)
        elif isinstance(e, list):
            defs.extend(x for x in e if isinstance(x, list) and x and x[0] == "define-fun")
    model: dict = {}
    for d in defs:
        if not (isinstance(d, list) and len(d) >= 5 and d[0] == "define-fun"):
            continue
        name, params, _sort, body = d[1], d[2], d[3], d[4]
        if params:
            pnames = [p[0] for p in params]
            model[name] = _uf_from_body(pnames, body)
        else:
            model[name] = _ground_value(body)
    return model


# -- ground evaluation ---------------------------------------------------------


def _euclid_div(a: int, b: int) -> int:
    q = a // b
    if a % b != 0 and b < 0:
        q += 1
    return q


def _euclid_mod(a: int, b: int) -> int:
    return a - b * _euclid_div(a, b)


def eval_term(t: Term, model: dict):
    """Evaluate a term under a model. Symbols absent from the model default
    to 0 / false / an empty zero array, matching solver conventions."""
    if isinstance(t, IntConst):
        return t.value
    if isinstance(t, BoolConst):
        return t.value
    if isinstance(t, ConstArr):
        return ArrayModel(eval_term(t.default, model), {})
    if isinstance(t, Sym):
        if t.name in model:
            return model[t.name]
        if t.sort == "Bool":
            return False
        if isinstance(t.sort, tuple):
            return ArrayModel(False if t.sort[2] == "Bool" else 0, {})
        return 0
    if isinstance(t, App):
        op = t.op
        if op == "ite":
            return eval_term(t.args[1] if eval_term(t.args[0], model) else t.args[2], model)
        if op.startswith("sha3$"):
            args = tuple(eval_term(a, model) for a in t.args)
            uf = model.get(op)
            if isinstance(uf, UFModel):
                return uf(*args)
            return 0
        args = [eval_term(a, model) for a in t.args]
        if op == "and":
            return all(args)
        if op == "or":
            return any(args)
        if op == "not":
            return not args[0]
        if op == "=>":
            return (not args[0]) or args[1]
        if op == "=":
            return args[0] == args[1]
        if op == "+":
            return args[0] + args[1]
        if op == "-":
            return args[0] - args[1]
        if op == "*":
            return args[0] * args[1]
        if op == "div":
            return _euclid_div(args[0], args[1]) if args[1] != 0 else 0
        if op == "mod":
            return _euclid_mod(args[0], args[1]) if args[1] != 0 else 0
        if op == "<":
            return args[0] < args[1]
        if op == "<=":
            return args[0] <= args[1]
        if op == ">":
            return args[0] > args[1]
        if op == ">=":
            return args[0] >= args[1]
        if op == "select":
            return args[0].get(args[1])
        if op == "store":
            return args[0].set(args[1], args[2])
        raise ValueError(f"cannot evaluate operator {op}")
    raise TypeError(f"cannot evaluate {t!r}")


def eval_formula(formula: Formula, model: dict) -> bool:
    """True iff every axiom and assertion holds under the model."""
    return all(eval_term(a, model) for a in formula.axioms) and all(
        eval_term(a, model) for a in formula.assertions
    )
