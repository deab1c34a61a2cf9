"""First-order term language shared by the executor and the solver bridge.

Terms are immutable trees over the SMT-LIB theories of integers, booleans
and arrays, plus uninterpreted functions for hashing. All machine-word
source types map to unbounded Int with explicit range facts added by the
executor, so the term layer itself knows nothing about bit widths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

__all__ = [
    "INT",
    "BOOL",
    "Sort",
    "arr",
    "Term",
    "Sym",
    "IntConst",
    "BoolConst",
    "App",
    "ConstArr",
    "TRUE",
    "FALSE",
    "mk_int",
    "mk_and",
    "mk_or",
    "mk_not",
    "mk_implies",
    "mk_eq",
    "mk_distinct",
    "mk_ite",
    "mk_add",
    "mk_sub",
    "mk_mul",
    "mk_div",
    "mk_mod",
    "mk_tdiv",
    "mk_tmod",
    "mk_lt",
    "mk_le",
    "mk_gt",
    "mk_ge",
    "mk_select",
    "mk_store",
    "walk",
    "collect_syms",
    "collect_apps",
    "sha3_injectivity_axioms",
]

# Sorts are plain hashable values: "Int", "Bool", or ("Arr", key, value).
Sort = Union[str, tuple]

INT: Sort = "Int"
BOOL: Sort = "Bool"


def arr(key: Sort, value: Sort) -> Sort:
    return ("Arr", key, value)


@dataclass(frozen=True)
class Term:
    sort: Sort


@dataclass(frozen=True)
class Sym(Term):
    name: str


@dataclass(frozen=True)
class IntConst(Term):
    value: int

    def __post_init__(self):
        assert self.sort == INT


@dataclass(frozen=True)
class BoolConst(Term):
    value: bool


@dataclass(frozen=True)
class App(Term):
    op: str
    args: tuple


@dataclass(frozen=True)
class ConstArr(Term):
    """A constant array: every key maps to `default`."""

    default: Term


TRUE = BoolConst(BOOL, True)
FALSE = BoolConst(BOOL, False)


def mk_int(value: int) -> IntConst:
    return IntConst(INT, value)


def _is_true(t: Term) -> bool:
    return isinstance(t, BoolConst) and t.value


def _is_false(t: Term) -> bool:
    return isinstance(t, BoolConst) and not t.value


def mk_and(*args: Term) -> Term:
    flat: list[Term] = []
    for a in args:
        if _is_true(a):
            continue
        if _is_false(a):
            return FALSE
        if isinstance(a, App) and a.op == "and":
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return App(BOOL, "and", tuple(flat))


def mk_or(*args: Term) -> Term:
    flat: list[Term] = []
    for a in args:
        if _is_false(a):
            continue
        if _is_true(a):
            return TRUE
        if isinstance(a, App) and a.op == "or":
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return App(BOOL, "or", tuple(flat))


def mk_not(a: Term) -> Term:
    if _is_true(a):
        return FALSE
    if _is_false(a):
        return TRUE
    if isinstance(a, App) and a.op == "not":
        return a.args[0]
    return App(BOOL, "not", (a,))


def mk_implies(a: Term, b: Term) -> Term:
    if _is_true(a):
        return b
    if _is_false(a) or _is_true(b):
        return TRUE
    return App(BOOL, "=>", (a, b))


def mk_eq(a: Term, b: Term) -> Term:
    if a == b:
        return TRUE
    if isinstance(a, IntConst) and isinstance(b, IntConst):
        return BoolConst(BOOL, a.value == b.value)
    if isinstance(a, BoolConst) and isinstance(b, BoolConst):
        return BoolConst(BOOL, a.value == b.value)
    return App(BOOL, "=", (a, b))


def mk_distinct(a: Term, b: Term) -> Term:
    return mk_not(mk_eq(a, b))


def mk_ite(c: Term, a: Term, b: Term) -> Term:
    if _is_true(c):
        return a
    if _is_false(c):
        return b
    if a == b:
        return a
    return App(a.sort, "ite", (c, a, b))


def _fold2(op: str, a: Term, b: Term, fn) -> Term:
    if isinstance(a, IntConst) and isinstance(b, IntConst):
        return mk_int(fn(a.value, b.value))
    return App(INT, op, (a, b))


def mk_add(a: Term, b: Term) -> Term:
    if isinstance(a, IntConst) and a.value == 0:
        return b
    if isinstance(b, IntConst) and b.value == 0:
        return a
    return _fold2("+", a, b, lambda x, y: x + y)


def mk_sub(a: Term, b: Term) -> Term:
    if isinstance(b, IntConst) and b.value == 0:
        return a
    return _fold2("-", a, b, lambda x, y: x - y)


def mk_mul(a: Term, b: Term) -> Term:
    if isinstance(a, IntConst) and a.value == 1:
        return b
    if isinstance(b, IntConst) and b.value == 1:
        return a
    return _fold2("*", a, b, lambda x, y: x * y)


def mk_div(a: Term, b: Term) -> Term:
    """Euclidean division, matching SMT-LIB div. Callers guard b != 0."""
    return App(INT, "div", (a, b))


def mk_mod(a: Term, b: Term) -> Term:
    return App(INT, "mod", (a, b))


def mk_tdiv(a: Term, b: Term) -> Term:
    """Division truncating toward zero, as signed machine division does.

    Built from Euclidean div by case analysis on the operand signs.
    """
    zero = mk_int(0)
    neg = lambda t: mk_sub(zero, t)
    return mk_ite(
        mk_ge(a, zero),
        mk_ite(mk_gt(b, zero), mk_div(a, b), neg(mk_div(a, neg(b)))),
        mk_ite(mk_gt(b, zero), neg(mk_div(neg(a), b)), mk_div(neg(a), neg(b))),
    )


def mk_tmod(a: Term, b: Term) -> Term:
    """Remainder with the sign of the dividend: a - b * tdiv(a, b)."""
    return mk_sub(a, mk_mul(b, mk_tdiv(a, b)))


def _cmp(op: str, a: Term, b: Term, fn) -> Term:
    if isinstance(a, IntConst) and isinstance(b, IntConst):
        return BoolConst(BOOL, fn(a.value, b.value))
    return App(BOOL, op, (a, b))


def mk_lt(a: Term, b: Term) -> Term:
    return _cmp("<", a, b, lambda x, y: x < y)


def mk_le(a: Term, b: Term) -> Term:
    return _cmp("<=", a, b, lambda x, y: x <= y)


def mk_gt(a: Term, b: Term) -> Term:
    return _cmp(">", a, b, lambda x, y: x > y)


def mk_ge(a: Term, b: Term) -> Term:
    return _cmp(">=", a, b, lambda x, y: x >= y)


def mk_select(a: Term, k: Term) -> Term:
    if isinstance(a, ConstArr):
        return a.default
    if isinstance(a, App) and a.op == "store":
        base, key, val = a.args
        if key == k:
            return val
        if isinstance(key, IntConst) and isinstance(k, IntConst):
            return mk_select(base, k)
    assert isinstance(a.sort, tuple) and a.sort[0] == "Arr", a
    return App(a.sort[2], "select", (a, k))


def mk_store(a: Term, k: Term, v: Term) -> Term:
    return App(a.sort, "store", (a, k, v))


def walk(t: Term) -> Iterator[Term]:
    """Yield every subterm of t, pre-order."""
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, App):
            stack.extend(reversed(node.args))
        elif isinstance(node, ConstArr):
            stack.append(node.default)


def collect_syms(terms) -> dict[str, Sym]:
    """All symbols appearing in the given terms, keyed by name."""
    out: dict[str, Sym] = {}
    for t in terms:
        for node in walk(t):
            if isinstance(node, Sym):
                out[node.name] = node
    return out


def collect_apps(terms, prefix: str) -> list[App]:
    """All App subterms whose op starts with prefix, deduplicated in order."""
    seen: list[App] = []
    for t in terms:
        for node in walk(t):
            if isinstance(node, App) and node.op.startswith(prefix) and node not in seen:
                seen.append(node)
    return seen


def sha3_injectivity_axioms(terms) -> list[Term]:
    """Pairwise injectivity instances for every hash application in terms.

    For each pair of sha3 applications of equal arity, asserts that equal
    hashes force argument-wise equality. Quantifier-free by construction.
    """
    apps = collect_apps(terms, "sha3$")
    axioms: list[Term] = []
    for i in range(len(apps)):
        for j in range(i + 1, len(apps)):
            a, b = apps[i], apps[j]
            if a.op != b.op:
                continue
            same_args = mk_and(*(mk_eq(x, y) for x, y in zip(a.args, b.args)))
            axioms.append(mk_implies(mk_eq(a, b), same_args))
    return axioms
