"""AST node definitions for MiniSol contracts and PSL specifications.

Nodes are plain dataclasses. Spans and resolver annotations are excluded
from equality so that round-tripping through the pretty printer yields
structurally equal trees even though offsets move.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .diagnostics import DUMMY_SPAN, Span


def _span_field() -> Span:
    return DUMMY_SPAN


@dataclass
class Node:
    span: Span = field(default_factory=_span_field, compare=False, kw_only=True)


# ---------------------------------------------------------------------------
# Types as written in source (resolved to semantic types later)


@dataclass
class TypeName(Node):
    pass


@dataclass
class ElemTypeName(TypeName):
    """uint256, int256, bool, address, bytes32, string."""

    name: str = ""


@dataclass
class MappingTypeName(TypeName):
    key: TypeName = None
    value: TypeName = None


@dataclass
class ArrayTypeName(TypeName):
    elem: TypeName = None


@dataclass
class UserTypeName(TypeName):
    """A struct (or otherwise user-declared) type reference."""

    name: str = ""


# ---------------------------------------------------------------------------
# Expressions


@dataclass
class Expr(Node):
    # Semantic type, set by the resolver. Not part of structural equality.
    ty: object = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class Ident(Expr):
    name: str = ""
    # Resolver binding, e.g. ("state", "C", "x") or ("local", "y").
    binding: object = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class NumberLit(Expr):
    value: int = 0
    raw: str = ""  # original spelling; hex spellings type as address/bytes32


@dataclass
class BoolLit(Expr):
    value: bool = False


@dataclass
class StringLit(Expr):
    value: str = ""
    # Deterministic integer code assigned at resolve time.
    code: object = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class BinaryOp(Expr):
    op: str = ""
    left: Expr = None
    right: Expr = None


@dataclass
class UnaryOp(Expr):
    op: str = ""
    operand: Expr = None


@dataclass
class IndexAccess(Expr):
    base: Expr = None
    index: Expr = None


@dataclass
class MemberAccess(Expr):
    base: Expr = None
    member: str = ""
    binding: object = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class CallExpr(Expr):
    callee: Expr = None
    args: list[Expr] = field(default_factory=list)
    # Resolver verdict: ("internal", contract, name) | ("builtin", name)
    # | ("cast", typename) | ("super", home, name) | ("push", ...)
    binding: object = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class ExtCall(Expr):
    """addr.call{value: e}(payload) low-level external call."""

    target: Expr = None
    value: Optional[Expr] = None
    payload: Optional[Expr] = None


@dataclass
class OldExpr(Expr):
    """old(v) in a specification: v's value at function entry."""

    var: Expr = None


# ---------------------------------------------------------------------------
# Statements


@dataclass
class Stmt(Node):
    pass


@dataclass
class Block(Node):
    stmts: list[Stmt] = field(default_factory=list)


@dataclass
class VarDecl(Node):
    name: str = ""
    typ: TypeName = None
    sem: object = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class VarDeclStmt(Stmt):
    """Local declaration; decls has >1 entry (some None) for tuple form."""

    decls: list[Optional[VarDecl]] = field(default_factory=list)
    init: Optional[Expr] = None


@dataclass
class AssignStmt(Stmt):
    target: Expr = None
    value: Expr = None


@dataclass
class IfStmt(Stmt):
    cond: Expr = None
    then: Block = None
    els: Optional[Block] = None


@dataclass
class WhileStmt(Stmt):
    cond: Expr = None
    body: Block = None


@dataclass
class ForStmt(Stmt):
    init: Optional[Stmt] = None
    cond: Optional[Expr] = None
    update: Optional[Stmt] = None
    body: Block = None


@dataclass
class RequireStmt(Stmt):
    cond: Expr = None
    message: Optional[str] = None


@dataclass
class AssertStmt(Stmt):
    cond: Expr = None


@dataclass
class RevertStmt(Stmt):
    message: Optional[str] = None


@dataclass
class ReturnStmt(Stmt):
    value: Optional[Expr] = None


@dataclass
class EmitStmt(Stmt):
    event: str = ""
    args: list[Expr] = field(default_factory=list)


@dataclass
class ExprStmt(Stmt):
    expr: Expr = None


@dataclass
class PlaceholderStmt(Stmt):
    """The `_;` inside a modifier body."""


# ---------------------------------------------------------------------------
# Declarations


@dataclass
class StateVarDef(Node):
    name: str = ""
    typ: TypeName = None
    visibility: str = "internal"
    init: Optional[Expr] = None
    sem: object = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class StructDef(Node):
    name: str = ""
    fields: list[VarDecl] = field(default_factory=list)


@dataclass
class EventDef(Node):
    name: str = ""
    params: list[VarDecl] = field(default_factory=list)


@dataclass
class ModifierInvocation(Node):
    name: str = ""
    args: list[Expr] = field(default_factory=list)


@dataclass
class ModifierDef(Node):
    name: str = ""
    params: list[VarDecl] = field(default_factory=list)
    body: Block = None


@dataclass
class FunctionDef(Node):
    name: str = ""
    params: list[VarDecl] = field(default_factory=list)
    returns: list[VarDecl] = field(default_factory=list)
    visibility: str = "public"
    mutability: Optional[str] = None  # payable | view | pure
    modifiers: list[ModifierInvocation] = field(default_factory=list)
    isVirtual: bool = False
    isOverride: bool = False
    isConstructor: bool = False
    body: Optional[Block] = None


@dataclass
class ContractDef(Node):
    name: str = ""
    bases: list[str] = field(default_factory=list)
    structs: list[StructDef] = field(default_factory=list)
    events: list[EventDef] = field(default_factory=list)
    stateVars: list[StateVarDef] = field(default_factory=list)
    modifiers: list[ModifierDef] = field(default_factory=list)
    functions: list[FunctionDef] = field(default_factory=list)


@dataclass
class SourceUnit(Node):
    pragmas: list[str] = field(default_factory=list)
    contracts: list[ContractDef] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Specification units (PSL)


@dataclass
class InvariantDecl(Node):
    name: str = ""
    exprs: list[Expr] = field(default_factory=list)


@dataclass
class FunctionSpec(Node):
    funcName: str = ""
    pre: list[Expr] = field(default_factory=list)
    post: list[Expr] = field(default_factory=list)


@dataclass
class AssumeStmt(Stmt):
    cond: Expr = None


@dataclass
class SpecAssertStmt(Stmt):
    cond: Expr = None


@dataclass
class SpecLetStmt(Stmt):
    """Rule-local binding: `uint256 $x;`, `$a = e;` or `bytes32 h = e;`."""

    name: str = ""
    typ: Optional[TypeName] = None
    init: Optional[Expr] = None
    sem: object = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class SpecCallStmt(Stmt):
    call: CallExpr = None


@dataclass
class RuleDecl(Node):
    name: str = ""
    body: list[Stmt] = field(default_factory=list)


SpecUnit = Union[InvariantDecl, FunctionSpec, RuleDecl]
