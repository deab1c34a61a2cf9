"""Name and type resolution for MiniSol contracts and PSL specifications.

Resolution computes per-contract C3 linearizations, builds dispatch tables,
inlines modifiers into prepared function copies, interns string literals to
deterministic integer codes, and annotates every expression with its
semantic type and binding. The parse-time AST is never mutated; all
annotation happens on deep copies stored in ContractInfo.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from . import ast as A
from .diagnostics import (
    CompileError,
    DUPLICATE_DECL,
    Diagnostic,
    INHERITANCE_ERROR,
    NOT_BOOLEAN,
    OLD_MISUSE,
    SYMBOLIC_OUTSIDE_RULE,
    Span,
    TYPE_MISMATCH,
    UNDECLARED,
    UNSUPPORTED,
    error,
)
from .types import (
    ADDRESS,
    ARITH,
    BOOL,
    BYTES32,
    INT,
    STRING,
    UINT,
    ArrayType,
    MappingType,
    StructType,
    Type,
    is_intlike,
    is_scalar,
)

CAST_TARGETS = {
    "address": ADDRESS,
    "payable": ADDRESS,
    "uint256": UINT,
    "int256": INT,
    "bytes32": BYTES32,
}

SHA3_NAMES = ("sha3", "keccak256")


@dataclass
class ContractInfo:
    name: str
    cdef: A.ContractDef
    linearization: list[str]
    state_vars: dict[str, A.StateVarDef]
    structs: dict[str, A.StructDef]
    events: dict[str, A.EventDef]
    modifiers: dict[str, A.ModifierDef]
    functions: dict[str, A.FunctionDef] = field(default_factory=dict)
    func_home: dict[str, str] = field(default_factory=dict)
    defs: dict[tuple[str, str], A.FunctionDef] = field(default_factory=dict)
    constructors: list[A.FunctionDef] = field(default_factory=list)

    def public_functions(self) -> list[A.FunctionDef]:
        return [
            f
            for name, f in sorted(self.functions.items())
            if f.visibility in ("public", "external")
        ]


@dataclass
class ResolvedProgram:
    units: list[A.SourceUnit]
    specs: list
    contracts: dict[str, ContractInfo]
    primary: str
    string_codes: dict[str, int]

    def contract(self, name: str | None = None) -> ContractInfo:
        return self.contracts[name or self.primary]

    def resolve_super(
        self, analyzed: str, home: str, fname: str
    ) -> tuple[str, A.FunctionDef] | None:
        """The implementation `super.fname()` dispatches to when the body
        defined in `home` runs as part of `analyzed`."""
        lin = self.contracts[analyzed].linearization
        if home not in lin:
            return None
        info = self.contracts[analyzed]
        for parent in lin[lin.index(home) + 1 :]:
            if (parent, fname) in info.defs:
                return parent, info.defs[(parent, fname)]
        return None


def _linearize(name: str, by_name: dict[str, A.ContractDef], span: Span) -> list[str]:
    """C3 linearization with Solidity's reversed-base merge order."""

    memo: dict[str, list[str]] = {}
    visiting: set[str] = set()

    def lin(c: str) -> list[str]:
        if c in memo:
            return memo[c]
        if c in visiting:
            raise CompileError(
                [error(INHERITANCE_ERROR, f"inheritance cycle through '{c}'", span)]
            )
        visiting.add(c)
        cdef = by_name.get(c)
        if cdef is None:
            raise CompileError(
                [error(UNDECLARED, f"unknown base contract '{c}'", span)]
            )
        bases = list(cdef.bases)
        seqs = [lin(b) for b in reversed(bases)] + ([list(reversed(bases))] if bases else [])
        result = [c] + _merge(seqs, c, span)
        visiting.discard(c)
        memo[c] = result
        return result

    return lin(name)


def _merge(seqs: list[list[str]], c: str, span: Span) -> list[str]:
    seqs = [list(s) for s in seqs if s]
    out: list[str] = []
    while seqs:
        head = None
        for s in seqs:
            cand = s[0]
            if not any(cand in other[1:] for other in seqs):
                head = cand
                break
        if head is None:
            raise CompileError(
                [
                    error(
                        INHERITANCE_ERROR,
                        f"cannot linearize inheritance graph of '{c}'",
                        span,
                    )
                ]
            )
        out.append(head)
        seqs = [[x for x in s if x != head] for s in seqs]
        seqs = [s for s in seqs if s]
    return out


class _Scope:
    def __init__(self):
        self.frames: list[dict[str, Type]] = [{}]

    def push(self) -> None:
        self.frames.append({})

    def pop(self) -> None:
        self.frames.pop()

    def declare(self, name: str, ty: Type) -> bool:
        if any(name in f for f in self.frames):
            return False
        self.frames[-1][name] = ty
        return True

    def lookup(self, name: str) -> Type | None:
        for f in reversed(self.frames):
            if name in f:
                return f[name]
        return None


class _Resolver:
    def __init__(self, units: list[A.SourceUnit], specs: list, primary: str | None):
        self.units = units
        self.spec_units = specs
        self.primary_name = primary
        self.diags: list[Diagnostic] = []
        self.string_codes: dict[str, int] = {}
        self.contracts: dict[str, ContractInfo] = {}

    # -- error helpers -------------------------------------------------------

    def err(self, code: str, msg: str, span: Span) -> None:
        self.diags.append(error(code, msg, span))

    # -- entry ----------------------------------------------------------------

    def run(self) -> ResolvedProgram:
        by_name: dict[str, A.ContractDef] = {}
        for unit in self.units:
            for cdef in unit.contracts:
                if cdef.name in by_name:
                    self.err(DUPLICATE_DECL, f"contract '{cdef.name}' declared twice", cdef.span)
                by_name[cdef.name] = cdef
        if self.diags:
            raise CompileError(self.diags)
        if not by_name:
            raise CompileError(
                [error(UNDECLARED, "no contracts to resolve", Span(0, 0, 1, 1))]
            )

        self._intern_strings()

        for name, cdef in by_name.items():
            lin = _linearize(name, by_name, cdef.span)
            info = self._prepare_contract(name, lin, by_name)
            self.contracts[name] = info
        if self.diags:
            raise CompileError(self.diags)

        primary = self.primary_name
        if primary is None:
            primary = self.units[-1].contracts[-1].name
        elif primary not in self.contracts:
            raise CompileError(
                [error(UNDECLARED, f"unknown primary contract '{primary}'", Span(0, 0, 1, 1))]
            )

        resolved_specs = [copy.deepcopy(s) for s in self.spec_units]
        for spec in resolved_specs:
            self._resolve_spec(spec, self.contracts[primary])
        if self.diags:
            raise CompileError(self.diags)

        return ResolvedProgram(
            units=self.units,
            specs=resolved_specs,
            contracts=self.contracts,
            primary=primary,
            string_codes=self.string_codes,
        )

    def _intern_strings(self) -> None:
        values: set[str] = set()

        def walk(node):
            if isinstance(node, A.StringLit):
                values.add(node.value)
            if isinstance(node, A.Node):
                for f in node.__dataclass_fields__:
                    walk(getattr(node, f))
            elif isinstance(node, list):
                for item in node:
                    walk(item)

        for unit in self.units:
            walk(unit)
        for spec in self.spec_units:
            walk(spec)
        self.string_codes = {v: i + 1 for i, v in enumerate(sorted(values))}

    # -- contract preparation ---------------------------------------------------

    def _prepare_contract(
        self, name: str, lin: list[str], by_name: dict[str, A.ContractDef]
    ) -> ContractInfo:
        cdef = by_name[name]

        state_vars: dict[str, A.StateVarDef] = {}
        structs: dict[str, A.StructDef] = {}
        events: dict[str, A.EventDef] = {}
        modifiers: dict[str, A.ModifierDef] = {}
        # Base-most first so storage order mirrors Solidity.
        for cname in reversed(lin):
            c = by_name[cname]
            for st in c.structs:
                structs[st.name] = st
            for ev in c.events:
                events[ev.name] = ev
            for m in c.modifiers:
                modifiers[m.name] = m
            for sv in c.stateVars:
                if sv.name in state_vars:
                    self.err(
                        DUPLICATE_DECL,
                        f"state variable '{sv.name}' shadows an inherited declaration",
                        sv.span,
                    )
                state_vars[sv.name] = sv

        info = ContractInfo(
            name=name,
            cdef=cdef,
            linearization=lin,
            state_vars=state_vars,
            structs=structs,
            events=events,
            modifiers=modifiers,
        )

        for sname, st in structs.items():
            for fdecl in st.fields:
                fdecl.sem = self._semantic_type(fdecl.typ, info, allow_compound=False)
        for sv in state_vars.values():
            sv.sem = self._semantic_type(sv.typ, info, allow_compound=True)

        # Dispatch: first definition along the linearization wins.
        definers: dict[str, list[str]] = {}
        for cname in lin:
            for f in by_name[cname].functions:
                if f.isConstructor:
                    continue
                definers.setdefault(f.name, []).append(cname)
        for fname, homes in definers.items():
            if len(homes) > 1:
                winner = by_name[homes[0]]
                wdef = next(f for f in winner.functions if f.name == fname)
                if not wdef.isOverride:
                    self.err(
                        INHERITANCE_ERROR,
                        f"ambiguous override: '{fname}' is inherited from multiple bases "
                        f"and the most-derived definition does not override",
                        wdef.span,
                    )

        # Signatures first: dispatch and super lookups need them while the
        # bodies are being typed.
        for cname in reversed(lin):
            for f in by_name[cname].functions:
                if f.isConstructor:
                    continue
                info.defs[(cname, f.name)] = self._prepare_signature(f, info)
        for cname in lin:
            for f in by_name[cname].functions:
                if f.isConstructor or f.name in info.functions:
                    continue
                info.functions[f.name] = info.defs[(cname, f.name)]
                info.func_home[f.name] = cname
        for (cname, _), fn in info.defs.items():
            self._prepare_body(fn, cname, info)

        # Base-most constructor runs first.
        for cname in reversed(lin):
            for f in by_name[cname].functions:
                if f.isConstructor:
                    ctor = self._prepare_signature(f, info)
                    self._prepare_body(ctor, cname, info)
                    info.constructors.append(ctor)

        return info

    def _semantic_type(
        self, tn: A.TypeName, info: ContractInfo, allow_compound: bool
    ) -> Type | None:
        if isinstance(tn, A.ElemTypeName):
            return {
                "uint256": UINT,
                "int256": INT,
                "bool": BOOL,
                "address": ADDRESS,
                "bytes32": BYTES32,
                "string": STRING,
            }[tn.name]
        if isinstance(tn, A.UserTypeName):
            if tn.name in info.structs:
                return StructType(tn.name)
            self.err(UNDECLARED, f"unknown type '{tn.name}'", tn.span)
            return None
        if isinstance(tn, A.MappingTypeName):
            if not allow_compound:
                self.err(UNSUPPORTED, "mapping not allowed here", tn.span)
                return None
            key = self._semantic_type(tn.key, info, allow_compound=False)
            value = self._semantic_type(tn.value, info, allow_compound=False)
            if key is None or value is None:
                return None
            if not is_scalar(key):
                self.err(UNSUPPORTED, "mapping keys must be scalar", tn.span)
                return None
            if not (is_scalar(value) or isinstance(value, StructType)):
                self.err(UNSUPPORTED, "mapping values must be scalar or struct", tn.span)
                return None
            return MappingType(key, value)
        if isinstance(tn, A.ArrayTypeName):
            if not allow_compound:
                self.err(UNSUPPORTED, "array type not allowed here", tn.span)
                return None
            elem = self._semantic_type(tn.elem, info, allow_compound=False)
            if elem is None:
                return None
            if not is_scalar(elem):
                self.err(UNSUPPORTED, "array elements must be scalar", tn.span)
                return None
            return ArrayType(elem)
        self.err(UNSUPPORTED, "unsupported type", tn.span)
        return None

    # -- modifier inlining --------------------------------------------------------

    def _prepare_signature(self, f: A.FunctionDef, info: ContractInfo) -> A.FunctionDef:
        fn = copy.deepcopy(f)
        for p in fn.params:
            p.sem = self._semantic_type(p.typ, info, allow_compound=True)
        if len(fn.returns) > 1:
            self.err(UNSUPPORTED, "multiple return values are not supported", fn.span)
            fn.returns = fn.returns[:1]
        for r in fn.returns:
            if r.name:
                self.err(UNSUPPORTED, "named return values are not supported", fn.span)
            r.sem = self._semantic_type(r.typ, info, allow_compound=False)
        return fn

    def _prepare_body(self, fn: A.FunctionDef, home: str, info: ContractInfo) -> None:
        if fn.body is not None:
            body = fn.body
            for inv in reversed(fn.modifiers):
                mdef = info.modifiers.get(inv.name)
                if mdef is None:
                    self.err(UNDECLARED, f"unknown modifier '{inv.name}'", inv.span)
                    continue
                if len(inv.args) != len(mdef.params):
                    self.err(
                        TYPE_MISMATCH,
                        f"modifier '{inv.name}' expects {len(mdef.params)} argument(s)",
                        inv.span,
                    )
                    continue
                mbody = copy.deepcopy(mdef.body)
                if mdef.params:
                    subst = {p.name: a for p, a in zip(mdef.params, inv.args)}
                    _substitute_idents(mbody, subst)
                body = _splice_placeholder(mbody, body)
            fn.body = body
            self._resolve_body(fn, home, info)
        elif fn.modifiers:
            self.err(UNSUPPORTED, "modifiers on a bodyless function", fn.span)

    # -- function body resolution ----------------------------------------------

    def _resolve_body(self, fn: A.FunctionDef, home: str, info: ContractInfo) -> None:
        scope = _Scope()
        for p in fn.params:
            if not scope.declare(p.name, p.sem):
                self.err(DUPLICATE_DECL, f"duplicate parameter '{p.name}'", p.span)
        ret_ty = fn.returns[0].sem if fn.returns else None
        ctx = _Ctx(
            info=info,
            home=home,
            scope=scope,
            ret_ty=ret_ty,
            allow_env=True,
            allow_old=False,
            rule_scope=None,
        )
        self._resolve_block(fn.body, ctx)

    def _resolve_block(self, block: A.Block, ctx: "_Ctx") -> None:
        ctx.scope.push()
        for stmt in block.stmts:
            self._resolve_stmt(stmt, ctx)
        ctx.scope.pop()

    def _resolve_stmt(self, s: A.Stmt, ctx: "_Ctx") -> None:
        if isinstance(s, A.VarDeclStmt):
            self._resolve_var_decl(s, ctx)
        elif isinstance(s, A.AssignStmt):
            target_ty = self._resolve_lvalue(s.target, ctx)
            self._type_expr(s.value, ctx, expected=target_ty)
        elif isinstance(s, A.IfStmt):
            self._expect_bool(s.cond, ctx, "if condition")
            self._resolve_block(s.then, ctx)
            if s.els is not None:
                self._resolve_block(s.els, ctx)
        elif isinstance(s, A.WhileStmt):
            self._expect_bool(s.cond, ctx, "while condition")
            self._resolve_block(s.body, ctx)
        elif isinstance(s, A.ForStmt):
            ctx.scope.push()
            if s.init is not None:
                self._resolve_stmt(s.init, ctx)
            if s.cond is not None:
                self._expect_bool(s.cond, ctx, "for condition")
            if s.update is not None:
                self._resolve_stmt(s.update, ctx)
            self._resolve_block(s.body, ctx)
            ctx.scope.pop()
        elif isinstance(s, A.RequireStmt):
            self._expect_bool(s.cond, ctx, "require condition")
        elif isinstance(s, A.AssertStmt):
            self._expect_bool(s.cond, ctx, "assert condition")
        elif isinstance(s, A.RevertStmt):
            pass
        elif isinstance(s, A.ReturnStmt):
            if s.value is not None:
                if ctx.ret_ty is None:
                    self.err(TYPE_MISMATCH, "function has no return value", s.span)
                else:
                    self._type_expr(s.value, ctx, expected=ctx.ret_ty)
            elif ctx.ret_ty is not None:
                self.err(TYPE_MISMATCH, "missing return value", s.span)
        elif isinstance(s, A.EmitStmt):
            ev = ctx.info.events.get(s.event)
            if ev is None:
                self.err(UNDECLARED, f"unknown event '{s.event}'", s.span)
            for a in s.args:
                self._type_expr(a, ctx)
        elif isinstance(s, A.ExprStmt):
            expr = s.expr
            if isinstance(expr, A.CallExpr):
                self._type_expr(expr, ctx, statement=True)
            else:
                self.err(UNSUPPORTED, "expression statement has no effect", s.span)
        elif isinstance(s, A.PlaceholderStmt):
            self.err(UNSUPPORTED, "'_' placeholder outside a modifier", s.span)
        else:
            self.err(UNSUPPORTED, "unsupported statement", s.span)

    def _resolve_var_decl(self, s: A.VarDeclStmt, ctx: "_Ctx") -> None:
        if len(s.decls) == 1 and s.decls[0] is not None:
            d = s.decls[0]
            d.sem = self._semantic_type(d.typ, ctx.info, allow_compound=False)
            if isinstance(s.init, A.ExtCall):
                self.err(
                    TYPE_MISMATCH,
                    "external calls bind a (bool, bytes32) tuple",
                    s.span,
                )
                return
            if s.init is not None:
                self._type_expr(s.init, ctx, expected=d.sem)
            if d.sem is not None and not scope_declare(ctx, d.name, d.sem):
                self.err(DUPLICATE_DECL, f"duplicate local '{d.name}'", d.span)
            return
        # Tuple form: only `(bool ok, [bytes32 data]) = <external call>`.
        if not isinstance(s.init, A.ExtCall):
            self.err(
                UNSUPPORTED,
                "tuple declarations are only supported for external calls",
                s.span,
            )
            return
        self._type_expr(s.init, ctx)
        for d in s.decls:
            if d is None:
                continue
            d.sem = self._semantic_type(d.typ, ctx.info, allow_compound=False)
        expected = [BOOL, BYTES32]
        if len(s.decls) > 2:
            self.err(TYPE_MISMATCH, "external call binds at most two values", s.span)
            return
        for i, d in enumerate(s.decls):
            if d is None:
                continue
            if d.sem is not None and d.sem != expected[i]:
                self.err(
                    TYPE_MISMATCH,
                    f"external call component {i} has type {expected[i]}",
                    d.span,
                )
            if d.sem is not None and not scope_declare(ctx, d.name, d.sem):
                self.err(DUPLICATE_DECL, f"duplicate local '{d.name}'", d.span)

    def _resolve_lvalue(self, e: A.Expr, ctx: "_Ctx") -> Type | None:
        if isinstance(e, A.Ident):
            ty = self._type_expr(e, ctx)
            if e.binding is not None and e.binding[0] not in ("state", "local"):
                self.err(TYPE_MISMATCH, f"cannot assign to '{e.name}'", e.span)
                return None
            return ty
        if isinstance(e, (A.IndexAccess, A.MemberAccess)):
            return self._type_expr(e, ctx)
        self.err(TYPE_MISMATCH, "invalid assignment target", e.span)
        return None

    def _expect_bool(self, e: A.Expr, ctx: "_Ctx", what: str) -> None:
        ty = self._type_expr(e, ctx)
        if ty is not None and ty != BOOL:
            self.err(NOT_BOOLEAN, f"{what} must be boolean, got {ty}", e.span)

    # -- expression typing ---------------------------------------------------------

    def _type_expr(
        self,
        e: A.Expr,
        ctx: "_Ctx",
        expected: Type | None = None,
        statement: bool = False,
    ) -> Type | None:
        ty = self._type_expr_inner(e, ctx, expected, statement)
        e.ty = ty
        if (
            ty is not None
            and expected is not None
            and ty != expected
            and not statement
        ):
            self.err(TYPE_MISMATCH, f"expected {expected}, got {ty}", e.span)
        return ty

    def _type_expr_inner(
        self, e: A.Expr, ctx: "_Ctx", expected: Type | None, statement: bool
    ) -> Type | None:
        if isinstance(e, A.NumberLit):
            if e.raw.lower().startswith("0x"):
                digits = len(e.raw) - 2
                if digits == 40:
                    return ADDRESS
                if digits == 64:
                    return BYTES32
            if e.value >= 2**256:
                self.err(TYPE_MISMATCH, "integer literal too large", e.span)
                return None
            if expected is not None and is_intlike(expected):
                return expected
            return UINT
        if isinstance(e, A.BoolLit):
            return BOOL
        if isinstance(e, A.StringLit):
            e.code = self.string_codes[e.value]
            return STRING
        if isinstance(e, A.Ident):
            return self._type_ident(e, ctx)
        if isinstance(e, A.OldExpr):
            if not ctx.allow_old:
                self.err(OLD_MISUSE, "old(...) is only valid in function specs", e.span)
                return None
            inner = e.var
            if not isinstance(inner, A.Ident) or inner.name not in ctx.info.state_vars:
                self.err(OLD_MISUSE, "old(...) must wrap a state variable", e.span)
                return None
            ty = self._type_ident(inner, ctx)
            return ty
        if isinstance(e, A.UnaryOp):
            if e.op == "!":
                self._type_expr(e.operand, ctx, expected=BOOL)
                return BOOL
            # Unary minus: a signed constant or a signed expression.
            if isinstance(e.operand, A.NumberLit):
                self._type_expr(e.operand, ctx, expected=INT)
                return INT
            ty = self._type_expr(e.operand, ctx, expected=INT)
            return INT if ty == INT else None
        if isinstance(e, A.BinaryOp):
            return self._type_binary(e, ctx, expected)
        if isinstance(e, A.IndexAccess):
            base_ty = self._type_expr(e.base, ctx)
            if isinstance(base_ty, MappingType):
                self._type_expr(e.index, ctx, expected=base_ty.key)
                return base_ty.value
            if isinstance(base_ty, ArrayType):
                self._type_expr(e.index, ctx, expected=UINT)
                return base_ty.elem
            if base_ty is not None:
                self.err(TYPE_MISMATCH, f"{base_ty} is not indexable", e.span)
            return None
        if isinstance(e, A.MemberAccess):
            return self._type_member(e, ctx)
        if isinstance(e, A.CallExpr):
            return self._type_call(e, ctx, statement)
        if isinstance(e, A.ExtCall):
            self._type_expr(e.target, ctx, expected=ADDRESS)
            if e.value is not None:
                self._type_expr(e.value, ctx, expected=UINT)
            if e.payload is not None:
                pay = self._type_expr(e.payload, ctx)
                if pay is not None and pay != STRING:
                    self.err(UNSUPPORTED, "external call payload must be \"\"", e.span)
            return None  # bound via tuple declaration only
        self.err(UNSUPPORTED, "unsupported expression", e.span)
        return None

    def _type_ident(self, e: A.Ident, ctx: "_Ctx") -> Type | None:
        name = e.name
        if name.startswith("$"):
            if ctx.rule_scope is None:
                self.err(SYMBOLIC_OUTSIDE_RULE, f"'{name}' outside a rule", e.span)
                return None
            ty = ctx.rule_scope.get(name)
            if ty is None:
                self.err(UNDECLARED, f"use of undeclared symbolic variable '{name}'", e.span)
                return None
            e.binding = ("rulevar", name)
            return ty
        if ctx.rule_scope is not None and name in ctx.rule_scope:
            e.binding = ("rulevar", name)
            return ctx.rule_scope[name]
        ty = ctx.scope.lookup(name)
        if ty is not None:
            e.binding = ("local", name)
            return ty
        sv = ctx.info.state_vars.get(name)
        if sv is not None:
            e.binding = ("state", name)
            return sv.sem
        if name in ("msg", "block"):
            self.err(UNDECLARED, f"'{name}' cannot be used alone", e.span)
            return None
        self.err(UNDECLARED, f"use of undeclared variable '{name}'", e.span)
        return None

    def _type_member(self, e: A.MemberAccess, ctx: "_Ctx") -> Type | None:
        if isinstance(e.base, A.Ident) and e.base.name == "msg":
            if not ctx.allow_env:
                self.err(UNDECLARED, "msg is not available here", e.span)
                return None
            if e.member == "sender":
                e.binding = ("env", "sender")
                return ADDRESS
            if e.member == "value":
                e.binding = ("env", "value")
                return UINT
            self.err(UNDECLARED, f"unknown member msg.{e.member}", e.span)
            return None
        if isinstance(e.base, A.Ident) and e.base.name == "block":
            if not ctx.allow_env:
                self.err(UNDECLARED, "block is not available here", e.span)
                return None
            if e.member == "timestamp":
                e.binding = ("env", "timestamp")
                return UINT
            self.err(UNDECLARED, f"unknown member block.{e.member}", e.span)
            return None
        base_ty = self._type_expr(e.base, ctx)
        if isinstance(base_ty, StructType):
            st = ctx.info.structs.get(base_ty.name)
            if st is not None:
                for fdecl in st.fields:
                    if fdecl.name == e.member:
                        e.binding = ("field", base_ty.name, e.member)
                        return fdecl.sem
            self.err(UNDECLARED, f"struct {base_ty.name} has no field '{e.member}'", e.span)
            return None
        if isinstance(base_ty, ArrayType) and e.member == "length":
            e.binding = ("length",)
            return UINT
        if base_ty is not None:
            self.err(UNDECLARED, f"{base_ty} has no member '{e.member}'", e.span)
        return None

    def _type_binary(self, e: A.BinaryOp, ctx: "_Ctx", expected: Type | None) -> Type | None:
        op = e.op
        if op in ("&&", "||"):
            self._type_expr(e.left, ctx, expected=BOOL)
            self._type_expr(e.right, ctx, expected=BOOL)
            return BOOL
        if op in ("+", "-", "*", "/", "%"):
            hint = expected if isinstance(expected, ARITH) else None
            lt, rt = self._type_pair(e, ctx, hint)
            if lt is None or rt is None:
                return None
            if not isinstance(lt, ARITH):
                self.err(TYPE_MISMATCH, f"arithmetic on {lt}", e.span)
                return None
            return lt
        if op in ("<", ">", "<=", ">="):
            lt, rt = self._type_pair(e, ctx, None)
            if lt is None or rt is None:
                return BOOL
            if not is_intlike(lt):
                self.err(TYPE_MISMATCH, f"cannot order {lt} values", e.span)
            return BOOL
        if op in ("==", "!="):
            lt, rt = self._type_pair(e, ctx, None)
            if lt is not None and not is_scalar(lt):
                self.err(TYPE_MISMATCH, f"cannot compare {lt} values", e.span)
            return BOOL
        self.err(UNSUPPORTED, f"unsupported operator '{op}'", e.span)
        return None

    def _type_pair(
        self, e: A.BinaryOp, ctx: "_Ctx", hint: Type | None
    ) -> tuple[Type | None, Type | None]:
        """Type both operands, letting a typed side drive a literal side."""
        left_literal = _is_literal(e.left)
        right_literal = _is_literal(e.right)
        if left_literal and not right_literal:
            rt = self._type_expr(e.right, ctx, expected=hint)
            lt = self._type_expr(e.left, ctx, expected=rt)
        else:
            lt = self._type_expr(e.left, ctx, expected=hint)
            rt = self._type_expr(e.right, ctx, expected=lt)
        if lt is not None and rt is not None and lt != rt:
            self.err(TYPE_MISMATCH, f"operand types differ: {lt} vs {rt}", e.span)
        return lt, rt

    def _type_call(self, e: A.CallExpr, ctx: "_Ctx", statement: bool) -> Type | None:
        callee = e.callee
        # super.f(...)
        if isinstance(callee, A.MemberAccess) and isinstance(callee.base, A.Ident) and callee.base.name == "super":
            fname = callee.member
            target = None
            # Typing uses this contract's own linearization; the executor
            # re-resolves against the analyzed (most-derived) contract.
            lin = ctx.info.linearization
            if ctx.home in lin:
                for parent in lin[lin.index(ctx.home) + 1 :]:
                    if (parent, fname) in ctx.info.defs:
                        target = ctx.info.defs[(parent, fname)]
                        break
            if target is None:
                self.err(UNDECLARED, f"no parent implementation of '{fname}'", e.span)
                return None
            e.binding = ("super", ctx.home, fname)
            return self._check_args(e, target, ctx, statement)
        # array.push(x)
        if isinstance(callee, A.MemberAccess) and callee.member == "push":
            base_ty = self._type_expr(callee.base, ctx)
            if not isinstance(base_ty, ArrayType):
                self.err(TYPE_MISMATCH, "push() needs an array", e.span)
                return None
            if len(e.args) != 1:
                self.err(TYPE_MISMATCH, "push() takes one argument", e.span)
                return None
            self._type_expr(e.args[0], ctx, expected=base_ty.elem)
            e.binding = ("push",)
            if not statement:
                self.err(UNSUPPORTED, "push() is a statement", e.span)
            return None
        if not isinstance(callee, A.Ident):
            self.err(UNSUPPORTED, "unsupported call form", e.span)
            return None
        name = callee.name
        if name in SHA3_NAMES:
            if not e.args:
                self.err(TYPE_MISMATCH, f"{name}() needs at least one argument", e.span)
                return None
            for a in e.args:
                ty = self._type_expr(a, ctx)
                if ty is not None and not is_intlike(ty) and ty != BOOL:
                    self.err(TYPE_MISMATCH, f"cannot hash a {ty}", a.span)
            e.binding = ("builtin", "sha3")
            return BYTES32
        if name in CAST_TARGETS:
            if len(e.args) != 1:
                self.err(TYPE_MISMATCH, f"{name}() cast takes one argument", e.span)
                return None
            target_ty = CAST_TARGETS[name]
            arg_ty = self._type_expr(e.args[0], ctx, expected=None)
            if arg_ty is not None and not is_intlike(arg_ty):
                self.err(TYPE_MISMATCH, f"cannot cast {arg_ty} to {target_ty}", e.span)
            e.binding = ("cast", target_ty)
            return target_ty
        if name in ctx.info.structs:
            st = ctx.info.structs[name]
            if len(e.args) != len(st.fields):
                self.err(
                    TYPE_MISMATCH,
                    f"struct {name} has {len(st.fields)} field(s)",
                    e.span,
                )
                return None
            for a, fdecl in zip(e.args, st.fields):
                self._type_expr(a, ctx, expected=fdecl.sem)
            e.binding = ("struct_new", name)
            return StructType(name)
        if name in ctx.info.functions:
            target = ctx.info.functions[name]
            if ctx.rule_scope is not None and target.visibility not in ("public", "external"):
                self.err(
                    TYPE_MISMATCH,
                    f"rules may only call public or external functions, '{name}' is {target.visibility}",
                    e.span,
                )
            e.binding = ("internal", name)
            return self._check_args(e, target, ctx, statement)
        self.err(UNDECLARED, f"call to undeclared function '{name}'", e.span)
        return None

    def _check_args(
        self, e: A.CallExpr, target: A.FunctionDef, ctx: "_Ctx", statement: bool = False
    ) -> Type | None:
        if len(e.args) != len(target.params):
            self.err(
                TYPE_MISMATCH,
                f"'{target.name}' expects {len(target.params)} argument(s), got {len(e.args)}",
                e.span,
            )
            return None
        for a, p in zip(e.args, target.params):
            self._type_expr(a, ctx, expected=p.sem)
        if target.body is None:
            self.err(UNSUPPORTED, f"call to bodyless function '{target.name}'", e.span)
        if not target.returns and not statement:
            self.err(TYPE_MISMATCH, f"'{target.name}' returns no value", e.span)
        return target.returns[0].sem if target.returns else None

    # -- specification resolution ---------------------------------------------------

    def _resolve_spec(self, spec, info: ContractInfo) -> None:
        if isinstance(spec, A.InvariantDecl):
            ctx = _Ctx(
                info=info,
                home=info.name,
                scope=_Scope(),
                ret_ty=None,
                allow_env=False,
                allow_old=False,
                rule_scope=None,
            )
            for ex in spec.exprs:
                self._expect_bool(ex, ctx, "invariant expression")
            return
        if isinstance(spec, A.FunctionSpec):
            fn = info.functions.get(spec.funcName)
            if fn is None:
                self.err(
                    UNDECLARED,
                    f"spec targets unknown function '{spec.funcName}'",
                    spec.span,
                )
                return
            scope = _Scope()
            for p in fn.params:
                scope.declare(p.name, p.sem)
            ctx = _Ctx(
                info=info,
                home=info.name,
                scope=scope,
                ret_ty=None,
                allow_env=True,
                allow_old=True,
                rule_scope=None,
            )
            for ex in spec.pre:
                self._expect_bool(ex, ctx, "precondition")
            for ex in spec.post:
                self._expect_bool(ex, ctx, "postcondition")
            return
        if isinstance(spec, A.RuleDecl):
            rule_scope: dict[str, Type] = {}
            ctx = _Ctx(
                info=info,
                home=info.name,
                scope=_Scope(),
                ret_ty=None,
                allow_env=True,
                allow_old=False,
                rule_scope=rule_scope,
            )
            for stmt in spec.body:
                if isinstance(stmt, A.AssumeStmt):
                    self._expect_bool(stmt.cond, ctx, "assume condition")
                elif isinstance(stmt, A.SpecAssertStmt):
                    self._expect_bool(stmt.cond, ctx, "assert condition")
                elif isinstance(stmt, A.SpecLetStmt):
                    declared = (
                        self._semantic_type(stmt.typ, info, allow_compound=False)
                        if stmt.typ is not None
                        else None
                    )
                    init_ty = None
                    if stmt.init is not None:
                        init_ty = self._type_expr(stmt.init, ctx, expected=declared)
                    ty = declared or init_ty
                    if ty is None:
                        self.err(
                            UNDECLARED,
                            f"cannot determine the type of '{stmt.name}'",
                            stmt.span,
                        )
                        continue
                    if stmt.name in rule_scope:
                        self.err(
                            DUPLICATE_DECL,
                            f"'{stmt.name}' already bound in this rule",
                            stmt.span,
                        )
                        continue
                    stmt.sem = ty
                    rule_scope[stmt.name] = ty
                elif isinstance(stmt, A.SpecCallStmt):
                    self._type_expr(stmt.call, ctx, statement=True)
                else:
                    self.err(UNSUPPORTED, "unsupported rule statement", stmt.span)
            return
        self.err(UNSUPPORTED, "unsupported specification unit", getattr(spec, "span", Span(0, 0, 1, 1)))


@dataclass
class _Ctx:
    info: ContractInfo
    home: str
    scope: _Scope
    ret_ty: Type | None
    allow_env: bool
    allow_old: bool
    rule_scope: dict | None


def scope_declare(ctx: _Ctx, name: str, ty: Type) -> bool:
    return ctx.scope.declare(name, ty)


def _is_literal(e: A.Expr) -> bool:
    if isinstance(e, A.NumberLit):
        return True
    if isinstance(e, A.UnaryOp) and e.op == "-":
        return _is_literal(e.operand)
    return False


def _substitute_idents(node, subst: dict[str, A.Expr]) -> None:
    """Replace Ident leaves by (copies of) argument expressions, in place."""
    if isinstance(node, A.Node):
        for fname in node.__dataclass_fields__:
            value = getattr(node, fname)
            if isinstance(value, A.Ident) and value.name in subst:
                setattr(node, fname, copy.deepcopy(subst[value.name]))
            else:
                _substitute_idents(value, subst)
    elif isinstance(node, list):
        for i, item in enumerate(node):
            if isinstance(item, A.Ident) and item.name in subst:
                node[i] = copy.deepcopy(subst[item.name])
            else:
                _substitute_idents(item, subst)


def _splice_placeholder(mbody: A.Block, inner: A.Block) -> A.Block:
    """Replace each `_;` inside mbody with the statements of inner."""

    def walk_block(b: A.Block) -> A.Block:
        out: list[A.Stmt] = []
        for s in b.stmts:
            if isinstance(s, A.PlaceholderStmt):
                out.extend(copy.deepcopy(inner.stmts))
            else:
                out.append(walk_stmt(s))
        return A.Block(out, span=b.span)

    def walk_stmt(s: A.Stmt) -> A.Stmt:
        if isinstance(s, A.IfStmt):
            s.then = walk_block(s.then)
            if s.els is not None:
                s.els = walk_block(s.els)
        elif isinstance(s, A.WhileStmt):
            s.body = walk_block(s.body)
        elif isinstance(s, A.ForStmt):
            s.body = walk_block(s.body)
        return s

    return walk_block(mbody)


def resolve(units, specs=(), primary: str | None = None) -> ResolvedProgram:
    """Resolve parsed source units and spec units into a ResolvedProgram.

    Raises CompileError carrying all collected diagnostics on failure.
    """
    if isinstance(units, A.SourceUnit):
        units = [units]
    return _Resolver(list(units), list(specs), primary).run()


def resolve_spec_unit(program: ResolvedProgram, spec) -> tuple[object, list[Diagnostic]]:
    """Resolve one (possibly fresh) spec unit against an already-resolved
    program, returning the annotated copy and any diagnostics instead of
    raising. Used by the spec checker and the candidate-compilation loop."""
    r = _Resolver([], [], None)
    r.contracts = program.contracts
    codes = dict(program.string_codes)
    fresh: set[str] = set()

    def collect(node):
        if isinstance(node, A.StringLit) and node.value not in codes:
            fresh.add(node.value)
        if isinstance(node, A.Node):
            for f in node.__dataclass_fields__:
                collect(getattr(node, f))
        elif isinstance(node, list):
            for item in node:
                collect(item)

    collect(spec)
    for value in sorted(fresh):
        codes[value] = len(codes) + 1
    r.string_codes = codes
    resolved = copy.deepcopy(spec)
    r._resolve_spec(resolved, program.contracts[program.primary])
    return resolved, r.diags
