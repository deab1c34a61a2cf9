"""Recursive-descent parsers for MiniSol contracts and PSL specifications.

Both entry points raise CompileError carrying diagnostics on malformed
input; on success they return a lossless AST with byte-accurate spans.
"""

from __future__ import annotations

from .ast import (
    ArrayTypeName,
    AssertStmt,
    AssignStmt,
    AssumeStmt,
    BinaryOp,
    Block,
    BoolLit,
    CallExpr,
    ContractDef,
    ElemTypeName,
    EmitStmt,
    EventDef,
    Expr,
    ExprStmt,
    ExtCall,
    ForStmt,
    FunctionDef,
    FunctionSpec,
    Ident,
    IfStmt,
    IndexAccess,
    InvariantDecl,
    MappingTypeName,
    MemberAccess,
    ModifierDef,
    ModifierInvocation,
    NumberLit,
    OldExpr,
    PlaceholderStmt,
    RequireStmt,
    ReturnStmt,
    RevertStmt,
    RuleDecl,
    SourceUnit,
    SpecAssertStmt,
    SpecCallStmt,
    SpecLetStmt,
    StateVarDef,
    Stmt,
    StringLit,
    StructDef,
    TypeName,
    UnaryOp,
    UserTypeName,
    VarDecl,
    VarDeclStmt,
    WhileStmt,
)
from .diagnostics import (
    CompileError,
    STATEMENT_FORM,
    SYNTAX_ERROR,
    Span,
    UNSUPPORTED,
    error,
)
from .lexer import Token, tokenize

ELEM_TYPES = {"uint256", "int256", "bool", "address", "bytes32", "string"}
TYPE_ALIASES = {"uint": "uint256", "int": "int256"}

VISIBILITIES = {"public", "external", "internal", "private"}
MUTABILITIES = {"view", "pure", "payable"}

# Binary operators by ascending precedence tier.
BINARY_TIERS = [
    ["||"],
    ["&&", "&"],
    ["==", "!="],
    ["<", ">", "<=", ">="],
    ["+", "-"],
    ["*", "/", "%"],
]

COMPOUND_ASSIGN = {"+=": "+", "-=": "-", "*=": "*", "/=": "/", "%=": "%"}


class _Parser:
    def __init__(self, source: str, file: str):
        self.toks = tokenize(source, file)
        self.i = 0
        self.file = file
        self.data = source.encode("utf-8")

    # -- token helpers ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def at(self, text: str, ahead: int = 0) -> bool:
        t = self.peek(ahead)
        return t.text == text and t.kind in ("op", "keyword")

    def at_kind(self, kind: str, ahead: int = 0) -> bool:
        return self.peek(ahead).kind == kind

    def next(self) -> Token:
        t = self.toks[self.i]
        if self.i < len(self.toks) - 1:
            self.i += 1
        return t

    def expect(self, text: str, what: str = "") -> Token:
        if self.at(text):
            return self.next()
        t = self.peek()
        found = t.text if t.kind != "eof" else "end of input"
        msg = f"expected '{text}'" + (f" {what}" if what else "") + f", found '{found}'"
        raise CompileError([error(SYNTAX_ERROR, msg, t.span)])

    def expect_ident(self, what: str = "name") -> Token:
        if self.at_kind("ident"):
            return self.next()
        t = self.peek()
        raise CompileError([error(SYNTAX_ERROR, f"expected {what}, found '{t.text or 'end of input'}'", t.span)])

    def fail(self, msg: str, span: Span | None = None):
        raise CompileError([error(SYNTAX_ERROR, msg, span or self.peek().span)])

    def unsupported(self, msg: str, span: Span | None = None):
        raise CompileError([error(UNSUPPORTED, msg, span or self.peek().span)])

    # -- types --------------------------------------------------------------

    def looks_like_type(self) -> bool:
        """True when a declaration (not an expression such as a cast) follows."""
        t = self.peek()
        if t.text == "mapping":
            return True
        if t.kind != "ident":
            return False
        name = TYPE_ALIASES.get(t.text, t.text)
        if name not in ELEM_TYPES and not t.text[0].isupper():
            return False
        # A declarator must follow: `T x`, `T[] x`, `T memory x`.
        j = 1
        while self.at("[", j) and self.at("]", j + 1):
            j += 2
        if self.peek(j).text in ("memory", "storage", "calldata"):
            j += 1
        return self.at_kind("ident", j)

    def parse_type(self) -> TypeName:
        t = self.peek()
        if t.text == "mapping":
            self.next()
            self.expect("(")
            key = self.parse_type()
            self.expect("=>")
            value = self.parse_type()
            close = self.expect(")")
            base: TypeName = MappingTypeName(key, value, span=t.span.cover(close.span))
        elif t.kind == "ident":
            self.next()
            name = TYPE_ALIASES.get(t.text, t.text)
            if name in ELEM_TYPES:
                base = ElemTypeName(name, span=t.span)
            else:
                base = UserTypeName(t.text, span=t.span)
        else:
            self.fail(f"expected a type, found '{t.text}'")
        while self.at("[") and self.at("]", 1):
            self.next()
            close = self.next()
            base = ArrayTypeName(base, span=base.span.cover(close.span))
        return base

    def skip_data_location(self) -> None:
        if self.peek().text in ("memory", "storage", "calldata"):
            self.next()

    # -- expressions ---------------------------------------------------------

    def parse_expr(self) -> Expr:
        if self.at("?") or self.at(":"):
            self.unsupported("ternary expressions are not supported")
        return self._parse_binary(0)

    def _parse_binary(self, tier: int) -> Expr:
        if tier >= len(BINARY_TIERS):
            return self._parse_unary()
        left = self._parse_binary(tier + 1)
        ops = BINARY_TIERS[tier]
        while self.peek().kind == "op" and self.peek().text in ops:
            op = self.next().text
            # `&` is read as logical-and; `&&` is its canonical spelling.
            if op == "&":
                op = "&&"
            right = self._parse_binary(tier + 1)
            left = BinaryOp(op, left, right, span=left.span.cover(right.span))
        if self.at("?"):
            self.unsupported("ternary expressions are not supported")
        return left

    def _parse_unary(self) -> Expr:
        t = self.peek()
        if t.text in ("!", "-") and t.kind == "op":
            self.next()
            operand = self._parse_unary()
            return UnaryOp(t.text, operand, span=t.span.cover(operand.span))
        return self._parse_postfix()

    def _parse_postfix(self) -> Expr:
        expr = self._parse_primary()
        while True:
            if self.at("."):
                self.next()
                member = self.next()
                if member.kind not in ("ident", "keyword"):
                    self.fail("expected member name after '.'")
                if member.text == "call":
                    expr = self._parse_ext_call(expr, member.span)
                    continue
                expr = MemberAccess(expr, member.text, span=expr.span.cover(member.span))
            elif self.at("["):
                self.next()
                index = self.parse_expr()
                close = self.expect("]")
                expr = IndexAccess(expr, index, span=expr.span.cover(close.span))
            elif self.at("("):
                args, close = self._parse_call_args()
                expr = CallExpr(expr, args, span=expr.span.cover(close))
            else:
                return expr

    def _parse_call_args(self) -> tuple[list[Expr], Span]:
        self.expect("(")
        args: list[Expr] = []
        if not self.at(")"):
            args.append(self.parse_expr())
            while self.at(","):
                self.next()
                args.append(self.parse_expr())
        close = self.expect(")")
        return args, close.span

    def _parse_ext_call(self, target: Expr, call_span: Span) -> Expr:
        value = None
        if self.at("{"):
            self.next()
            key = self.expect_ident("option name")
            if key.text != "value":
                self.unsupported(f"unsupported call option '{key.text}'", key.span)
            self.expect(":")
            value = self.parse_expr()
            self.expect("}")
        args, close = self._parse_call_args()
        if len(args) > 1:
            self.unsupported("external call takes at most one payload argument", close)
        payload = args[0] if args else None
        return ExtCall(target, value, payload, span=target.span.cover(close))

    def _parse_primary(self) -> Expr:
        t = self.peek()
        if t.kind == "number":
            self.next()
            base = 16 if t.text.lower().startswith("0x") else 10
            return NumberLit(int(t.text, base), t.text, span=t.span)
        if t.kind == "string":
            self.next()
            return StringLit(t.text, span=t.span)
        if t.text in ("true", "false"):
            self.next()
            return BoolLit(t.text == "true", span=t.span)
        if t.kind == "ident":
            if t.text in ("old", "__old__") and self.at("(", 1):
                self.next()
                self.expect("(")
                inner = self.parse_expr()
                close = self.expect(")")
                return OldExpr(inner, span=t.span.cover(close.span))
            self.next()
            return Ident(t.text, span=t.span)
        if self.at("("):
            self.next()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if t.text == "new":
            self.unsupported("'new' expressions are not supported", t.span)
        self.fail(f"expected an expression, found '{t.text or 'end of input'}'")

    # -- statements -----------------------------------------------------------

    def parse_block(self) -> Block:
        open_tok = self.expect("{")
        stmts: list[Stmt] = []
        while not self.at("}"):
            if self.at_kind("eof"):
                self.fail("unexpected end of input inside block", open_tok.span)
            stmts.append(self.parse_stmt())
        close = self.next()
        return Block(stmts, span=open_tok.span.cover(close.span))

    def _block_or_stmt(self) -> Block:
        if self.at("{"):
            return self.parse_block()
        stmt = self.parse_stmt()
        return Block([stmt], span=stmt.span)

    def parse_stmt(self) -> Stmt:
        t = self.peek()

        if t.text == "if":
            self.next()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self._block_or_stmt()
            els = None
            if self.at("else"):
                self.next()
                els = self._block_or_stmt()
            end = els.span if els else then.span
            return IfStmt(cond, then, els, span=t.span.cover(end))

        if t.text == "while":
            self.next()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            body = self._block_or_stmt()
            return WhileStmt(cond, body, span=t.span.cover(body.span))

        if t.text == "for":
            self.next()
            self.expect("(")
            init = None if self.at(";") else self._parse_simple_stmt(semicolon=False)
            self.expect(";")
            cond = None if self.at(";") else self.parse_expr()
            self.expect(";")
            update = None if self.at(")") else self._parse_simple_stmt(semicolon=False)
            self.expect(")")
            body = self._block_or_stmt()
            return ForStmt(init, cond, update, body, span=t.span.cover(body.span))

        if t.text == "require":
            self.next()
            self.expect("(")
            cond = self.parse_expr()
            message = None
            if self.at(","):
                self.next()
                msg_tok = self.peek()
                if msg_tok.kind != "string":
                    self.fail("require message must be a string literal", msg_tok.span)
                self.next()
                message = msg_tok.text
            self.expect(")")
            semi = self.expect(";")
            return RequireStmt(cond, message, span=t.span.cover(semi.span))

        if t.text == "assert":
            self.next()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            semi = self.expect(";")
            return AssertStmt(cond, span=t.span.cover(semi.span))

        if t.text == "revert":
            self.next()
            message = None
            if self.at("("):
                self.next()
                if self.at_kind("string"):
                    message = self.next().text
                self.expect(")")
            semi = self.expect(";")
            return RevertStmt(message, span=t.span.cover(semi.span))

        if t.text == "return":
            self.next()
            value = None if self.at(";") else self.parse_expr()
            semi = self.expect(";")
            return ReturnStmt(value, span=t.span.cover(semi.span))

        if t.text == "emit":
            self.next()
            name = self.expect_ident("event name")
            args, _ = self._parse_call_args()
            semi = self.expect(";")
            return EmitStmt(name.text, args, span=t.span.cover(semi.span))

        if t.kind == "ident" and t.text == "_" and self.at(";", 1):
            self.next()
            semi = self.next()
            return PlaceholderStmt(span=t.span.cover(semi.span))

        stmt = self._parse_simple_stmt(semicolon=True)
        return stmt

    def _parse_simple_stmt(self, semicolon: bool) -> Stmt:
        t = self.peek()

        # Tuple-destructuring declaration: (bool ok, ) = <ext call>;
        if self.at("(") and self._tuple_decl_ahead():
            return self._parse_tuple_decl(semicolon)

        if self.looks_like_type():
            start = self.peek().span
            typ = self.parse_type()
            self.skip_data_location()
            name = self.expect_ident("variable name")
            init = None
            if self.at("="):
                self.next()
                init = self.parse_expr()
            end = init.span if init else name.span
            if semicolon:
                end = self.expect(";").span
            decl = VarDecl(name.text, typ, span=start.cover(name.span))
            return VarDeclStmt([decl], init, span=start.cover(end))

        expr = self.parse_expr()
        if self.peek().text in COMPOUND_ASSIGN and self.peek().kind == "op":
            op = self.next().text
            rhs = self.parse_expr()
            value = BinaryOp(COMPOUND_ASSIGN[op], expr, rhs, span=expr.span.cover(rhs.span))
            end = value.span
            if semicolon:
                end = self.expect(";").span
            return AssignStmt(expr, value, span=t.span.cover(end))
        if self.at("="):
            self.next()
            value = self.parse_expr()
            end = value.span
            if semicolon:
                end = self.expect(";").span
            return AssignStmt(expr, value, span=t.span.cover(end))
        end = expr.span
        if semicolon:
            end = self.expect(";").span
        return ExprStmt(expr, span=t.span.cover(end))

    def _tuple_decl_ahead(self) -> bool:
        # `(` type ident [, ...] `)` `=` distinguishes a destructuring
        # declaration from a parenthesized expression.
        if not self.at("("):
            return False
        j = 1
        t = self.peek(j)
        if t.kind != "ident":
            return False
        name = TYPE_ALIASES.get(t.text, t.text)
        return name in ELEM_TYPES and self.peek(j + 1).kind == "ident"

    def _parse_tuple_decl(self, semicolon: bool) -> Stmt:
        open_tok = self.expect("(")
        decls: list[VarDecl | None] = []
        while True:
            if self.at(")"):
                break
            if self.at(","):
                self.next()
                decls.append(None)
                continue
            typ = self.parse_type()
            self.skip_data_location()
            name = self.expect_ident("variable name")
            decls.append(VarDecl(name.text, typ, span=typ.span.cover(name.span)))
            if self.at(","):
                self.next()
                if self.at(")"):
                    decls.append(None)
        self.expect(")")
        self.expect("=")
        init = self.parse_expr()
        end = init.span
        if semicolon:
            end = self.expect(";").span
        return VarDeclStmt(decls, init, span=open_tok.span.cover(end))

    # -- contract declarations -------------------------------------------------

    def parse_source_unit(self) -> SourceUnit:
        start = self.peek().span
        pragmas: list[str] = []
        contracts: list[ContractDef] = []
        while not self.at_kind("eof"):
            t = self.peek()
            if t.text == "pragma":
                self.next()
                first = self.peek().span
                while not self.at(";"):
                    if self.at_kind("eof"):
                        self.fail("unterminated pragma", t.span)
                    self.next()
                last = self.next().span  # the semicolon
                pragmas.append(self.data[first.start : last.start].decode("utf-8").strip())
            elif t.text == "contract":
                contracts.append(self.parse_contract_def())
            elif t.text in ("library", "interface", "abstract"):
                self.unsupported(f"'{t.text}' declarations are not supported", t.span)
            elif t.text == "import":
                self.unsupported("imports are not supported", t.span)
            else:
                self.fail(f"expected a contract declaration, found '{t.text}'", t.span)
        end = self.peek().span
        names = set()
        for c in contracts:
            if c.name in names:
                raise CompileError(
                    [error(SYNTAX_ERROR, f"duplicate contract name '{c.name}'", c.span)]
                )
            names.add(c.name)
        return SourceUnit(pragmas, contracts, span=start.cover(end))

    def parse_contract_def(self) -> ContractDef:
        kw = self.expect("contract")
        name = self.expect_ident("contract name")
        bases: list[str] = []
        if self.at("is"):
            self.next()
            bases.append(self.expect_ident("base contract name").text)
            while self.at(","):
                self.next()
                bases.append(self.expect_ident("base contract name").text)
        self.expect("{")
        contract = ContractDef(name.text, bases, span=kw.span)
        while not self.at("}"):
            if self.at_kind("eof"):
                self.fail("unexpected end of input inside contract", kw.span)
            self._parse_contract_member(contract)
        close = self.next()
        contract.span = kw.span.cover(close.span)
        self._check_member_uniqueness(contract)
        return contract

    def _check_member_uniqueness(self, contract: ContractDef) -> None:
        seen: dict[str, Span] = {}
        for sv in contract.stateVars:
            if sv.name in seen:
                raise CompileError(
                    [error(SYNTAX_ERROR, f"duplicate state variable '{sv.name}'", sv.span)]
                )
            seen[sv.name] = sv.span
        fseen: set[str] = set()
        for fn in contract.functions:
            if fn.isConstructor:
                continue
            if fn.name in fseen:
                self.unsupported(
                    f"function overloading is not supported ('{fn.name}' declared twice)", fn.span
                )
            fseen.add(fn.name)

    def _parse_contract_member(self, contract: ContractDef) -> None:
        t = self.peek()
        if t.text == "struct":
            self.next()
            name = self.expect_ident("struct name")
            self.expect("{")
            fields: list[VarDecl] = []
            while not self.at("}"):
                typ = self.parse_type()
                fname = self.expect_ident("field name")
                semi = self.expect(";")
                fields.append(VarDecl(fname.text, typ, span=typ.span.cover(semi.span)))
            close = self.next()
            contract.structs.append(StructDef(name.text, fields, span=t.span.cover(close.span)))
            return
        if t.text == "event":
            self.next()
            name = self.expect_ident("event name")
            self.expect("(")
            params: list[VarDecl] = []
            while not self.at(")"):
                typ = self.parse_type()
                if self.peek().text == "indexed":
                    self.next()
                pname = self.expect_ident("parameter name") if self.at_kind("ident") else None
                params.append(VarDecl(pname.text if pname else "", typ, span=typ.span))
                if self.at(","):
                    self.next()
            self.expect(")")
            semi = self.expect(";")
            contract.events.append(EventDef(name.text, params, span=t.span.cover(semi.span)))
            return
        if t.text == "modifier":
            self.next()
            name = self.expect_ident("modifier name")
            params: list[VarDecl] = []
            if self.at("("):
                params = self._parse_param_list()
            body = self.parse_block()
            contract.modifiers.append(
                ModifierDef(name.text, params, body, span=t.span.cover(body.span))
            )
            return
        if t.text in ("function", "constructor"):
            contract.functions.append(self._parse_function())
            return
        if t.text in ("using", "enum", "fallback", "receive"):
            self.unsupported(f"'{t.text}' is not supported", t.span)
        # State variable.
        typ = self.parse_type()
        visibility = "internal"
        while self.peek().text in VISIBILITIES or self.peek().text == "constant":
            word = self.next().text
            if word == "constant":
                self.unsupported("constant state variables are not supported", t.span)
            visibility = word
        name = self.expect_ident("state variable name")
        init = None
        if self.at("="):
            self.next()
            init = self.parse_expr()
        semi = self.expect(";")
        contract.stateVars.append(
            StateVarDef(name.text, typ, visibility, init, span=t.span.cover(semi.span))
        )

    def _parse_param_list(self) -> list[VarDecl]:
        self.expect("(")
        params: list[VarDecl] = []
        while not self.at(")"):
            typ = self.parse_type()
            self.skip_data_location()
            name = self.expect_ident("parameter name")
            params.append(VarDecl(name.text, typ, span=typ.span.cover(name.span)))
            if self.at(","):
                self.next()
        self.expect(")")
        return params

    def _parse_function(self) -> FunctionDef:
        kw = self.next()  # function | constructor
        is_ctor = kw.text == "constructor"
        if is_ctor:
            name = "constructor"
        else:
            name = self.expect_ident("function name").text
        params = self._parse_param_list()
        if is_ctor and params:
            self.unsupported("constructor parameters are not supported", kw.span)
        visibility = "public"
        mutability = None
        is_virtual = False
        is_override = False
        modifiers: list[ModifierInvocation] = []
        returns: list[VarDecl] = []
        while True:
            t = self.peek()
            if t.text in VISIBILITIES:
                visibility = self.next().text
            elif t.text in MUTABILITIES:
                mutability = self.next().text
            elif t.text == "virtual":
                is_virtual = True
                self.next()
            elif t.text == "override":
                is_override = True
                self.next()
                if self.at("("):
                    while not self.at(")"):
                        self.next()
                    self.next()
            elif t.text == "returns":
                self.next()
                self.expect("(")
                while not self.at(")"):
                    typ = self.parse_type()
                    self.skip_data_location()
                    rname = ""
                    if self.at_kind("ident"):
                        rname = self.next().text
                    returns.append(VarDecl(rname, typ, span=typ.span))
                    if self.at(","):
                        self.next()
                self.expect(")")
            elif t.kind == "ident":
                mname = self.next()
                args: list[Expr] = []
                if self.at("("):
                    args, _ = self._parse_call_args()
                modifiers.append(ModifierInvocation(mname.text, args, span=mname.span))
            else:
                break
        body = None
        if self.at("{"):
            body = self.parse_block()
        else:
            self.expect(";", "after bodyless function")
        end = body.span if body else self.peek(-1).span
        return FunctionDef(
            name,
            params,
            returns,
            visibility,
            mutability,
            modifiers,
            is_virtual,
            is_override,
            is_ctor,
            body,
            span=kw.span.cover(end),
        )

    # -- specification units -----------------------------------------------------

    def parse_spec_units(self) -> list:
        units = []
        while not self.at_kind("eof"):
            t = self.peek()
            if t.text == "invariant":
                units.append(self._parse_invariant())
            elif t.text == "function":
                units.append(self._parse_function_spec())
            elif t.text == "rule":
                units.append(self._parse_rule())
            else:
                self.fail(
                    f"expected 'invariant', 'function' or 'rule', found '{t.text or 'end of input'}'",
                    t.span,
                )
        return units

    def _parse_expr_block(self, context: str) -> list[Expr]:
        """A `{ expr; expr; ... }` block permitting only expression statements."""
        self.expect("{")
        exprs: list[Expr] = []
        while not self.at("}"):
            if self.at_kind("eof"):
                self.fail(f"unexpected end of input inside {context} block")
            stmt = self.parse_stmt()
            if isinstance(stmt, ExprStmt):
                exprs.append(stmt.expr)
            else:
                raise CompileError(
                    [
                        error(
                            STATEMENT_FORM,
                            f"only expression statements are allowed in a {context} block",
                            stmt.span,
                        )
                    ]
                )
        self.next()
        return exprs

    def _parse_invariant(self) -> InvariantDecl:
        kw = self.expect("invariant")
        name = self.expect_ident("invariant name")
        exprs = self._parse_expr_block("invariant")
        return InvariantDecl(name.text, exprs, span=kw.span.cover(self.peek(-1).span))

    def _parse_function_spec(self) -> FunctionSpec:
        kw = self.expect("function")
        name = self.expect_ident("function name")
        if self.at("("):
            # An optional parameter list is tolerated and discarded; names
            # are resolved against the contract's own declaration.
            depth = 0
            while True:
                t = self.next()
                if t.text == "(":
                    depth += 1
                elif t.text == ")":
                    depth -= 1
                    if depth == 0:
                        break
                elif t.kind == "eof":
                    self.fail("unterminated parameter list", kw.span)
        self.expect("{")
        pre: list[Expr] = []
        post: list[Expr] = []
        if self.at("precondition"):
            self.next()
            pre = self._parse_expr_block("precondition")
        if self.at("postcondition"):
            self.next()
            post = self._parse_expr_block("postcondition")
        close = self.expect("}")
        if not pre and not post:
            self.fail("function spec needs a precondition or postcondition block", kw.span)
        return FunctionSpec(name.text, pre, post, span=kw.span.cover(close.span))

    def _parse_rule(self) -> RuleDecl:
        kw = self.expect("rule")
        name = self.expect_ident("rule name")
        self.expect("(")
        self.expect(")")
        self.expect("{")
        body: list[Stmt] = []
        while not self.at("}"):
            if self.at_kind("eof"):
                self.fail("unexpected end of input inside rule", kw.span)
            body.append(self._parse_rule_stmt())
        close = self.next()
        return RuleDecl(name.text, body, span=kw.span.cover(close.span))

    def _parse_rule_stmt(self) -> Stmt:
        t = self.peek()
        if t.text == "assume":
            self.next()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            semi = self.expect(";")
            return AssumeStmt(cond, span=t.span.cover(semi.span))
        if t.text == "assert":
            self.next()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            semi = self.expect(";")
            return SpecAssertStmt(cond, span=t.span.cover(semi.span))

        stmt = self._parse_simple_stmt(semicolon=True)
        if isinstance(stmt, VarDeclStmt):
            if len(stmt.decls) != 1 or stmt.decls[0] is None:
                raise CompileError(
                    [error(STATEMENT_FORM, "tuple declarations are not allowed in rules", stmt.span)]
                )
            d = stmt.decls[0]
            return SpecLetStmt(d.name, d.typ, stmt.init, span=stmt.span)
        if isinstance(stmt, AssignStmt):
            if isinstance(stmt.target, Ident) and stmt.target.name.startswith("$"):
                return SpecLetStmt(stmt.target.name, None, stmt.value, span=stmt.span)
            raise CompileError(
                [
                    error(
                        STATEMENT_FORM,
                        "rules may bind `$`-variables but not assign to other names",
                        stmt.span,
                    )
                ]
            )
        if isinstance(stmt, ExprStmt):
            if isinstance(stmt.expr, CallExpr):
                return SpecCallStmt(stmt.expr, span=stmt.span)
            raise CompileError(
                [
                    error(
                        STATEMENT_FORM,
                        "rule statements must be assume, assert, a binding, or a function call",
                        stmt.span,
                    )
                ]
            )
        raise CompileError(
            [
                error(
                    STATEMENT_FORM,
                    "rule statements must be assume, assert, a binding, or a function call",
                    stmt.span,
                )
            ]
        )


def parse_contract(source: str, file: str = "<contract>") -> SourceUnit:
    """Parse MiniSol source into a SourceUnit; raises CompileError on failure."""
    return _Parser(source, file).parse_source_unit()


def parse_spec(source: str, file: str = "<spec>") -> list:
    """Parse PSL source into a list of SpecUnits; raises CompileError on failure."""
    return _Parser(source, file).parse_spec_units()
