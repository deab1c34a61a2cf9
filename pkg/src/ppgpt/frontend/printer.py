"""Deterministic pretty printer; its output reparses to an equal AST."""

from __future__ import annotations

from . import ast as A

INDENT = "    "

# Mirror of the parser's precedence tiers, used to parenthesize minimally.
_PREC = {}
for tier, ops in enumerate([["||"], ["&&"], ["==", "!="], ["<", ">", "<=", ">="], ["+", "-"], ["*", "/", "%"]]):
    for op in ops:
        _PREC[op] = tier
_UNARY_PREC = 6


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")


def print_type(t: A.TypeName) -> str:
    if isinstance(t, A.ElemTypeName):
        return t.name
    if isinstance(t, A.MappingTypeName):
        return f"mapping({print_type(t.key)} => {print_type(t.value)})"
    if isinstance(t, A.ArrayTypeName):
        return f"{print_type(t.elem)}[]"
    if isinstance(t, A.UserTypeName):
        return t.name
    raise TypeError(f"unknown type node {t!r}")


def print_expr(e: A.Expr, parent_prec: int = -1) -> str:
    if isinstance(e, A.NumberLit):
        return e.raw if e.raw else str(e.value)
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.StringLit):
        return f'"{_escape(e.value)}"'
    if isinstance(e, A.Ident):
        return e.name
    if isinstance(e, A.OldExpr):
        return f"old({print_expr(e.var)})"
    if isinstance(e, A.BinaryOp):
        prec = _PREC[e.op]
        left = print_expr(e.left, prec - 1)
        right = print_expr(e.right, prec)
        text = f"{left} {e.op} {right}"
        if prec <= parent_prec:
            return f"({text})"
        return text
    if isinstance(e, A.UnaryOp):
        inner = print_expr(e.operand, _UNARY_PREC)
        return f"{e.op}{inner}"
    if isinstance(e, A.IndexAccess):
        return f"{print_expr(e.base, _UNARY_PREC)}[{print_expr(e.index)}]"
    if isinstance(e, A.MemberAccess):
        return f"{print_expr(e.base, _UNARY_PREC)}.{e.member}"
    if isinstance(e, A.CallExpr):
        args = ", ".join(print_expr(a) for a in e.args)
        return f"{print_expr(e.callee, _UNARY_PREC)}({args})"
    if isinstance(e, A.ExtCall):
        target = print_expr(e.target, _UNARY_PREC)
        opt = f"{{value: {print_expr(e.value)}}}" if e.value is not None else ""
        payload = print_expr(e.payload) if e.payload is not None else ""
        return f"{target}.call{opt}({payload})"
    raise TypeError(f"unknown expression node {e!r}")


def _print_stmt(s: A.Stmt, out: list[str], depth: int) -> None:
    pad = INDENT * depth
    if isinstance(s, A.VarDeclStmt):
        if len(s.decls) == 1 and s.decls[0] is not None:
            d = s.decls[0]
            init = f" = {print_expr(s.init)}" if s.init is not None else ""
            out.append(f"{pad}{print_type(d.typ)} {d.name}{init};")
        else:
            parts = []
            for d in s.decls:
                parts.append("" if d is None else f"{print_type(d.typ)} {d.name}")
            out.append(f"{pad}({', '.join(parts).rstrip()}) = {print_expr(s.init)};")
    elif isinstance(s, A.AssignStmt):
        out.append(f"{pad}{print_expr(s.target)} = {print_expr(s.value)};")
    elif isinstance(s, A.IfStmt):
        out.append(f"{pad}if ({print_expr(s.cond)}) {{")
        for sub in s.then.stmts:
            _print_stmt(sub, out, depth + 1)
        if s.els is not None:
            out.append(f"{pad}}} else {{")
            for sub in s.els.stmts:
                _print_stmt(sub, out, depth + 1)
        out.append(f"{pad}}}")
    elif isinstance(s, A.WhileStmt):
        out.append(f"{pad}while ({print_expr(s.cond)}) {{")
        for sub in s.body.stmts:
            _print_stmt(sub, out, depth + 1)
        out.append(f"{pad}}}")
    elif isinstance(s, A.ForStmt):
        init = _inline_stmt(s.init) if s.init is not None else ""
        cond = print_expr(s.cond) if s.cond is not None else ""
        update = _inline_stmt(s.update) if s.update is not None else ""
        out.append(f"{pad}for ({init}; {cond}; {update}) {{")
        for sub in s.body.stmts:
            _print_stmt(sub, out, depth + 1)
        out.append(f"{pad}}}")
    elif isinstance(s, A.RequireStmt):
        msg = f', "{_escape(s.message)}"' if s.message is not None else ""
        out.append(f"{pad}require({print_expr(s.cond)}{msg});")
    elif isinstance(s, A.AssertStmt):
        out.append(f"{pad}assert({print_expr(s.cond)});")
    elif isinstance(s, A.RevertStmt):
        msg = f'("{_escape(s.message)}")' if s.message is not None else "()"
        out.append(f"{pad}revert{msg};")
    elif isinstance(s, A.ReturnStmt):
        value = f" {print_expr(s.value)}" if s.value is not None else ""
        out.append(f"{pad}return{value};")
    elif isinstance(s, A.EmitStmt):
        args = ", ".join(print_expr(a) for a in s.args)
        out.append(f"{pad}emit {s.event}({args});")
    elif isinstance(s, A.ExprStmt):
        out.append(f"{pad}{print_expr(s.expr)};")
    elif isinstance(s, A.PlaceholderStmt):
        out.append(f"{pad}_;")
    elif isinstance(s, A.AssumeStmt):
        out.append(f"{pad}assume({print_expr(s.cond)});")
    elif isinstance(s, A.SpecAssertStmt):
        out.append(f"{pad}assert({print_expr(s.cond)});")
    elif isinstance(s, A.SpecLetStmt):
        typ = f"{print_type(s.typ)} " if s.typ is not None else ""
        init = f" = {print_expr(s.init)}" if s.init is not None else ""
        out.append(f"{pad}{typ}{s.name}{init};")
    elif isinstance(s, A.SpecCallStmt):
        out.append(f"{pad}{print_expr(s.call)};")
    else:
        raise TypeError(f"unknown statement node {s!r}")


def _inline_stmt(s: A.Stmt) -> str:
    buf: list[str] = []
    _print_stmt(s, buf, 0)
    assert len(buf) == 1, "for-header statements print on one line"
    return buf[0].rstrip(";")


def print_function(fn: A.FunctionDef, out: list[str], depth: int) -> None:
    pad = INDENT * depth
    params = ", ".join(f"{print_type(p.typ)} {p.name}" for p in fn.params)
    head = f"constructor({params})" if fn.isConstructor else f"function {fn.name}({params})"
    words = [head, fn.visibility]
    if fn.mutability:
        words.append(fn.mutability)
    if fn.isVirtual:
        words.append("virtual")
    if fn.isOverride:
        words.append("override")
    for m in fn.modifiers:
        if m.args:
            words.append(f"{m.name}({', '.join(print_expr(a) for a in m.args)})")
        else:
            words.append(m.name)
    if fn.returns:
        rets = ", ".join(
            print_type(r.typ) + (f" {r.name}" if r.name else "") for r in fn.returns
        )
        words.append(f"returns ({rets})")
    if fn.body is None:
        out.append(pad + " ".join(words) + ";")
        return
    out.append(pad + " ".join(words) + " {")
    for s in fn.body.stmts:
        _print_stmt(s, out, depth + 1)
    out.append(pad + "}")


def print_contract(c: A.ContractDef, out: list[str]) -> None:
    bases = f" is {', '.join(c.bases)}" if c.bases else ""
    out.append(f"contract {c.name}{bases} {{")
    for st in c.structs:
        out.append(f"{INDENT}struct {st.name} {{")
        for f in st.fields:
            out.append(f"{INDENT * 2}{print_type(f.typ)} {f.name};")
        out.append(f"{INDENT}}}")
    for ev in c.events:
        params = ", ".join(
            print_type(p.typ) + (f" {p.name}" if p.name else "") for p in ev.params
        )
        out.append(f"{INDENT}event {ev.name}({params});")
    for sv in c.stateVars:
        init = f" = {print_expr(sv.init)}" if sv.init is not None else ""
        out.append(f"{INDENT}{print_type(sv.typ)} {sv.visibility} {sv.name}{init};")
    for m in c.modifiers:
        params = ", ".join(f"{print_type(p.typ)} {p.name}" for p in m.params)
        out.append(f"{INDENT}modifier {m.name}({params}) {{")
        for s in m.body.stmts:
            _print_stmt(s, out, 2)
        out.append(f"{INDENT}}}")
    for fn in c.functions:
        print_function(fn, out, 1)
    out.append("}")


def print_source_unit(unit: A.SourceUnit) -> str:
    out: list[str] = []
    for p in unit.pragmas:
        out.append(f"pragma {p};")
    for c in unit.contracts:
        if out:
            out.append("")
        print_contract(c, out)
    return "\n".join(out) + "\n"


def print_spec_unit(u) -> str:
    out: list[str] = []
    if isinstance(u, A.InvariantDecl):
        out.append(f"invariant {u.name} {{")
        for e in u.exprs:
            out.append(f"{INDENT}{print_expr(e)};")
        out.append("}")
    elif isinstance(u, A.FunctionSpec):
        out.append(f"function {u.funcName} {{")
        if u.pre:
            out.append(f"{INDENT}precondition {{")
            for e in u.pre:
                out.append(f"{INDENT * 2}{print_expr(e)};")
            out.append(f"{INDENT}}}")
        if u.post:
            out.append(f"{INDENT}postcondition {{")
            for e in u.post:
                out.append(f"{INDENT * 2}{print_expr(e)};")
            out.append(f"{INDENT}}}")
        out.append("}")
    elif isinstance(u, A.RuleDecl):
        out.append(f"rule {u.name}() {{")
        for s in u.body:
            _print_stmt(s, out, 1)
        out.append("}")
    else:
        raise TypeError(f"unknown spec unit {u!r}")
    return "\n".join(out) + "\n"


def print_spec_units(units: list) -> str:
    return "\n".join(print_spec_unit(u) for u in units)
