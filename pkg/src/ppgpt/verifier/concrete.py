"""Concrete reference interpreter for MiniSol and property expressions.

Executes prepared function bodies on plain Python values with the same
checked-arithmetic, bounds-checking, and revert semantics the symbolic
executor models. Used to replay counterexample traces (every Violated
verdict must survive replay) and as the ground-truth engine for the
small-domain equivalence tests.
"""

from __future__ import annotations

import hashlib
from typing import Optional

from ..frontend import ast as A
from ..frontend.resolver import ResolvedProgram
from ..frontend.types import ArrayType, BoolType, IntType, MappingType, StructType
from ..solver_bridge import ArrayModel, _euclid_div, _euclid_mod
from ..symexec.executor import layout_slots, scaled_range

__all__ = ["ConcreteInterp", "Diverged", "Revert"]

_LOOP_CAP = 4096
_CALL_CAP = 64


class Revert(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class Diverged(Exception):
    """The interpreter cannot faithfully follow this execution (resource
    caps); callers must treat the replay as failed, never as a verdict."""


class _Return(Exception):
    def __init__(self, value):
        self.value = value


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _trunc_mod(a: int, b: int) -> int:
    return a - b * _trunc_div(a, b)


class ConcreteInterp:
    def __init__(self, program: ResolvedProgram, contract: Optional[str] = None, word_bits: int = 256):
        self.program = program
        self.info = program.contract(contract)
        self.bits = word_bits
        self.slot_kind: dict[str, tuple] = {}
        self.var_slots: dict[str, list[str]] = {}
        for name, sv in self.info.state_vars.items():
            slots = []
            for slot, _sort, kind in layout_slots(self.info, name, sv.sem):
                self.slot_kind[slot] = kind
                slots.append(slot)
            self.var_slots[name] = slots

    # -- stores ---------------------------------------------------------------

    def zero_value(self, ty):
        if isinstance(ty, BoolType):
            return False
        if isinstance(ty, StructType):
            st = self.info.structs[ty.name]
            return {f.name: self.zero_value(f.sem) for f in st.fields}
        return 0

    def zero_store(self) -> dict:
        store = {}
        for slot, kind in self.slot_kind.items():
            if kind[0] == "map":
                store[slot] = ArrayModel(self.zero_value(kind[1]), {})
            elif kind[0] == "len":
                store[slot] = 0
            else:
                store[slot] = self.zero_value(kind[1])
        return store

    def deploy(self, env: Optional[dict] = None) -> dict:
        """Initializers then constructors, base-most first, on a zero store."""
        store = self.zero_store()
        env = env or {"sender": 0, "value": 0, "timestamp": 0}
        for name, sv in self.info.state_vars.items():
            if sv.init is None:
                continue
            v = self._eval(sv.init, store, {}, env, 0)
            self._write_var(store, name, v)
        for ctor in self.info.constructors:
            store = self.run_function(store, ctor, [], env)
        return store

    def _write_var(self, store, name, value):
        ty = self.info.state_vars[name].sem
        if isinstance(ty, StructType):
            for f, v in value.items():
                store[f"{name}.{f}"] = v
        else:
            store[name] = value

    # -- transactions -----------------------------------------------------------

    def run_function(self, store: dict, func, args: list, env: dict) -> dict:
        """Run one transaction. Returns the new store; raises Revert."""
        if isinstance(func, str):
            func = self.info.functions[func]
        if func.mutability != "payable" and env.get("value", 0) != 0:
            raise Revert("value sent to non-payable function")
        if len(args) != len(func.params):
            raise Revert("argument arity mismatch")
        work = dict(store)
        locals_ = {p.name: v for p, v in zip(func.params, args)}
        try:
            self._exec_block(func.body.stmts if func.body else [], work, locals_, env, 0)
        except _Return:
            pass
        return work

    def call_value(self, store: dict, func, args: list, env: dict):
        """Run a function and return (new_store, return_value)."""
        if isinstance(func, str):
            func = self.info.functions[func]
        work = dict(store)
        locals_ = {p.name: v for p, v in zip(func.params, args)}
        ret = None
        try:
            self._exec_block(func.body.stmts if func.body else [], work, locals_, env, 0)
        except _Return as r:
            ret = r.value
        if ret is None and func.returns:
            ret = self.zero_value(func.returns[0].sem)
        return work, ret

    # -- statements ---------------------------------------------------------------

    def _exec_block(self, stmts, store, locals_, env, depth):
        for stmt in stmts:
            self._exec_stmt(stmt, store, locals_, env, depth)

    def _exec_stmt(self, stmt, store, locals_, env, depth):
        if isinstance(stmt, A.VarDeclStmt):
            if isinstance(stmt.init, A.ExtCall):
                if stmt.init.value is not None:
                    self._eval(stmt.init.value, store, locals_, env, depth)
                values = [True, 0]
                for decl, v in zip(stmt.decls, values):
                    if decl is not None:
                        locals_[decl.name] = v
                return
            decl = stmt.decls[0]
            if stmt.init is None:
                locals_[decl.name] = self.zero_value(decl.sem)
            else:
                v = self._eval(stmt.init, store, locals_, env, depth)
                locals_[decl.name] = dict(v) if isinstance(v, dict) else v
            return
        if isinstance(stmt, A.AssignStmt):
            v = self._eval(stmt.value, store, locals_, env, depth)
            self._assign(stmt.target, v, store, locals_, env, depth)
            return
        if isinstance(stmt, A.IfStmt):
            if self._eval(stmt.cond, store, locals_, env, depth):
                self._exec_block(stmt.then.stmts, store, locals_, env, depth)
            elif stmt.els is not None:
                self._exec_block(stmt.els.stmts, store, locals_, env, depth)
            return
        if isinstance(stmt, A.WhileStmt):
            n = 0
            while self._eval(stmt.cond, store, locals_, env, depth):
                self._exec_block(stmt.body.stmts, store, locals_, env, depth)
                n += 1
                if n > _LOOP_CAP:
                    raise Diverged("loop iteration cap")
            return
        if isinstance(stmt, A.ForStmt):
            if stmt.init is not None:
                self._exec_stmt(stmt.init, store, locals_, env, depth)
            n = 0
            while stmt.cond is None or self._eval(stmt.cond, store, locals_, env, depth):
                self._exec_block(stmt.body.stmts, store, locals_, env, depth)
                if stmt.update is not None:
                    self._exec_stmt(stmt.update, store, locals_, env, depth)
                n += 1
                if n > _LOOP_CAP:
                    raise Diverged("loop iteration cap")
            return
        if isinstance(stmt, A.RequireStmt):
            if not self._eval(stmt.cond, store, locals_, env, depth):
                raise Revert(f"require: {stmt.message}" if stmt.message else "require")
            return
        if isinstance(stmt, A.AssertStmt):
            if not self._eval(stmt.cond, store, locals_, env, depth):
                raise Revert("assert")
            return
        if isinstance(stmt, A.RevertStmt):
            raise Revert(f"revert: {stmt.message}" if stmt.message else "revert")
        if isinstance(stmt, A.ReturnStmt):
            value = None
            if stmt.value is not None:
                value = self._eval(stmt.value, store, locals_, env, depth)
            raise _Return(value)
        if isinstance(stmt, A.EmitStmt):
            for a in stmt.args:
                self._eval(a, store, locals_, env, depth)
            return
        if isinstance(stmt, A.ExprStmt):
            e = stmt.expr
            if isinstance(e, A.ExtCall):
                if e.value is not None:
                    self._eval(e.value, store, locals_, env, depth)
                self._eval(e.target, store, locals_, env, depth)
                return
            if isinstance(e, A.CallExpr) and e.binding == ("push",):
                arrname = e.callee.base.name
                v = self._eval(e.args[0], store, locals_, env, depth)
                ln = store[f"{arrname}$len"]
                store[f"{arrname}$data"] = store[f"{arrname}$data"].set(ln, v)
                store[f"{arrname}$len"] = ln + 1
                return
            self._eval(e, store, locals_, env, depth)
            return
        if isinstance(stmt, A.PlaceholderStmt):
            return
        raise Diverged(f"statement {type(stmt).__name__}")

    def _assign(self, target, value, store, locals_, env, depth):
        if isinstance(target, A.Ident):
            kind, name = target.binding
            if kind in ("local", "rulevar"):
                locals_[name] = dict(value) if isinstance(value, dict) else value
            else:
                self._write_var(store, name, value)
            return
        if isinstance(target, A.IndexAccess):
            base = target.base
            name = base.name
            ty = self.info.state_vars[name].sem
            k = self._eval(target.index, store, locals_, env, depth)
            if isinstance(ty, MappingType):
                if isinstance(ty.value, StructType):
                    for f, v in value.items():
                        slot = f"{name}.{f}"
                        store[slot] = store[slot].set(k, v)
                else:
                    store[name] = store[name].set(k, value)
                return
            if not (0 <= k < store[f"{name}$len"]):
                raise Revert("index out of bounds")
            store[f"{name}$data"] = store[f"{name}$data"].set(k, value)
            return
        if isinstance(target, A.MemberAccess):
            fld = target.member
            base = target.base
            if isinstance(base, A.Ident):
                kind, name = base.binding
                if kind in ("local", "rulevar"):
                    sv = dict(locals_[name])
                    sv[fld] = value
                    locals_[name] = sv
                else:
                    store[f"{name}.{fld}"] = value
                return
            if isinstance(base, A.IndexAccess):
                name = base.base.name
                k = self._eval(base.index, store, locals_, env, depth)
                slot = f"{name}.{fld}"
                store[slot] = store[slot].set(k, value)
                return
        raise Diverged("assignment target")

    # -- expressions ------------------------------------------------------------

    def _check(self, v: int, ty) -> int:
        lo, hi = scaled_range(ty, self.bits)
        if not (lo <= v <= hi):
            raise Revert("arithmetic overflow")
        return v

    def _eval(self, e, store, locals_, env, depth):
        if isinstance(e, A.NumberLit):
            return e.value
        if isinstance(e, A.BoolLit):
            return e.value
        if isinstance(e, A.StringLit):
            return e.code if e.code is not None else self.program.string_codes[e.value]
        if isinstance(e, A.Ident):
            kind, name = e.binding
            if kind in ("local", "rulevar"):
                return locals_[name]
            return self._read_var(store, name)
        if isinstance(e, A.MemberAccess):
            b = e.binding
            if b[0] == "env":
                return env[b[1]]
            if b[0] == "length":
                return store[f"{e.base.name}$len"]
            if b[0] == "field":
                return self._eval(e.base, store, locals_, env, depth)[e.member]
            raise Diverged(f"member {e.member}")
        if isinstance(e, A.IndexAccess):
            name = e.base.name
            ty = self.info.state_vars[name].sem
            k = self._eval(e.index, store, locals_, env, depth)
            if isinstance(ty, MappingType):
                if isinstance(ty.value, StructType):
                    sdef = self.info.structs[ty.value.name]
                    return {f.name: store[f"{name}.{f.name}"].get(k) for f in sdef.fields}
                return store[name].get(k)
            if not (0 <= k < store[f"{name}$len"]):
                raise Revert("index out of bounds")
            return store[f"{name}$data"].get(k)
        if isinstance(e, A.UnaryOp):
            if e.op == "!":
                return not self._eval(e.operand, store, locals_, env, depth)
            v = self._eval(e.operand, store, locals_, env, depth)
            return self._check(-v, e.ty)
        if isinstance(e, A.BinaryOp):
            op = e.op
            if op == "&&":
                return self._eval(e.left, store, locals_, env, depth) and self._eval(
                    e.right, store, locals_, env, depth
                )
            if op == "||":
                return self._eval(e.left, store, locals_, env, depth) or self._eval(
                    e.right, store, locals_, env, depth
                )
            a = self._eval(e.left, store, locals_, env, depth)
            b = self._eval(e.right, store, locals_, env, depth)
            if op == "+":
                return self._check(a + b, e.ty)
            if op == "-":
                return self._check(a - b, e.ty)
            if op == "*":
                return self._check(a * b, e.ty)
            if op == "/":
                if b == 0:
                    raise Revert("division by zero")
                if isinstance(e.ty, IntType):
                    return self._check(_trunc_div(a, b), e.ty)
                return a // b
            if op == "%":
                if b == 0:
                    raise Revert("division by zero")
                if isinstance(e.ty, IntType):
                    return _trunc_mod(a, b)
                return a % b
            return {
                "==": a == b,
                "!=": a != b,
                "<": a < b,
                "<=": a <= b,
                ">": a > b,
                ">=": a >= b,
            }[op]
        if isinstance(e, A.CallExpr):
            b = e.binding
            if b[0] == "builtin":
                args = [self._eval(a, store, locals_, env, depth) for a in e.args]
                return self.sha3(args)
            if b[0] == "cast":
                return self._eval(e.args[0], store, locals_, env, depth)
            if b[0] == "struct_new":
                sdef = self.info.structs[b[1]]
                vals = [self._eval(a, store, locals_, env, depth) for a in e.args]
                return {f.name: v for f, v in zip(sdef.fields, vals)}
            if b[0] in ("internal", "super"):
                if depth >= _CALL_CAP:
                    raise Diverged("call depth cap")
                if b[0] == "internal":
                    fdef = self.info.functions[b[1]]
                else:
                    t = self.program.resolve_super(self.info.name, b[1], b[2])
                    if t is None:
                        raise Diverged("unresolved super call")
                    fdef = t[1]
                args = [self._eval(a, store, locals_, env, depth) for a in e.args]
                inner = {p.name: v for p, v in zip(fdef.params, args)}
                ret = None
                try:
                    self._exec_block(
                        fdef.body.stmts if fdef.body else [], store, inner, env, depth + 1
                    )
                except _Return as r:
                    ret = r.value
                if ret is None and fdef.returns:
                    ret = self.zero_value(fdef.returns[0].sem)
                return ret
            raise Diverged(f"call binding {b[0]}")
        if isinstance(e, A.ExtCall):
            if e.value is not None:
                self._eval(e.value, store, locals_, env, depth)
            return (True, 0)
        raise Diverged(f"expression {type(e).__name__}")

    def _read_var(self, store, name):
        ty = self.info.state_vars[name].sem
        if isinstance(ty, StructType):
            st = self.info.structs[ty.name]
            return {f.name: store[f"{name}.{f.name}"] for f in st.fields}
        if isinstance(ty, (MappingType, ArrayType)):
            raise Diverged("container used as a value")
        return store[name]

    def sha3(self, args: list) -> int:
        data = b""
        for a in args:
            v = int(a)
            data += v.to_bytes(32, "big", signed=v < 0)
        h = int.from_bytes(hashlib.sha3_256(data).digest(), "big")
        return h % (1 << self.bits)

    # -- property expressions -----------------------------------------------------

    def eval_spec(
        self,
        expr,
        store: dict,
        old_store: Optional[dict] = None,
        params: Optional[dict] = None,
        env: Optional[dict] = None,
        rulevars: Optional[dict] = None,
    ):
        """Evaluate a property expression with mathematical (unbounded)
        integer arithmetic, mirroring the symbolic spec evaluator."""
        old_store = old_store if old_store is not None else store
        params = params or {}
        env = env or {"sender": 0, "value": 0, "timestamp": 0}
        rulevars = rulevars or {}

        def ev(e):
            if isinstance(e, A.NumberLit):
                return e.value
            if isinstance(e, A.BoolLit):
                return e.value
            if isinstance(e, A.StringLit):
                return e.code if e.code is not None else self.program.string_codes[e.value]
            if isinstance(e, A.OldExpr):
                return self._read_from(old_store, e.var.name)
            if isinstance(e, A.Ident):
                kind, name = e.binding
                if kind == "local":
                    return params[name]
                if kind == "rulevar":
                    return rulevars[name]
                return self._read_from(store, name)
            if isinstance(e, A.MemberAccess):
                b = e.binding
                if b[0] == "env":
                    return env[b[1]]
                if b[0] == "length":
                    return store[f"{e.base.name}$len"]
                if b[0] == "field":
                    return ev(e.base)[e.member]
                raise Diverged(f"member {e.member}")
            if isinstance(e, A.IndexAccess):
                base = e.base
                old_mode = isinstance(base, A.OldExpr)
                root = base.var if old_mode else base
                name = root.name
                src = old_store if old_mode else store
                ty = self.info.state_vars[name].sem
                k = ev(e.index)
                if isinstance(ty, MappingType):
                    if isinstance(ty.value, StructType):
                        sdef = self.info.structs[ty.value.name]
                        return {f.name: src[f"{name}.{f.name}"].get(k) for f in sdef.fields}
                    return src[name].get(k)
                return src[f"{name}$data"].get(k)
            if isinstance(e, A.UnaryOp):
                if e.op == "!":
                    return not ev(e.operand)
                return -ev(e.operand)
            if isinstance(e, A.BinaryOp):
                op = e.op
                if op == "&&":
                    return ev(e.left) and ev(e.right)
                if op == "||":
                    return ev(e.left) or ev(e.right)
                a, b = ev(e.left), ev(e.right)
                signed = isinstance(e.ty, IntType)
                if op == "+":
                    return a + b
                if op == "-":
                    return a - b
                if op == "*":
                    return a * b
                if op == "/":
                    if b == 0:
                        return 0
                    return _trunc_div(a, b) if signed else _euclid_div(a, b)
                if op == "%":
                    if b == 0:
                        return 0
                    return _trunc_mod(a, b) if signed else _euclid_mod(a, b)
                return {
                    "==": a == b,
                    "!=": a != b,
                    "<": a < b,
                    "<=": a <= b,
                    ">": a > b,
                    ">=": a >= b,
                }[op]
            if isinstance(e, A.CallExpr):
                b = e.binding
                if b[0] == "builtin":
                    return self.sha3([ev(a) for a in e.args])
                if b[0] == "cast":
                    return ev(e.args[0])
                if b[0] == "struct_new":
                    sdef = self.info.structs[b[1]]
                    vals = [ev(a) for a in e.args]
                    return {f.name: v for f, v in zip(sdef.fields, vals)}
                raise Diverged("function call inside a property expression")
            raise Diverged(f"expression {type(e).__name__}")

        return ev(expr)

    def _read_from(self, store, name):
        ty = self.info.state_vars[name].sem
        if isinstance(ty, StructType):
            st = self.info.structs[ty.name]
            return {f.name: store[f"{name}.{f.name}"] for f in st.fields}
        return store[name]
