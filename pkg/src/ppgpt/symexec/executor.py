"""Strongest-postcondition symbolic execution over MiniSol bodies.

Execution forks at every branch and at every arithmetic operation that can
revert under checked semantics, producing one PathOutcome per feasible
control path. Loops are unrolled to a fixed bound and cut off with a
truncation marker; internal calls are inlined to a fixed depth and then
overapproximated by havocking the callee's write footprint. All integral
source types run as unbounded SMT integers constrained by explicit range
facts, with the word size configurable so small-domain oracles can check
the engine exhaustively.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..frontend import ast as A
from ..frontend.diagnostics import Span
from ..frontend.resolver import ContractInfo, ResolvedProgram
from ..frontend.types import (
    ADDRESS,
    ArrayType,
    BoolType,
    IntType,
    MappingType,
    StructType,
    UIntType,
)
from .state import CallRecord, Env, Normal, Obligation, Reverted, StructVal, SymState
from .terms import (
    BOOL,
    INT,
    App,
    ConstArr,
    IntConst,
    Sym,
    Term,
    arr,
    mk_add,
    mk_and,
    mk_div,
    mk_eq,
    mk_ge,
    mk_gt,
    mk_int,
    mk_ite,
    mk_le,
    mk_lt,
    mk_mod,
    mk_mul,
    mk_not,
    mk_or,
    mk_select,
    mk_store,
    mk_sub,
    mk_tdiv,
    mk_tmod,
    FALSE,
    TRUE,
)

__all__ = [
    "ExecOptions",
    "ExecUnsupported",
    "init_state",
    "execute_function",
    "execute_rule_body",
    "execute_deployment",
    "eval_spec_expr",
    "layout_slots",
    "scaled_range",
]


@dataclass(frozen=True)
class ExecOptions:
    loop_bound: int = 5
    call_depth: int = 3
    word_bits: int = 256


DEFAULT_OPTIONS = ExecOptions()


class ExecUnsupported(Exception):
    """Raised when a body uses a construct the executor does not model."""


@dataclass
class _Cont:
    """A live continuation inside one function activation."""

    state: SymState
    returned: bool = False
    ret: object = None
    trunc: str = ""


def _term_sort(ty) -> object:
    return BOOL if isinstance(ty, BoolType) else INT


def scaled_range(ty, bits: int) -> Optional[tuple[int, int]]:
    """Value range of an integral type under the configured word size."""
    if isinstance(ty, BoolType):
        return None
    if isinstance(ty, IntType):
        half = 1 << (bits - 1)
        return (-half, half - 1)
    if ty == ADDRESS:
        b = min(160, bits)
        return (0, (1 << b) - 1)
    return (0, (1 << bits) - 1)


def layout_slots(info: ContractInfo, name: str, ty) -> list[tuple]:
    """Flatten one state variable into (slot, sort, kind) triples.

    kind is ("scalar", ty) | ("map", elem_ty) | ("len",): mappings become
    one array slot per scalar value (or per struct field), dynamic arrays a
    data array plus a length, structs one scalar slot per field.
    """
    if isinstance(ty, MappingType):
        if isinstance(ty.value, StructType):
            st = info.structs[ty.value.name]
            return [
                (f"{name}.{f.name}", arr(INT, _term_sort(f.sem)), ("map", f.sem))
                for f in st.fields
            ]
        return [(name, arr(INT, _term_sort(ty.value)), ("map", ty.value))]
    if isinstance(ty, ArrayType):
        return [
            (f"{name}$data", arr(INT, _term_sort(ty.elem)), ("map", ty.elem)),
            (f"{name}$len", INT, ("len",)),
        ]
    if isinstance(ty, StructType):
        st = info.structs[ty.name]
        return [(f"{name}.{f.name}", _term_sort(f.sem), ("scalar", f.sem)) for f in st.fields]
    return [(name, _term_sort(ty), ("scalar", ty))]


class _Executor:
    def __init__(self, program: ResolvedProgram, info: ContractInfo, opts: ExecOptions):
        self.program = program
        self.info = info
        self.opts = opts
        self.slot_info: dict[str, tuple] = {}
        self.var_slots: dict[str, list[str]] = {}
        for name, sv in info.state_vars.items():
            slots = []
            for slot, sort, kind in layout_slots(info, name, sv.sem):
                self.slot_info[slot] = (sort, kind)
                slots.append(slot)
            self.var_slots[name] = slots
        self._footprints: dict[tuple[str, str], set[str]] = {}

    # -- fresh symbols -----------------------------------------------------

    def fresh(self, state: SymState, base: str, sort) -> Sym:
        n = state.names.get(base, 0)
        state.names[base] = n + 1
        return Sym(sort, base if n == 0 else f"{base}!{n}")

    def fresh_slot(self, state: SymState, slot: str) -> Term:
        """Fresh symbol for a storage slot, with its range fact if scalar."""
        sort, kind = self.slot_info[slot]
        s = self.fresh(state, slot, sort)
        if kind[0] == "scalar":
            self._assume_range(state, s, kind[1])
        elif kind[0] == "len":
            self._assume_range(state, s, UIntType())
        return s

    def fresh_value(self, state: SymState, base: str, ty):
        """Fresh scalar or struct value of the given semantic type."""
        if isinstance(ty, StructType):
            st = self.info.structs[ty.name]
            return StructVal(
                ty.name,
                {f.name: self.fresh_value(state, f"{base}.{f.name}", f.sem) for f in st.fields},
            )
        s = self.fresh(state, base, _term_sort(ty))
        self._assume_range(state, s, ty)
        return s

    def _assume_range(self, state: SymState, t: Term, ty) -> None:
        rng = scaled_range(ty, self.opts.word_bits)
        if rng is None:
            return
        lo, hi = rng
        state.assume_fact(mk_and(mk_ge(t, mk_int(lo)), mk_le(t, mk_int(hi))))

    def zero_value(self, ty):
        if isinstance(ty, BoolType):
            return FALSE
        if isinstance(ty, StructType):
            st = self.info.structs[ty.name]
            return StructVal(ty.name, {f.name: self.zero_value(f.sem) for f in st.fields})
        return mk_int(0)

    def _zero_slot(self, slot: str) -> Term:
        sort, kind = self.slot_info[slot]
        if kind[0] == "map":
            return ConstArr(sort, self.zero_value(kind[1]))
        if kind[0] == "len":
            return mk_int(0)
        return self.zero_value(kind[1])

    # -- state construction ------------------------------------------------

    def make_state(self, zero: bool = False) -> SymState:
        state = SymState()
        for slot in self.slot_info:
            state.store[slot] = self._zero_slot(slot) if zero else self.fresh_slot(state, slot)
        state.env = self.fresh_env(state)
        state.oldStore = dict(state.store)
        return state

    def fresh_env(self, state: SymState) -> Env:
        sender = self.fresh(state, "msg.sender", INT)
        self._assume_range(state, sender, ADDRESS)
        value = self.fresh(state, "msg.value", INT)
        self._assume_range(state, value, UIntType())
        ts = self.fresh(state, "block.timestamp", INT)
        self._assume_range(state, ts, UIntType())
        return Env(sender=sender, value=value, timestamp=ts)

    # -- function execution -------------------------------------------------

    def run_function(
        self,
        state: SymState,
        func: A.FunctionDef,
        args: Optional[list] = None,
        as_transaction: bool = True,
    ) -> list:
        """Execute one function body starting from state. Returns outcomes."""
        sink: list = []
        st = state.copy()
        if args is None:
            args = [self.fresh_value(st, p.name, p.sem) for p in func.params]
        if len(args) != len(func.params):
            raise ExecUnsupported(f"arity mismatch calling {func.name}")
        saved_locals = st.locals
        st.locals = {p.name: v for p, v in zip(func.params, args)}
        if as_transaction:
            st.entry_params = dict(st.locals)
            if func.mutability != "payable":
                st.assume_fact(mk_eq(st.env.value, mk_int(0)))
        conts = self.exec_stmts(st, func.body.stmts if func.body else [], 0, sink)
        outcomes: list = list(sink)
        for c in conts:
            c.state.locals = dict(saved_locals)
            ret = c.ret
            if ret is None and func.returns:
                ret = self.zero_value(func.returns[0].sem)
            outcomes.append(
                Normal(
                    state=c.state,
                    obligations=c.state.obligations,
                    ret=ret,
                    truncated=bool(c.trunc),
                    truncation_reason=c.trunc,
                )
            )
        return outcomes

    # -- statements ---------------------------------------------------------

    def exec_stmts(self, state: SymState, stmts, depth: int, sink) -> list[_Cont]:
        conts = [_Cont(state)]
        for stmt in stmts:
            nxt: list[_Cont] = []
            for c in conts:
                if c.returned or c.trunc:
                    nxt.append(c)
                else:
                    nxt.extend(self.exec_stmt(c.state, stmt, depth, sink))
            conts = nxt
        return conts

    def exec_stmt(self, state: SymState, stmt, depth: int, sink) -> list[_Cont]:
        if isinstance(stmt, A.VarDeclStmt):
            return self._exec_var_decl(state, stmt, depth, sink)

        if isinstance(stmt, A.AssignStmt):
            out = []
            for st, v in self.eval(state, stmt.value, depth, sink):
                out.extend(_Cont(s2) for s2 in self.assign(st, stmt.target, v, depth, sink))
            return out

        if isinstance(stmt, A.IfStmt):
            out = []
            for st, c in self.eval(state, stmt.cond, depth, sink):
                then_st = st.copy()
                then_st.assume(c)
                out.extend(self.exec_stmts(then_st, stmt.then.stmts, depth, sink))
                else_st = st.copy()
                else_st.assume(mk_not(c))
                if stmt.els is not None:
                    out.extend(self.exec_stmts(else_st, stmt.els.stmts, depth, sink))
                else:
                    out.append(_Cont(else_st))
            return out

        if isinstance(stmt, A.WhileStmt):
            return self._exec_loop(state, stmt.cond, stmt.body.stmts, None, depth, sink)

        if isinstance(stmt, A.ForStmt):
            conts = (
                self.exec_stmt(state, stmt.init, depth, sink) if stmt.init else [_Cont(state)]
            )
            out = []
            for c in conts:
                if c.returned or c.trunc:
                    out.append(c)
                    continue
                out.extend(
                    self._exec_loop(
                        c.state, stmt.cond, stmt.body.stmts, stmt.update, depth, sink
                    )
                )
            return out

        if isinstance(stmt, A.RequireStmt):
            out = []
            reason = "require"
            if stmt.message:
                reason = f"require: {stmt.message}"
            for st, c in self.eval(state, stmt.cond, depth, sink):
                if c != FALSE:
                    ok = st.copy()
                    ok.assume(c)
                    out.append(_Cont(ok))
                neg = mk_not(c)
                if neg != FALSE:
                    bad = st.copy()
                    bad.assume(neg)
                    sink.append(Reverted(reason=reason, conds=bad.conds, obligations=bad.obligations))
            return out

        if isinstance(stmt, A.AssertStmt):
            out = []
            for st, c in self.eval(state, stmt.cond, depth, sink):
                st = st.copy()
                st.obligations = st.obligations + [
                    Obligation(tuple(st.conds), c, stmt.span, "assert")
                ]
                st.assume(c)
                out.append(_Cont(st))
            return out

        if isinstance(stmt, A.RevertStmt):
            reason = "revert"
            if stmt.message:
                reason = f"revert: {stmt.message}"
            sink.append(Reverted(reason=reason, conds=list(state.conds), obligations=list(state.obligations)))
            return []

        if isinstance(stmt, A.ReturnStmt):
            if stmt.value is None:
                return [_Cont(state, returned=True)]
            return [
                _Cont(st, returned=True, ret=v)
                for st, v in self.eval(state, stmt.value, depth, sink)
            ]

        if isinstance(stmt, A.EmitStmt):
            out = []
            for st, _vals in self.eval_many(state, stmt.args, depth, sink):
                out.append(_Cont(st))
            return out

        if isinstance(stmt, A.ExprStmt):
            e = stmt.expr
            if isinstance(e, A.ExtCall):
                return [_Cont(st) for st, _r in self._exec_ext_call(state, e, depth, sink)]
            if isinstance(e, A.CallExpr) and e.binding == ("push",):
                return self._exec_push(state, e, depth, sink)
            return [_Cont(st) for st, _v in self.eval(state, e, depth, sink)]

        if isinstance(stmt, A.PlaceholderStmt):
            return [_Cont(state)]

        raise ExecUnsupported(f"statement {type(stmt).__name__}")

    def _exec_var_decl(self, state, stmt: A.VarDeclStmt, depth, sink) -> list[_Cont]:
        if isinstance(stmt.init, A.ExtCall):
            out = []
            for st, (succ, ret) in self._exec_ext_call(state, stmt.init, depth, sink):
                st = st.copy()
                values = [succ, ret]
                for decl, v in zip(stmt.decls, values):
                    if decl is not None:
                        st.locals[decl.name] = v
                out.append(_Cont(st))
            return out
        decl = stmt.decls[0]
        if decl is not None and isinstance(decl.sem, (MappingType, ArrayType)):
            raise ExecUnsupported("local mapping or array declarations")
        if stmt.init is None:
            st = state.copy()
            st.locals[decl.name] = self.zero_value(decl.sem)
            return [_Cont(st)]
        out = []
        for st, v in self.eval(state, stmt.init, depth, sink):
            st = st.copy()
            st.locals[decl.name] = v.copy() if isinstance(v, StructVal) else v
            out.append(_Cont(st))
        return out

    def _exec_loop(self, state, cond, body, update, depth, sink) -> list[_Cont]:
        done: list[_Cont] = []
        active = [state]
        for _ in range(self.opts.loop_bound):
            nxt: list[SymState] = []
            for st in active:
                for st1, c in self.eval(st, cond, depth, sink):
                    exit_st = st1.copy()
                    exit_st.assume(mk_not(c))
                    if mk_not(c) != FALSE:
                        done.append(_Cont(exit_st))
                    if c == FALSE:
                        continue
                    iter_st = st1.copy()
                    iter_st.assume(c)
                    for bc in self.exec_stmts(iter_st, body, depth, sink):
                        if bc.returned or bc.trunc:
                            done.append(bc)
                        elif update is not None:
                            for uc in self.exec_stmt(bc.state, update, depth, sink):
                                if uc.returned or uc.trunc:
                                    done.append(uc)
                                else:
                                    nxt.append(uc.state)
                        else:
                            nxt.append(bc.state)
            active = nxt
            if not active:
                break
        for st in active:
            # The loop may still have iterations left on this path; cut it
            # off and let the verifier degrade to Unknown if it matters.
            for st1, c in self.eval(st, cond, depth, sink):
                exit_st = st1.copy()
                exit_st.assume(mk_not(c))
                if mk_not(c) != FALSE:
                    done.append(_Cont(exit_st))
                if c != FALSE:
                    trunc_st = st1.copy()
                    trunc_st.assume(c)
                    done.append(_Cont(trunc_st, trunc="loop bound"))
        return done

    def _exec_ext_call(self, state, e: A.ExtCall, depth, sink):
        """Low-level external call: fresh result symbols, success assumed."""
        out = []
        value_expr = e.value
        for st, target in self.eval(state, e.target, depth, sink):
            legs = (
                self.eval(st, value_expr, depth, sink)
                if value_expr is not None
                else [(st, mk_int(0))]
            )
            for st2, value in legs:
                st2 = st2.copy()
                succ = self.fresh(st2, "call.success", BOOL)
                ret = self.fresh(st2, "call.returndata", INT)
                self._assume_range(st2, ret, UIntType())
                st2.assume(succ)
                st2.ext_calls = st2.ext_calls + [
                    CallRecord(target=target, value=value, success=succ, returndata=ret)
                ]
                out.append((st2, (succ, ret)))
        return out

    def _exec_push(self, state, e: A.CallExpr, depth, sink) -> list[_Cont]:
        base = e.callee.base
        name = base.name
        out = []
        for st, v in self.eval(state, e.args[0], depth, sink):
            st = st.copy()
            data, ln = f"{name}$data", f"{name}$len"
            st.store[data] = mk_store(st.store[data], st.store[ln], v)
            st.store[ln] = mk_add(st.store[ln], mk_int(1))
            out.append(_Cont(st))
        return out

    # -- assignment ----------------------------------------------------------

    def assign(self, state, target, value, depth, sink) -> list[SymState]:
        if isinstance(target, A.Ident):
            kind, name = target.binding
            st = state.copy()
            if kind in ("local", "rulevar"):
                st.locals[name] = value.copy() if isinstance(value, StructVal) else value
                return [st]
            ty = self.info.state_vars[name].sem
            if isinstance(ty, StructType):
                for f, v in value.fields.items():
                    st.store[f"{name}.{f}"] = v
                return [st]
            if isinstance(ty, (MappingType, ArrayType)):
                raise ExecUnsupported("whole-container assignment")
            st.store[name] = value
            return [st]

        if isinstance(target, A.IndexAccess):
            base = target.base
            if not isinstance(base, A.Ident) or base.binding[0] != "state":
                raise ExecUnsupported("nested container write")
            name = base.name
            ty = self.info.state_vars[name].sem
            out = []
            if isinstance(ty, MappingType):
                for st, k in self.eval(state, target.index, depth, sink):
                    st = st.copy()
                    if isinstance(ty.value, StructType):
                        for f, v in value.fields.items():
                            slot = f"{name}.{f}"
                            st.store[slot] = mk_store(st.store[slot], k, v)
                    else:
                        st.store[name] = mk_store(st.store[name], k, value)
                    out.append(st)
                return out
            # dynamic array element write, bounds-checked
            for st, i in self.eval(state, target.index, depth, sink):
                ln = st.store[f"{name}$len"]
                ok = mk_and(mk_ge(i, mk_int(0)), mk_lt(i, ln))
                bad = mk_not(ok)
                if bad != FALSE:
                    bad_st = st.copy()
                    bad_st.assume(bad)
                    sink.append(Reverted(reason="index out of bounds", conds=bad_st.conds, obligations=bad_st.obligations))
                if ok != FALSE:
                    st = st.copy()
                    st.assume(ok)
                    slot = f"{name}$data"
                    st.store[slot] = mk_store(st.store[slot], i, value)
                    out.append(st)
            return out

        if isinstance(target, A.MemberAccess):
            binding = target.binding
            if not (binding and binding[0] == "field"):
                raise ExecUnsupported("assignment target")
            fld = target.member
            base = target.base
            if isinstance(base, A.Ident):
                kind, name = base.binding
                st = state.copy()
                if kind in ("local", "rulevar"):
                    sv = st.locals[name].copy()
                    sv.fields[fld] = value
                    st.locals[name] = sv
                else:
                    st.store[f"{name}.{fld}"] = value
                return [st]
            if isinstance(base, A.IndexAccess):
                inner = base.base
                if not isinstance(inner, A.Ident) or inner.binding[0] != "state":
                    raise ExecUnsupported("nested container write")
                name = inner.name
                out = []
                for st, k in self.eval(state, base.index, depth, sink):
                    st = st.copy()
                    slot = f"{name}.{fld}"
                    st.store[slot] = mk_store(st.store[slot], k, value)
                    out.append(st)
                return out
        raise ExecUnsupported("assignment target")

    # -- expressions ----------------------------------------------------------

    def eval_many(self, state, exprs, depth, sink):
        legs = [(state, [])]
        for e in exprs:
            nxt = []
            for st, vals in legs:
                for st2, v in self.eval(st, e, depth, sink):
                    nxt.append((st2, vals + [v]))
            legs = nxt
        return legs

    def eval(self, state: SymState, e, depth: int, sink) -> list[tuple[SymState, object]]:
        if isinstance(e, A.NumberLit):
            return [(state, mk_int(e.value))]
        if isinstance(e, A.BoolLit):
            return [(state, TRUE if e.value else FALSE)]
        if isinstance(e, A.StringLit):
            code = e.code if e.code is not None else self.program.string_codes[e.value]
            return [(state, mk_int(code))]

        if isinstance(e, A.Ident):
            kind, name = e.binding
            if kind in ("local", "rulevar"):
                v = state.locals[name]
                return [(state, v.copy() if isinstance(v, StructVal) else v)]
            return [(state, self.read_state_var(state, name))]

        if isinstance(e, A.MemberAccess):
            binding = e.binding
            if binding[0] == "env":
                return [(state, getattr(state.env, binding[1]))]
            if binding[0] == "length":
                base = e.base
                if isinstance(base, A.Ident) and base.binding[0] == "state":
                    return [(state, state.store[f"{base.name}$len"])]
                raise ExecUnsupported("length of non-storage array")
            if binding[0] == "field":
                out = []
                for st, base in self.eval(state, e.base, depth, sink):
                    out.append((st, base.fields[e.member]))
                return out
            raise ExecUnsupported(f"member {e.member}")

        if isinstance(e, A.IndexAccess):
            return self._eval_index(state, e, depth, sink)

        if isinstance(e, A.UnaryOp):
            if e.op == "!":
                return [(st, mk_not(v)) for st, v in self.eval(state, e.operand, depth, sink)]
            out = []
            for st, v in self.eval(state, e.operand, depth, sink):
                out.extend(
                    self._checked_arith(st, "-", mk_int(0), v, e.ty, e.span, sink)
                )
            return out

        if isinstance(e, A.BinaryOp):
            return self._eval_binary(state, e, depth, sink)

        if isinstance(e, A.CallExpr):
            return self._eval_call(state, e, depth, sink)

        if isinstance(e, A.OldExpr):
            raise ExecUnsupported("old() outside a specification context")

        raise ExecUnsupported(f"expression {type(e).__name__}")

    def read_state_var(self, state: SymState, name: str):
        ty = self.info.state_vars[name].sem
        if isinstance(ty, StructType):
            st = self.info.structs[ty.name]
            return StructVal(
                ty.name, {f.name: state.store[f"{name}.{f.name}"] for f in st.fields}
            )
        if isinstance(ty, (MappingType, ArrayType)):
            raise ExecUnsupported("container used as a value")
        return state.store[name]

    def _eval_index(self, state, e: A.IndexAccess, depth, sink):
        base = e.base
        if not isinstance(base, A.Ident) or base.binding[0] != "state":
            raise ExecUnsupported("indexing a non-storage container")
        name = base.name
        ty = self.info.state_vars[name].sem
        out = []
        if isinstance(ty, MappingType):
            for st, k in self.eval(state, e.index, depth, sink):
                if isinstance(ty.value, StructType):
                    sdef = self.info.structs[ty.value.name]
                    fields = {}
                    for f in sdef.fields:
                        sel = mk_select(st.store[f"{name}.{f.name}"], k)
                        self._assume_range(st, sel, f.sem)
                        fields[f.name] = sel
                    out.append((st, StructVal(ty.value.name, fields)))
                else:
                    sel = mk_select(st.store[name], k)
                    self._assume_range(st, sel, ty.value)
                    out.append((st, sel))
            return out
        # dynamic array read, bounds-checked
        for st, i in self.eval(state, e.index, depth, sink):
            ln = st.store[f"{name}$len"]
            ok = mk_and(mk_ge(i, mk_int(0)), mk_lt(i, ln))
            bad = mk_not(ok)
            if bad != FALSE:
                bad_st = st.copy()
                bad_st.assume(bad)
                sink.append(Reverted(reason="index out of bounds", conds=bad_st.conds, obligations=bad_st.obligations))
            if ok != FALSE:
                st = st.copy()
                st.assume(ok)
                sel = mk_select(st.store[f"{name}$data"], i)
                self._assume_range(st, sel, ty.elem)
                out.append((st, sel))
        return out

    def _eval_binary(self, state, e: A.BinaryOp, depth, sink):
        op = e.op
        if op == "&&":
            out = []
            for st, a in self.eval(state, e.left, depth, sink):
                false_st = st.copy()
                false_st.assume(mk_not(a))
                if mk_not(a) != FALSE:
                    out.append((false_st, FALSE))
                if a != FALSE:
                    true_st = st.copy()
                    true_st.assume(a)
                    out.extend(self.eval(true_st, e.right, depth, sink))
            return out
        if op == "||":
            out = []
            for st, a in self.eval(state, e.left, depth, sink):
                true_st = st.copy()
                true_st.assume(a)
                if a != FALSE:
                    out.append((true_st, TRUE))
                if mk_not(a) != FALSE:
                    false_st = st.copy()
                    false_st.assume(mk_not(a))
                    out.extend(self.eval(false_st, e.right, depth, sink))
            return out

        out = []
        for st, vals in self.eval_many(state, [e.left, e.right], depth, sink):
            a, b = vals
            if op in ("+", "-", "*", "/", "%"):
                out.extend(self._checked_arith(st, op, a, b, e.ty, e.span, sink))
            elif op == "==":
                out.append((st, mk_eq(a, b)))
            elif op == "!=":
                out.append((st, mk_not(mk_eq(a, b))))
            elif op == "<":
                out.append((st, mk_lt(a, b)))
            elif op == "<=":
                out.append((st, mk_le(a, b)))
            elif op == ">":
                out.append((st, mk_gt(a, b)))
            elif op == ">=":
                out.append((st, mk_ge(a, b)))
            else:
                raise ExecUnsupported(f"operator {op}")
        return out

    def _checked_arith(self, state, op, a, b, ty, span: Span, sink):
        """Fork into the in-range result and the overflow/zero reverts."""
        signed = isinstance(ty, IntType)
        lo, hi = scaled_range(ty, self.opts.word_bits)
        lo_t, hi_t = mk_int(lo), mk_int(hi)

        if op in ("+", "-", "*"):
            res = {"+": mk_add, "-": mk_sub, "*": mk_mul}[op](a, b)
            ok = mk_and(mk_ge(res, lo_t), mk_le(res, hi_t))
            bad = mk_not(ok)
            out = []
            if bad != FALSE:
                bad_st = state.copy()
                bad_st.assume(bad)
                sink.append(Reverted(reason="arithmetic overflow", conds=bad_st.conds, obligations=bad_st.obligations))
            if ok != FALSE:
                st = state.copy()
                st.assume(ok)
                out.append((st, res))
            return out

        # division and modulo
        zero = mk_eq(b, mk_int(0))
        out = []
        if zero != FALSE:
            z_st = state.copy()
            z_st.assume(zero)
            sink.append(Reverted(reason="division by zero", conds=z_st.conds, obligations=z_st.obligations))
        nonzero = mk_not(zero)
        if nonzero == FALSE:
            return out
        st = state.copy()
        st.assume(nonzero)
        if signed:
            min_case = mk_and(mk_eq(a, lo_t), mk_eq(b, mk_int(-1)))
            if op == "/" and min_case != FALSE:
                ov_st = st.copy()
                ov_st.assume(min_case)
                sink.append(Reverted(reason="arithmetic overflow", conds=ov_st.conds, obligations=ov_st.obligations))
                st = st.copy()
                st.assume(mk_not(min_case))
            res = mk_tdiv(a, b) if op == "/" else mk_tmod(a, b)
        else:
            res = mk_div(a, b) if op == "/" else mk_mod(a, b)
        out.append((st, res))
        return out

    def _eval_call(self, state, e: A.CallExpr, depth, sink):
        binding = e.binding
        if binding[0] == "builtin":
            out = []
            for st, vals in self.eval_many(state, e.args, depth, sink):
                h = App(INT, f"sha3${len(vals)}", tuple(vals))
                self._assume_range(st, h, UIntType())
                out.append((st, h))
            return out
        if binding[0] == "cast":
            return self.eval(state, e.args[0], depth, sink)
        if binding[0] == "struct_new":
            sdef = self.info.structs[binding[1]]
            out = []
            for st, vals in self.eval_many(state, e.args, depth, sink):
                out.append(
                    (st, StructVal(binding[1], {f.name: v for f, v in zip(sdef.fields, vals)}))
                )
            return out
        if binding[0] == "internal":
            fdef = self.info.functions[binding[1]]
            home = self.info.func_home.get(binding[1], self.info.name)
            return self._eval_inline(state, fdef, e.args, depth, sink, home)
        if binding[0] == "super":
            _, home, fname = binding
            target = self.program.resolve_super(self.info.name, home, fname)
            if target is None:
                raise ExecUnsupported(f"super.{fname} has no implementation")
            return self._eval_inline(state, target[1], e.args, depth, sink, target[0])
        raise ExecUnsupported(f"call binding {binding[0]}")

    def _eval_inline(self, state, fdef: A.FunctionDef, arg_exprs, depth, sink, home: str):
        out = []
        for st, args in self.eval_many(state, arg_exprs, depth, sink):
            if depth >= self.opts.call_depth:
                out.append(self._havoc_call(st, fdef, home))
                continue
            saved = st.locals
            st = st.copy()
            st.locals = {p.name: v for p, v in zip(fdef.params, args)}
            conts = self.exec_stmts(st, fdef.body.stmts if fdef.body else [], depth + 1, sink)
            for c in conts:
                c.state.locals = dict(saved)
                ret = c.ret
                if ret is None and fdef.returns:
                    ret = self.zero_value(fdef.returns[0].sem)
                if c.trunc:
                    # A bound cut inside a nested call poisons the caller
                    # path the same way it would at top level: record the
                    # truncated outcome and drop the continuation.
                    out_state = c.state
                    sink.append(
                        Normal(
                            state=out_state,
                            obligations=out_state.obligations,
                            ret=None,
                            truncated=True,
                            truncation_reason=c.trunc,
                        )
                    )
                    continue
                out.append((c.state, ret))
        return out

    def _havoc_call(self, state: SymState, fdef: A.FunctionDef, home: str):
        """Overapproximate a call past the inline depth: every slot the
        callee may write becomes an unconstrained fresh symbol, and the
        return value is unconstrained within its type range."""
        st = state.copy()
        for slot in sorted(self.write_footprint(home, fdef)):
            st.store[slot] = self.fresh_slot(st, slot)
        ret = None
        if fdef.returns:
            ret = self.fresh_value(st, f"{fdef.name}.ret", fdef.returns[0].sem)
        return (st, ret)

    def write_footprint(self, home: str, fdef: A.FunctionDef) -> set[str]:
        key = (home, fdef.name)
        if key in self._footprints:
            return self._footprints[key]
        self._footprints[key] = set()  # cycle tolerance
        slots: set[str] = set()

        def root_slots(target) -> set[str]:
            found: set[str] = set()
            stack = [target]
            while stack:
                node = stack.pop()
                if isinstance(node, A.Ident) and node.binding and node.binding[0] == "state":
                    found.update(self.var_slots.get(node.name, ()))
                elif isinstance(node, A.Node):
                    for f in node.__dataclass_fields__:
                        stack.append(getattr(node, f))
                elif isinstance(node, list):
                    stack.extend(node)
            return found

        def visit(stmts):
            for s in stmts:
                if isinstance(s, A.AssignStmt):
                    slots.update(root_slots(s.target))
                elif isinstance(s, A.VarDeclStmt):
                    pass
                elif isinstance(s, A.IfStmt):
                    visit(s.then.stmts)
                    if s.els:
                        visit(s.els.stmts)
                elif isinstance(s, A.WhileStmt):
                    visit(s.body.stmts)
                elif isinstance(s, A.ForStmt):
                    if s.init:
                        visit([s.init])
                    if s.update:
                        visit([s.update])
                    visit(s.body.stmts)
                elif isinstance(s, A.ExprStmt):
                    e = s.expr
                    if isinstance(e, A.CallExpr) and e.binding == ("push",):
                        slots.update(root_slots(e.callee.base))
                    calls = [e] if isinstance(e, A.CallExpr) else []
                    for call in calls:
                        slots.update(callee_footprint(call))
                for call in _calls_in(s):
                    slots.update(callee_footprint(call))

        def callee_footprint(call) -> set[str]:
            b = getattr(call, "binding", None)
            if not b:
                return set()
            if b[0] == "internal":
                f = self.info.functions.get(b[1])
                if f is not None:
                    return self.write_footprint(self.info.func_home.get(b[1], home), f)
            if b[0] == "super":
                t = self.program.resolve_super(self.info.name, b[1], b[2])
                if t is not None:
                    return self.write_footprint(t[0], t[1])
            return set()

        def _calls_in(node):
            found = []
            stack = [node]
            while stack:
                n = stack.pop()
                if isinstance(n, A.CallExpr) and n.binding and n.binding[0] in (
                    "internal",
                    "super",
                ):
                    found.append(n)
                if isinstance(n, A.Node):
                    for f in n.__dataclass_fields__:
                        stack.append(getattr(n, f))
                elif isinstance(n, list):
                    stack.extend(n)
            return found

        if fdef.body:
            visit(fdef.body.stmts)
        self._footprints[key] = slots
        return slots

    # -- rules -----------------------------------------------------------------

    def run_rule(self, state: SymState, rule: A.RuleDecl) -> list:
        """Execute a rule body from the given state (shared across its calls)."""
        sink: list = []
        conts: list[_Cont] = [_Cont(state)]

        for stmt in rule.body:
            nxt: list[_Cont] = []
            for c in conts:
                if c.trunc:
                    nxt.append(c)
                    continue
                st = c.state
                if isinstance(stmt, A.SpecLetStmt):
                    st = st.copy()
                    if stmt.init is not None:
                        for st2, v in self.eval(st, stmt.init, 0, sink):
                            st2 = st2.copy()
                            st2.locals[stmt.name] = v
                            nxt.append(_Cont(st2))
                        continue
                    v = self.fresh_value(st, stmt.name, stmt.sem)
                    plain = stmt.name.lstrip("$")
                    sv = self.info.state_vars.get(plain)
                    if sv is not None and sv.sem == stmt.sem:
                        # `$v` over a state variable v starts out aliased to
                        # the variable's current value.
                        cur = self.read_state_var(st, plain)
                        if isinstance(v, StructVal):
                            for f, fv in v.fields.items():
                                st.assume(mk_eq(fv, cur.fields[f]))
                        else:
                            st.assume(mk_eq(v, cur))
                    st.locals[stmt.name] = v
                    nxt.append(_Cont(st))
                elif isinstance(stmt, A.AssumeStmt):
                    st = st.copy()
                    st.assume(self.eval_spec(st, stmt.cond))
                    nxt.append(_Cont(st))
                elif isinstance(stmt, A.SpecAssertStmt):
                    st = st.copy()
                    cond = self.eval_spec(st, stmt.cond)
                    st.obligations = st.obligations + [
                        Obligation(tuple(st.conds), cond, stmt.span, f"rule {rule.name}")
                    ]
                    st.assume(cond)
                    nxt.append(_Cont(st))
                elif isinstance(stmt, A.SpecCallStmt):
                    call = stmt.call
                    fdef = self.info.functions[call.binding[1]]
                    for st2, args in self.eval_many(st, call.args, 0, sink):
                        for oc in self.run_function(st2, fdef, args=list(args)):
                            if isinstance(oc, Reverted):
                                sink.append(oc)
                            elif oc.truncated:
                                nxt.append(_Cont(oc.state, trunc=oc.truncation_reason))
                            else:
                                nxt.append(_Cont(oc.state))
                else:
                    raise ExecUnsupported(f"rule statement {type(stmt).__name__}")
            conts = nxt

        outcomes = list(sink)
        for c in conts:
            outcomes.append(
                Normal(
                    state=c.state,
                    obligations=c.state.obligations,
                    ret=None,
                    truncated=bool(c.trunc),
                    truncation_reason=c.trunc,
                )
            )
        return outcomes

    # -- pure (specification) evaluation --------------------------------------

    def eval_spec(self, state: SymState, e, params: Optional[dict] = None) -> object:
        """Evaluate a side-effect-free specification expression to a term.

        Arithmetic is unbounded (mathematical integers), matching the
        logical reading of pre/postconditions and assertions. Range facts
        for fresh container reads are recorded on the state.
        """
        if isinstance(e, A.NumberLit):
            return mk_int(e.value)
        if isinstance(e, A.BoolLit):
            return TRUE if e.value else FALSE
        if isinstance(e, A.StringLit):
            code = e.code if e.code is not None else self.program.string_codes[e.value]
            return mk_int(code)
        if isinstance(e, A.OldExpr):
            name = e.var.name
            ty = self.info.state_vars[name].sem
            if isinstance(ty, StructType):
                st = self.info.structs[ty.name]
                return StructVal(
                    ty.name, {f.name: state.oldStore[f"{name}.{f.name}"] for f in st.fields}
                )
            return state.oldStore[name]
        if isinstance(e, A.Ident):
            kind, name = e.binding
            if kind == "local":
                if params is not None and name in params:
                    return params[name]
                return state.locals[name]
            if kind == "rulevar":
                return state.locals[name]
            return self.read_state_var(state, name)
        if isinstance(e, A.MemberAccess):
            binding = e.binding
            if binding[0] == "env":
                return getattr(state.env, binding[1])
            if binding[0] == "length":
                base = e.base
                if isinstance(base, A.Ident) and base.binding[0] == "state":
                    return state.store[f"{base.name}$len"]
                raise ExecUnsupported("length of non-storage array")
            if binding[0] == "field":
                base = self.eval_spec(state, e.base, params)
                return base.fields[e.member]
            raise ExecUnsupported(f"member {e.member}")
        if isinstance(e, A.IndexAccess):
            base = e.base
            old_mode = isinstance(base, A.OldExpr)
            root = base.var if old_mode else base
            if not isinstance(root, A.Ident) or root.binding[0] != "state":
                raise ExecUnsupported("indexing a non-storage container")
            name = root.name
            store = state.oldStore if old_mode else state.store
            ty = self.info.state_vars[name].sem
            k = self.eval_spec(state, e.index, params)
            if isinstance(ty, MappingType):
                if isinstance(ty.value, StructType):
                    sdef = self.info.structs[ty.value.name]
                    fields = {}
                    for f in sdef.fields:
                        sel = mk_select(store[f"{name}.{f.name}"], k)
                        self._assume_range(state, sel, f.sem)
                        fields[f.name] = sel
                    return StructVal(ty.value.name, fields)
                sel = mk_select(store[name], k)
                self._assume_range(state, sel, ty.value)
                return sel
            sel = mk_select(store[f"{name}$data"], k)
            self._assume_range(state, sel, ty.elem)
            return sel
        if isinstance(e, A.UnaryOp):
            v = self.eval_spec(state, e.operand, params)
            if e.op == "!":
                return mk_not(v)
            return mk_sub(mk_int(0), v)
        if isinstance(e, A.BinaryOp):
            a = self.eval_spec(state, e.left, params)
            b = self.eval_spec(state, e.right, params)
            signed = isinstance(e.ty, IntType)
            table = {
                "&&": mk_and,
                "||": mk_or,
                "==": mk_eq,
                "!=": mk_distinct_spec,
                "<": mk_lt,
                "<=": mk_le,
                ">": mk_gt,
                ">=": mk_ge,
                "+": mk_add,
                "-": mk_sub,
                "*": mk_mul,
                "/": mk_tdiv if signed else mk_div,
                "%": mk_tmod if signed else mk_mod,
            }
            return table[e.op](a, b)
        if isinstance(e, A.CallExpr):
            binding = e.binding
            if binding[0] == "builtin":
                vals = tuple(self.eval_spec(state, a, params) for a in e.args)
                h = App(INT, f"sha3${len(vals)}", vals)
                self._assume_range(state, h, UIntType())
                return h
            if binding[0] == "cast":
                return self.eval_spec(state, e.args[0], params)
            if binding[0] == "struct_new":
                sdef = self.info.structs[binding[1]]
                vals = [self.eval_spec(state, a, params) for a in e.args]
                return StructVal(binding[1], {f.name: v for f, v in zip(sdef.fields, vals)})
            raise ExecUnsupported("function call inside a property expression")
        raise ExecUnsupported(f"expression {type(e).__name__}")


def mk_distinct_spec(a, b):
    return mk_not(mk_eq(a, b))


# -- module-level API ---------------------------------------------------------


def _executor(program: ResolvedProgram, contract=None, options=None) -> _Executor:
    return _Executor(program, program.contract(contract), options or DEFAULT_OPTIONS)


def init_state(program: ResolvedProgram, contract: str | None = None, options=None) -> SymState:
    """A fully symbolic pre-state: every storage slot unconstrained within
    its type range, fresh transaction environment, old-store snapshot."""
    return _executor(program, contract, options).make_state()


def execute_function(
    program: ResolvedProgram,
    state: SymState,
    func,
    args: Optional[list] = None,
    contract: str | None = None,
    options=None,
) -> list:
    """Execute one public or internal function as a transaction from state.

    func may be a name or a prepared FunctionDef. args are term values; when
    omitted, fresh ranged symbols named after the parameters are minted.
    Returns the full list of path outcomes, reverts included.
    """
    ex = _executor(program, contract, options)
    if isinstance(func, str):
        if func not in ex.info.functions:
            raise KeyError(f"unknown function: {func}")
        func = ex.info.functions[func]
    return ex.run_function(state, func, args)


def execute_deployment(
    program: ResolvedProgram, contract: str | None = None, options=None
) -> list:
    """Run state-variable initializers and constructors (base-most first)
    on an all-zero store. Returns path outcomes for the deployment."""
    ex = _executor(program, contract, options)
    state = ex.make_state(zero=True)
    sink: list = []
    conts = [_Cont(state)]
    for name, sv in ex.info.state_vars.items():
        if sv.init is None:
            continue
        nxt = []
        for c in conts:
            if c.trunc:
                nxt.append(c)
                continue
            for st, v in ex.eval(c.state, sv.init, 0, sink):
                st = st.copy()
                if isinstance(v, StructVal):
                    for f, fv in v.fields.items():
                        st.store[f"{name}.{f}"] = fv
                else:
                    st.store[name] = v
                nxt.append(_Cont(st))
        conts = nxt
    for ctor in ex.info.constructors:
        nxt = []
        for c in conts:
            if c.trunc:
                nxt.append(c)
                continue
            for oc in ex.run_function(c.state, ctor, args=[]):
                if isinstance(oc, Reverted):
                    sink.append(oc)
                elif oc.truncated:
                    nxt.append(_Cont(oc.state, trunc=oc.truncation_reason))
                else:
                    nxt.append(_Cont(oc.state))
        conts = nxt
    outcomes = list(sink)
    for c in conts:
        st = c.state
        st.oldStore = dict(st.store)
        outcomes.append(
            Normal(
                state=st,
                obligations=st.obligations,
                ret=None,
                truncated=bool(c.trunc),
                truncation_reason=c.trunc,
            )
        )
    return outcomes


def execute_rule_body(
    program: ResolvedProgram,
    rule: A.RuleDecl,
    contract: str | None = None,
    options=None,
) -> list:
    """Execute a rule: bind symbolic locals, thread assumes, run called
    functions as transactions on a shared state, collect assert obligations."""
    ex = _executor(program, contract, options)
    return ex.run_rule(ex.make_state(), rule)


def eval_spec_expr(
    program: ResolvedProgram,
    state: SymState,
    expr,
    params: Optional[dict] = None,
    contract: str | None = None,
    options=None,
) -> object:
    """Pure evaluation of a specification expression against a state."""
    return _executor(program, contract, options).eval_spec(state, expr, params)
