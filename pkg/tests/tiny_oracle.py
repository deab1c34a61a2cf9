"""Brute-force ground-truth checker for tiny generated contracts.

Deliberately independent of the package's evaluators: a from-scratch
walk over the parsed syntax tree, enumerating every pre-state and every
argument tuple over a small domain and executing functions concretely.
A property "has a violation" when some enumerated scenario satisfies all
assumptions yet fails a required condition. Used to cross-check prover
verdicts on machine-generated contracts.
"""

from __future__ import annotations

import itertools

import ppgpt.frontend.ast as A

WORD = 2**256
DOMAIN = range(8)


class OracleRevert(Exception):
    pass


def _checked(x: int) -> int:
    if 0 <= x < WORD:
        return x
    raise OracleRevert()


class _Fn:
    def __init__(self, fdef: A.FunctionDef):
        self.fdef = fdef
        self.params = [p.name for p in fdef.params]


class OracleProgram:
    def __init__(self, unit: A.SourceUnit):
        contract = unit.contracts[-1]
        self.state_vars = [v.name for v in contract.stateVars]
        self.functions = {f.name: _Fn(f) for f in contract.functions if not f.isConstructor}

    # -- concrete execution of contract code ---------------------------------

    def run_function(self, fname: str, store: dict, args: list) -> dict:
        fn = self.functions[fname]
        if len(args) != len(fn.params):
            raise OracleRevert()
        new_store = dict(store)
        env = {"store": new_store, "locals": dict(zip(fn.params, args))}
        self._exec_block(fn.fdef.body.stmts, env)
        return new_store

    def _exec_block(self, stmts, env):
        for stmt in stmts:
            self._exec_stmt(stmt, env)

    def _exec_stmt(self, stmt, env):
        if isinstance(stmt, A.AssignStmt):
            value = self._eval(stmt.value, env)
            name = stmt.target.name
            if name in env["locals"]:
                env["locals"][name] = value
            else:
                env["store"][name] = value
        elif isinstance(stmt, A.VarDeclStmt):
            decl = stmt.decls[0]
            env["locals"][decl.name] = self._eval(stmt.init, env) if stmt.init is not None else 0
        elif isinstance(stmt, A.IfStmt):
            if self._eval(stmt.cond, env):
                self._exec_block(stmt.then.stmts, env)
            elif stmt.els is not None:
                self._exec_block(stmt.els.stmts, env)
        elif isinstance(stmt, A.RequireStmt):
            if not self._eval(stmt.cond, env):
                raise OracleRevert()
        elif isinstance(stmt, A.ForStmt):
            if stmt.init is not None:
                self._exec_stmt(stmt.init, env)
            guard = 0
            while stmt.cond is None or self._eval(stmt.cond, env):
                self._exec_block(stmt.body.stmts, env)
                if stmt.update is not None:
                    self._exec_stmt(stmt.update, env)
                guard += 1
                if guard > 10000:
                    raise AssertionError("runaway loop in generated code")
        elif isinstance(stmt, A.WhileStmt):
            guard = 0
            while self._eval(stmt.cond, env):
                self._exec_block(stmt.body.stmts, env)
                guard += 1
                if guard > 10000:
                    raise AssertionError("runaway loop in generated code")
        elif isinstance(stmt, A.ExprStmt):
            self._eval(stmt.expr, env)
        else:
            raise AssertionError(f"oracle does not model {type(stmt).__name__}")

    def _eval(self, e, env):
        if isinstance(e, A.NumberLit):
            return e.value
        if isinstance(e, A.BoolLit):
            return e.value
        if isinstance(e, A.Ident):
            if e.name in env["locals"]:
                return env["locals"][e.name]
            return env["store"][e.name]
        if isinstance(e, A.UnaryOp):
            v = self._eval(e.operand, env)
            if e.op == "!":
                return not v
            if e.op == "-":
                return _checked(-v)
            raise AssertionError(f"oracle does not model unary {e.op}")
        if isinstance(e, A.BinaryOp):
            if e.op == "&&":
                return bool(self._eval(e.left, env)) and bool(self._eval(e.right, env))
            if e.op == "||":
                return bool(self._eval(e.left, env)) or bool(self._eval(e.right, env))
            a = self._eval(e.left, env)
            b = self._eval(e.right, env)
            if e.op == "+":
                return _checked(a + b)
            if e.op == "-":
                return _checked(a - b)
            if e.op == "*":
                return _checked(a * b)
            if e.op == "/":
                if b == 0:
                    raise OracleRevert()
                return a // b
            if e.op == "%":
                if b == 0:
                    raise OracleRevert()
                return a % b
            return _compare(e.op, a, b)
        raise AssertionError(f"oracle does not model {type(e).__name__}")

    # -- property-expression evaluation (unbounded integers) ------------------

    def eval_prop(self, e, store, old=None, params=None, letvars=None):
        if isinstance(e, A.NumberLit):
            return e.value
        if isinstance(e, A.BoolLit):
            return e.value
        if isinstance(e, A.OldExpr):
            assert old is not None, "old() outside a postcondition"
            return old[e.var.name if isinstance(e.var, A.Ident) else e.var]
        if isinstance(e, A.Ident):
            if letvars and e.name in letvars:
                return letvars[e.name]
            if params and e.name in params:
                return params[e.name]
            return store[e.name]
        if isinstance(e, A.UnaryOp):
            v = self.eval_prop(e.operand, store, old, params, letvars)
            if e.op == "!":
                return not v
            if e.op == "-":
                return -v
            raise AssertionError(f"oracle does not model unary {e.op}")
        if isinstance(e, A.BinaryOp):
            if e.op == "&&":
                return bool(self.eval_prop(e.left, store, old, params, letvars)) and bool(
                    self.eval_prop(e.right, store, old, params, letvars)
                )
            if e.op == "||":
                return bool(self.eval_prop(e.left, store, old, params, letvars)) or bool(
                    self.eval_prop(e.right, store, old, params, letvars)
                )
            a = self.eval_prop(e.left, store, old, params, letvars)
            b = self.eval_prop(e.right, store, old, params, letvars)
            if e.op == "+":
                return a + b
            if e.op == "-":
                return a - b
            if e.op == "*":
                return a * b
            return _compare(e.op, a, b)
        raise AssertionError(f"oracle does not model {type(e).__name__}")

    # -- exhaustive property checks -------------------------------------------

    def _stores(self):
        names = self.state_vars
        for values in itertools.product(DOMAIN, repeat=len(names)):
            yield dict(zip(names, values))

    def fspec_has_violation(self, spec: A.FunctionSpec) -> bool:
        """Some pre-state and argument tuple satisfies every precondition,
        the function terminates normally, and some postcondition fails."""
        fn = self.functions[spec.funcName]
        for store in self._stores():
            for args in itertools.product(DOMAIN, repeat=len(fn.params)):
                params = dict(zip(fn.params, args))
                if not all(self.eval_prop(p, store, None, params) for p in spec.pre):
                    continue
                try:
                    after = self.run_function(spec.funcName, store, list(args))
                except OracleRevert:
                    continue
                if not all(self.eval_prop(q, after, store, params) for q in spec.post):
                    return True
        return False

    def rule_has_violation(self, rule: A.RuleDecl) -> bool:
        """Some pre-state and binding of the rule's symbolic variables
        passes every assumption and reaches a failing assertion."""
        free = [
            s.name
            for s in rule.body
            if isinstance(s, A.SpecLetStmt) and s.init is None
        ]
        for store in self._stores():
            for values in itertools.product(DOMAIN, repeat=len(free)):
                if self._rule_scenario_fails(rule, dict(store), dict(zip(free, values))):
                    return True
        return False

    def _rule_scenario_fails(self, rule, store, letvars) -> bool:
        old = dict(store)
        for stmt in rule.body:
            if isinstance(stmt, A.SpecLetStmt):
                if stmt.init is not None:
                    letvars[stmt.name] = self.eval_prop(stmt.init, store, old, None, letvars)
            elif isinstance(stmt, A.AssumeStmt):
                if not self.eval_prop(stmt.cond, store, old, None, letvars):
                    return False
            elif isinstance(stmt, A.SpecAssertStmt):
                if not self.eval_prop(stmt.cond, store, old, None, letvars):
                    return True
            elif isinstance(stmt, A.SpecCallStmt):
                args = [
                    self.eval_prop(a, store, old, None, letvars) for a in stmt.call.args
                ]
                try:
                    new_store = self.run_function(stmt.call.callee.name, store, args)
                except OracleRevert:
                    return False
                store.clear()
                store.update(new_store)
            else:
                raise AssertionError(f"oracle does not model {type(stmt).__name__}")
        return False


def _compare(op, a, b):
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    raise AssertionError(f"oracle does not model operator {op}")
