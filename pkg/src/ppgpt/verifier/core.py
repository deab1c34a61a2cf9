"""Verification flows: modular symbolic proofs, bounded refutation, replay.

Each property kind follows the same staged flow. First every proof
obligation is discharged modularly (one symbolic execution from an
unconstrained typed state). A satisfiable obligation query is only a
candidate violation: it must be confirmed by a bounded search for a
concrete trace from deployment, and that trace must replay on the
concrete interpreter with the reported obligation evaluating to false.
Unconfirmed candidates, solver failures, and paths cut off at the loop
bound all surface as Unknown with a stated reason, never as Violated.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

from ..frontend import ast as A
from ..frontend.printer import print_expr
from ..frontend.resolver import ResolvedProgram
from ..solver_bridge import (
    Formula,
    Sat,
    SolverConfig,
    Unsat,
    check_sat_many,
    eval_term,
)
from ..solver_bridge import Unknown as SolverUnknown
from ..symexec.executor import DEFAULT_OPTIONS, ExecOptions, _executor, execute_deployment
from ..symexec.state import Env, Normal, Obligation, StructVal, SymState
from ..symexec.terms import mk_not, sha3_injectivity_axioms
from .concrete import ConcreteInterp, Diverged, Revert
from .verdicts import (
    Proven,
    Trace,
    TraceStep,
    Unknown,
    VacuouslyProven,
    Verdict,
    Violated,
)

__all__ = [
    "VerifierConfig",
    "verify_function_spec",
    "verify_invariant",
    "verify_rule",
    "bmc_refute",
    "replay",
]


@dataclass(frozen=True)
class VerifierConfig:
    """Knobs shared by every verification entry point.

    depth bounds the total number of calls in a refutation trace,
    counting the calls the property itself makes. The loop bound inside
    a single call is a separate knob on the execution options.
    """

    depth: int = 3
    solver: SolverConfig = field(default_factory=SolverConfig)
    options: ExecOptions = DEFAULT_OPTIONS


@dataclass
class _Node:
    """One frontier point of the bounded search: a symbolic state reached
    by `steps` public calls after deployment."""

    state: SymState
    init_store: dict
    steps: tuple  # of (fname, arg values, Env)


@dataclass
class _Candidate:
    """A satisfiable-obligation query plus everything needed to turn its
    model into a concrete trace."""

    formula: Formula
    node: _Node
    extra_steps: tuple  # (fname, args, Env) appended after node.steps
    obligation_index: int
    obligation_text: str
    span: object
    final_params: Optional[dict] = None  # fspec: param name -> arg term
    rulevar_syms: Optional[dict] = None  # rule: $name -> term
    rule_env: Optional[Env] = None


class _Verifier:
    def __init__(self, program: ResolvedProgram, contract: Optional[str], config: VerifierConfig):
        self.program = program
        self.config = config
        self.ex = _executor(program, contract, config.options)
        self.info = self.ex.info
        self.contract = self.info.name

    # -- query construction ---------------------------------------------------

    def _query(self, conds, negation) -> Formula:
        assertions = list(conds) + [negation]
        return Formula(assertions=assertions, axioms=sha3_injectivity_axioms(assertions))

    def _feas(self, conds) -> Formula:
        conds = list(conds)
        return Formula(assertions=conds, axioms=sha3_injectivity_axioms(conds))

    # -- the shared modular flow ------------------------------------------------

    def modular(
        self,
        queries: list[tuple[Formula, object]],
        truncated: list,
        full: list,
        confirm: Callable[[], Verdict],
    ) -> Verdict:
        """Stage the solver work for one property and fold it to a verdict.

        queries are (formula, tag) obligation checks; truncated and full
        are the cut-off and completed normal outcomes, whose feasibility
        decides the loop-bound and vacuity answers.
        """
        formulas = [f for f, _ in queries]
        tfeas = [self._feas(o.state.conds) for o in truncated]
        ffeas = [self._feas(o.state.conds) for o in full]
        results = check_sat_many(formulas + tfeas + ffeas, self.config.solver)
        n, m = len(formulas), len(tfeas)
        q_res, t_res, f_res = results[:n], results[n : n + m], results[n + m :]

        if any(isinstance(r, Sat) for r in q_res):
            confirmed = confirm()
            if isinstance(confirmed, Violated):
                return confirmed
            return Unknown("unconfirmed")
        for r in q_res:
            if isinstance(r, SolverUnknown):
                return Unknown(r.reason)
        if any(not isinstance(r, Unsat) for r in t_res):
            return Unknown("loop bound")
        if any(isinstance(r, Sat) for r in f_res):
            return Proven()
        if full and any(not isinstance(r, Unsat) for r in f_res):
            # Feasibility could not be settled; claiming vacuity needs proof.
            return Proven()
        return VacuouslyProven()

    # -- per-kind modular checks -------------------------------------------------

    def function_spec(self, spec: A.FunctionSpec) -> Verdict:
        fdef = self.info.functions.get(spec.funcName)
        if fdef is None:
            raise ValueError(f"unknown function: {spec.funcName}")
        state = self.ex.make_state()
        args = [self.ex.fresh_value(state, p.name, p.sem) for p in fdef.params]
        params = {p.name: a for p, a in zip(fdef.params, args)}
        for e in spec.pre:
            state.assume(self.ex.eval_spec(state, e, params=params))
        outcomes = self.ex.run_function(state, fdef, args=list(args))
        full = [o for o in outcomes if isinstance(o, Normal) and not o.truncated]
        truncated = [o for o in outcomes if isinstance(o, Normal) and o.truncated]

        queries: list[tuple[Formula, object]] = []
        for o in full:
            terms = [self.ex.eval_spec(o.state, q, params=params) for q in spec.post]
            for i, t in enumerate(terms):
                queries.append((self._query(o.state.conds, mk_not(t)), i))
        return self.modular(queries, truncated, full, lambda: self.bmc(spec))

    def invariant_step(self, inv: A.InvariantDecl, fdef, confirm) -> Verdict:
        """The inductive step {inv} f {inv} for one public function."""
        state = self.ex.make_state()
        for e in inv.exprs:
            state.assume(self.ex.eval_spec(state, e))
        outcomes = self.ex.run_function(state, fdef)
        full = [o for o in outcomes if isinstance(o, Normal) and not o.truncated]
        truncated = [o for o in outcomes if isinstance(o, Normal) and o.truncated]

        queries: list[tuple[Formula, object]] = []
        for o in full:
            terms = [self.ex.eval_spec(o.state, e) for e in inv.exprs]
            for i, t in enumerate(terms):
                queries.append((self._query(o.state.conds, mk_not(t)), i))
        return self.modular(queries, truncated, full, confirm)

    def rule(self, rule: A.RuleDecl) -> Verdict:
        state = self.ex.make_state()
        outcomes = self.ex.run_rule(state, rule)
        obligations = self._rule_obligations(rule, outcomes)
        full = [o for o in outcomes if isinstance(o, Normal) and not o.truncated]
        truncated = [o for o in outcomes if isinstance(o, Normal) and o.truncated]

        queries = [
            (self._query(ob.conds, mk_not(ob.expr)), ob) for ob, _ in obligations
        ]
        return self.modular(queries, truncated, full, lambda: self.bmc(rule))

    @staticmethod
    def _rule_obligations(rule: A.RuleDecl, outcomes) -> list[tuple[Obligation, Optional[dict]]]:
        """Deduplicated rule obligations, each with the locals of one path
        that carries it (None when only reverting paths do)."""
        label = f"rule {rule.name}"
        seen: dict[Obligation, int] = {}
        found: list[tuple[Obligation, Optional[dict]]] = []
        for o in outcomes:
            locals_ = o.state.locals if isinstance(o, Normal) else None
            for ob in o.obligations:
                if ob.label != label:
                    continue
                if ob not in seen:
                    seen[ob] = len(found)
                    found.append((ob, locals_))
                elif found[seen[ob]][1] is None and locals_ is not None:
                    found[seen[ob]] = (ob, locals_)
        return found

    # -- bounded refutation ----------------------------------------------------

    def bmc(self, prop, depth: Optional[int] = None) -> Verdict:
        depth = self.config.depth if depth is None else depth
        cost = self._property_cost(prop)

        roots = [
            _Node(state=o.state, init_store=dict(o.state.store), steps=())
            for o in execute_deployment(self.program, self.contract, self.config.options)
            if isinstance(o, Normal) and not o.truncated
        ]
        expand_names = [
            f.name
            for f in self.info.public_functions()
            if self.ex.write_footprint(self.info.func_home[f.name], f)
        ]

        nodes = roots
        level = 0
        while nodes:
            cands: list[_Candidate] = []
            if level + cost <= depth:
                for node in nodes:
                    cands.extend(self._complete(prop, node))
            children: list[_Node] = []
            if level + 1 + cost <= depth:
                for node in nodes:
                    children.extend(self._expand(node, expand_names))
            if not cands and not children:
                break
            results = check_sat_many(
                [c.formula for c in cands] + [self._feas(ch.state.conds) for ch in children],
                self.config.solver,
            )
            for cand, res in zip(cands, results[: len(cands)]):
                if isinstance(res, Sat):
                    trace = self._trace_from_model(prop, cand, res.model)
                    if trace is not None:
                        return Violated(trace)
            nodes = [
                ch
                for ch, res in zip(children, results[len(cands) :])
                if not isinstance(res, Unsat)
            ]
            level += 1
        return Unknown("no reachable counterexample within depth")

    @staticmethod
    def _property_cost(prop) -> int:
        if isinstance(prop, A.FunctionSpec):
            return 1
        if isinstance(prop, A.InvariantDecl):
            # The final call of the trace is itself the one being judged.
            return 0
        if isinstance(prop, A.RuleDecl):
            return sum(1 for s in prop.body if isinstance(s, A.SpecCallStmt))
        raise TypeError(f"not a verifiable property: {type(prop).__name__}")

    def _expand(self, node: _Node, names: list[str]) -> list[_Node]:
        children = []
        for fname in names:
            fdef = self.info.functions[fname]
            st = node.state.copy()
            st.env = self.ex.fresh_env(st)
            args = [self.ex.fresh_value(st, p.name, p.sem) for p in fdef.params]
            for o in self.ex.run_function(st, fdef, args=list(args)):
                if isinstance(o, Normal) and not o.truncated:
                    children.append(
                        _Node(
                            state=o.state,
                            init_store=node.init_store,
                            steps=node.steps + ((fname, tuple(args), st.env),),
                        )
                    )
        return children

    def _complete(self, prop, node: _Node) -> list[_Candidate]:
        if isinstance(prop, A.FunctionSpec):
            return self._complete_fspec(prop, node)
        if isinstance(prop, A.InvariantDecl):
            return self._complete_invariant(prop, node)
        return self._complete_rule(prop, node)

    def _complete_fspec(self, spec: A.FunctionSpec, node: _Node) -> list[_Candidate]:
        fdef = self.info.functions.get(spec.funcName)
        if fdef is None:
            return []
        st = node.state.copy()
        st.env = self.ex.fresh_env(st)
        st.oldStore = dict(st.store)
        args = [self.ex.fresh_value(st, p.name, p.sem) for p in fdef.params]
        params = {p.name: a for p, a in zip(fdef.params, args)}
        for e in spec.pre:
            st.assume(self.ex.eval_spec(st, e, params=params))
        cands = []
        for o in self.ex.run_function(st, fdef, args=list(args)):
            if not isinstance(o, Normal) or o.truncated:
                continue
            terms = [self.ex.eval_spec(o.state, q, params=params) for q in spec.post]
            for i, t in enumerate(terms):
                cands.append(
                    _Candidate(
                        formula=self._query(o.state.conds, mk_not(t)),
                        node=node,
                        extra_steps=((spec.funcName, tuple(args), st.env),),
                        obligation_index=i,
                        obligation_text=print_expr(spec.post[i]),
                        span=spec.post[i].span,
                        final_params=params,
                    )
                )
        return cands

    def _complete_invariant(self, inv: A.InvariantDecl, node: _Node) -> list[_Candidate]:
        st = node.state.copy()
        terms = [self.ex.eval_spec(st, e) for e in inv.exprs]
        return [
            _Candidate(
                formula=self._query(st.conds, mk_not(t)),
                node=node,
                extra_steps=(),
                obligation_index=i,
                obligation_text=print_expr(inv.exprs[i]),
                span=inv.exprs[i].span,
            )
            for i, t in enumerate(terms)
        ]

    def _complete_rule(self, rule: A.RuleDecl, node: _Node) -> list[_Candidate]:
        st = node.state.copy()
        st.env = self.ex.fresh_env(st)
        outcomes = self.ex.run_rule(st, rule)
        bare = [
            s.name
            for s in rule.body
            if isinstance(s, A.SpecLetStmt) and s.init is None
        ]
        asserts = [s for s in rule.body if isinstance(s, A.SpecAssertStmt)]
        spans = [s.span for s in asserts]
        cands = []
        for ob, locals_ in self._rule_obligations(rule, outcomes):
            if locals_ is None or ob.span not in spans:
                continue
            idx = spans.index(ob.span)
            cands.append(
                _Candidate(
                    formula=self._query(ob.conds, mk_not(ob.expr)),
                    node=node,
                    extra_steps=(),
                    obligation_index=idx,
                    obligation_text=print_expr(asserts[idx].cond),
                    span=ob.span,
                    rulevar_syms={n: locals_[n] for n in bare if n in locals_},
                    rule_env=st.env,
                )
            )
        return cands

    # -- trace construction and replay ---------------------------------------------

    def _concrete(self, v, model):
        if isinstance(v, StructVal):
            return {f: self._concrete(t, model) for f, t in v.fields.items()}
        return eval_term(v, model)

    def _env_dict(self, env: Env, model) -> dict:
        return {
            "sender": eval_term(env.sender, model),
            "value": eval_term(env.value, model),
            "timestamp": eval_term(env.timestamp, model),
        }

    def _trace_from_model(self, prop, cand: _Candidate, model: dict) -> Optional[Trace]:
        initial = {
            slot: self._concrete(term, model) for slot, term in cand.node.init_store.items()
        }
        steps = [
            TraceStep(
                function=fname,
                args=tuple(self._concrete(a, model) for a in args),
                env=self._env_dict(env, model),
            )
            for fname, args, env in cand.node.steps + cand.extra_steps
        ]
        if isinstance(prop, A.FunctionSpec):
            trace = Trace(
                kind="function_spec",
                property_name=prop.funcName,
                initial_state=initial,
                steps=steps,
                obligation=cand.obligation_text,
                obligation_index=cand.obligation_index,
                span=cand.span,
                length=len(steps),
            )
        elif isinstance(prop, A.InvariantDecl):
            trace = Trace(
                kind="invariant",
                property_name=prop.name,
                initial_state=initial,
                steps=steps,
                obligation=cand.obligation_text,
                obligation_index=cand.obligation_index,
                span=cand.span,
                length=len(steps),
            )
            trace = self._trim_invariant(prop, trace)
            if trace is None:
                return None
        else:
            trace = Trace(
                kind="rule",
                property_name=prop.name,
                initial_state=initial,
                steps=steps,
                obligation=cand.obligation_text,
                obligation_index=cand.obligation_index,
                span=cand.span,
                length=len(steps) + self._property_cost(prop),
                rulevars={
                    n: self._concrete(t, model) for n, t in (cand.rulevar_syms or {}).items()
                },
                rule_env=self._env_dict(cand.rule_env, model),
            )
        ok = _check_trace(self._interp(), prop, trace)
        return trace if ok else None

    def _interp(self) -> ConcreteInterp:
        return ConcreteInterp(self.program, self.contract, self.config.options.word_bits)

    def _trim_invariant(self, inv: A.InvariantDecl, trace: Trace) -> Optional[Trace]:
        """Cut the trace at the first point where the invariant concretely
        fails, so the reported step is exactly the breaking one."""
        ci = self._interp()

        def first_false(store) -> Optional[int]:
            for i, e in enumerate(inv.exprs):
                try:
                    if not ci.eval_spec(e, store):
                        return i
                except (Revert, Diverged):
                    return None
            return None

        store = dict(trace.initial_state)
        idx = first_false(store)
        taken = 0
        while idx is None and taken < len(trace.steps):
            s = trace.steps[taken]
            try:
                store = ci.run_function(store, s.function, list(s.args), s.env)
            except (Revert, Diverged):
                return None
            taken += 1
            idx = first_false(store)
        if idx is None:
            return None
        return replace(
            trace,
            steps=trace.steps[:taken],
            obligation=print_expr(inv.exprs[idx]),
            obligation_index=idx,
            span=inv.exprs[idx].span,
            length=taken,
        )


# -- replay -----------------------------------------------------------------------


def _find_property(program: ResolvedProgram, trace: Trace):
    for u in program.specs:
        if trace.kind == "function_spec" and isinstance(u, A.FunctionSpec):
            if u.funcName == trace.property_name:
                return u
        elif trace.kind == "invariant" and isinstance(u, A.InvariantDecl):
            if u.name == trace.property_name:
                return u
        elif trace.kind == "rule" and isinstance(u, A.RuleDecl):
            if u.name == trace.property_name:
                return u
    raise ValueError(
        f"no {trace.kind} property named {trace.property_name!r} in the program"
    )


def _check_trace(ci: ConcreteInterp, prop, trace: Trace) -> bool:
    try:
        if isinstance(prop, A.FunctionSpec):
            return _check_fspec_trace(ci, prop, trace)
        if isinstance(prop, A.InvariantDecl):
            return _check_invariant_trace(ci, prop, trace)
        if isinstance(prop, A.RuleDecl):
            return _check_rule_trace(ci, prop, trace)
    except (Revert, Diverged, KeyError, IndexError):
        return False
    return False


def _check_fspec_trace(ci: ConcreteInterp, spec: A.FunctionSpec, trace: Trace) -> bool:
    if not trace.steps or trace.steps[-1].function != spec.funcName:
        return False
    store = dict(trace.initial_state)
    for s in trace.steps[:-1]:
        store = ci.run_function(store, s.function, list(s.args), s.env)
    last = trace.steps[-1]
    fdef = ci.info.functions[spec.funcName]
    params = {p.name: v for p, v in zip(fdef.params, last.args)}
    for e in spec.pre:
        if not ci.eval_spec(e, store, params=params, env=last.env):
            return False
    after = ci.run_function(store, spec.funcName, list(last.args), last.env)
    got = ci.eval_spec(
        spec.post[trace.obligation_index], after, old_store=store, params=params, env=last.env
    )
    return not bool(got)


def _check_invariant_trace(ci: ConcreteInterp, inv: A.InvariantDecl, trace: Trace) -> bool:
    store = dict(trace.initial_state)

    def holds(st) -> bool:
        return all(bool(ci.eval_spec(e, st)) for e in inv.exprs)

    if not trace.steps:
        return not bool(ci.eval_spec(inv.exprs[trace.obligation_index], store))
    if not holds(store):
        return False
    for s in trace.steps[:-1]:
        store = ci.run_function(store, s.function, list(s.args), s.env)
        if not holds(store):
            return False
    last = trace.steps[-1]
    store = ci.run_function(store, last.function, list(last.args), last.env)
    return not bool(ci.eval_spec(inv.exprs[trace.obligation_index], store))


def _check_rule_trace(ci: ConcreteInterp, rule: A.RuleDecl, trace: Trace) -> bool:
    store = dict(trace.initial_state)
    for s in trace.steps:
        store = ci.run_function(store, s.function, list(s.args), s.env)
    env = trace.rule_env or {"sender": 0, "value": 0, "timestamp": 0}
    init = dict(store)
    locals_: dict = {}
    assert_no = 0
    for stmt in rule.body:
        if isinstance(stmt, A.SpecLetStmt):
            if stmt.init is None:
                if stmt.name not in trace.rulevars:
                    return False
                locals_[stmt.name] = trace.rulevars[stmt.name]
            else:
                locals_[stmt.name] = ci.eval_spec(
                    stmt.init, store, old_store=init, params=locals_, env=env, rulevars=locals_
                )
        elif isinstance(stmt, A.AssumeStmt):
            if not ci.eval_spec(
                stmt.cond, store, old_store=init, params=locals_, env=env, rulevars=locals_
            ):
                return False
        elif isinstance(stmt, A.SpecCallStmt):
            call = stmt.call
            args = [
                ci.eval_spec(a, store, old_store=init, params=locals_, env=env, rulevars=locals_)
                for a in call.args
            ]
            store = ci.run_function(store, call.binding[1], args, env)
        elif isinstance(stmt, A.SpecAssertStmt):
            got = ci.eval_spec(
                stmt.cond, store, old_store=init, params=locals_, env=env, rulevars=locals_
            )
            if assert_no == trace.obligation_index:
                return not bool(got)
            if not got:
                return False
            assert_no += 1
        else:
            return False
    return False


# -- public entry points --------------------------------------------------------


def verify_function_spec(
    program: ResolvedProgram,
    spec: A.FunctionSpec,
    config: Optional[VerifierConfig] = None,
    contract: Optional[str] = None,
) -> Verdict:
    """Check every postcondition of one function against all of its paths,
    assuming the declared preconditions."""
    v = _Verifier(program, contract, config or VerifierConfig())
    return v.function_spec(spec)


def verify_invariant(
    program: ResolvedProgram,
    inv: A.InvariantDecl,
    config: Optional[VerifierConfig] = None,
    contract: Optional[str] = None,
) -> dict[str, Verdict]:
    """Check the inductive step {inv} f {inv} for every public function.

    Returns one verdict per function name. A confirmed refutation is a
    whole-property fact (a reachable state where the invariant fails), so
    every function whose inductive step is satisfiable shares it.
    """
    v = _Verifier(program, contract, config or VerifierConfig())
    cache: list = []

    def confirm() -> Verdict:
        if not cache:
            cache.append(v.bmc(inv))
        return cache[0]

    return {
        f.name: v.invariant_step(inv, f, confirm) for f in v.info.public_functions()
    }


def verify_rule(
    program: ResolvedProgram,
    rule: A.RuleDecl,
    config: Optional[VerifierConfig] = None,
    contract: Optional[str] = None,
) -> Verdict:
    """Check every assert in a rule body over all executions of its calls."""
    v = _Verifier(program, contract, config or VerifierConfig())
    return v.rule(rule)


def bmc_refute(
    program: ResolvedProgram,
    prop: Union[A.FunctionSpec, A.InvariantDecl, A.RuleDecl],
    depth: int = 3,
    config: Optional[VerifierConfig] = None,
    contract: Optional[str] = None,
) -> Verdict:
    """Search for a concrete, replay-checked counterexample of at most
    `depth` calls starting from a fresh deployment. Returns Violated with
    the trace, or Unknown when none is found within the bound."""
    v = _Verifier(program, contract, config or VerifierConfig())
    return v.bmc(prop, depth)


def replay(
    program: ResolvedProgram,
    trace: Trace,
    contract: Optional[str] = None,
    word_bits: int = 256,
) -> bool:
    """Re-run a counterexample trace on the concrete interpreter and check
    that it drives exactly the reported obligation to false."""
    prop = _find_property(program, trace)
    ci = ConcreteInterp(program, contract, word_bits)
    return _check_trace(ci, prop, trace)
