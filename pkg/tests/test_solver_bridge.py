"""SMT solver bridge: encoding, solving, batching, model evaluation."""

import pytest

from ppgpt.solver_bridge import (
    ArrayModel,
    Formula,
    Sat,
    SolverConfig,
    Unsat,
    check_sat,
    check_sat_many,
    encode_formula,
    eval_formula,
    eval_term,
)
from ppgpt.solver_bridge import App, Sym
from ppgpt.symexec.terms import (
    BOOL,
    INT,
    mk_add,
    mk_and,
    mk_distinct,
    mk_eq,
    mk_int,
    mk_lt,
    mk_not,
    mk_select,
    mk_store,
    sha3_injectivity_axioms,
)
import ppgpt.symexec.terms as T


def sym(name, sort=INT):
    return Sym(sort, name)


def sha3(arg):
    return App(INT, "sha3$1", (arg,))


def test_sat_with_model():
    x = sym("x")
    verdict = check_sat(Formula(assertions=[mk_eq(x, mk_int(5))]))
    assert isinstance(verdict, Sat)
    assert verdict.model["x"] == 5


def test_unsat():
    x = sym("x")
    f = Formula(assertions=[mk_lt(x, mk_int(0)), mk_lt(mk_int(0), x)])
    assert isinstance(check_sat(f), Unsat)


def test_model_satisfies_formula():
    x, y = sym("x"), sym("y")
    f = Formula(
        assertions=[mk_lt(x, y), mk_eq(mk_add(x, y), mk_int(10))]
    )
    verdict = check_sat(f)
    assert isinstance(verdict, Sat)
    assert eval_formula(f, verdict.model)


def test_batched_checks_match_individual_checks():
    x = sym("x")
    formulas = [
        Formula(assertions=[mk_eq(x, mk_int(i))]) for i in range(4)
    ] + [Formula(assertions=[mk_lt(x, mk_int(0)), mk_lt(mk_int(0), x)])]
    batched = check_sat_many(formulas)
    assert len(batched) == 5
    for f, b in zip(formulas, batched):
        single = check_sat(f)
        assert type(single) is type(b)
        if isinstance(b, Sat):
            assert eval_formula(f, b.model)


def test_array_theory():
    m = sym("m", ("Arr", INT, INT))
    k, v = sym("k"), sym("v")
    f = Formula(
        assertions=[
            mk_eq(mk_select(mk_store(m, k, v), k), mk_int(7)),
            mk_eq(mk_select(m, mk_int(3)), mk_int(9)),
            mk_distinct(k, mk_int(3)),
        ]
    )
    verdict = check_sat(f)
    assert isinstance(verdict, Sat)
    arr = verdict.model.get("m")
    assert isinstance(arr, ArrayModel)
    assert arr.get(3) == 9


def test_hash_is_uninterpreted_without_axioms():
    a, b = sym("a"), sym("b")
    ha = sha3(a)
    hb = sha3(b)
    f = Formula(assertions=[mk_eq(ha, hb), mk_distinct(a, b)])
    assert isinstance(check_sat(f), Sat)


def test_injectivity_axioms_force_equal_preimages():
    a, b = sym("a"), sym("b")
    ha = sha3(a)
    hb = sha3(b)
    assertions = [mk_eq(ha, hb), mk_distinct(a, b)]
    f = Formula(assertions=assertions, axioms=sha3_injectivity_axioms(assertions))
    assert isinstance(check_sat(f), Unsat)


def test_encoding_is_deterministic():
    x, y = sym("x"), sym("y")
    f = Formula(assertions=[mk_and(mk_lt(x, y), mk_eq(x, mk_int(1)))])
    assert encode_formula(f) == encode_formula(f)
    script = encode_formula(f)
    assert "(set-logic ALL)" in script
    assert script.index("declare-fun x") < script.index("declare-fun y")


def test_eval_term_defaults_for_missing_symbols():
    x = sym("x")
    flag = sym("flag", BOOL)
    arr = sym("arr", ("Arr", INT, INT))
    assert eval_term(x, {}) == 0
    assert eval_term(flag, {}) is False
    assert eval_term(mk_select(arr, mk_int(2)), {}) == 0


def test_eval_term_arithmetic_and_logic():
    x = sym("x")
    model = {"x": 6}
    assert eval_term(mk_add(x, mk_int(4)), model) == 10
    assert eval_term(T.mk_div(x, mk_int(4)), model) == 1
    assert eval_term(T.mk_mod(x, mk_int(4)), model) == 2
    assert eval_term(T.mk_div(x, mk_int(0)), model) == 0
    assert eval_term(mk_not(mk_lt(x, mk_int(3))), model) is True


def test_timeout_configuration_is_accepted():
    x = sym("x")
    verdict = check_sat(Formula(assertions=[mk_eq(x, mk_int(1))]), SolverConfig(timeout_ms=30000))
    assert isinstance(verdict, Sat)
