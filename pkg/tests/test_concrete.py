"""Concrete interpreter: deployment, execution, reverts, spec evaluation."""

import pytest

from ppgpt.frontend import parse_contract, parse_spec, resolve
from ppgpt.spec_checker import resolve_spec_unit
from ppgpt.solver_bridge import ArrayModel
from ppgpt.verifier.concrete import ConcreteInterp, Diverged, Revert

SOURCE = """
contract Ledger {
    mapping(address => uint256) public balances;
    uint256 public total;
    uint256 public cap;

    constructor() {
        cap = 100;
    }

    function credit(address who, uint256 amount) public {
        require(total + amount <= cap, "over cap");
        balances[who] = balances[who] + amount;
        total = total + amount;
    }

    function spend(uint256 amount) public {
        balances[msg.sender] = balances[msg.sender] - amount;
        total = total - amount;
    }

    function half(uint256 x) public returns (uint256) {
        return x / 2;
    }

    function sumTo(uint256 n) public returns (uint256) {
        uint256 acc = 0;
        for (uint256 i = 0; i < n; i = i + 1) {
            acc = acc + i;
        }
        return acc;
    }

    function spin() public {
        while (true) {
            total = total + 0;
        }
    }

    function overflowAdd(uint256 x) public {
        total = x + x;
    }
}
"""

ENV = {"sender": 5, "value": 0, "timestamp": 0}


@pytest.fixture()
def program():
    return resolve([parse_contract(SOURCE, "ledger.msol")])


@pytest.fixture()
def interp(program):
    return ConcreteInterp(program)


def test_deploy_runs_constructor(interp):
    store = interp.deploy()
    assert store["cap"] == 100
    assert store["total"] == 0
    assert isinstance(store["balances"], ArrayModel)
    assert store["balances"].get(123) == 0


def test_execution_returns_new_store(interp):
    store = interp.deploy()
    after = interp.run_function(store, "credit", [7, 40], ENV)
    assert after["balances"].get(7) == 40
    assert after["total"] == 40
    assert store["total"] == 0
    assert store["balances"].get(7) == 0


def test_require_failure_reverts_with_message(interp):
    store = interp.deploy()
    with pytest.raises(Revert, match="over cap"):
        interp.run_function(store, "credit", [7, 101], ENV)


def test_unsigned_underflow_reverts(interp):
    store = interp.deploy()
    with pytest.raises(Revert):
        interp.run_function(store, "spend", [1], ENV)


def test_overflow_reverts(interp):
    store = interp.deploy()
    with pytest.raises(Revert, match="overflow"):
        interp.run_function(store, "overflowAdd", [2**255], ENV)


def test_msg_sender_is_read_from_env(interp):
    store = interp.deploy()
    store = interp.run_function(store, "credit", [5, 30], ENV)
    after = interp.run_function(store, "spend", [10], ENV)
    assert after["balances"].get(5) == 20


def test_return_values(interp):
    store = interp.deploy()
    _, value = interp.call_value(store, "half", [9], ENV)
    assert value == 4
    _, total = interp.call_value(store, "sumTo", [4], ENV)
    assert total == 0 + 1 + 2 + 3


def test_runaway_loop_diverges(interp):
    store = interp.deploy()
    with pytest.raises(Diverged):
        interp.run_function(store, "spin", [], ENV)


def test_hash_is_deterministic_and_injective_in_practice(interp):
    assert interp.sha3([1, 2]) == interp.sha3([1, 2])
    assert interp.sha3([1]) != interp.sha3([2])
    assert 0 <= interp.sha3([99]) < 2**256


def test_eval_spec_invariant(program, interp):
    units = parse_spec("invariant bounded { total <= cap; }", file="i.psl")
    inv, diags = resolve_spec_unit(program, units[0])
    assert not diags
    store = interp.deploy()
    assert interp.eval_spec(inv.exprs[0], store) is True
    store = dict(store, total=101)
    assert interp.eval_spec(inv.exprs[0], store) is False


def test_eval_spec_old_state_and_params(program, interp):
    units = parse_spec(
        "function credit {\n"
        "    precondition { amount > 0; }\n"
        "    postcondition { total == old(total) + amount; }\n"
        "}",
        file="c.psl",
    )
    spec, diags = resolve_spec_unit(program, units[0])
    assert not diags
    before = interp.deploy()
    after = interp.run_function(before, "credit", [7, 40], ENV)
    params = {"who": 7, "amount": 40}
    assert interp.eval_spec(spec.pre[0], before, params=params) is True
    assert interp.eval_spec(spec.post[0], after, old_store=before, params=params) is True
    assert interp.eval_spec(spec.post[0], after, old_store=after, params=params) is False


def test_zero_store_has_defaults(interp):
    store = interp.zero_store()
    assert store["total"] == 0
    assert store["cap"] == 0
    assert store["balances"].get(0) == 0
