"""Verifier verdicts: modular proofs, BMC confirmation, replay, havoc."""

import pytest

from ppgpt.frontend import parse_contract, parse_spec, resolve
from ppgpt.solver_bridge import SolverConfig
from ppgpt.spec_checker import resolve_spec_unit
from ppgpt.symexec import ExecOptions
from ppgpt.verifier import (
    Proven,
    Trace,
    Unknown,
    VacuouslyProven,
    VerifierConfig,
    Violated,
    replay,
    verdict_name,
    verify_function_spec,
    verify_invariant,
    verify_rule,
)

CFG = VerifierConfig(depth=3, solver=SolverConfig(), options=ExecOptions(loop_bound=5))

BOX = """
contract Box {
    uint256 public items;
    uint256 public capacity;

    function setCapacity(uint256 c) public {
        capacity = c;
    }

    function put() public {
        items = items + 1;
    }

    function take() public {
        require(items > 0, "empty");
        items = items - 1;
    }
}
"""

BOX_SPECS = """
function take {
    precondition { items > 0; items < 1000; }
    postcondition { items == old(items) - 1; }
}
function put {
    precondition { items < 1000; capacity < 1000; }
    postcondition { items <= capacity; }
}
function put {
    precondition { items > items; }
    postcondition { items == 0; }
}
rule overfill() {
    assume(items == capacity);
    put();
    assert(items <= capacity);
}
rule takeDecrements() {
    assume(items > 0);
    $before = items;
    take();
    assert(items == $before - 1);
}
rule unreachable() {
    assume(items > items);
    put();
    assert(items == 0);
}
invariant capped { items <= capacity; }
"""


@pytest.fixture(scope="module")
def box():
    return resolve(
        [parse_contract(BOX, "box.msol")],
        specs=parse_spec(BOX_SPECS, file="box.psl"),
    )


def spec(program, i):
    return program.specs[i]


def test_function_spec_proven(box):
    assert isinstance(verify_function_spec(box, spec(box, 0), CFG), Proven)


def test_function_spec_violated_with_replayable_trace(box):
    verdict = verify_function_spec(box, spec(box, 1), CFG)
    assert isinstance(verdict, Violated)
    trace = verdict.counterexample
    assert isinstance(trace, Trace)
    assert trace.kind == "function_spec"
    assert trace.steps[-1].function == "put"
    assert trace.length <= CFG.depth
    assert replay(box, trace) is True


def test_function_spec_vacuous_when_pre_unsatisfiable(box):
    assert isinstance(verify_function_spec(box, spec(box, 2), CFG), VacuouslyProven)


def test_rule_violated_with_replayable_trace(box):
    verdict = verify_rule(box, spec(box, 3), CFG)
    assert isinstance(verdict, Violated)
    trace = verdict.counterexample
    assert trace.kind == "rule"
    assert trace.property_name == "overfill"
    assert trace.length <= CFG.depth
    assert replay(box, trace) is True


def test_rule_proven(box):
    assert isinstance(verify_rule(box, spec(box, 4), CFG), Proven)


def test_rule_vacuous_when_assumptions_unsatisfiable(box):
    assert isinstance(verify_rule(box, spec(box, 5), CFG), VacuouslyProven)


def test_invariant_reports_per_function_verdicts(box):
    results = verify_invariant(box, spec(box, 6), CFG)
    assert set(results) == {"setCapacity", "put", "take"}
    assert isinstance(results["take"], Proven)
    assert isinstance(results["put"], Violated)
    assert replay(box, results["put"].counterexample) is True


def test_verdict_names(box):
    assert verdict_name(Proven()) == "Proven"
    assert verdict_name(VacuouslyProven()) == "VacuouslyProven"
    assert verdict_name(Unknown(reason="x")) == "Unknown"


LOOPER = """
contract Looper {
    uint256 public acc;

    function addTen() public {
        for (uint256 i = 0; i < 10; i = i + 1) {
            acc = acc + 1;
        }
    }
}
"""


def test_loop_beyond_bound_yields_unknown():
    program = resolve(
        [parse_contract(LOOPER, "loop.msol")],
        specs=parse_spec(
            "function addTen {\n"
            "    precondition { acc < 1000; }\n"
            "    postcondition { acc == old(acc) + 10; }\n"
            "}",
            file="loop.psl",
        ),
    )
    verdict = verify_function_spec(program, program.specs[0], CFG)
    assert isinstance(verdict, Unknown)
    assert verdict.reason == "loop bound"


def test_deep_violation_without_short_witness_stays_unknown():
    source = BOX.replace(
        "function setCapacity(uint256 c) public {\n        capacity = c;\n    }",
        "constructor() { capacity = 9; }",
    )
    program = resolve(
        [parse_contract(source, "deep.msol")],
        specs=parse_spec(
            "function put {\n"
            "    precondition { items < 1000; capacity < 1000; }\n"
            "    postcondition { items <= capacity; }\n"
            "}",
            file="deep.psl",
        ),
    )
    verdict = verify_function_spec(program, program.specs[0], CFG)
    assert isinstance(verdict, Unknown)
    assert verdict.reason == "unconfirmed"


PINGER = """
contract Pinger {
    address public target;
    uint256 public pings;
    bytes32 public lastData;

    function ping() public {
        (bool ok, bytes32 data) = target.call("");
        require(ok, "call failed");
        lastData = data;
        pings = pings + 1;
    }
}
"""

PINGER_SPECS = """
function ping {
    precondition { pings < 1000; }
    postcondition { pings == old(pings) + 1; }
}
function ping {
    precondition { pings < 1000; }
    postcondition { lastData == 0; }
}
rule hashInjective() {
    uint256 $a;
    uint256 $b;
    assume(sha3($a) == sha3($b));
    assert($a == $b);
}
"""


@pytest.fixture(scope="module")
def pinger():
    return resolve(
        [parse_contract(PINGER, "pinger.msol")],
        specs=parse_spec(PINGER_SPECS, file="pinger.psl"),
    )


def test_external_call_independent_property_proven(pinger):
    assert isinstance(verify_function_spec(pinger, spec(pinger, 0), CFG), Proven)


def test_external_call_dependent_property_not_proven(pinger):
    verdict = verify_function_spec(pinger, spec(pinger, 1), CFG)
    assert isinstance(verdict, Unknown)
    assert verdict.reason == "unconfirmed"


def test_hash_injectivity_rule_proven(pinger):
    assert isinstance(verify_rule(pinger, spec(pinger, 2), CFG), Proven)


def test_unresolved_spec_can_be_resolved_then_verified(box):
    units = parse_spec(
        "rule takeKeepsNonNegative() { assume(items > 0); take(); assert(items >= 0); }",
        file="extra.psl",
    )
    resolved, diags = resolve_spec_unit(box, units[0])
    assert not diags
    assert isinstance(verify_rule(box, resolved, CFG), Proven)
