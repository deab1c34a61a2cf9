"""Spec validity checking and rule coverage."""

import pytest

from ppgpt.frontend import parse_contract, parse_spec, resolve
from ppgpt.spec_checker import CheckReport, check_spec, check_target_coverage


@pytest.fixture()
def program():
    src = """
contract Bank {
    uint256 public balance;
    uint256 public fees;

    function deposit(uint256 amount) public {
        balance = balance + amount;
    }

    function skim() public {
        fees = fees + 1;
    }
}
"""
    return resolve([parse_contract(src, "bank.msol")])


def units(text):
    return parse_spec(text, file="spec.psl")


def test_clean_spec_reports_ok(program):
    report = check_spec(program, units("invariant solvent { balance >= 0; }"))
    assert isinstance(report, CheckReport)
    assert report.ok
    assert report.issues == []


def test_problems_are_reported_not_raised(program):
    report = check_spec(program, units("invariant bad { missing > 0; }"))
    assert not report.ok
    assert report.issues
    assert all(hasattr(d, "code") and hasattr(d, "message") for d in report.issues)


def test_unknown_function_in_condition_spec(program):
    report = check_spec(
        program, units("function nosuch { precondition { balance > 0; } postcondition { balance > 0; } }")
    )
    assert not report.ok


def test_rule_covering_target(program):
    report = check_spec(
        program,
        units("rule checkDeposit() { uint256 $a; deposit($a); assert(balance >= 0); }"),
        target="deposit",
    )
    assert report.ok
    assert report.coverage == {"checkDeposit": True}


def test_rule_missing_target(program):
    report = check_spec(
        program,
        units("rule checkDeposit() { skim(); assert(balance >= 0); }"),
        target="deposit",
    )
    assert report.ok
    assert report.coverage == {"checkDeposit": False}


def test_rule_with_no_calls_and_no_target(program):
    report = check_spec(program, units("rule idle() { assert(balance >= 0); }"))
    assert report.coverage == {"idle": False}


def test_rule_with_any_call_and_no_target(program):
    report = check_spec(program, units("rule active() { skim(); assert(fees >= 0); }"))
    assert report.coverage == {"active": True}


def test_broken_rule_counts_as_uncovered(program):
    report = check_spec(
        program,
        units("rule broken() { deposit(ghost); assert(balance >= 0); }"),
        target="deposit",
    )
    assert not report.ok
    assert report.coverage == {"broken": False}


def test_check_accepts_a_list(program):
    spec = units(
        "invariant a { balance >= 0; }\n"
        "rule b() { skim(); assert(fees >= 0); }"
    )
    report = check_spec(program, spec, target="skim")
    assert report.ok
    assert report.coverage == {"b": True}


def test_target_coverage_direct(program):
    rule = units("rule r() { deposit(1); assert(balance >= 0); }")[0]
    resolved = check_spec(program, rule, target="deposit")
    assert resolved.coverage["r"] is True


def test_target_coverage_validates_target_name(program):
    spec = units("rule r() { deposit(1); assert(balance >= 0); }")
    report = check_spec(program, spec)
    with pytest.raises(ValueError, match="unknown target function"):
        check_target_coverage(spec[0], "nosuch", program)
    assert report.ok
