"""Parser, printer, and resolver behavior."""

import glob
import os
import time

import pytest

import ppgpt.frontend.ast as A
from ppgpt.frontend import (
    CompileError,
    parse_contract,
    parse_spec,
    print_spec_units,
    render_diagnostics,
    resolve,
)
from ppgpt.spec_checker import resolve_spec_unit

from util import CORPUS, read_fixture, strip


def corpus_files():
    return sorted(glob.glob(os.path.join(CORPUS, "*.psl")))


def test_corpus_is_large_enough():
    assert len(corpus_files()) >= 20


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: os.path.basename(p))
def test_corpus_round_trip(path):
    with open(path, "r", encoding="utf-8") as fh:
        source = fh.read()
    units = parse_spec(source, file=os.path.basename(path))
    printed = print_spec_units(units)
    reparsed = parse_spec(printed, file="printed.psl")
    assert strip(reparsed) == strip(units)


def test_corpus_round_trip_is_fast():
    start = time.monotonic()
    for path in corpus_files():
        with open(path, "r", encoding="utf-8") as fh:
            source = fh.read()
        units = parse_spec(source, file=os.path.basename(path))
        assert strip(parse_spec(print_spec_units(units), file="p.psl")) == strip(units)
    assert time.monotonic() - start < 5.0


def test_printing_is_deterministic():
    source = read_fixture("envelope_rule.psl")
    units = parse_spec(source, file="r.psl")
    assert print_spec_units(units) == print_spec_units(parse_spec(source, file="r.psl"))


def test_statement_in_precondition_is_rejected():
    bad = """
function transfer {
    precondition {
        if (x > 0) { y = 1; }
    }
    postcondition {
        x >= 0;
    }
}
"""
    with pytest.raises(CompileError) as excinfo:
        parse_spec(bad, file="bad.psl")
    diags = excinfo.value.diagnostics
    assert any(d.code == "SPEC001" for d in diags)
    rendered = render_diagnostics(diags)
    assert "only expression statements are allowed in a precondition block" in rendered


def test_old_and_old_alias_parse_to_the_same_node():
    a = parse_spec("function f { postcondition { x == old(x); } }", file="a.psl")
    b = parse_spec("function f { postcondition { x == __old__(x); } }", file="b.psl")
    assert strip(a) == strip(b)


def test_minimal_contract_parses():
    unit = parse_contract(
        "contract T { uint256 public v; function f() public { v = 1; } }", "t.msol"
    )
    contract = unit.contracts[0]
    assert contract.name == "T"
    assert [v.name for v in contract.stateVars] == ["v"]
    assert [f.name for f in contract.functions] == ["f"]


def test_malformed_contract_reports_diagnostics():
    with pytest.raises(CompileError) as excinfo:
        parse_contract("contract {", "broken.msol")
    assert excinfo.value.diagnostics


def test_case_study_contract_parses():
    unit = parse_contract(read_fixture("zklink.msol"), "zklink.msol")
    contract = unit.contracts[0]
    names = [f.name for f in contract.functions]
    assert "withdrawForwardFee" in names
    assert "collectForwardFee" in names
    assert len(contract.stateVars) == 5


def test_case_study_spec_shape():
    units = parse_spec(read_fixture("zklink.psl"), file="zklink.psl")
    assert len(units) == 1
    spec = units[0]
    assert isinstance(spec, A.FunctionSpec)
    assert spec.funcName == "withdrawForwardFee"
    assert len(spec.pre) == 3
    assert len(spec.post) == 2


def test_spans_nest_within_parents():
    source = read_fixture("envelope.msol")
    unit = parse_contract(source, "envelope.msol")
    contract = unit.contracts[0]
    assert unit.span.start <= contract.span.start <= contract.span.end <= unit.span.end
    for fdef in contract.functions:
        assert contract.span.start <= fdef.span.start
        assert fdef.span.end <= contract.span.end
        for stmt in fdef.body.stmts:
            assert fdef.span.start <= stmt.span.start <= stmt.span.end <= fdef.span.end


def test_function_span_slices_back_to_source():
    source = read_fixture("envelope.msol")
    unit = parse_contract(source, "envelope.msol")
    fdef = unit.contracts[0].functions[0]
    text = source[fdef.span.start : fdef.span.end]
    assert text.startswith("function addEnvelope")
    assert text.rstrip().endswith("}")


DIAMOND = """
contract A { uint256 public x; function f() public virtual { x = 1; } }
contract B is A { function f() public virtual override { x = 2; } }
contract C is A { function f() public virtual override { x = 3; } }
contract D is B, C { function f() public override { super.f(); } }
"""


def test_diamond_linearization():
    program = resolve([parse_contract(DIAMOND, "lin.msol")])
    info = program.contract("D")
    assert [c for c in info.linearization] == ["D", "C", "B", "A"]


def test_super_dispatch_follows_linearization():
    program = resolve([parse_contract(DIAMOND, "lin.msol")])
    home, fdef = program.resolve_super("D", "D", "f")
    assert home == "C"
    assert fdef.name == "f"


def test_undeclared_variable_in_spec_is_reported():
    program = resolve([parse_contract(DIAMOND, "lin.msol")])
    units = parse_spec("rule r() { assert(nosuchvar > 0); }", file="bad.psl")
    _, diags = resolve_spec_unit(program, units[0])
    assert len(diags) == 1
    rendered = render_diagnostics(diags)
    assert rendered.startswith("RES001 bad.psl:1:19:")
    assert "use of undeclared variable 'nosuchvar'" in rendered


def test_rule_symbolic_vars_are_single_assignment():
    program = resolve(
        [parse_contract("contract T { uint256 public v; }", "t.msol")]
    )
    units = parse_spec(
        "rule r() { uint256 $a; $a = v; assert($a >= 0); }", file="dup.psl"
    )
    _, diags = resolve_spec_unit(program, units[0])
    assert any(d.code == "RES004" for d in diags)
    assert any("already bound in this rule" in d.message for d in diags)
