"""Static validity checking for specification units.

The checker re-runs the spec-side resolution rules against an already
resolved program and reports problems as data rather than raising, so a
candidate property produced by the generation loop can be graded without
exception plumbing. It also answers the coverage question: does a rule
actually exercise the function it is supposed to test?
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .frontend import ast as A
from .frontend.diagnostics import Diagnostic
from .frontend.resolver import ResolvedProgram, resolve_spec_unit

__all__ = ["CheckReport", "check_spec", "check_target_coverage"]


@dataclass
class CheckReport:
    """Outcome of checking one or more spec units.

    ok is true exactly when issues is empty. coverage maps each rule name
    to whether the rule body calls the target function (or, when no target
    is given, whether it calls any contract function at all).
    """

    ok: bool
    issues: list[Diagnostic] = field(default_factory=list)
    coverage: dict[str, bool] = field(default_factory=dict)


def _rule_callees(rule: A.RuleDecl) -> list[str]:
    """Names of resolved direct callees of a rule body, in order."""
    names = []
    for stmt in rule.body:
        if not isinstance(stmt, A.SpecCallStmt):
            continue
        binding = stmt.call.binding
        if binding and binding[0] == "internal":
            names.append(binding[1])
    return names


def check_spec(program: ResolvedProgram, spec, target: str | None = None) -> CheckReport:
    """Check one spec unit (or a list of them) against a resolved program.

    Every unit is re-resolved from scratch against the program's primary
    contract; any diagnostic that resolution would raise is collected into
    the report instead. Never raises for spec-level problems.
    """
    units = spec if isinstance(spec, (list, tuple)) else [spec]
    issues: list[Diagnostic] = []
    coverage: dict[str, bool] = {}
    for unit in units:
        resolved, diags = resolve_spec_unit(program, unit)
        issues.extend(diags)
        if isinstance(resolved, A.RuleDecl):
            if diags:
                coverage[resolved.name] = False
            elif target is not None:
                coverage[resolved.name] = check_target_coverage(resolved, target, program)
            else:
                coverage[resolved.name] = bool(_rule_callees(resolved))
    return CheckReport(ok=not issues, issues=issues, coverage=coverage)


def check_target_coverage(
    rule: A.RuleDecl, target: str, program: ResolvedProgram | None = None
) -> bool:
    """True iff the rule body contains at least one call whose resolved
    callee is the named target function.

    Only direct call statements count; a rule-local variable that happens
    to share the target's name never does. When the program is supplied the
    target name is validated against its primary contract.
    """
    if program is not None:
        info = program.contract()
        if target not in info.functions:
            raise ValueError(f"unknown target function: {target}")
    return target in _rule_callees(rule)
