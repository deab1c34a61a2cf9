"""Prompt templates for property generation and revision.

Four fixed templates drive the loop: one to generate rule properties, one
to generate pre/postcondition properties, one to revise a property that
failed to compile, and one to revise a rule that compiles but never
exercises the function under test. Placeholders are single-brace
`{name}` tokens; doubled braces are literal text that must survive
rendering untouched, which is why rendering is a scan for known names
rather than str.format.
"""

from __future__ import annotations

import re

__all__ = [
    "TEMPLATES",
    "PLACEHOLDERS",
    "GRAMMAR_EXAMPLE",
    "build_prompt",
]

RULE_GEN = """\
Based on the rule code ([rule code]) and the code example ([code example]), generate corresponding rule code for [contract code to be tested].
1. Using the syntax style demonstrated in the provided code example, generate rule code. Focus on structural and syntactic aspects rather than replicating specific variable or function names from the example.
2. $ is for a symbolic variable, such as $varA for symbolic varA.
3. MUST NOT replicate specific variable or function names from the [code example].
4. MUST focus on the structural and syntactic aspects from the [code example].
5. When writing the rule code, closely follow the syntax and style from the provided example, focusing on its structural and syntactic essence rather than copying specific names.
6. The output MUST NOT contain any elements not predefined in the contract or function.

[function code to be tested]: {func_code}
[contract code to be tested]: {contract_code}
[rule code]: {rule_property}
[code example]: {spec_grammar}

The Output MUST be in the form of:
rule [name of rule]() {{logic of rule}}
REMEMBER, ASSERT should not include an error message; just use the comparison operator directly.
REMEMBER, the rule must aim to test the function, not for another function.
"""

CONDITION_GEN = """\
Based on the following code ([condition code]), generate the corresponding precondition and postcondition code for [function code to be tested].

1. The basic syntax of preconditions and postconditions is in Solidity code format.
2. You can use the `__old__(xxx)` keyword if you need to reference the initial value of a variable.
3. You can directly use `xxxx==/!=/>/<` without `assert` or `require` to compare the value of the variable.
4. MUST NOT use `require` or `assert` for assertions; just use operator comparison directly.
5. MUST NOT use the ternary operator in the precondition and postcondition, but USE `if/else` expressions.
6. Exclude the event and implementation of the function itself, only output the precondition and postcondition of the function.
7. MUST NOT use any variables that I or the function have not defined, such as __result__, __return__, only follow the syntax I provide.
8. MUST NOT use `if/else` expressions in the precondition and postcondition, but USE the ternary operator.
9. MUST NOT INVOKE other functions or other undefined variables or non-state variables in the contract, only use the state variables in the {func_name} itself.
10. Ignore and delete all conditions related to the return value.

[function code to be tested]: {func_code}
[condition code]: {condition_property}

The Output MUST be in the form of:
function {func_name}{{
    precondition{{
        Insert generated code here, ensuring it follows the syntax style of the example.
    }}
    postcondition{{
        Insert generated code here, ensuring it follows the syntax style of the example.
    }}
}}
"""

COMMON_REVISE = """\
Here is the rule I provided: {spec_res}.
When this code is compiled with a solc-like program, an error occurs: {error_info}.

Your task is to understand the rule I provided, fix the rule code, and correct the error within the rule. Refer to the contract code provided above.
Note, only modify the rule code; do not add other code. If the error is due to a non-existent variable, find feasible methods to reimplement it, or if it is not implementable, delete this line.
Here is the function code to be tested:
{func_code}
Here is the contract code to be tested:
{contract_code}
Provide me with the repaired rule code. The revised rule code must not be the same as the old rule code.
1. Using the syntax style demonstrated in the provided code example, generate a rule code. Focus on the structural and syntactic aspects rather than replicating specific variable or function names from the example.
2. $ is for a symbolic variable, such as $varA which symbolizes varA.

Rule Code Output MUST be in the form of:
rule [name of rule](){{logic of rule}}
REMEMBER, ASSERT does not include an error message, just use the operator comparison directly.
REMEMBER, the rule must aim to test the function [{function_name}], not for other functions.
"""

SPECIAL_REVISE = """\
Here is the knowledge rule you should learn from: {knowledge_rule}.
Here is the rule I provided: {spec_res}.
This rule lacks core function execution for: {function_name}.
The contract code is: {contract_code}.

Your task is to understand the rule I provided, absorb the knowledge provided, and fix the rule code by adding the core function execution for: {function_name}.
Here is the function code that needs to be tested: {func_code}.
Provide me with the revised rule code; the new rule code must not be the same as the old rule code.
1. Using the syntax style demonstrated in the provided code example, generate a rule code. Focus on the structural and syntactic aspects rather than replicating specific variable or function names from the example.
2. $ is for a symbolic variable, such as $varA for symbolic varA.

Rule Code Output MUST be in the form of:
rule [name of rule](){{logic of rule}}
REMEMBER, ASSERT does not include an error message, just use the operator comparison directly.
REMEMBER, the rule must aim to test the function [{function_name}], not for other functions.
"""

#: Style reference shown to the model as [code example]: one rule, one
#: function spec, one invariant, exercising the core property syntax.
GRAMMAR_EXAMPLE = """\
rule checkDeposit() {
    uint256 $amount;
    uint256 before = balance;
    deposit($amount);
    assert(balance == before + $amount);
}

function withdraw {
    precondition {
        amount <= balance;
    }
    postcondition {
        balance == __old__(balance) - amount;
    }
}

invariant solvent {
    totalSupply >= reserved;
}
"""

TEMPLATES: dict[str, str] = {
    "ruleGen": RULE_GEN,
    "conditionGen": CONDITION_GEN,
    "commonRevise": COMMON_REVISE,
    "specialRevise": SPECIAL_REVISE,
}

#: Placeholders each template requires a binding for.
PLACEHOLDERS: dict[str, frozenset[str]] = {
    "ruleGen": frozenset({"func_code", "contract_code", "rule_property", "spec_grammar"}),
    "conditionGen": frozenset({"func_code", "condition_property", "func_name"}),
    "commonRevise": frozenset(
        {"spec_res", "error_info", "func_code", "contract_code", "function_name"}
    ),
    "specialRevise": frozenset(
        {"knowledge_rule", "spec_res", "function_name", "contract_code", "func_code"}
    ),
}

_PLACEHOLDER = re.compile(r"(?<!\{)\{([a-z_]+)\}(?!\})")


def build_prompt(template: str, bindings: dict[str, str]) -> str:
    """Render a named template with the given placeholder bindings.

    Every placeholder the template requires must be bound, or a ValueError
    is raised. Doubled braces in the template are literal and pass through
    unchanged, as does any brace-wrapped text that is not a known
    placeholder name.
    """
    if template not in TEMPLATES:
        raise ValueError(f"unknown template {template!r}; expected one of {', '.join(TEMPLATES)}")
    required = PLACEHOLDERS[template]
    missing = sorted(required - bindings.keys())
    if missing:
        raise ValueError(f"template {template!r} missing placeholder(s): {', '.join(missing)}")

    def sub(m: re.Match) -> str:
        name = m.group(1)
        return str(bindings[name]) if name in bindings else m.group(0)

    return _PLACEHOLDER.sub(sub, TEMPLATES[template])
