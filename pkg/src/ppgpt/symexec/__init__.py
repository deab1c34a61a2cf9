"""Symbolic execution: term language, machine state, and the executor."""

from .executor import (
    DEFAULT_OPTIONS,
    ExecOptions,
    ExecUnsupported,
    eval_spec_expr,
    execute_deployment,
    execute_function,
    execute_rule_body,
    init_state,
)
from .state import (
    CallRecord,
    Env,
    Normal,
    Obligation,
    PathOutcome,
    Reverted,
    StructVal,
    SymState,
)
from . import terms

__all__ = [
    "DEFAULT_OPTIONS",
    "ExecOptions",
    "ExecUnsupported",
    "eval_spec_expr",
    "execute_deployment",
    "execute_function",
    "execute_rule_body",
    "init_state",
    "CallRecord",
    "Env",
    "Normal",
    "Obligation",
    "PathOutcome",
    "Reverted",
    "StructVal",
    "SymState",
    "terms",
]
