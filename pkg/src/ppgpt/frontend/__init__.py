"""Compiler frontend: parsing, printing, and resolution for MiniSol and PSL."""

from . import ast
from .diagnostics import (
    CompileError,
    Diagnostic,
    Span,
    render_diagnostics,
)
from .parser import parse_contract, parse_spec
from .printer import print_source_unit, print_spec_unit, print_spec_units
from .resolver import ContractInfo, ResolvedProgram, resolve

__all__ = [
    "ast",
    "CompileError",
    "Diagnostic",
    "Span",
    "ContractInfo",
    "ResolvedProgram",
    "parse_contract",
    "parse_spec",
    "print_source_unit",
    "print_spec_unit",
    "print_spec_units",
    "render_diagnostics",
    "resolve",
]
