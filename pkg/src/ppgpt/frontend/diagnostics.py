"""Diagnostics: source spans, error records, and their text rendering.

Diagnostic text is consumed verbatim by the revise loop, so the format is
frozen: one line per diagnostic, ``CODE file:line:col: message``.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Span:
    """Half-open byte range [start, end) plus the 1-based line/column of start.

    Columns count bytes, not characters, so they stay stable for any UTF-8
    input without needing the original text at render time.
    """

    start: int
    end: int
    line: int
    col: int
    file: str = "<input>"

    def cover(self, other: "Span") -> "Span":
        """Smallest span containing both self and other (same file)."""
        if other.start < self.start:
            first = other
        else:
            first = self
        return Span(
            min(self.start, other.start),
            max(self.end, other.end),
            first.line,
            first.col,
            self.file,
        )


DUMMY_SPAN = Span(0, 0, 1, 1)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: Span
    severity: str = "error"

    def render(self) -> str:
        s = self.span
        return f"{self.code} {s.file}:{s.line}:{s.col}: {self.message}"


class CompileError(Exception):
    """Raised by parse/resolve entry points; carries the diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__(render_diagnostics(self.diagnostics).rstrip("\n"))


def render_diagnostics(diags: list[Diagnostic]) -> str:
    """Render diagnostics one per line, ordered by (file, span start).

    Returns "" for an empty list; otherwise every line ends with a newline.
    The output feeds the revise prompt's {error_info} slot byte-exactly.
    """
    ordered = sorted(diags, key=lambda d: (d.span.file, d.span.start, d.code))
    return "".join(d.render() + "\n" for d in ordered)


def error(code: str, message: str, span: Span) -> Diagnostic:
    return Diagnostic(code=code, message=message, span=span)


# Diagnostic codes used across the compiler.
LEX_ERROR = "LEX001"
SYNTAX_ERROR = "SYN001"
UNSUPPORTED = "SYN002"
UNDECLARED = "RES001"
TYPE_MISMATCH = "RES002"
INHERITANCE_ERROR = "RES003"
DUPLICATE_DECL = "RES004"
STATEMENT_FORM = "SPEC001"
SYMBOLIC_OUTSIDE_RULE = "SPEC002"
OLD_MISUSE = "SPEC003"
UNKNOWN_TARGET = "SPEC004"
NOT_BOOLEAN = "SPEC005"
