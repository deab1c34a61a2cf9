"""Tokenizer shared by the contract (.msol) and specification (.psl) parsers."""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import CompileError, LEX_ERROR, Span, error

# Words with syntactic weight. Type names, msg/block/super and the spec
# keywords stay plain identifiers; the parsers decide what they mean.
KEYWORDS = {
    "pragma",
    "contract",
    "is",
    "struct",
    "event",
    "modifier",
    "function",
    "constructor",
    "returns",
    "mapping",
    "if",
    "else",
    "for",
    "while",
    "require",
    "assert",
    "revert",
    "return",
    "emit",
    "new",
    "true",
    "false",
    "public",
    "external",
    "internal",
    "private",
    "view",
    "pure",
    "payable",
    "virtual",
    "override",
    "memory",
    "storage",
    "calldata",
    "invariant",
    "rule",
    "precondition",
    "postcondition",
    "assume",
}

# Longest-match first.
OPERATORS = [
    "=>",
    "==",
    "!=",
    "<=",
    ">=",
    "&&",
    "||",
    "+=",
    "-=",
    "*=",
    "/=",
    "%=",
    "&",
    "|",
    "!",
    "<",
    ">",
    "+",
    "-",
    "*",
    "/",
    "%",
    "=",
    "(",
    ")",
    "{",
    "}",
    "[",
    "]",
    ";",
    ",",
    ".",
    ":",
    "?",
    "^",
    "~",
]


@dataclass(frozen=True)
class Token:
    kind: str  # ident | keyword | number | string | op | eof
    text: str
    span: Span


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch in "_$"


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch in "_$"


class Lexer:
    def __init__(self, source: str, file: str = "<input>"):
        self.src = source
        self.file = file
        self.pos = 0  # byte offset
        self.line = 1
        self.col = 1
        # Work on bytes so spans and columns are byte-accurate for UTF-8.
        self.data = source.encode("utf-8")

    def _span(self, start: int, start_line: int, start_col: int) -> Span:
        return Span(start, self.pos, start_line, start_col, self.file)

    def _peek(self, ahead: int = 0) -> str:
        i = self.pos + ahead
        if i >= len(self.data):
            return ""
        return chr(self.data[i])

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos >= len(self.data):
                return
            ch = self.data[self.pos]
            self.pos += 1
            if ch == 0x0A:
                self.line += 1
                self.col = 1
            else:
                self.col += 1

    def _skip_trivia(self) -> None:
        while self.pos < len(self.data):
            ch = self._peek()
            if ch in " \t\r\n":
                self._advance()
            elif ch == "/" and self._peek(1) == "/":
                while self.pos < len(self.data) and self._peek() != "\n":
                    self._advance()
            elif ch == "/" and self._peek(1) == "*":
                start, line, col = self.pos, self.line, self.col
                self._advance(2)
                while self.pos < len(self.data):
                    if self._peek() == "*" and self._peek(1) == "/":
                        self._advance(2)
                        break
                    self._advance()
                else:
                    raise CompileError(
                        [error(LEX_ERROR, "unterminated block comment", self._span(start, line, col))]
                    )
            else:
                return

    def tokens(self) -> list[Token]:
        out: list[Token] = []
        while True:
            self._skip_trivia()
            start, line, col = self.pos, self.line, self.col
            if self.pos >= len(self.data):
                out.append(Token("eof", "", self._span(start, line, col)))
                return out
            ch = self._peek()

            if _is_ident_start(ch):
                while self.pos < len(self.data) and _is_ident_char(self._peek()):
                    self._advance()
                text = self.data[start : self.pos].decode("utf-8")
                kind = "keyword" if text in KEYWORDS else "ident"
                out.append(Token(kind, text, self._span(start, line, col)))
                continue

            if ch.isdigit():
                if ch == "0" and self._peek(1) in "xX":
                    self._advance(2)
                    if not self._peek().lower() in "0123456789abcdef":
                        raise CompileError(
                            [error(LEX_ERROR, "malformed hex literal", self._span(start, line, col))]
                        )
                    while self._peek().lower() in "0123456789abcdef":
                        self._advance()
                else:
                    while self._peek().isdigit():
                        self._advance()
                if _is_ident_start(self._peek()):
                    raise CompileError(
                        [error(LEX_ERROR, "identifier cannot start with a digit", self._span(start, line, col))]
                    )
                text = self.data[start : self.pos].decode("utf-8")
                out.append(Token("number", text, self._span(start, line, col)))
                continue

            if ch == '"':
                self._advance()
                buf = []
                while True:
                    if self.pos >= len(self.data) or self._peek() == "\n":
                        raise CompileError(
                            [error(LEX_ERROR, "unterminated string literal", self._span(start, line, col))]
                        )
                    c = self._peek()
                    if c == "\\":
                        esc = self._peek(1)
                        mapped = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc)
                        if mapped is None:
                            raise CompileError(
                                [error(LEX_ERROR, f"unknown escape \\{esc}", self._span(start, line, col))]
                            )
                        buf.append(mapped)
                        self._advance(2)
                    elif c == '"':
                        self._advance()
                        break
                    else:
                        buf.append(c)
                        self._advance()
                out.append(Token("string", "".join(buf), self._span(start, line, col)))
                continue

            for op in OPERATORS:
                if self._matches(op):
                    self._advance(len(op))
                    out.append(Token("op", op, self._span(start, line, col)))
                    break
            else:
                raise CompileError(
                    [error(LEX_ERROR, f"unexpected character {ch!r}", self._span(start, line, col))]
                )

    def _matches(self, op: str) -> bool:
        end = self.pos + len(op)
        return self.data[self.pos : end].decode("utf-8", "replace") == op


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    return Lexer(source, file).tokens()
