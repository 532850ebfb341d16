"""Tokenizer for the .cbm modeling language.

Total over arbitrary input: unknown bytes become ERROR tokens with a
diagnostic instead of raising, so the parser can keep reporting.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import E_LEX, ValidationReport

# token kinds
IDENT = "IDENT"
NUMBER = "NUMBER"
DURATION = "DURATION"
STRING = "STRING"
LBRACE = "LBRACE"
RBRACE = "RBRACE"
LPAREN = "LPAREN"
RPAREN = "RPAREN"
COLON = "COLON"
COMMA = "COMMA"
PLUS = "PLUS"
MINUS = "MINUS"
STAR = "STAR"
SLASH = "SLASH"
CMP = "CMP"
ERROR = "ERROR"
EOF = "EOF"

_PUNCT = {
    "{": LBRACE, "}": RBRACE, "(": LPAREN, ")": RPAREN,
    ":": COLON, ",": COMMA, "+": PLUS, "-": MINUS, "*": STAR, "/": SLASH,
}

_DURATION_UNITS = "mhdw"

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def _is_word_start(c: str) -> bool:
    return c.isascii() and c.isalpha()


def _is_word_char(c: str) -> bool:
    return c == "_" or (c.isascii() and c.isalnum())


def tokenize(source: str) -> tuple[list[Token], ValidationReport]:
    """Scan source into tokens. Returns (tokens ending with EOF, lexical diagnostics)."""
    report = ValidationReport()
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def advance(count: int = 1) -> None:
        nonlocal i, line, col
        for _ in range(count):
            if i < n and source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = source[i]
        if c in " \t\r\n":
            advance()
            continue
        if c == "#":
            while i < n and source[i] != "\n":
                advance()
            continue

        start_line, start_col = line, col

        if c in _PUNCT:
            tokens.append(Token(_PUNCT[c], c, start_line, start_col))
            advance()
            continue

        if c in "<>=":
            two = source[i:i + 2]
            if two in ("<=", ">=", "=="):
                tokens.append(Token(CMP, two, start_line, start_col))
                advance(2)
            elif c in "<>":
                tokens.append(Token(CMP, c, start_line, start_col))
                advance()
            else:
                report.add(E_LEX, start_line, start_col, f"unexpected character {c!r}")
                tokens.append(Token(ERROR, c, start_line, start_col))
                advance()
            continue

        if _is_word_start(c):
            j = i
            while j < n and _is_word_char(source[j]):
                j += 1
            word = source[i:j]
            tokens.append(Token(IDENT, word, start_line, start_col))
            advance(j - i)
            continue

        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            is_float = False
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                is_float = True
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            # exponent, so printed float reprs like 1e-07 re-lex
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    is_float = True
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            if (not is_float and j < n and source[j] in _DURATION_UNITS
                    and (j + 1 >= n or not _is_word_char(source[j + 1]))):
                j += 1
                text = source[i:j]
                tokens.append(Token(DURATION, text, start_line, start_col))
            else:
                tokens.append(Token(NUMBER, source[i:j], start_line, start_col))
            advance(j - i)
            continue

        if c == '"':
            j = i + 1
            value_parts: list[str] = []
            closed = False
            while j < n:
                ch = source[j]
                if ch == '"':
                    closed = True
                    j += 1
                    break
                if ch == "\n":
                    break
                if ch == "\\":
                    if j + 1 < n and source[j + 1] in _ESCAPES:
                        value_parts.append(_ESCAPES[source[j + 1]])
                        j += 2
                        continue
                    report.add(E_LEX, start_line, start_col,
                               f"unknown escape \\{source[j + 1] if j + 1 < n else ''} in string")
                    tokens.append(Token(ERROR, source[i:j + 1], start_line, start_col))
                    closed = None  # error already reported
                    j += 1
                    break
                value_parts.append(ch)
                j += 1
            if closed is True:
                tokens.append(Token(STRING, "".join(value_parts), start_line, start_col))
            elif closed is False:
                report.add(E_LEX, start_line, start_col, "unterminated string")
                tokens.append(Token(ERROR, source[i:j], start_line, start_col))
            advance(j - i)
            continue

        report.add(E_LEX, start_line, start_col, f"unexpected character {c!r}")
        tokens.append(Token(ERROR, c, start_line, start_col))
        advance()

    tokens.append(Token(EOF, "", line, col))
    return tokens, report
