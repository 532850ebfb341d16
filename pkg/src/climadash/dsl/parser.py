"""Recursive-descent parser for the .cbm modeling language.

parse_model returns either a Model (declaration order preserved) or a
ValidationReport with at least one positioned error. It never raises on
any input: lexical errors, syntax errors, and over-deep expressions all
become diagnostics, with panic-mode recovery to the next declaration so
several problems are reported in one pass.
"""

from __future__ import annotations

from .ast import (
    AGG_FNS,
    FIELD_KINDS,
    Agg,
    BinOp,
    Datasource,
    Duration,
    Entity,
    Expr,
    Field,
    KpiDef,
    Model,
    Number,
    Target,
)
from .diagnostics import E_SYNTAX, ValidationReport
from .lexer import (
    CMP,
    COLON,
    COMMA,
    DURATION,
    EOF,
    IDENT,
    LBRACE,
    LPAREN,
    MINUS,
    NUMBER,
    PLUS,
    RBRACE,
    RPAREN,
    SLASH,
    STAR,
    STRING,
    Token,
    tokenize,
)

TOP_KEYWORDS = ("entity", "datasource", "kpi")
KPI_ATTRS = ("source", "expr", "window", "unit", "target", "baseline", "group_by")
# reserved inside entity bodies: a field of this name cannot be told apart
# from a modifier of the previous field
RESERVED_FIELD_WORDS = ("unit", "optional")

MAX_DIAGNOSTICS = 100
MAX_EXPR_DEPTH = 64


class _ParseError(Exception):
    """Internal signal; always converted to a diagnostic before returning."""


class _Parser:
    def __init__(self, tokens: list[Token], report: ValidationReport):
        self.tokens = tokens
        self.pos = 0
        self.report = report

    # -- token plumbing ----------------------------------------------------

    def cur(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        pos = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[pos]

    def advance(self) -> Token:
        tok = self.cur()
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.cur()
        return tok.kind == kind and (text is None or tok.text == text)

    def error(self, tok: Token, message: str) -> _ParseError:
        if len(self.report.diagnostics) < MAX_DIAGNOSTICS:
            self.report.add(E_SYNTAX, tok.line, tok.col, message)
        elif len(self.report.diagnostics) == MAX_DIAGNOSTICS:
            self.report.add(E_SYNTAX, tok.line, tok.col, "too many errors, giving up")
        return _ParseError()

    def expect(self, kind: str, what: str) -> Token:
        tok = self.cur()
        if tok.kind != kind:
            raise self.error(tok, f"expected {what}, got {_show(tok)}")
        return self.advance()

    # -- recovery ----------------------------------------------------------

    def sync_top(self) -> None:
        """Skip to the next top-level declaration keyword, balancing braces."""
        depth = 0
        while not self.at(EOF):
            tok = self.cur()
            if tok.kind == LBRACE:
                depth += 1
            elif tok.kind == RBRACE:
                depth -= 1
                self.advance()
                if depth <= 0:
                    depth = 0
                continue
            elif depth <= 0 and tok.kind == IDENT and tok.text in TOP_KEYWORDS:
                return
            self.advance()

    def sync_member(self) -> None:
        """Within a braced body: skip to the next `name :` member or the closing brace."""
        self.advance()  # always make progress
        while not self.at(EOF):
            tok = self.cur()
            if tok.kind == RBRACE:
                return
            if tok.kind == IDENT and self.peek().kind == COLON:
                return
            if tok.kind == IDENT and tok.text in TOP_KEYWORDS and self.peek().kind == IDENT:
                return  # probably a missing '}' before the next declaration
            self.advance()

    # -- grammar -----------------------------------------------------------

    def parse_model(self) -> Model:
        entities: list[Entity] = []
        datasources: list[Datasource] = []
        kpis: list[KpiDef] = []
        while not self.at(EOF):
            if len(self.report.diagnostics) > MAX_DIAGNOSTICS:
                break
            tok = self.cur()
            try:
                if self.at(IDENT, "entity"):
                    entities.append(self.parse_entity())
                elif self.at(IDENT, "datasource"):
                    datasources.append(self.parse_datasource())
                elif self.at(IDENT, "kpi"):
                    kpis.append(self.parse_kpi())
                else:
                    raise self.error(
                        tok, f"expected entity, datasource or kpi declaration, got {_show(tok)}")
            except _ParseError:
                self.sync_top()
        return Model(tuple(entities), tuple(datasources), tuple(kpis))

    def parse_entity(self) -> Entity:
        kw = self.advance()
        name = self.expect(IDENT, "entity name")
        self.expect(LBRACE, "'{'")
        fields: list[Field] = []
        while not self.at(RBRACE) and not self.at(EOF):
            try:
                fields.append(self.parse_field())
            except _ParseError:
                self.sync_member()
        self.expect(RBRACE, "'}'")
        return Entity(name.text, tuple(fields), line=kw.line, col=kw.col)

    def parse_field(self) -> Field:
        name = self.expect(IDENT, "field name")
        if name.text in RESERVED_FIELD_WORDS:
            raise self.error(name, f"'{name.text}' is reserved and cannot name a field")
        self.expect(COLON, "':' after field name")
        kind_tok = self.cur()
        if kind_tok.kind != IDENT or kind_tok.text not in FIELD_KINDS:
            raise self.error(kind_tok, f"unknown type {kind_tok.text!r}")
        self.advance()
        enum_values: tuple[str, ...] = ()
        if kind_tok.text == "enum":
            self.expect(LPAREN, "'(' after enum")
            values = [self.expect(IDENT, "enum value").text]
            while self.at(COMMA):
                self.advance()
                values.append(self.expect(IDENT, "enum value").text)
            self.expect(RPAREN, "')'")
            enum_values = tuple(values)
        unit: str | None = None
        optional = False
        if self.at(IDENT, "unit"):
            self.advance()
            unit = self.expect(STRING, "unit string").text
        if self.at(IDENT, "optional"):
            self.advance()
            optional = True
        return Field(name.text, kind_tok.text, enum_values, unit, optional,
                     line=name.line, col=name.col)

    def parse_datasource(self) -> Datasource:
        kw = self.advance()
        name = self.expect(IDENT, "datasource name")
        self.expect(COLON, "':'")
        entity = self.expect(IDENT, "entity name")
        return Datasource(name.text, entity.text, line=kw.line, col=kw.col)

    def parse_kpi(self) -> KpiDef:
        kw = self.advance()
        name = self.expect(IDENT, "kpi name")
        self.expect(LBRACE, "'{'")
        seen: dict[str, Token] = {}
        attrs: dict[str, object] = {}
        while not self.at(RBRACE) and not self.at(EOF):
            try:
                attr = self.expect(IDENT, "kpi attribute")
                if attr.text not in KPI_ATTRS:
                    raise self.error(
                        attr,
                        f"unknown kpi attribute {attr.text!r} "
                        f"(expected one of {', '.join(KPI_ATTRS)})")
                self.expect(COLON, "':' after attribute name")
                if attr.text in seen:
                    # parse and discard the value to stay in sync
                    self.parse_kpi_attr_value(attr.text)
                    raise self.error(attr, f"duplicate attribute {attr.text!r} in kpi")
                seen[attr.text] = attr
                attrs[attr.text] = self.parse_kpi_attr_value(attr.text)
            except _ParseError:
                self.sync_member()
        self.expect(RBRACE, "'}'")
        return KpiDef(
            name.text,
            source=attrs.get("source"),
            expr=attrs.get("expr"),
            window=attrs.get("window"),
            unit=attrs.get("unit"),
            target=attrs.get("target"),
            baseline=attrs.get("baseline"),
            group_by=attrs.get("group_by"),
            line=kw.line, col=kw.col,
        )

    def parse_kpi_attr_value(self, attr: str):
        if attr == "source":
            return self.expect(IDENT, "datasource name").text
        if attr == "expr":
            return self.parse_expr(0)
        if attr == "window":
            tok = self.cur()
            if tok.kind != DURATION:
                raise self.error(tok, f"expected duration like 30d, got {_show(tok)}")
            self.advance()
            try:
                return Duration.parse(tok.text)
            except ValueError as exc:
                raise self.error(tok, str(exc))
        if attr == "unit":
            return self.expect(STRING, "unit string").text
        if attr == "target":
            cmp_tok = self.cur()
            if cmp_tok.kind != CMP:
                raise self.error(cmp_tok, f"expected comparator (<=, >=, <, >, ==), got {_show(cmp_tok)}")
            self.advance()
            return Target(cmp_tok.text, self.parse_signed_number())
        if attr == "baseline":
            return self.parse_signed_number()
        if attr == "group_by":
            return self.expect(IDENT, "field name").text
        raise AssertionError(attr)

    def parse_signed_number(self) -> float:
        negative = False
        if self.at(MINUS):
            self.advance()
            negative = True
        tok = self.expect(NUMBER, "number")
        value = float(tok.text)
        return -value if negative else value

    def parse_expr(self, depth: int) -> Expr:
        if depth > MAX_EXPR_DEPTH:
            raise self.error(self.cur(), "expression too deeply nested")
        left = self.parse_term(depth + 1)
        while self.at(PLUS) or self.at(MINUS):
            op = self.advance()
            right = self.parse_term(depth + 1)
            left = BinOp("+" if op.kind == PLUS else "-", left, right)
        return left

    def parse_term(self, depth: int) -> Expr:
        if depth > MAX_EXPR_DEPTH:
            raise self.error(self.cur(), "expression too deeply nested")
        left = self.parse_factor(depth + 1)
        while self.at(STAR) or self.at(SLASH):
            op = self.advance()
            right = self.parse_factor(depth + 1)
            left = BinOp("*" if op.kind == STAR else "/", left, right)
        return left

    def parse_factor(self, depth: int) -> Expr:
        if depth > MAX_EXPR_DEPTH:
            raise self.error(self.cur(), "expression too deeply nested")
        tok = self.cur()
        if tok.kind == NUMBER:
            self.advance()
            return Number(float(tok.text))
        if tok.kind == LPAREN:
            self.advance()
            inner = self.parse_expr(depth + 1)
            self.expect(RPAREN, "')'")
            return inner
        if tok.kind == IDENT and tok.text == "count":
            self.advance()
            self.expect(LPAREN, "'(' after count")
            if self.at(IDENT):
                raise self.error(self.cur(), "count() takes no field")
            self.expect(RPAREN, "')'")
            return Agg("count", None)
        if tok.kind == IDENT and tok.text in AGG_FNS:
            self.advance()
            self.expect(LPAREN, f"'(' after {tok.text}")
            field = self.expect(IDENT, "field name")
            self.expect(RPAREN, "')'")
            return Agg(tok.text, field.text)
        raise self.error(tok, f"expected number, aggregate call or '(', got {_show(tok)}")


def _show(tok: Token) -> str:
    if tok.kind == EOF:
        return "end of input"
    return repr(tok.text)


def parse_model(source: str | bytes) -> Model | ValidationReport:
    """Parse .cbm source. Returns a Model, or a ValidationReport on any error."""
    if isinstance(source, bytes):
        source = source.decode("utf-8", errors="replace")
    tokens, report = tokenize(source)
    parser = _Parser(tokens, report)
    model = parser.parse_model()
    if report.diagnostics:
        report.sort()
        return report
    return model
