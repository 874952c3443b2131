"""Recursive-descent reader and canonical writer for the norm DSL.

A document is a sequence of blocks::

    norm "minimal_vital_income" {
      jurisdiction: national
      attribute: address != null and residency == true and has_bank_account == true
      deontic: permission
      aim: action(apply_minimal_vital_income)
    }

``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Union

from ..core import STATUSES
from .model import (
    ALWAYS,
    FIELD_KINDS,
    ActionRef,
    And,
    Compare,
    Consequence,
    NO_CONSEQUENCE,
    NormStatement,
    NormSyntaxError,
    NormValidationError,
    Not,
    Or,
    Performed,
    Predicate,
    TruePred,
    UnknownFieldError,
)

KEYS = (
    "source",
    "jurisdiction",
    "attribute",
    "deontic",
    "aim",
    "condition",
    "or_else",
    "character",
    "degree",
    "active",
    "enforcement",
)

IDENT_RE = re.compile(r"[a-z_][a-z0-9_]*\Z")
FIELD_PREFIXES = ("profile", "agent")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<newline>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<number>-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)
  | (?P<ident>[a-z_][a-z0-9_]*)
  | (?P<cmp>==|!=|<=|>=|<|>)
  | (?P<punct>[{}():,.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # string, number, ident, cmp, punct, eof
    text: str
    line: int
    column: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        column = pos - line_start + 1
        if m is None:
            if text[pos] == '"':
                raise NormSyntaxError("unterminated string", line, column)
            raise NormSyntaxError(f"unexpected character {text[pos]!r}", line, column)
        kind = m.lastgroup
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, column))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def _unquote(raw: str) -> str:
    return re.sub(r"\\(.)", r"\1", raw[1:-1])


def _quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _number(tok: Token) -> Union[int, float]:
    if re.fullmatch(r"-?\d+", tok.text):
        return int(tok.text)
    return float(tok.text)


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def error(self, message: str, tok: Optional[Token] = None) -> NormSyntaxError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return NormSyntaxError(f"{message}, found {found}", tok.line, tok.column)

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        return self.tok.kind == kind and (text is None or self.tok.text == text)

    def expect(self, kind: str, text: Optional[str] = None, what: Optional[str] = None) -> Token:
        if not self.at(kind, text):
            raise self.error(f"expected {what or text or kind}")
        tok = self.tok
        self.i += 1
        return tok

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        if self.at(kind, text):
            tok = self.tok
            self.i += 1
            return tok
        return None

    # -- grammar

    def document(self) -> List[NormStatement]:
        norms: List[NormStatement] = []
        seen: Dict[str, Token] = {}
        while not self.at("eof"):
            start = self.tok
            norm = self.norm()
            if norm.id in seen:
                raise NormValidationError(
                    norm.id, f"duplicate norm id (first defined at line {seen[norm.id].line})"
                )
            seen[norm.id] = start
            norms.append(norm)
        return norms

    def norm(self) -> NormStatement:
        self.expect("ident", "norm", what='"norm"')
        norm_id = _unquote(self.expect("string", what="quoted norm id").text)
        if not norm_id:
            raise self.error("norm id must not be empty", self.peek(-1))
        self.expect("punct", "{")
        fields: Dict[str, object] = {}
        while not self.accept("punct", "}"):
            key_tok = self.tok
            if key_tok.kind != "ident" or key_tok.text not in KEYS:
                raise self.error(f"expected a field key ({', '.join(KEYS)}) or '}}'")
            self.i += 1
            if key_tok.text in fields:
                raise NormSyntaxError(f"duplicate field {key_tok.text!r}", key_tok.line, key_tok.column)
            self.expect("punct", ":")
            fields[key_tok.text] = self.value(key_tok.text)
        if "deontic" not in fields:
            raise NormValidationError(norm_id, "missing required field 'deontic'")
        if "aim" not in fields:
            raise NormValidationError(norm_id, "missing required field 'aim'")
        try:
            return NormStatement(id=norm_id, **fields)  # type: ignore[arg-type]
        except NormValidationError:
            raise
        except ValueError as exc:
            raise NormValidationError(norm_id, str(exc)) from None

    def value(self, key: str) -> object:
        if key == "source":
            return _unquote(self.expect("string", what="quoted source").text)
        if key in ("jurisdiction", "deontic", "character", "enforcement"):
            return self.expect("ident", what=f"{key} token").text
        if key in ("attribute", "condition"):
            return self.predicate()
        if key == "aim":
            if self.at("ident", "action"):
                self.i += 1
                self.expect("punct", "(")
                action = self.expect("ident", what="action identifier").text
                self.expect("punct", ")")
                return ActionRef(action)
            return self.consequence()
        if key == "or_else":
            return self.consequence()
        if key == "degree":
            tok = self.expect("number", what="degree number")
            value = float(tok.text)
            if not 0.0 <= value <= 1.0:
                raise NormSyntaxError(f"degree must lie in [0, 1], got {tok.text}", tok.line, tok.column)
            return value
        if key == "active":
            tok = self.tok
            if tok.kind == "ident" and tok.text in ("true", "false"):
                self.i += 1
                return tok.text == "true"
            raise self.error("expected true or false")
        raise AssertionError(key)

    def consequence(self) -> Consequence:
        tok = self.expect("ident", what="fine(...), transfer(...) or none")
        if tok.text == "none":
            return NO_CONSEQUENCE
        if tok.text == "fine":
            self.expect("punct", "(")
            low = self.currency()
            self.expect("punct", ",")
            high = self.currency()
            self.expect("punct", ")")
            if low > high:
                raise NormSyntaxError(f"fine minimum {low} exceeds maximum {high}", tok.line, tok.column)
            return Consequence.fine(low, high)
        if tok.text == "transfer":
            self.expect("punct", "(")
            amount = self.currency()
            self.expect("punct", ")")
            return Consequence.transfer(amount)
        raise self.error("expected fine(...), transfer(...) or none", tok)

    def currency(self) -> int:
        tok = self.expect("number", what="whole currency amount")
        if not re.fullmatch(r"\d+", tok.text):
            raise NormSyntaxError(
                f"currency amounts are non-negative whole units, got {tok.text}", tok.line, tok.column
            )
        return int(tok.text)

    def predicate(self) -> Predicate:
        if self.at("ident", "anyone") or self.at("ident", "always"):
            self.i += 1
            return ALWAYS
        return self.disjunction()

    def disjunction(self) -> Predicate:
        items = [self.conjunction()]
        while self.accept("ident", "or"):
            items.append(self.conjunction())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def conjunction(self) -> Predicate:
        items = [self.unary()]
        while self.accept("ident", "and"):
            items.append(self.unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def unary(self) -> Predicate:
        if self.accept("ident", "not"):
            return Not(self.atom())
        return self.atom()

    def atom(self) -> Predicate:
        if self.accept("punct", "("):
            inner = self.predicate()
            self.expect("punct", ")")
            return inner
        if self.at("ident", "performed") and self.peek().kind == "punct" and self.peek().text == "(":
            self.i += 2
            action = self.expect("ident", what="action identifier").text
            self.expect("punct", ")")
            return Performed(action)
        if not self.at("ident"):
            raise self.error("expected a predicate")
        start = self.tok
        parts = [self.expect("ident").text]
        while self.accept("punct", "."):
            parts.append(self.expect("ident", what="field name").text)
        name = parts[-1] if len(parts) == 2 and parts[0] in FIELD_PREFIXES else ".".join(parts)
        if name not in FIELD_KINDS:
            raise UnknownFieldError(".".join(parts), start.line, start.column)
        op_tok = self.expect("cmp", what="comparison operator")
        return Compare(name, op_tok.text, self.literal(name, op_tok))

    def literal(self, name: str, op_tok: Token) -> Union[int, float, bool, str, None]:
        kind = FIELD_KINDS[name]
        tok = self.tok
        if kind == "number":
            lit = self.expect("number", what=f"number to compare {name} against")
            value = _number(lit)
            if isinstance(value, float) and not math.isfinite(value):
                raise NormSyntaxError("non-finite number", lit.line, lit.column)
            return value
        if op_tok.text not in ("==", "!="):
            raise NormSyntaxError(
                f"{name} only supports == and !=, got {op_tok.text}", op_tok.line, op_tok.column
            )
        if kind == "bool":
            if tok.kind == "ident" and tok.text in ("true", "false"):
                self.i += 1
                return tok.text == "true"
            raise self.error(f"expected true or false for {name}")
        if kind == "address" and self.accept("ident", "null"):
            return None
        if tok.kind in ("ident", "string"):
            self.i += 1
            value = tok.text if tok.kind == "ident" else _unquote(tok.text)
            if name == "status" and value not in STATUSES:
                raise NormSyntaxError(
                    f"status must be one of {', '.join(STATUSES)}, got {value!r}", tok.line, tok.column
                )
            return value
        raise self.error(f"expected a value for {name}")


def parse_norms(text: str) -> List[NormStatement]:
    """Parse a norm document into statements, in document order."""
    return _Parser(text).document()


def parse_predicate(text: str) -> Predicate:
    """Parse a standalone predicate expression (used by action requirements)."""
    parser = _Parser(text)
    pred = parser.predicate()
    if not parser.at("eof"):
        raise parser.error("unexpected trailing input")
    return pred


# -- canonical form -------------------------------------------------------------


def _literal_text(value: Union[int, float, bool, str, None]) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if IDENT_RE.match(value) and value not in ("true", "false", "null"):
        return value
    return _quote(value)


def format_predicate(pred: Predicate, top: str = "always") -> str:
    """Render a predicate so that re-parsing yields the identical tree."""
    if isinstance(pred, TruePred):
        return top
    return _fmt(pred, None)


def _fmt(pred: Predicate, parent: Optional[type]) -> str:
    if isinstance(pred, TruePred):
        return "(always)"
    if isinstance(pred, Compare):
        return f"{pred.field} {pred.op} {_literal_text(pred.value)}"
    if isinstance(pred, Performed):
        return f"performed({pred.action})"
    if isinstance(pred, Not):
        inner = _fmt(pred.operand, Not)
        if isinstance(pred.operand, (And, Or, Not)):
            inner = f"({inner})"
        return f"not {inner}"
    word = " and " if isinstance(pred, And) else " or "
    text = word.join(_fmt(op, type(pred)) for op in pred.operands)
    # nested And/And or Or/Or must keep their grouping to round-trip exactly
    if parent is And or (parent is Or and isinstance(pred, Or)):
        return f"({text})"
    return text


def _aim_text(aim: Union[ActionRef, Consequence]) -> str:
    if isinstance(aim, ActionRef):
        return f"action({aim.action})"
    return _consequence_text(aim)


def _consequence_text(c: Consequence) -> str:
    if c.kind == "fine":
        return f"fine({c.minimum}, {c.maximum})"
    if c.kind == "transfer":
        return f"transfer({c.amount})"
    return "none"


def format_norm(norm: NormStatement) -> str:
    lines = [
        f"norm {_quote(norm.id)} {{",
        f"  source: {_quote(norm.source)}",
        f"  jurisdiction: {norm.jurisdiction}",
        f"  attribute: {format_predicate(norm.attribute, 'anyone')}",
        f"  deontic: {norm.deontic}",
        f"  aim: {_aim_text(norm.aim)}",
        f"  condition: {format_predicate(norm.condition, 'always')}",
        f"  or_else: {_consequence_text(norm.or_else)}",
        f"  character: {norm.character}",
        f"  degree: {float(norm.degree)!r}",
        f"  active: {'true' if norm.active else 'false'}",
        f"  enforcement: {norm.enforcement}",
        "}",
    ]
    return "\n".join(lines) + "\n"


def canonicalize(norms: List[NormStatement]) -> str:
    return "\n".join(format_norm(n) for n in norms)
