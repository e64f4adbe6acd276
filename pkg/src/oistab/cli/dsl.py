"""Parser for system files and polynomial expressions.

Grammar (no implicit multiplication):

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := base ('^' INT)?
    base   := RATIONAL | IDENT | '(' expr ')'

System files are line-oriented ``key: value`` records after an ``affine``
header; ``#`` starts a comment and bracketed vectors may span lines.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from ..errors import ParseError
from ..model import AffineSystem
from ..symbolic import Polynomial, Sym, state
from ..symbolic.symbols import RESERVED_NAME

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<num>\d+(?:/\d+)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*^(),\[\]])"
)


@dataclass
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str, offset: int = 0) -> list[Token]:
    out, i = [], 0
    while i < len(text):
        mt = _TOKEN.match(text, i)
        if not mt:
            raise ParseError(f"unexpected character {text[i]!r}", column=offset + i + 1)
        kind = mt.lastgroup
        if kind != "ws":
            out.append(Token(kind, mt.group(), offset + i))
        i = mt.end()
    out.append(Token("end", "", offset + len(text)))
    return out


class _ExprParser:
    def __init__(self, tokens: list[Token], symbols: Mapping[str, Sym], line: int | None):
        self.toks = tokens
        self.i = 0
        self.symbols = symbols
        self.line = line

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, line=self.line, column=tok.pos + 1)

    def peek(self) -> Token:
        return self.toks[self.i]

    def take(self) -> Token:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text:
            self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return self.take()

    def expr(self) -> Polynomial:
        sign = 1
        if self.peek().text in "+-" and self.peek().kind == "op":
            sign = -1 if self.take().text == "-" else 1
        acc = self.term() * sign
        while self.peek().kind == "op" and self.peek().text in ("+", "-"):
            op = self.take().text
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> Polynomial:
        acc = self.factor()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text == "*":
                self.take()
                acc = acc * self.factor()
            elif tok.kind in ("num", "ident") or tok.text == "(":
                self.error("implicit multiplication is not allowed; use '*'")
            else:
                return acc

    def factor(self) -> Polynomial:
        base = self.base()
        if self.peek().text == "^":
            self.take()
            tok = self.take()
            if tok.kind != "num" or "/" in tok.text:
                self.error("exponent must be a nonnegative integer", tok)
            base = base ** int(tok.text)
        return base

    def base(self) -> Polynomial:
        tok = self.take()
        if tok.kind == "num":
            return Polynomial.const(Fraction(tok.text))
        if tok.kind == "ident":
            if tok.text not in self.symbols:
                self.error(f"undeclared identifier {tok.text!r}", tok)
            return Polynomial.sym(self.symbols[tok.text])
        if tok.text == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        self.error(f"expected a number, identifier or '(', found {tok.text or 'end of input'!r}", tok)


def parse_expression(text: str, symbols: Mapping[str, Sym], line: int | None = None) -> Polynomial:
    p = _ExprParser(tokenize(text), symbols, line)
    out = p.expr()
    if p.peek().kind != "end":
        p.error(f"unexpected {p.peek().text!r}")
    return out


def parse_vector(text: str, symbols: Mapping[str, Sym], line: int | None = None, offset: int = 0) -> list[Polynomial]:
    p = _ExprParser(tokenize(text, offset), symbols, line)
    p.expect("[")
    items = []
    if p.peek().text != "]":
        while True:
            items.append(p.expr())
            if p.peek().text == ",":
                p.take()
                continue
            if p.peek().text == "]":
                break
            p.error(f"expected ',' or ']', found {p.peek().text or 'end of input'!r}")
    p.expect("]")
    if p.peek().kind != "end":
        p.error(f"unexpected {p.peek().text!r} after vector")
    return items


_KEY = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*:(.*)$")


def _records(text: str):
    """Yield (key, value, line, value_column) with bracketed values joined."""
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        raw = lines[i].split("#", 1)[0]
        lineno = i + 1
        i += 1
        if not raw.strip():
            continue
        mk = _KEY.match(raw)
        if not mk:
            yield None, raw.strip(), lineno, 1
            continue
        key, value = mk.group(1), mk.group(2)
        col = mk.start(2)
        depth = value.count("[") - value.count("]")
        while depth > 0 and i < len(lines):
            more = lines[i].split("#", 1)[0]
            i += 1
            value += " " + more
            depth += more.count("[") - more.count("]")
        yield key, value, lineno, col


def parse_system(text: str) -> AffineSystem:
    header_seen = False
    fields: dict = {}
    for key, value, line, col in _records(text):
        if key is None:
            if not header_seen and value == "affine":
                header_seen = True
                continue
            if not header_seen:
                raise ParseError(f"expected header 'affine', found {value!r}", line=line)
            raise ParseError(f"expected 'key: value', found {value!r}", line=line)
        if not header_seen:
            raise ParseError("missing 'affine' header before first field", line=line)
        if key in fields:
            raise ParseError(f"duplicate field {key!r}", line=line)
        fields[key] = (value, line, col)
    if not header_seen:
        raise ParseError("empty system file")
    for req in ("states", "inputs", "f", "h"):
        if req not in fields:
            raise ParseError(f"missing field {req!r}")

    value, line, _ = fields["states"]
    names = [s.strip() for s in value.split(",")]
    if not names or any(not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", s) for s in names):
        raise ParseError(f"bad state list {value.strip()!r}", line=line)
    for s in names:
        if RESERVED_NAME.match(s):
            raise ParseError(f"state name {s!r} is reserved for signal symbols", line=line)
    if len(set(names)) != len(names):
        raise ParseError("duplicate state names", line=line)
    states = [state(i + 1, nm) for i, nm in enumerate(names)]
    table = {s.name: s for s in states}

    value, line, _ = fields["inputs"]
    try:
        m = int(value.strip())
    except ValueError:
        raise ParseError(f"inputs must be an integer, found {value.strip()!r}", line=line) from None
    if m < 1:
        raise ParseError("inputs must be at least 1", line=line)

    def vec(key, length=None):
        value, line, col = fields[key]
        items = parse_vector(value, table, line, col)
        if length is not None and len(items) != length:
            raise ParseError(f"{key} has {len(items)} entries, expected {length}", line=line)
        return items

    n = len(states)
    f = vec("f", n)
    cols = []
    for i in range(1, m + 1):
        key = f"g{i}"
        if key not in fields:
            raise ParseError(f"missing field {key!r}")
        cols.append(vec(key, n))
    extra = [k for k in fields if re.fullmatch(r"g\d+", k) and not 1 <= int(k[1:]) <= m]
    if extra:
        raise ParseError(f"input column {extra[0]!r} exceeds declared inputs ({m})", line=fields[extra[0]][1])
    unknown = set(fields) - {"states", "inputs", "f", "h", "name"} - {f"g{i}" for i in range(1, m + 1)}
    if unknown:
        k = sorted(unknown)[0]
        raise ParseError(f"unknown field {k!r}", line=fields[k][1])
    h = vec("h")
    G = [[cols[j][i] for j in range(m)] for i in range(n)]
    name = fields["name"][0].strip() if "name" in fields else ""
    return AffineSystem.build(states, f, G, h, name)


def format_system(sys: AffineSystem) -> str:
    """System-file text that parses back to ``sys``."""
    lines = ["affine"]
    if sys.name:
        lines.append(f"name: {sys.name}")
    lines.append("states: " + ", ".join(s.name for s in sys.states))
    lines.append(f"inputs: {sys.m}")
    lines.append("f: [" + ", ".join(str(v) for v in sys.f) + "]")
    for i in range(sys.m):
        lines.append(f"g{i + 1}: [" + ", ".join(str(v) for v in sys.g(i)) + "]")
    lines.append("h: [" + ", ".join(str(v) for v in sys.h) + "]")
    return "\n".join(lines) + "\n"
