"""Lexer, recursive-descent parser and serializer for GeoLingua.

Two concrete syntaxes are supported:

* the ``.geo`` text form, four section headers each followed by one
  statement per line::

      shapes:
      Polygon(ABC)
      dependence:
      PointAtLine(D,BC,0.5)
      length constraint:
      angle constraint:
      Angle(ABC,60)

* the four-key JSON interchange form, each key holding statement strings.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from . import grammar
from .ast import (
    ENTITY_RE,
    SECTIONS,
    SECTION_ATTRS,
    Argument,
    Expression,
    FormalProgram,
    Name,
    Number,
    Ratio,
    Relation,
    Statement,
    Term,
    Word,
)


class ParseError(ValueError):
    """Base class for GeoLingua parse failures.

    ``span`` is a (start, end) byte range in the parsed source, ``section``
    and ``index`` locate the offending statement when known.
    """

    def __init__(self, message: str, span: tuple[int, int] | None = None,
                 section: str | None = None, index: int | None = None):
        super().__init__(message)
        self.message = message
        self.span = span
        self.section = section
        self.index = index

    def __str__(self) -> str:
        where = []
        if self.section is not None:
            where.append(f"{self.section}[{self.index}]")
        if self.span is not None:
            where.append(f"bytes {self.span[0]}-{self.span[1]}")
        return f"{self.message} ({', '.join(where)})" if where else self.message


class GeoSyntaxError(ParseError):
    """Malformed tokens or statement structure."""


class UnknownStatement(ParseError):
    """Statement head outside the closed keyword set."""


class ArityError(ParseError):
    """Wrong number of arguments for a statement head."""


class ArgumentKindError(ParseError):
    """An argument of the wrong kind, e.g. a segment where an angle belongs."""


class JsonShapeError(ParseError):
    """JSON interchange document without exactly the four section keys."""


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<word>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<rel>==|>=|<=|!=|≥|≤|=|>|<)
  | (?P<punct>[(),+\-*])
    """,
    re.VERBOSE,
)

_RELATION_WORDS = {
    "equal": "=", "eq": "=", "equals": "=",
    "greater": ">", "gt": ">",
    "less": "<", "lt": "<",
    "ge": ">=", "geq": ">=",
    "le": "<=", "leq": "<=",
}
_RELATION_SYMBOLS = {"=": "=", "==": "=", ">": ">", ">=": ">=", "≥": ">=",
                     "<": "<", "<=": "<=", "≤": "<="}


@dataclass
class _Tok:
    kind: str
    text: str
    start: int
    end: int


class _StatementParser:
    """Parses a single statement string.

    Offsets are character offsets into ``text``; ``to_bytes`` maps them onto
    byte offsets of the enclosing source for error reporting.
    """

    def __init__(self, text: str, to_bytes):
        self.text = text
        self.to_bytes = to_bytes
        self.toks = self._lex(text)
        self.pos = 0

    def _err(self, cls, msg, start, end):
        return cls(msg, (self.to_bytes(start), self.to_bytes(end)))

    def _lex(self, text: str) -> list[_Tok]:
        toks = []
        i = 0
        while i < len(text):
            m = _TOKEN_RE.match(text, i)
            if m is None:
                raise self._err(GeoSyntaxError, f"unexpected character {text[i]!r}", i, i + 1)
            kind = m.lastgroup
            if kind != "ws":
                toks.append(_Tok(kind, m.group(), m.start(), m.end()))
            i = m.end()
        toks.append(_Tok("eof", "", len(text), len(text)))
        return toks

    def peek(self, offset: int = 0) -> _Tok:
        return self.toks[min(self.pos + offset, len(self.toks) - 1)]

    def take(self) -> _Tok:
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.take()
        if tok.text != text:
            shown = tok.text or "end of statement"
            raise self._err(GeoSyntaxError, f"expected {text!r}, found {shown!r}", tok.start, tok.end)
        return tok

    # statement := WORD '(' [arg {',' arg} [',']] ')'
    def statement(self) -> tuple[str, list[Argument], int, int]:
        head = self.take()
        if head.kind != "word":
            raise self._err(GeoSyntaxError, "expected a statement keyword", head.start, head.end)
        self.expect("(")
        args: list[Argument] = []
        while True:
            if self.peek().text == ")":
                break
            args.append(self.argument())
            if self.peek().text == ",":
                self.take()
                continue
            break
        close = self.expect(")")
        tail = self.peek()
        if tail.kind != "eof":
            raise self._err(GeoSyntaxError, f"trailing input {tail.text!r}", tail.start, len(self.text))
        return head.text, args, head.start, close.end

    def argument(self) -> Argument:
        tok = self.peek()
        if tok.kind == "rel":
            self.take()
            if tok.text == "!=":
                raise self._err(GeoSyntaxError, "relation '!=' is not supported", tok.start, tok.end)
            return Relation(_RELATION_SYMBOLS[tok.text])
        if tok.kind == "word" and tok.text in _RELATION_WORDS and self.peek(1).text in (",", ")"):
            self.take()
            return Relation(_RELATION_WORDS[tok.text])
        if tok.kind == "word" and tok.text == "Ratio" and self.peek(1).text == "(":
            return self.ratio()
        if tok.kind == "word" and tok.text.islower() and self.peek(1).text in (",", ")"):
            self.take()
            return Word(tok.text)
        first = self.pos
        terms = self.sum()
        used = self.toks[first:self.pos]
        if len(used) == 1 and used[0].kind == "word":
            return Name(terms[0].name)
        if len(used) in (1, 2) and used[-1].kind == "number" and len(terms) == 1 \
                and terms[0].name is None:
            return Number(terms[0].coef)
        return Expression(tuple(terms))

    def ratio(self) -> Ratio:
        self.take()
        self.expect("(")
        a = self.signed_number()
        self.expect(",")
        b = self.signed_number()
        if self.peek().text == ",":
            self.take()
        self.expect(")")
        return Ratio(a, b)

    def signed_number(self) -> float:
        sign = 1.0
        if self.peek().text in ("+", "-"):
            sign = -1.0 if self.take().text == "-" else 1.0
        tok = self.take()
        if tok.kind != "number":
            raise self._err(GeoSyntaxError, "expected a number", tok.start, tok.end)
        return sign * float(tok.text)

    # sum := [sign] term {sign term}
    def sum(self) -> list[Term]:
        terms: list[Term] = []
        sign = 1.0
        if self.peek().text in ("+", "-"):
            sign = -1.0 if self.take().text == "-" else 1.0
        terms.extend(self.term(sign))
        while self.peek().text in ("+", "-"):
            sign = -1.0 if self.take().text == "-" else 1.0
            terms.extend(self.term(sign))
        return terms

    # term := '(' sum ')' | NUMBER ['*'] NAME | NUMBER | NAME
    def term(self, sign: float) -> list[Term]:
        tok = self.take()
        if tok.text == "(":
            inner = self.sum()
            self.expect(")")
            return [Term(sign * t.coef, t.name) for t in inner]
        if tok.kind == "number":
            value = float(tok.text)
            nxt = self.peek()
            if nxt.text == "*":
                self.take()
                name = self.take()
                self._check_name(name)
                return [Term(sign * value, name.text)]
            if nxt.kind == "word" and nxt.start == tok.end:
                self.take()
                self._check_name(nxt)
                return [Term(sign * value, nxt.text)]
            return [Term(sign * value, None)]
        if tok.kind == "word":
            self._check_name(tok)
            return [Term(sign, tok.text)]
        shown = tok.text or "end of statement"
        raise self._err(GeoSyntaxError, f"unexpected {shown!r}", tok.start, tok.end)

    def _check_name(self, tok: _Tok) -> None:
        if tok.kind != "word" or not ENTITY_RE.fullmatch(tok.text):
            raise self._err(GeoSyntaxError, f"malformed point or entity name {tok.text!r}",
                            tok.start, tok.end)


def _byte_mapper(source: str, base: int):
    def to_bytes(offset: int) -> int:
        return len(source[: base + offset].encode("utf-8"))
    return to_bytes


def parse_statement(text: str, *, source: str | None = None, base: int = 0,
                    line: int | None = None) -> Statement:
    """Parse one statement such as ``Angle(ABC,60)``."""
    src = text if source is None else source
    p = _StatementParser(text, _byte_mapper(src, base))
    head, args, start, end = p.statement()
    span = (p.to_bytes(start), p.to_bytes(end))
    spec = grammar.HEADS.get(head)
    if spec is None:
        raise UnknownStatement(f"unknown statement {head!r}", span)
    if not spec.required <= len(args) <= spec.max_args:
        want = str(spec.required) if spec.required == spec.max_args else f"{spec.required}-{spec.max_args}"
        raise ArityError(f"{head} takes {want} arguments, got {len(args)}", span)
    coerced = []
    for i, (kind, arg) in enumerate(zip(spec.params, args)):
        fitted = grammar.coerce(kind, arg)
        if fitted is None:
            raise ArgumentKindError(
                f"{head} argument {i + 1} must be a {grammar.describe_kind(kind)}", span)
        coerced.append(fitted)
    return Statement(head, tuple(coerced), line=line, span=span)


_HEADER_RE = re.compile(r"^(shapes|dependence|length constraints?|angle constraints?)\s*:$", re.I)


def _canonical_section(header: str) -> str:
    h = " ".join(header.lower().split())
    return h[:-1] if h.endswith("constraints") else h


def parse_text(source: str) -> FormalProgram:
    """Parse the sectioned ``.geo`` text form."""
    sections: dict[str, list[Statement]] = {name: [] for name in SECTIONS}
    current: str | None = None
    offset = 0
    for lineno, raw in enumerate(source.splitlines(keepends=True), start=1):
        line_start = offset
        offset += len(raw)
        body = raw.rstrip("\r\n")
        stripped = body.strip()
        if not stripped or stripped.startswith("#"):
            continue
        header = _HEADER_RE.match(" ".join(stripped.split()))
        if header:
            current = _canonical_section(header.group(1))
            continue
        lead = len(body) - len(body.lstrip())
        text = stripped.rstrip(",")
        if current is None:
            to_bytes = _byte_mapper(source, line_start + lead)
            raise GeoSyntaxError("statement before any section header",
                                 (to_bytes(0), to_bytes(len(text))))
        stmt = parse_statement(text, source=source, base=line_start + lead, line=lineno)
        sections[current].append(stmt)
    return FormalProgram(**{SECTION_ATTRS[k]: tuple(v) for k, v in sections.items()},
                         source_text=source)


def parse_json(source: str | dict) -> FormalProgram:
    """Parse the four-key JSON interchange form."""
    if isinstance(source, str):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise GeoSyntaxError(f"invalid JSON: {exc.msg}", (exc.pos, exc.pos + 1)) from None
        text = source
    else:
        data, text = source, json.dumps(source, ensure_ascii=False)
    if not isinstance(data, dict):
        raise JsonShapeError("program JSON must be an object with the four section keys")
    missing = [k for k in SECTIONS if k not in data]
    extra = [k for k in data if k not in SECTIONS]
    if missing or extra:
        parts = []
        if missing:
            parts.append("missing keys " + ", ".join(repr(k) for k in missing))
        if extra:
            parts.append("unexpected keys " + ", ".join(repr(k) for k in extra))
        raise JsonShapeError("; ".join(parts))
    sections = {}
    for key in SECTIONS:
        items = data[key]
        if not isinstance(items, list):
            raise JsonShapeError(f"{key!r} must be an array of statement strings")
        parsed = []
        for i, item in enumerate(items):
            if not isinstance(item, str):
                raise JsonShapeError(f"{key!r}[{i}] must be a string", section=key, index=i)
            stmt_text = item.strip().rstrip(",")
            try:
                parsed.append(parse_statement(stmt_text))
            except ParseError as exc:
                exc.section, exc.index = key, i
                raise
        sections[SECTION_ATTRS[key]] = tuple(parsed)
    return FormalProgram(**sections, source_text=text)


def parse(source: str) -> FormalProgram:
    """Parse either syntax, deciding by the first non-blank character."""
    if source.lstrip().startswith("{"):
        return parse_json(source)
    return parse_text(source)


# -- serialization -----------------------------------------------------------

def format_number(value: float) -> str:
    v = float(value)
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _format_term(term: Term) -> str:
    if term.name is None:
        return format_number(term.coef)
    if term.coef == 1.0:
        return term.name
    if term.coef == -1.0:
        return "-" + term.name
    return f"{format_number(term.coef)}*{term.name}"


def format_argument(arg: Argument) -> str:
    if isinstance(arg, Name):
        return arg.text
    if isinstance(arg, Number):
        return format_number(arg.value)
    if isinstance(arg, Ratio):
        return f"Ratio({format_number(arg.first)},{format_number(arg.second)})"
    if isinstance(arg, Relation):
        return arg.op
    if isinstance(arg, Word):
        return arg.text
    if isinstance(arg, Expression):
        out = ""
        for i, term in enumerate(arg.terms):
            piece = _format_term(term)
            if i and not piece.startswith("-"):
                out += "+"
            out += piece
        return f"({out})"
    raise TypeError(f"not a GeoLingua argument: {arg!r}")


def format_statement(stmt: Statement) -> str:
    return f"{stmt.head}({','.join(format_argument(a) for a in stmt.args)})"


def serialize(program: FormalProgram) -> str:
    """Canonical ``.geo`` text; ``parse_text(serialize(p)) == p``."""
    lines = []
    for name in SECTIONS:
        lines.append(f"{name}:")
        lines.extend(format_statement(s) for s in program.section(name))
    return "\n".join(lines) + "\n"


def to_json_dict(program: FormalProgram) -> dict[str, list[str]]:
    return {name: [format_statement(s) for s in program.section(name)] for name in SECTIONS}


def serialize_json(program: FormalProgram, indent: int | None = 2) -> str:
    return json.dumps(to_json_dict(program), indent=indent, ensure_ascii=False) + "\n"
