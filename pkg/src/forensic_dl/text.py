"""The line-oriented ``.fkb`` knowledge-base format and ``.gold`` label files.

One statement per line; ``#`` starts a comment.  Concept terms use a
prefix s-expression syntax (``(and C D)``, ``(some r C)``, ...), role
terms are names, ``(inv r)`` or ``(chain r s ...)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .diagnostics import Diagnostic
from .errors import ParseError
from .model import (
    BOTTOM,
    TOP,
    And,
    Atomic,
    Chain,
    ClassAtom,
    ConceptAssertion,
    DataAssertion,
    DataAtom,
    Disjoint,
    EventTraits,
    Exists,
    Forall,
    Gci,
    Ind,
    KnowledgeBase,
    Lit,
    Nominal,
    Not,
    ObjectAtom,
    Or,
    RoleAssertion,
    RoleInclusion,
    RoleName,
    Rule,
    SameAsAtom,
    Var,
    inv,
    inverse_of,
    symmetric,
    transitive,
)
from .normalize import undeclared_references

HEADER = "# forensic-dl knowledge base"
NOTES = ("INVENTED", "LEARNED")


@dataclass(frozen=True)
class SourceDocument:
    text: str
    origin: str = "<string>"

    @classmethod
    def from_path(cls, path) -> "SourceDocument":
        path = Path(path)
        return cls(path.read_text(encoding="utf-8"), str(path))


# ------------------------------------------------------------ tokenizer

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#.*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow>->)
  | (?P<punct>[(),:+\-])
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "r": "\r", "t": "\t", '"': '"', "\\": "\\"}


@dataclass
class Token:
    kind: str
    value: str
    line: int
    col: int


class _SyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.line = line
        self.col = col


def _unescape(raw: str, line: int, col: int) -> str:
    out = []
    i = 0
    body = raw[1:-1]
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            nxt = body[i + 1]
            if nxt not in _ESCAPES:
                raise _SyntaxError(f"unknown escape \\{nxt}", line, col + i + 1)
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _tokenize(line_text: str, lineno: int) -> tuple[list[Token], str | None]:
    tokens = []
    comment = None
    pos = 0
    while pos < len(line_text):
        m = _TOKEN.match(line_text, pos)
        if not m:
            raise _SyntaxError(f"unexpected character {line_text[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup
        text = m.group()
        if kind == "comment":
            comment = text[1:].strip()
            break
        if kind == "string":
            text = _unescape(text, lineno, pos + 1)
        if kind != "ws":
            tokens.append(Token(kind, text, lineno, pos + 1))
        pos = m.end()
    return tokens, comment


# --------------------------------------------------------------- parser


class _Cursor:
    def __init__(self, tokens: list[Token], line: int, end_col: int):
        self.tokens = tokens
        self.i = 0
        self.line = line
        self.end_col = end_col

    def peek(self) -> Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def error(self, message: str):
        tok = self.peek()
        if tok is None:
            raise _SyntaxError(message + " (found end of line)", self.line, self.end_col)
        raise _SyntaxError(f"{message} (found {tok.value!r})", tok.line, tok.col)

    def take(self, kind: str, value: str | None = None) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind or (value is not None and tok.value != value):
            self.error(f"expected {value or kind}")
        self.i += 1
        return tok

    def accept(self, kind: str, value: str | None = None) -> Token | None:
        tok = self.peek()
        if tok is not None and tok.kind == kind and (value is None or tok.value == value):
            self.i += 1
            return tok
        return None

    def done(self) -> bool:
        return self.i >= len(self.tokens)


class _StatementParser:
    def __init__(self, cursor: _Cursor):
        self.c = cursor
        self.names: dict = {}  # (kind, name) -> (line, col)

    def _note(self, kind: str, tok: Token) -> None:
        self.names.setdefault((kind, tok.value), (tok.line, tok.col))

    def ident(self, kind: str | None = None) -> str:
        tok = self.c.take("ident")
        if kind:
            self._note(kind, tok)
        return tok.value

    def comma(self):
        self.c.take("punct", ",")

    def role(self):
        if self.c.accept("punct", "("):
            op = self.c.take("ident").value
            if op == "inv":
                r = inv(self.role())
            elif op == "chain":
                parts = [self.role(), self.role()]
                while not self._at_close():
                    parts.append(self.role())
                r = Chain(tuple(parts))
            else:
                raise _SyntaxError(f"unknown role operator {op!r}", self.c.line, self.c.tokens[self.c.i - 1].col)
            self.c.take("punct", ")")
            return r
        return RoleName(self.ident("role"))

    def _at_close(self) -> bool:
        tok = self.c.peek()
        return tok is not None and tok.kind == "punct" and tok.value == ")"

    def concept(self):
        if self.c.accept("punct", "("):
            op_tok = self.c.take("ident")
            op = op_tok.value
            if op in ("and", "or"):
                members = [self.concept(), self.concept()]
                while not self._at_close():
                    members.append(self.concept())
                try:
                    expr = (And if op == "and" else Or)(tuple(members))
                except ValueError as exc:
                    raise _SyntaxError(str(exc), op_tok.line, op_tok.col)
            elif op == "not":
                expr = Not(self.concept())
            elif op in ("some", "all"):
                r = self.role()
                filler = self.concept()
                expr = Exists(r, filler) if op == "some" else Forall(r, filler)
            elif op == "value":
                r = self.role()
                expr = Exists(r, Nominal(self.ident("individual")))
            else:
                raise _SyntaxError(f"unknown concept operator {op!r}", op_tok.line, op_tok.col)
            self.c.take("punct", ")")
            return expr
        tok = self.c.take("ident")
        if tok.value == "Thing":
            return TOP
        if tok.value == "Nothing":
            return BOTTOM
        self._note("class", tok)
        return Atomic(tok.value)

    def sign(self) -> bool:
        tok = self.c.take("punct")
        if tok.value not in "+-":
            raise _SyntaxError("expected + or -", tok.line, tok.col)
        return tok.value == "+"

    def term(self):
        tok = self.c.peek()
        if tok is None:
            self.c.error("expected a term")
        if tok.kind == "var":
            self.c.i += 1
            return Var(tok.value[1:])
        if tok.kind == "string":
            self.c.i += 1
            return Lit(tok.value)
        self._note("individual", tok)
        return Ind(self.c.take("ident").value)

    def atom(self):
        name_tok = self.c.take("ident")
        self.c.take("punct", "(")
        terms = [self.term()]
        while self.c.accept("punct", ","):
            terms.append(self.term())
        self.c.take("punct", ")")
        if name_tok.value == "SameAs":
            if len(terms) != 2:
                raise _SyntaxError("SameAs takes two terms", name_tok.line, name_tok.col)
            return SameAsAtom(*terms)
        if len(terms) == 1:
            self._note("class", name_tok)
            return ClassAtom(name_tok.value, terms[0])
        if len(terms) == 2:
            # resolved against declarations once the whole document is read
            return ("binary", name_tok, terms[0], terms[1])
        raise _SyntaxError("atoms take one or two terms", name_tok.line, name_tok.col)


def _close(p: _StatementParser):
    p.c.take("punct", ")")
    if not p.c.done():
        p.c.error("unexpected trailing input")


def _parse_statement(p: _StatementParser, decls: dict, comment: str | None):
    """Parse one non-empty line; return a list of produced items."""
    c = p.c
    head = c.take("ident")
    kw = head.value
    if kw == "Rule":
        c.take("punct", ":")
        body = [p.atom()]
        while c.accept("punct", ","):
            body.append(p.atom())
        c.take("arrow")
        h = p.atom()
        if not c.done():
            c.error("unexpected trailing input")
        return [("rule", body, h)]
    c.take("punct", "(")
    if kw in ("Class", "Role", "DataProp", "Individual"):
        tok = c.take("ident")
        _close(p)
        decls[kw].add(tok.value)
        return []
    if kw == "Sub":
        lhs = p.concept()
        p.comma()
        rhs = p.concept()
        _close(p)
        note = comment.split()[0] if comment and comment.split()[0] in NOTES else None
        return [Gci(lhs, rhs, note)]
    if kw == "SubRole":
        lhs = p.role()
        p.comma()
        rhs = RoleName(p.ident("role"))
        _close(p)
        return [RoleInclusion(lhs, rhs)]
    if kw == "Disjoint":
        a = p.concept()
        p.comma()
        b = p.concept()
        _close(p)
        return [Disjoint(a, b)]
    if kw == "Member":
        cexpr = p.concept()
        p.comma()
        a = p.ident("individual")
        _close(p)
        return [ConceptAssertion(a, cexpr)]
    if kw == "Related":
        r = p.ident("role")
        p.comma()
        a = p.ident("individual")
        p.comma()
        b = p.ident("individual")
        _close(p)
        return [RoleAssertion(a, b, r)]
    if kw == "Data":
        prop = p.ident("data_property")
        p.comma()
        a = p.ident("individual")
        p.comma()
        v = c.take("string").value
        _close(p)
        return [DataAssertion(a, prop, v)]
    if kw in ("Trans", "Sym"):
        r = p.ident("role")
        _close(p)
        return [transitive(r) if kw == "Trans" else symmetric(r)]
    if kw == "InverseOf":
        r = p.ident("role")
        p.comma()
        s = p.ident("role")
        _close(p)
        return list(inverse_of(r, s))
    if kw == "Traits":
        name = p.ident("class")
        p.comma()
        telic = p.sign()
        p.comma()
        stage = p.sign()
        p.comma()
        cum_tok = c.take("ident")
        _close(p)
        try:
            traits = EventTraits(telic, stage, cum_tok.value)
        except ValueError as exc:
            raise _SyntaxError(str(exc), cum_tok.line, cum_tok.col)
        return [("traits", name, traits)]
    raise _SyntaxError(f"unknown statement {kw!r}", head.line, head.col)


def parse_kb_lenient(doc: SourceDocument) -> tuple[KnowledgeBase, list[Diagnostic]]:
    """Parse ``doc`` keeping every well-formed statement; return KB and diagnostics."""
    diags: list[Diagnostic] = []
    decls = {"Class": set(), "Role": set(), "DataProp": set(), "Individual": set()}
    axioms: dict = {}  # axiom -> (line, col, names)
    raw_rules: list = []
    traits: dict = {}
    trait_pos: dict = {}

    def err(msg, line, col, severity="error", code="syntax"):
        diags.append(Diagnostic(msg, severity, line, col, code, doc.origin))

    for lineno, line_text in enumerate(doc.text.splitlines(), start=1):
        try:
            tokens, comment = _tokenize(line_text, lineno)
            if not tokens:
                continue
            p = _StatementParser(_Cursor(tokens, lineno, tokens[-1].col))
            items = _parse_statement(p, decls, comment)
        except _SyntaxError as exc:
            err(str(exc), exc.line, exc.col)
            continue
        start = (tokens[0].line, tokens[0].col)
        for item in items:
            if isinstance(item, tuple) and item[0] == "rule":
                raw_rules.append((item[1], item[2], start, p.names))
            elif isinstance(item, tuple) and item[0] == "traits":
                traits[item[1]] = item[2]
                trait_pos[item[1]] = p.names.get(("class", item[1]), start)
            elif item in axioms:
                err(f"duplicate axiom {item}", *start, severity="warning", code="duplicate")
            else:
                axioms[item] = (start, p.names)

    rules = []
    rule_meta = []
    for body, head, start, names in raw_rules:
        atoms = []
        for a in body + [head]:
            if isinstance(a, tuple):
                _, tok, s, o = a
                if tok.value in decls["DataProp"]:
                    names.setdefault(("data_property", tok.value), (tok.line, tok.col))
                    a = DataAtom(tok.value, s, o)
                else:
                    names.setdefault(("role", tok.value), (tok.line, tok.col))
                    a = ObjectAtom(tok.value, s, o)
            atoms.append(a)
        rule = Rule(tuple(atoms[:-1]), atoms[-1])
        if rule in rules:
            err(f"duplicate rule {rule}", *start, severity="warning", code="duplicate")
            continue
        rules.append(rule)
        rule_meta.append((start, names))

    ax_list = list(axioms)
    kb = KnowledgeBase(
        axioms=tuple(ax_list),
        rules=tuple(rules),
        classes=decls["Class"],
        roles=decls["Role"],
        data_properties=decls["DataProp"],
        individuals=decls["Individual"],
        traits=traits,
        spans={i: axioms[a][0] for i, a in enumerate(ax_list)},
        rule_spans={i: m[0] for i, m in enumerate(rule_meta)},
    )
    for name in traits:
        if name not in kb.classes:
            err(f"undeclared class '{name}'", *trait_pos[name], code="undeclared-name")
    kinds = {"class": "class", "role": "role", "data_property": "data property", "individual": "individual"}
    for where, i, kind, name in undeclared_references(kb):
        start, names = axioms[ax_list[i]] if where == "axiom" else rule_meta[i]
        line, col = names.get((kind, name), start)
        err(f"undeclared {kinds[kind]} '{name}'", line, col, code="undeclared-name")
    diags.sort(key=lambda d: (d.line or 0, d.column or 0))
    return kb, diags


def parse_kb(doc: SourceDocument) -> KnowledgeBase:
    kb, diags = parse_kb_lenient(doc)
    errors = [d for d in diags if d.is_error]
    if errors:
        raise ParseError(errors)
    return kb


def parse_concept(text: str, origin: str = "<concept>"):
    """Parse a single concept term such as ``(some participant Vehicle)``."""
    try:
        tokens, _ = _tokenize(text, 1)
        p = _StatementParser(_Cursor(tokens, 1, tokens[-1].col if tokens else 1))
        expr = p.concept()
        if not p.c.done():
            p.c.error("unexpected trailing input")
    except _SyntaxError as exc:
        raise ParseError([Diagnostic(str(exc), "error", exc.line, exc.col, "syntax", origin)]) from None
    return expr


def parse_kb_text(text: str, origin: str = "<string>") -> KnowledgeBase:
    return parse_kb(SourceDocument(text, origin))


# ----------------------------------------------------------- serializer


def _sign(flag: bool) -> str:
    return "+" if flag else "-"


def _serialize_axiom(ax) -> str:
    if isinstance(ax, (Nominal,)):
        raise ValueError("a nominal can only be serialized as an existential filler")
    text = str(ax)
    if "{" in text:
        raise ValueError(f"nominal outside an existential filler in {text}")
    if isinstance(ax, Gci) and ax.note:
        text += f"  # {ax.note}"
    return text


def serialize_kb(kb: KnowledgeBase) -> str:
    lines = [HEADER]
    for kw, names in (
        ("Class", kb.classes),
        ("Role", kb.roles),
        ("DataProp", kb.data_properties),
        ("Individual", kb.individuals),
    ):
        lines += [f"{kw}({n})" for n in sorted(names)]
    for name in sorted(kb.traits):
        t = kb.traits[name]
        lines.append(f"Traits({name}, {_sign(t.telic)}, {_sign(t.stage)}, {t.cumulative})")
    lines += [_serialize_axiom(ax) for ax in kb.axioms]
    lines += [str(r) for r in kb.rules]
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------- gold

_GOLD = re.compile(r"^\s*Gold\(\s*([A-Za-z_][A-Za-z0-9_]*)\s*,\s*([A-Za-z_][A-Za-z0-9_]*)\s*\)\s*$")


def parse_gold_labels(doc: SourceDocument) -> dict[str, set[str]]:
    """Read ``Gold(C, a)`` lines into the map from class to its true instances."""
    gold: dict[str, set[str]] = {}
    diags = []
    for lineno, line in enumerate(doc.text.splitlines(), start=1):
        stripped = line.split("#", 1)[0]
        if not stripped.strip():
            continue
        m = _GOLD.match(stripped)
        if not m:
            col = len(stripped) - len(stripped.lstrip()) + 1
            diags.append(Diagnostic("expected Gold(Class, individual)", "error", lineno, col, "syntax", doc.origin))
            continue
        gold.setdefault(m.group(1), set()).add(m.group(2))
    if diags:
        raise ParseError(diags)
    return gold


def serialize_gold(gold: dict[str, set[str]]) -> str:
    lines = [f"Gold({c}, {a})" for c, inds in gold.items() for a in sorted(inds)]
    return "".join(line + "\n" for line in lines)
