"""Concrete syntax: s-expression class expressions, line-based ontologies, keyword queries.

Grammar::

    expr := Name | "top" | "(and" expr expr+ ")" | "(some" Role expr ")"

Ontology statements, one per line, ``#`` starts a comment::

    class <Name> | role <Name> | individual <Name>
    subclass <expr> <expr> | equiv <ClassName> <expr>
    subrole <Role> <Role> | chain <Role> <Role> -> <Role>
    assert <Individual> <expr> | relate <Individual> <Role> <Individual>
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    TOKEN_RE,
    TOP,
    Atomic,
    ClassAssertion,
    ClassExpression,
    Conjunction,
    EquivalentClasses,
    Existential,
    KeywordQuery,
    Ontology,
    RoleAssertion,
    RoleChain,
    SubClassOf,
    SubRoleOf,
    axiom_signature,
    is_valid_name,
)


class DLSyntaxError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1) -> None:
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class OntologyError(ValueError):
    """Validation failure: undeclared name, duplicate declaration or kind clash."""


@dataclass
class _Tok:
    text: str
    line: int
    col: int


_TOKEN_SPLIT = re.compile(r"\(|\)|[^\s()]+")


def _tokenize(text: str, line: int = 1, col0: int = 1) -> list[_Tok]:
    toks = []
    for lineno, chunk in enumerate(text.split("\n")):
        base = col0 if lineno == 0 else 1
        for m in _TOKEN_SPLIT.finditer(chunk):
            toks.append(_Tok(m.group(), line + lineno, base + m.start()))
    return toks


class _ExprParser:
    def __init__(self, toks: list[_Tok], end: tuple[int, int]) -> None:
        self.toks = toks
        self.pos = 0
        self.end = end

    def peek(self) -> _Tok | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self, what: str) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise DLSyntaxError(f"unexpected end of input, expected {what}", *self.end)
        self.pos += 1
        return tok

    def name(self, what: str) -> str:
        tok = self.next(what)
        if tok.text in "()" or not is_valid_name(tok.text):
            raise DLSyntaxError(f"expected {what}, got {tok.text!r}", tok.line, tok.col)
        return tok.text

    def expr(self) -> ClassExpression:
        tok = self.next("class expression")
        if tok.text == "top":
            return TOP
        if tok.text == ")":
            raise DLSyntaxError("unexpected ')'", tok.line, tok.col)
        if tok.text != "(":
            if not is_valid_name(tok.text):
                raise DLSyntaxError(f"invalid class name {tok.text!r}", tok.line, tok.col)
            return Atomic(tok.text)
        head = self.next("'and' or 'some'")
        if head.text == "and":
            members = [self.expr(), self.expr()]
            while (t := self.peek()) is not None and t.text != ")":
                members.append(self.expr())
            self.close()
            return Conjunction(tuple(members))
        if head.text == "some":
            role = self.name("role name")
            filler = self.expr()
            self.close()
            return Existential(role, filler)
        raise DLSyntaxError(f"expected 'and' or 'some', got {head.text!r}", head.line, head.col)

    def close(self) -> None:
        tok = self.next("')'")
        if tok.text != ")":
            raise DLSyntaxError(f"expected ')', got {tok.text!r}", tok.line, tok.col)

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise DLSyntaxError(f"trailing input {tok.text!r}", tok.line, tok.col)


def _end_position(text: str, line: int = 1, col0: int = 1) -> tuple[int, int]:
    lines = text.split("\n")
    if len(lines) == 1:
        return line, col0 + len(text)
    return line + len(lines) - 1, len(lines[-1]) + 1


def parse_class_expression(text: str) -> ClassExpression:
    """Parse the surface form of a class expression.

    Conjunctions are kept exactly as written (no flattening or reordering);
    apply :func:`queriability.syntax.normalize` for the canonical form.
    """
    p = _ExprParser(_tokenize(text), _end_position(text))
    e = p.expr()
    p.done()
    return e


def parse_keyword_query(text: str) -> KeywordQuery:
    """``pleural effusion + left`` -> two phrases."""
    phrases = []
    for i, part in enumerate(text.split("+")):
        toks = tuple(part.lower().split())
        if not toks:
            raise DLSyntaxError(f"empty phrase #{i + 1} in keyword query {text!r}")
        for t in toks:
            if not TOKEN_RE.match(t):
                raise DLSyntaxError(f"invalid keyword token {t!r}")
        phrases.append(toks)
    return KeywordQuery(tuple(phrases))


_DECL = ("class", "role", "individual")


def parse_ontology(text: str, base: Ontology | None = None) -> Ontology:
    """Parse and validate an ontology document.

    With ``base`` the document extends it: declarations and axioms of
    ``base`` are kept and the new statements may use its names.
    """
    kinds: dict[str, str] = {}
    decls = {k: set() for k in _DECL}
    if base is not None:
        for kind, names in (("class", base.classes), ("role", base.roles),
                            ("individual", base.declared_individuals | base.individuals)):
            for n in names:
                kinds[n] = kind
                decls[kind].add(n)

    statements: list[tuple[int, str, list[_Tok], str]] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokenize(line, lineno)
        if not toks:
            continue
        keyword = toks[0].text
        if keyword in _DECL:
            if len(toks) != 2:
                raise DLSyntaxError(f"'{keyword}' takes exactly one name", lineno, toks[0].col)
            name = toks[1].text
            if not is_valid_name(name):
                raise DLSyntaxError(f"invalid name {name!r}", lineno, toks[1].col)
            if name in kinds:
                if kinds[name] == keyword:
                    raise OntologyError(f"line {lineno}: duplicate declaration of {keyword} {name}")
                raise OntologyError(
                    f"line {lineno}: {name} declared as {keyword} but already a {kinds[name]}"
                )
            kinds[name] = keyword
            decls[keyword].add(name)
        else:
            statements.append((lineno, keyword, toks, line))

    tbox = list(base.tbox) if base else []
    abox = list(base.abox) if base else []
    for lineno, keyword, toks, line in statements:
        ax = _statement(lineno, keyword, toks, line)
        classes, roles, inds = axiom_signature(ax)
        for used, kind in ((classes, "class"), (roles, "role"), (inds, "individual")):
            for n in sorted(used):
                if n not in kinds:
                    raise OntologyError(f"line {lineno}: undeclared {kind} {n}")
                if kinds[n] != kind:
                    raise OntologyError(f"line {lineno}: {n} is a {kinds[n]}, used as {kind}")
        if isinstance(ax, (ClassAssertion, RoleAssertion)):
            abox.append(ax)
        else:
            tbox.append(ax)

    return Ontology(
        frozenset(decls["class"]),
        frozenset(decls["role"]),
        frozenset(decls["individual"]),
        tuple(tbox),
        tuple(abox),
    )


def _statement(lineno: int, keyword: str, toks: list[_Tok], line: str):
    rest = toks[1:]
    end = (lineno, len(line) + 1)

    def names(n: int) -> list[str]:
        if len(rest) != n:
            raise DLSyntaxError(f"'{keyword}' takes {n} names", lineno, toks[0].col)
        for t in rest:
            if not is_valid_name(t.text):
                raise DLSyntaxError(f"invalid name {t.text!r}", lineno, t.col)
        return [t.text for t in rest]

    if keyword in ("subclass", "equiv", "assert"):
        p = _ExprParser(rest, end)
        if keyword == "subclass":
            left: ClassExpression | str = p.expr()
        else:
            left = p.name("class name" if keyword == "equiv" else "individual name")
        right = p.expr()
        p.done()
        if keyword == "subclass":
            return SubClassOf(left, right)
        if keyword == "equiv":
            return EquivalentClasses(left, right)
        return ClassAssertion(left, right)
    if keyword == "subrole":
        sub, sup = names(2)
        return SubRoleOf(sub, sup)
    if keyword == "relate":
        s, r, o = names(3)
        return RoleAssertion(s, r, o)
    if keyword == "chain":
        words = [t.text for t in rest]
        if "->" not in words:
            raise DLSyntaxError("chain needs '->'", lineno, toks[0].col)
        arrow = words.index("->")
        if arrow != 2 or len(words) != 4:
            raise DLSyntaxError(
                "only binary role chains 'chain r s -> t' are supported", lineno, toks[0].col
            )
        for t in (rest[0], rest[1], rest[3]):
            if not is_valid_name(t.text):
                raise DLSyntaxError(f"invalid role name {t.text!r}", lineno, t.col)
        return RoleChain(words[0], words[1], words[3])
    raise DLSyntaxError(f"unknown statement {keyword!r}", lineno, toks[0].col)
