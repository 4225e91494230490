"""Abstract syntax for EL class expressions, axioms, ontologies and keyword queries."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

NAME_RE = re.compile(r"[A-Za-z0-9_]+\Z")
TOKEN_RE = re.compile(r"[a-z0-9]+(?:-[a-z0-9]+)*\Z")

# Names starting with this prefix are produced by the reasoner and never parsed.
FRESH_PREFIX = "__"
TOP_NAME = "top"


def is_valid_name(name: str) -> bool:
    return bool(NAME_RE.match(name)) and name != TOP_NAME and not name.startswith(FRESH_PREFIX)


# ---------------------------------------------------------------------------
# Class expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atomic:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Top:
    def __str__(self) -> str:
        return TOP_NAME


@dataclass(frozen=True)
class Conjunction:
    members: tuple["ClassExpression", ...]

    def __post_init__(self) -> None:
        if len(self.members) < 2:
            raise ValueError("a conjunction needs at least two members")

    def __str__(self) -> str:
        return "(and " + " ".join(str(m) for m in self.members) + ")"


@dataclass(frozen=True)
class Existential:
    role: str
    filler: "ClassExpression"

    def __str__(self) -> str:
        return f"(some {self.role} {self.filler})"


ClassExpression = Union[Atomic, Top, Conjunction, Existential]

TOP = Top()


def conj(*members: ClassExpression) -> ClassExpression:
    """Build a conjunction, collapsing the one-member case."""
    if len(members) == 1:
        return members[0]
    return Conjunction(tuple(members))


def some(role: str, filler: ClassExpression | str) -> Existential:
    if isinstance(filler, str):
        filler = Atomic(filler)
    return Existential(role, filler)


def serialize(e: ClassExpression) -> str:
    return str(e)


def normalize(e: ClassExpression) -> ClassExpression:
    """Flatten nested conjunctions, drop duplicate conjuncts and sort them by serialization."""
    if isinstance(e, Existential):
        return Existential(e.role, normalize(e.filler))
    if isinstance(e, Conjunction):
        flat: dict[str, ClassExpression] = {}
        for m in e.members:
            m = normalize(m)
            parts = m.members if isinstance(m, Conjunction) else (m,)
            for p in parts:
                flat.setdefault(serialize(p), p)
        return conj(*(flat[k] for k in sorted(flat)))
    return e


def signature(e: ClassExpression) -> tuple[frozenset[str], frozenset[str]]:
    """Class names and role names occurring in ``e``."""
    classes: set[str] = set()
    roles: set[str] = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, Atomic):
            classes.add(x.name)
        elif isinstance(x, Existential):
            roles.add(x.role)
            stack.append(x.filler)
        elif isinstance(x, Conjunction):
            stack.extend(x.members)
    return frozenset(classes), frozenset(roles)


def subexpressions(e: ClassExpression) -> Iterator[ClassExpression]:
    yield e
    if isinstance(e, Existential):
        yield from subexpressions(e.filler)
    elif isinstance(e, Conjunction):
        for m in e.members:
            yield from subexpressions(m)


def depth(e: ClassExpression) -> int:
    """Maximum number of existentials on a root-to-leaf path."""
    if isinstance(e, Existential):
        return 1 + depth(e.filler)
    if isinstance(e, Conjunction):
        return max(depth(m) for m in e.members)
    return 0


def size(e: ClassExpression) -> int:
    return sum(1 for _ in subexpressions(e))


# ---------------------------------------------------------------------------
# Keyword queries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KeywordQuery:
    phrases: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if not self.phrases:
            raise ValueError("a keyword query needs at least one phrase")
        for phrase in self.phrases:
            if not phrase:
                raise ValueError("empty phrase in keyword query")
            for tok in phrase:
                if not TOKEN_RE.match(tok):
                    raise ValueError(f"invalid keyword token {tok!r}")

    @classmethod
    def of(cls, *phrases: str) -> "KeywordQuery":
        return cls(tuple(tuple(p.lower().split()) for p in phrases))

    def __str__(self) -> str:
        return " + ".join(" ".join(p) for p in self.phrases)


# ---------------------------------------------------------------------------
# Axioms and ontologies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubClassOf:
    sub: ClassExpression
    sup: ClassExpression


@dataclass(frozen=True)
class EquivalentClasses:
    name: str
    definition: ClassExpression


@dataclass(frozen=True)
class SubRoleOf:
    sub: str
    sup: str


@dataclass(frozen=True)
class RoleChain:
    first: str
    second: str
    sup: str


TboxAxiom = Union[SubClassOf, EquivalentClasses, SubRoleOf, RoleChain]


@dataclass(frozen=True)
class ClassAssertion:
    individual: str
    concept: ClassExpression


@dataclass(frozen=True)
class RoleAssertion:
    subject: str
    role: str
    object: str


Assertion = Union[ClassAssertion, RoleAssertion]


@dataclass(frozen=True)
class Ontology:
    """A Tbox plus an Abox over declared class, role and individual names.

    ``declared_individuals`` may contain names that occur in no assertion;
    :attr:`individuals` is Ind(D), the individuals of the data.
    """

    classes: frozenset[str] = frozenset()
    roles: frozenset[str] = frozenset()
    declared_individuals: frozenset[str] = frozenset()
    tbox: tuple[TboxAxiom, ...] = ()
    abox: tuple[Assertion, ...] = ()
    _individuals: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        inds: set[str] = set()
        for a in self.abox:
            if isinstance(a, ClassAssertion):
                inds.add(a.individual)
            else:
                inds.update((a.subject, a.object))
        object.__setattr__(self, "_individuals", frozenset(inds))

    @property
    def individuals(self) -> frozenset[str]:
        return self._individuals

    def with_abox(self, abox: Iterable[Assertion], individuals: Iterable[str] = ()) -> "Ontology":
        """Same Tbox, replacing the Abox."""
        return Ontology(
            self.classes, self.roles, frozenset(individuals), self.tbox, tuple(abox)
        )


def axiom_signature(ax: TboxAxiom | Assertion) -> tuple[set[str], set[str], set[str]]:
    """(classes, roles, individuals) used by an axiom or assertion."""
    classes: set[str] = set()
    roles: set[str] = set()
    inds: set[str] = set()

    def add(e: ClassExpression) -> None:
        c, r = signature(e)
        classes.update(c)
        roles.update(r)

    if isinstance(ax, SubClassOf):
        add(ax.sub)
        add(ax.sup)
    elif isinstance(ax, EquivalentClasses):
        classes.add(ax.name)
        add(ax.definition)
    elif isinstance(ax, SubRoleOf):
        roles.update((ax.sub, ax.sup))
    elif isinstance(ax, RoleChain):
        roles.update((ax.first, ax.second, ax.sup))
    elif isinstance(ax, ClassAssertion):
        inds.add(ax.individual)
        add(ax.concept)
    elif isinstance(ax, RoleAssertion):
        inds.update((ax.subject, ax.object))
        roles.add(ax.role)
    return classes, roles, inds


def format_statement(ax: TboxAxiom | Assertion) -> str:
    """Render one axiom or assertion in the line-based ontology format."""
    if isinstance(ax, SubClassOf):
        return f"subclass {ax.sub} {ax.sup}"
    if isinstance(ax, EquivalentClasses):
        return f"equiv {ax.name} {ax.definition}"
    if isinstance(ax, SubRoleOf):
        return f"subrole {ax.sub} {ax.sup}"
    if isinstance(ax, RoleChain):
        return f"chain {ax.first} {ax.second} -> {ax.sup}"
    if isinstance(ax, ClassAssertion):
        return f"assert {ax.individual} {ax.concept}"
    if isinstance(ax, RoleAssertion):
        return f"relate {ax.subject} {ax.role} {ax.object}"
    raise TypeError(f"not an axiom: {ax!r}")


def format_ontology(o: Ontology) -> str:
    lines = [f"class {c}" for c in sorted(o.classes)]
    lines += [f"role {r}" for r in sorted(o.roles)]
    lines += [f"individual {i}" for i in sorted(o.declared_individuals | o.individuals)]
    lines += [format_statement(ax) for ax in o.tbox]
    lines += [format_statement(a) for a in o.abox]
    return "\n".join(lines) + "\n"
