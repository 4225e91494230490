"""Completion-based reasoning for EL with role inclusions and binary role chains.

The Tbox is first brought into normal form::

    A ⊑ B    A1 ⊓ A2 ⊑ B    A ⊑ ∃r.B    ∃r.A ⊑ B    r ⊑ s    r ∘ s ⊑ t

with A, B class names, ``top`` or fresh names. Saturation then derives, for
every node (class names and individuals), the set of class names subsuming
it, plus role edges between nodes. Each ∃-filler is represented by the single
node of its (atomic) filler name, the usual EL canonical model.
"""

from __future__ import annotations

import logging
import os
import threading
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Iterable

from .syntax import (
    FRESH_PREFIX,
    TOP_NAME,
    Atomic,
    ClassAssertion,
    ClassExpression,
    Conjunction,
    EquivalentClasses,
    Existential,
    Ontology,
    RoleAssertion,
    RoleChain,
    SubClassOf,
    SubRoleOf,
    Top,
    TboxAxiom,
    normalize,
    serialize,
    signature,
)

log = logging.getLogger(__name__)

DEFAULT_MAX_FACTS = 1_000_000
MAX_FACTS_ENV = "QUERIABILITY_MAX_FACTS"


class BudgetExceeded(RuntimeError):
    """Saturation derived more facts than the configured cap."""


class UnknownSymbolError(ValueError):
    def __init__(self, classes: Iterable[str] = (), roles: Iterable[str] = ()) -> None:
        self.classes = sorted(classes)
        self.roles = sorted(roles)
        parts = []
        if self.classes:
            parts.append("classes " + ", ".join(self.classes))
        if self.roles:
            parts.append("roles " + ", ".join(self.roles))
        super().__init__("symbols outside the ontology signature: " + "; ".join(parts))


def default_max_facts() -> int:
    return int(os.environ.get(MAX_FACTS_ENV, DEFAULT_MAX_FACTS))


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


def _atom(e: ClassExpression) -> str | None:
    if isinstance(e, Atomic):
        return e.name
    if isinstance(e, Top):
        return TOP_NAME
    return None


def _as_expr(name: str) -> ClassExpression:
    return Top() if name == TOP_NAME else Atomic(name)


def is_normal(ax: TboxAxiom) -> bool:
    if isinstance(ax, (SubRoleOf, RoleChain)):
        return True
    if not isinstance(ax, SubClassOf):
        return False
    sub, sup = ax.sub, ax.sup
    if _atom(sub) is not None:
        return _atom(sup) is not None or (
            isinstance(sup, Existential) and _atom(sup.filler) is not None
        )
    if _atom(sup) is None:
        return False
    if isinstance(sub, Conjunction):
        return len(sub.members) == 2 and all(_atom(m) is not None for m in sub.members)
    return isinstance(sub, Existential) and _atom(sub.filler) is not None


class Normalizer:
    """Structural transformation into normal form, introducing fresh names.

    A fresh name X stands for one complex expression E. It is constrained by
    X ⊑ E where E occurs positively and E ⊑ X where it occurs negatively, so
    the result is a conservative extension of the input.
    """

    def __init__(self, prefix: str = FRESH_PREFIX + "n") -> None:
        self.prefix = prefix
        self.counter = 0
        self.names: dict[str, str] = {}
        self.definitions: dict[str, ClassExpression] = {}
        self._pos: set[str] = set()
        self._neg: set[str] = set()
        self._pairs: dict[tuple[str, str], str] = {}
        self.out: list[SubClassOf] = []

    def fresh(self, meaning: ClassExpression) -> str:
        self.counter += 1
        name = f"{self.prefix}{self.counter}"
        self.definitions[name] = meaning
        return name

    def take(self) -> list[SubClassOf]:
        out, self.out = self.out, []
        return out

    def name_for(self, e: ClassExpression, positive: bool, negative: bool) -> str:
        a = _atom(e)
        if a is not None:
            return a
        e = normalize(e)
        key = serialize(e)
        name = self.names.get(key)
        if name is None:
            name = self.names[key] = self.fresh(e)
        if positive and name not in self._pos:
            self._pos.add(name)
            self.add(Atomic(name), e)
        if negative and name not in self._neg:
            self._neg.add(name)
            self.add(e, Atomic(name))
        return name

    def _emit(self, sub: ClassExpression, sup: ClassExpression) -> None:
        ax = SubClassOf(sub, sup)
        if ax not in self.out:
            self.out.append(ax)

    def add(self, sub: ClassExpression, sup: ClassExpression) -> None:
        if isinstance(sup, Top):
            return
        if isinstance(sup, Conjunction):
            for m in sup.members:
                self.add(sub, m)
            return

        lhs_atom = _atom(sub)
        if lhs_atom is not None:
            if _atom(sup) is not None:
                if lhs_atom != _atom(sup):
                    self._emit(_as_expr(lhs_atom), sup)
                return
            assert isinstance(sup, Existential)
            filler = self.name_for(sup.filler, True, False)
            self._emit(_as_expr(lhs_atom), Existential(sup.role, _as_expr(filler)))
            return

        # complex left-hand side: the right-hand side has to be a name
        rhs = _atom(sup)
        if rhs is None:
            rhs = self.name_for(sup, True, False)
        if isinstance(sub, Existential):
            filler = self.name_for(sub.filler, False, True)
            self._emit(Existential(sub.role, _as_expr(filler)), _as_expr(rhs))
            return
        assert isinstance(sub, Conjunction)
        names = list(dict.fromkeys(self.name_for(m, False, True) for m in sub.members))
        if TOP_NAME in names and len(names) > 1:
            names.remove(TOP_NAME)
        if len(names) == 1:
            self.add(_as_expr(names[0]), _as_expr(rhs))
            return
        cur = names[0]
        for n in names[1:-1]:
            pair = (cur, n)
            y = self._pairs.get(pair)
            if y is None:
                y = self._pairs[pair] = self.fresh(Conjunction((_as_expr(cur), _as_expr(n))))
                self._emit(Conjunction((_as_expr(cur), _as_expr(n))), Atomic(y))
            cur = y
        self._emit(Conjunction((_as_expr(cur), _as_expr(names[-1]))), _as_expr(rhs))


def normalize_tbox(o: Ontology, normalizer: Normalizer | None = None) -> Ontology:
    """Normal-form version of ``o``.

    Class assertions with complex concepts become assertions of fresh names,
    so the returned Abox only asserts names. Fresh names are added to
    ``classes``.
    """
    nz = normalizer or Normalizer()
    role_axioms: list[TboxAxiom] = []
    for ax in o.tbox:
        if isinstance(ax, (SubRoleOf, RoleChain)):
            role_axioms.append(ax)
        elif isinstance(ax, EquivalentClasses):
            nz.add(Atomic(ax.name), ax.definition)
            nz.add(ax.definition, Atomic(ax.name))
        else:
            nz.add(ax.sub, ax.sup)
    abox = []
    for a in o.abox:
        if isinstance(a, ClassAssertion):
            parts = a.concept.members if isinstance(a.concept, Conjunction) else (a.concept,)
            for p in parts:
                name = nz.name_for(p, True, False)
                abox.append(ClassAssertion(a.individual, _as_expr(name)))
        else:
            abox.append(a)
    tbox = tuple(nz.take()) + tuple(role_axioms)
    return Ontology(
        o.classes | frozenset(nz.definitions),
        o.roles,
        o.declared_individuals,
        tbox,
        tuple(abox),
    )


# ---------------------------------------------------------------------------
# Saturation
# ---------------------------------------------------------------------------


def role_closure(roles: Iterable[str], tbox: Iterable[TboxAxiom]) -> dict[str, frozenset[str]]:
    """Reflexive-transitive super-roles for every role."""
    up: dict[str, set[str]] = {r: {r} for r in roles}
    for ax in tbox:
        if isinstance(ax, SubRoleOf):
            up.setdefault(ax.sub, {ax.sub}).add(ax.sup)
            up.setdefault(ax.sup, {ax.sup})
    changed = True
    while changed:
        changed = False
        for r, sups in up.items():
            extra = set().union(*(up[s] for s in sups)) - sups
            if extra:
                sups |= extra
                changed = True
    return {r: frozenset(s) for r, s in up.items()}


class _Engine:
    def __init__(self, max_facts: int) -> None:
        self.max_facts = max_facts
        self.facts = 0
        self.subs: dict[str, set[str]] = {}
        self.holders: dict[str, set[str]] = defaultdict(set)
        self.succ: dict[str, dict[str, set[str]]] = defaultdict(lambda: defaultdict(set))
        self.pred: dict[str, dict[str, set[str]]] = defaultdict(lambda: defaultdict(set))
        self.told: dict[str, list[str]] = defaultdict(list)
        self.conj: dict[str, list[tuple[str, str]]] = defaultdict(list)
        self.ex_rhs: dict[str, list[tuple[str, str]]] = defaultdict(list)
        self.ex_lhs: dict[tuple[str, str], list[str]] = defaultdict(list)
        self.supers: dict[str, frozenset[str]] = {}
        self.chain_first: dict[str, list[tuple[str, str]]] = defaultdict(list)
        self.chain_second: dict[str, list[tuple[str, str]]] = defaultdict(list)
        self.queue: deque = deque()

    # -- facts ------------------------------------------------------------
    def _count(self) -> None:
        self.facts += 1
        if self.facts > self.max_facts:
            raise BudgetExceeded(
                f"saturation exceeded {self.max_facts} derived facts "
                f"(raise {MAX_FACTS_ENV} if the input is meant to be this large)"
            )

    def add_node(self, node: str, is_class: bool) -> None:
        if node in self.subs:
            return
        self.subs[node] = set()
        self.queue.append((0, node, TOP_NAME))
        if is_class:
            self.queue.append((0, node, node))

    def set_roles(self, roles: Iterable[str], tbox: Iterable[TboxAxiom]) -> None:
        tbox = list(tbox)
        self.supers = role_closure(roles, tbox)
        for ax in tbox:
            if isinstance(ax, RoleChain):
                self.chain_first[ax.first].append((ax.second, ax.sup))
                self.chain_second[ax.second].append((ax.first, ax.sup))
                for r in (ax.first, ax.second, ax.sup):
                    self.supers.setdefault(r, frozenset({r}))

    def add_class_axioms(self, axioms: Iterable[SubClassOf], refire: bool) -> None:
        for ax in axioms:
            sub, sup = ax.sub, ax.sup
            a = _atom(sub)
            if a is not None and _atom(sup) is not None:
                b = _atom(sup)
                self.told[a].append(b)
                if refire:
                    for x in list(self.holders[a]):
                        self.queue.append((0, x, b))
            elif a is not None:
                r, b = sup.role, _atom(sup.filler)
                self.ex_rhs[a].append((r, b))
                if refire:
                    for x in list(self.holders[a]):
                        self.queue.append((1, x, r, b))
            elif isinstance(sub, Conjunction):
                a1, a2 = (_atom(m) for m in sub.members)
                b = _atom(sup)
                self.conj[a1].append((a2, b))
                self.conj[a2].append((a1, b))
                if refire:
                    for x in list(self.holders[a1] & self.holders[a2]):
                        self.queue.append((0, x, b))
            else:
                r, f, b = sub.role, _atom(sub.filler), _atom(sup)
                self.ex_lhs[(r, f)].append(b)
                if refire:
                    for y in list(self.holders[f]):
                        for x in list(self.pred[y].get(r, ())):
                            self.queue.append((0, x, b))

    def run(self) -> None:
        q = self.queue
        subs, holders, succ, pred = self.subs, self.holders, self.succ, self.pred
        while q:
            item = q.popleft()
            if item[0] == 0:
                _, x, a = item
                sx = subs[x]
                if a in sx:
                    continue
                sx.add(a)
                holders[a].add(x)
                self._count()
                for b in self.told.get(a, ()):
                    if b not in sx:
                        q.append((0, x, b))
                for other, b in self.conj.get(a, ()):
                    if other in sx and b not in sx:
                        q.append((0, x, b))
                for r, b in self.ex_rhs.get(a, ()):
                    q.append((1, x, r, b))
                for r, ws in pred[x].items():
                    for b in self.ex_lhs.get((r, a), ()):
                        for w in ws:
                            q.append((0, w, b))
            else:
                _, x, r, y = item
                sy = succ[x][r]
                if y in sy:
                    continue
                sy.add(y)
                pred[y][r].add(x)
                self._count()
                sx = subs[x]
                for a in subs[y]:
                    for b in self.ex_lhs.get((r, a), ()):
                        if b not in sx:
                            q.append((0, x, b))
                for s in self.supers.get(r, ()):
                    if s != r:
                        q.append((1, x, s, y))
                for second, t in self.chain_first.get(r, ()):
                    for z in list(succ[y].get(second, ())):
                        q.append((1, x, t, z))
                for first, t in self.chain_second.get(r, ()):
                    for w in list(pred[x].get(first, ())):
                        q.append((1, w, t, y))


@dataclass(frozen=True)
class CertainAnswerSet:
    query: ClassExpression
    individuals: frozenset[str]


class SaturatedIndex:
    """Result of saturating an ontology.

    Read access is thread-safe. Queries over complex expressions add fresh
    definitions and resume saturation; that step is serialized by a lock.
    """

    def __init__(self, told: Ontology, normalized: Ontology, engine: _Engine,
                 normalizer: Normalizer) -> None:
        self.told = told
        self.normalized = normalized
        self._engine = engine
        self._normalizer = normalizer
        self._lock = threading.RLock()
        self._query_names: dict[str, str] = {}
        self._bits: dict | None = None

    # -- derived facts ----------------------------------------------------
    @property
    def fresh_definitions(self) -> dict[str, ClassExpression]:
        """Fresh class name -> the expression it was introduced for."""
        return dict(self._normalizer.definitions)

    def subsumers(self, node: str) -> frozenset[str]:
        with self._lock:
            return frozenset(self._engine.subs.get(node, ()))

    def subsumptions(self) -> set[tuple[str, str]]:
        with self._lock:
            return {(x, a) for x, s in self._engine.subs.items() for a in s}

    def role_edges(self) -> set[tuple[str, str, str]]:
        with self._lock:
            return {
                (x, r, y)
                for x, by_role in self._engine.succ.items()
                for r, ys in by_role.items()
                for y in ys
            }

    def successors(self, node: str, role: str) -> frozenset[str]:
        with self._lock:
            return frozenset(self._engine.succ.get(node, {}).get(role, ()))

    # -- queries ----------------------------------------------------------
    def check_signature(self, e: ClassExpression) -> None:
        classes, roles = signature(e)
        bad_c = classes - self.told.classes
        bad_r = roles - self.told.roles
        if bad_c or bad_r:
            raise UnknownSymbolError(bad_c, bad_r)

    def internalize(self, e: ClassExpression) -> str:
        """Name a class node equivalent to ``e``, saturating as needed."""
        a = _atom(e)
        if a is not None:
            return a
        key = serialize(normalize(e))
        with self._lock:
            name = self._query_names.get(key)
            if name is not None:
                return name
            self.check_signature(e)
            before = set(self._normalizer.definitions)
            name = self._normalizer.name_for(e, True, True)
            eng = self._engine
            for fresh in sorted(set(self._normalizer.definitions) - before):
                eng.add_node(fresh, True)
            eng.add_class_axioms(self._normalizer.take(), refire=True)
            eng.run()
            self._query_names[key] = name
            self._bits = None
            return name

    def classify(self) -> dict[str, frozenset[str]]:
        """Named (told) super-classes of every told class, reflexive."""
        names = self.told.classes | {TOP_NAME}
        with self._lock:
            return {c: frozenset(self._engine.subs[c] & names) for c in self.told.classes}


def saturate(o: Ontology, max_facts: int | None = None) -> SaturatedIndex:
    """Normalize ``o`` (if needed) and compute its completion."""
    if max_facts is None:
        max_facts = default_max_facts()
    nz = Normalizer()
    norm = normalize_tbox(o, nz)
    eng = _Engine(max_facts)
    eng.set_roles(norm.roles, norm.tbox)
    for c in sorted(norm.classes | {TOP_NAME}):
        eng.add_node(c, True)
    for i in sorted(norm.declared_individuals | norm.individuals):
        eng.add_node(i, False)
    eng.add_class_axioms((ax for ax in norm.tbox if isinstance(ax, SubClassOf)), refire=False)
    for a in norm.abox:
        if isinstance(a, ClassAssertion):
            eng.queue.append((0, a.individual, _atom(a.concept)))
        else:
            eng.queue.append((1, a.subject, a.role, a.object))
    eng.run()
    log.debug("saturated %d nodes, %d facts", len(eng.subs), eng.facts)
    return SaturatedIndex(o, norm, eng, nz)


def subsumes(idx: SaturatedIndex, sub: ClassExpression, sup: ClassExpression) -> bool:
    """True iff the ontology entails ``sub ⊑ sup``."""
    idx.check_signature(sub)
    idx.check_signature(sup)
    if isinstance(sup, Top):
        return True
    a = idx.internalize(sub)
    b = idx.internalize(sup)
    return b in idx.subsumers(a)


def certain_answers(idx: SaturatedIndex, q: ClassExpression) -> CertainAnswerSet:
    """Individuals ``a`` of the data with S ∪ D ⊨ q(a)."""
    idx.check_signature(q)
    name = idx.internalize(q)
    inds = frozenset(a for a in idx.told.individuals if name in idx.subsumers(a))
    return CertainAnswerSet(q, inds)


class CanonicalEvaluator:
    """Answers queries by matching them into the saturated completion graph.

    An individual is returned iff the query tree maps homomorphically into
    the graph from that individual. This agrees with :func:`certain_answers`
    for the EL fragment but needs no re-saturation, so it is the path used
    when many candidate queries are evaluated. Node sets are int bitmasks.
    """

    def __init__(self, idx: SaturatedIndex) -> None:
        self.idx = idx
        eng = idx._engine
        with idx._lock:
            self.nodes = sorted(eng.subs)
            pos = {n: i for i, n in enumerate(self.nodes)}
            self._holders = {
                a: _mask(pos[x] for x in xs) for a, xs in eng.holders.items()
            }
            self._pred: dict[str, list[int]] = {}
            for y, by_role in eng.pred.items():
                for r, xs in by_role.items():
                    row = self._pred.setdefault(r, [0] * len(self.nodes))
                    row[pos[y]] = _mask(pos[x] for x in xs)
        self.all_nodes = (1 << len(self.nodes)) - 1
        self.individual_mask = _mask(pos[i] for i in idx.told.individuals)
        self._cache: dict[ClassExpression, int] = {}

    def mask(self, e: ClassExpression) -> int:
        hit = self._cache.get(e)
        if hit is not None:
            return hit
        if isinstance(e, Atomic):
            m = self._holders.get(e.name, 0)
        elif isinstance(e, Top):
            m = self.all_nodes
        elif isinstance(e, Conjunction):
            m = self.all_nodes
            for member in e.members:
                m &= self.mask(member)
                if not m:
                    break
        else:
            inner = self.mask(e.filler)
            row = self._pred.get(e.role)
            m = 0
            if row is not None:
                while inner:
                    low = inner & -inner
                    m |= row[low.bit_length() - 1]
                    inner ^= low
        self._cache[e] = m
        return m

    def individual_mask_of(self, e: ClassExpression) -> int:
        return self.mask(e) & self.individual_mask

    def answers(self, e: ClassExpression) -> frozenset[str]:
        m = self.individual_mask_of(e)
        out = []
        while m:
            low = m & -m
            out.append(self.nodes[low.bit_length() - 1])
            m ^= low
        return frozenset(out)


def _mask(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def hierarchy_lines(idx: SaturatedIndex) -> list[str]:
    """Indented class hierarchy (direct subclasses under each class)."""
    supers = idx.classify()
    strict = {
        c: {s for s in sups if s != c and c not in supers.get(s, ())} for c, sups in supers.items()
    }
    equivalents = {
        c: sorted(s for s in sups if s != c and c in supers.get(s, ())) for c, sups in supers.items()
    }
    parents: dict[str, set[str]] = {}
    for c, sups in strict.items():
        named = {s for s in sups if s != TOP_NAME}
        direct = {s for s in named if not any(s in strict.get(o, ()) for o in named if o != s)}
        parents[c] = direct
    children: dict[str, list[str]] = defaultdict(list)
    for c, ps in parents.items():
        for p in ps or {TOP_NAME}:
            children[p].append(c)

    lines: list[str] = []

    def walk(node: str, level: int) -> None:
        for child in sorted(children.get(node, ())):
            eq = equivalents.get(child)
            suffix = f"  ≡ {', '.join(eq)}" if eq else ""
            lines.append("  " * level + child + suffix)
            walk(child, level + 1)

    lines.append(TOP_NAME)
    walk(TOP_NAME, 1)
    return lines
