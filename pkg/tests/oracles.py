"""Reference implementations used only by the tests.

They share no code with the package beyond the syntax dataclasses and are
written for obviousness, not speed.
"""

from __future__ import annotations

import itertools
from typing import Iterable

from queriability.syntax import (
    Atomic,
    ClassAssertion,
    Conjunction,
    Existential,
    Ontology,
    RoleAssertion,
    RoleChain,
    SubClassOf,
    SubRoleOf,
    Top,
)

TOP = "top"


def _name(e):
    if isinstance(e, Atomic):
        return e.name
    if isinstance(e, Top):
        return TOP
    return None


def naive_saturation(o: Ontology) -> tuple[set, set]:
    """Apply the completion rules to a normalized ontology until nothing changes.

    Returns (subsumptions as (node, class) pairs, edges as (x, role, y)).
    Nodes are the class names, ``top`` and the individuals; an existential
    on a right-hand side points at the node of its filler class.
    """
    classes = set(o.classes) | {TOP}
    inds = set(o.declared_individuals) | set(o.individuals)
    S = {c: {c, TOP} for c in classes}
    S.update({i: {TOP} for i in inds})
    R: set[tuple[str, str, str]] = set()
    for a in o.abox:
        if isinstance(a, ClassAssertion):
            S[a.individual].add(_name(a.concept))
        elif isinstance(a, RoleAssertion):
            R.add((a.subject, a.role, a.object))

    changed = True
    while changed:
        changed = False
        new_s = set()
        new_r = set()
        for ax in o.tbox:
            if isinstance(ax, SubClassOf):
                sub, sup = ax.sub, ax.sup
                if _name(sub) is not None and _name(sup) is not None:
                    for x, s in S.items():
                        if _name(sub) in s:
                            new_s.add((x, _name(sup)))
                elif _name(sub) is not None:
                    for x, s in S.items():
                        if _name(sub) in s:
                            new_r.add((x, sup.role, _name(sup.filler)))
                elif isinstance(sub, Conjunction):
                    a1, a2 = (_name(m) for m in sub.members)
                    for x, s in S.items():
                        if a1 in s and a2 in s:
                            new_s.add((x, _name(sup)))
                else:
                    for x, r, y in R:
                        if r == sub.role and _name(sub.filler) in S[y]:
                            new_s.add((x, _name(sup)))
            elif isinstance(ax, SubRoleOf):
                for x, r, y in R:
                    if r == ax.sub:
                        new_r.add((x, ax.sup, y))
            elif isinstance(ax, RoleChain):
                for (x, r, y), (y2, s, z) in itertools.product(R, R):
                    if r == ax.first and s == ax.second and y == y2:
                        new_r.add((x, ax.sup, z))
        for x, a in new_s:
            if a not in S[x]:
                S[x].add(a)
                changed = True
        if not new_r <= R:
            R |= new_r
            changed = True
    return {(x, a) for x, s in S.items() for a in s}, R


def tree_matches(subs: set, edges: set, node: str, q) -> bool:
    """Does the query tree map homomorphically into the graph at ``node``?"""
    if isinstance(q, Top):
        return True
    if isinstance(q, Atomic):
        return (node, q.name) in subs
    if isinstance(q, Conjunction):
        return all(tree_matches(subs, edges, node, m) for m in q.members)
    return any(
        tree_matches(subs, edges, y, q.filler)
        for x, r, y in edges
        if x == node and r == q.role
    )


def oracle_answers(o: Ontology, q) -> set[str]:
    """Certain answers over a normalized ontology via the naive completion graph."""
    subs, edges = naive_saturation(o)
    return {i for i in o.individuals if tree_matches(subs, edges, i, q)}


def all_expressions(classes: Iterable[str], roles: Iterable[str], max_length: int,
                    max_nesting: int) -> set:
    """Every normalized class expression within the bounds, by plain recursion."""
    classes = sorted(classes)
    roles = sorted(roles)
    by_len: dict[int, set] = {}

    def nest(e) -> int:
        if isinstance(e, Existential):
            return 1 + nest(e.filler)
        if isinstance(e, Conjunction):
            return max(nest(m) for m in e.members)
        return 0

    def flatten(e) -> list:
        return list(e.members) if isinstance(e, Conjunction) else [e]

    for n in range(1, max_length + 1):
        out = set()
        if n == 1:
            out = {Atomic(c) for c in classes}
        else:
            for f in by_len[n - 1]:
                for r in roles:
                    e = Existential(r, f)
                    if nest(e) <= max_nesting:
                        out.add(e)
            # binary splits; flattening and deduplication yield n-ary conjunctions
            for k in range(1, n):
                for a in by_len[k]:
                    for b in by_len[n - k]:
                        members = {str(m): m for m in flatten(a) + flatten(b)}
                        if len(members) < 2:
                            continue
                        e = Conjunction(tuple(members[s] for s in sorted(members)))
                        if _length(e) == n:
                            out.add(e)
        by_len[n] = out
    return set().union(*by_len.values()) if by_len else set()


def _length(e) -> int:
    if isinstance(e, Atomic):
        return 1
    if isinstance(e, Existential):
        return 1 + _length(e.filler)
    return sum(_length(m) for m in e.members)


def naive_keyword(texts: dict[str, str], phrases: list[list[str]]) -> set[str]:
    """Phrase search by padded substring matching on normalized text."""
    import re

    hits = set()
    for rid, text in texts.items():
        norm = " " + " ".join(re.findall(r"[a-z0-9]+(?:-[a-z0-9]+)*", text.lower())) + " "
        if all(f" {' '.join(p)} " in norm for p in phrases):
            hits.add(rid)
    return hits
