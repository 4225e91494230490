"""Correct and best queries for an extensional information request.

The query language is infinite, so the search runs over a bounded
:class:`Vocabulary`: candidate queries are enumerated in non-decreasing
lexicographic fitness and each is evaluated against the approach. Hitting the
candidate cap is reported, never silently treated as "no query exists".
"""

from __future__ import annotations

import itertools
import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .backends import CLASS_EXPRESSION, KEYWORD, ModellingApproach, Query, tokenize
from .fitness import FitnessOrder, FitnessValue, Lexicographic, fitness_of
from .syntax import (
    Atomic,
    ClassExpression,
    Conjunction,
    Existential,
    KeywordQuery,
    serialize,
)

log = logging.getLogger(__name__)

DEFAULT_MAX_NESTING = 3
DEFAULT_MAX_LENGTH = 8
DEFAULT_MAX_CANDIDATES = 200_000
MAX_CANDIDATES_ENV = "QUERIABILITY_MAX_CANDIDATES"


def default_max_candidates() -> int:
    return int(os.environ.get(MAX_CANDIDATES_ENV, DEFAULT_MAX_CANDIDATES))


@dataclass(frozen=True)
class InformationRequest:
    id: str
    description: str
    gold: frozenset[str]
    queries: Mapping[str, str] = field(default_factory=dict, compare=False)
    published: Mapping[str, FitnessValue] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class Vocabulary:
    classes: frozenset[str] = frozenset()
    roles: frozenset[str] = frozenset()
    phrases: tuple[tuple[str, ...], ...] = ()
    max_nesting: int = DEFAULT_MAX_NESTING
    max_length: int = DEFAULT_MAX_LENGTH
    max_candidates: int = field(default_factory=default_max_candidates)

    def __post_init__(self) -> None:
        if min(self.max_nesting, self.max_length, self.max_candidates) < 1:
            raise ValueError("vocabulary bounds must be at least 1")

    @classmethod
    def for_approach(cls, ma: ModellingApproach, **bounds) -> "Vocabulary":
        """The full signature of ``ma`` (lexicon phrases for keyword approaches)."""
        if ma.query_language == KEYWORD:
            lexicon = getattr(ma, "lexicon", None)
            phrases: Iterable[tuple[str, ...]]
            if lexicon is not None:
                phrases = lexicon.entries
            else:
                phrases = {(t,) for t in _corpus_tokens(ma)}
            return cls(phrases=tuple(sorted(phrases)), **bounds)
        schema = ma.schema
        return cls(classes=schema.classes, roles=schema.roles, **bounds)


def _corpus_tokens(ma: ModellingApproach) -> set[str]:
    texts = getattr(ma, "texts", {})
    return {t for text in texts.values() for t in tokenize(text)}


@dataclass(frozen=True)
class CorrectQueries:
    queries: tuple[Query, ...]
    exhausted: bool
    examined: int


@dataclass(frozen=True)
class BestQueryResult:
    queries: frozenset[Query]
    fitness: FitnessValue | None
    exhausted_budget: bool
    examined: int = 0

    def __post_init__(self) -> None:
        if (self.fitness is None) != (not self.queries):
            raise ValueError("fitness is absent exactly when there are no queries")

    def sorted_queries(self) -> list[Query]:
        return sorted(self.queries, key=str)


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


_SOME, _AND = 1, 2


@dataclass(frozen=True)
class _Gen:
    """An enumerated expression with its fitness parts and serialization precomputed."""

    expr: ClassExpression
    nesting: int
    kinds: int  # bit set of _SOME / _AND
    text: str


class _ExpressionLevels:
    """Normalized class expressions grouped by length, built bottom-up.

    Conjunctions have at least two distinct non-conjunctive members sorted by
    serialization, so every expression is generated once up to reordering.
    """

    def __init__(self, classes: Sequence[str], roles: Sequence[str], max_nesting: int) -> None:
        self.classes = sorted(classes)
        self.roles = sorted(roles)
        self.max_nesting = max_nesting
        self.plain: list[list[_Gen]] = [[]]
        self.conj: list[list[_Gen]] = [[]]

    def level(self, length: int) -> list[_Gen]:
        while len(self.plain) <= length:
            self._build(len(self.plain))
        return self.plain[length] + self.conj[length]

    def _build(self, n: int) -> None:
        plain: list[_Gen] = []
        if n == 1:
            plain = [_Gen(Atomic(c), 0, 0, c) for c in self.classes]
        else:
            for f in self.plain[n - 1] + self.conj[n - 1]:
                if f.nesting + 1 <= self.max_nesting:
                    plain.extend(
                        _Gen(Existential(r, f.expr), f.nesting + 1, f.kinds | _SOME,
                             f"(some {r} {f.text})")
                        for r in self.roles
                    )
        self.plain.append(plain)
        self.conj.append(list(self._conjunctions(n)))

    def _conjunctions(self, n: int) -> Iterator[_Gen]:
        # members picked with strictly decreasing (length, index) keys
        def pick(remaining: int, max_len: int, max_idx: int, chosen: list):
            if remaining == 0:
                if len(chosen) >= 2:
                    yield chosen
                return
            for ln in range(min(remaining, max_len), 0, -1):
                pool = self.plain[ln]
                top = len(pool) if ln < max_len else max_idx
                for i in range(top - 1, -1, -1):
                    chosen.append(pool[i])
                    yield from pick(remaining - ln, ln, i, chosen)
                    chosen.pop()

        for members in pick(n, n - 1, len(self.plain[n - 1]) if n > 1 else 0, []):
            ordered = sorted(members, key=lambda m: m.text)
            kinds = _AND
            nesting = 0
            for m in ordered:
                kinds |= m.kinds
                nesting = max(nesting, m.nesting)
            yield _Gen(
                Conjunction(tuple(m.expr for m in ordered)), nesting, kinds,
                "(and " + " ".join(m.text for m in ordered) + ")",
            )


def _class_candidates(v: Vocabulary) -> Iterator[ClassExpression]:
    levels = _ExpressionLevels(sorted(v.classes), sorted(v.roles), v.max_nesting)
    for length in range(1, v.max_length + 1):
        batch = levels.level(length)
        batch.sort(key=lambda g: (bin(g.kinds).count("1"), g.nesting, g.text))
        for g in batch:
            yield g.expr


def _keyword_candidates(v: Vocabulary) -> Iterator[KeywordQuery]:
    phrases = sorted(set(v.phrases))
    for length in range(1, min(v.max_length, len(phrases)) + 1):
        for combo in itertools.combinations(phrases, length):
            yield KeywordQuery(combo)


def enumerate_candidates(v: Vocabulary, ql: str) -> Iterator[Query]:
    """Queries over ``v`` in non-decreasing lexicographic fitness, within its bounds.

    The candidate cap is not applied here; consumers stop the stream.
    """
    if ql == KEYWORD:
        return _keyword_candidates(v)
    if ql == CLASS_EXPRESSION:
        return _class_candidates(v)
    raise ValueError(f"unknown query language {ql!r}")


# ---------------------------------------------------------------------------
# cQ and bQ
# ---------------------------------------------------------------------------


def _check_vocabulary(ma: ModellingApproach, v: Vocabulary) -> None:
    if ma.query_language != CLASS_EXPRESSION:
        return
    schema = ma.schema
    bad = (set(v.classes) - schema.classes) | (set(v.roles) - schema.roles)
    if bad:
        raise ValueError(f"vocabulary names outside the {ma.id} signature: {', '.join(sorted(bad))}")


def correct_queries(r: InformationRequest, ma: ModellingApproach, v: Vocabulary) -> CorrectQueries:
    """All candidates within ``v`` whose answer on ``ma`` equals the gold set."""
    _check_vocabulary(ma, v)
    answer = ma.evaluator()
    found = []
    examined = 0
    exhausted = False
    for q in enumerate_candidates(v, ma.query_language):
        if examined >= v.max_candidates:
            exhausted = True
            break
        examined += 1
        if answer(q) == r.gold:
            found.append(q)
    return CorrectQueries(tuple(found), exhausted, examined)


def best_queries(
    r: InformationRequest,
    ma: ModellingApproach,
    v: Vocabulary,
    order: FitnessOrder | None = None,
) -> BestQueryResult:
    """Correct queries of minimal fitness under ``order``.

    Under the lexicographic order the stream is already sorted, so the search
    stops once the first fitness level holding a correct query is complete.
    Other orders need the whole bounded space.
    """
    order = order or Lexicographic()
    _check_vocabulary(ma, v)
    answer = ma.evaluator()
    lex = isinstance(order, Lexicographic)
    best: list[Query] = []
    best_key = None
    level: FitnessValue | None = None
    examined = 0
    exhausted = False
    for q in enumerate_candidates(v, ma.query_language):
        f = fitness_of(q)
        if lex and best and f != level:
            break
        if examined >= v.max_candidates:
            exhausted = True
            break
        examined += 1
        if answer(q) != r.gold:
            continue
        key = order.key(f)
        if best_key is None or key < best_key:
            best, best_key, level = [q], key, f
        elif key == best_key:
            best.append(q)

    for q in best:
        if ma.answer(q) != r.gold:
            raise RuntimeError(f"fast evaluation disagrees with {ma.id} on {q}")
    if exhausted:
        log.info("%s/%s: candidate cap %d reached", r.id, ma.id, v.max_candidates)
    if not best:
        return BestQueryResult(frozenset(), None, exhausted, examined)
    return BestQueryResult(frozenset(best), fitness_of(best[0]), exhausted, examined)
