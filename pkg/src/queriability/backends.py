"""The five modelling approaches behind one interface.

MA1  full-text keyword search over the raw descriptions
MA2  keyword queries tagged to thesaurus classes, matched with taxonomy expansion
MA3  class-expression queries over Abox A1 (class assertions only), Tbox T1
MA4  class-expression queries over Abox A2 (class and role assertions), Tbox T1
MA5  class-expression queries over Abox A3, Tbox T2 (T1 plus role chains)
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence, Union

from .parser import parse_class_expression, parse_keyword_query
from .reasoner import (
    CanonicalEvaluator,
    SaturatedIndex,
    UnknownSymbolError,
    certain_answers,
    saturate,
)
from .syntax import ClassExpression, KeywordQuery, Ontology, is_valid_name

log = logging.getLogger(__name__)

KEYWORD = "keyword"
CLASS_EXPRESSION = "class-expression"

Query = Union[KeywordQuery, ClassExpression]

_WORD = re.compile(r"[a-z0-9]+(?:-[a-z0-9]+)*")


def tokenize(text: str) -> list[str]:
    """Lowercase tokens; hyphenated words such as ``x-ray`` stay one token."""
    return _WORD.findall(text.lower())


# ---------------------------------------------------------------------------
# MA1: keyword search
# ---------------------------------------------------------------------------


def _contains(tokens: Sequence[str], phrase: Sequence[str]) -> bool:
    n = len(phrase)
    first = phrase[0]
    for i, tok in enumerate(tokens):
        if tok == first and tuple(tokens[i:i + n]) == tuple(phrase):
            return True
    return False


def keyword_answer(records: Mapping[str, str], q: KeywordQuery) -> set[str]:
    """Records whose text contains every phrase of ``q`` as a contiguous token run."""
    hits = set()
    for rid, text in records.items():
        tokens = tokenize(text)
        if all(_contains(tokens, p) for p in q.phrases):
            hits.add(rid)
    return hits


# ---------------------------------------------------------------------------
# Lexicon tagging
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lexicon:
    entries: Mapping[tuple[str, ...], str]

    def __post_init__(self) -> None:
        for phrase, cls in self.entries.items():
            if not phrase:
                raise ValueError("lexicon entry with empty phrase")
            if not is_valid_name(cls):
                raise ValueError(f"lexicon maps {' '.join(phrase)!r} to invalid class {cls!r}")

    @cached_property
    def longest(self) -> int:
        return max((len(p) for p in self.entries), default=0)

    @property
    def classes(self) -> frozenset[str]:
        return frozenset(self.entries.values())

    @classmethod
    def parse(cls, text: str) -> "Lexicon":
        """``phrase -> ClassName`` lines; ``#`` comments."""
        entries: dict[tuple[str, ...], str] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "->" not in line:
                raise ValueError(f"lexicon line {lineno}: expected 'phrase -> ClassName'")
            left, right = (s.strip() for s in line.rsplit("->", 1))
            phrase = tuple(tokenize(left))
            if not phrase:
                raise ValueError(f"lexicon line {lineno}: empty phrase")
            if phrase in entries and entries[phrase] != right:
                raise ValueError(
                    f"lexicon line {lineno}: {left!r} already maps to {entries[phrase]}"
                )
            entries[phrase] = right
        return cls(entries)


def tag_text(lex: Lexicon, text: str) -> list[str]:
    """Greedy left-to-right longest-match tagging. Repeated hits are kept."""
    tokens = tokenize(text)
    out = []
    i = 0
    while i < len(tokens):
        for n in range(min(lex.longest, len(tokens) - i), 0, -1):
            cls = lex.entries.get(tuple(tokens[i:i + n]))
            if cls is not None:
                out.append(cls)
                i += n
                break
        else:
            i += 1
    return out


def tag_query(lex: Lexicon, q: KeywordQuery) -> tuple[list[str], list[str]]:
    """(query concepts, phrases that produced no concept)."""
    concepts: list[str] = []
    failed: list[str] = []
    for phrase in q.phrases:
        text = " ".join(phrase)
        tags = tag_text(lex, text)
        if tags:
            concepts.extend(tags)
        else:
            failed.append(text)
    return concepts, failed


# ---------------------------------------------------------------------------
# MA2: thesaurus matching
# ---------------------------------------------------------------------------


def _below(idx: SaturatedIndex, record_concept: str, query_concept: str) -> bool:
    return query_concept in idx.subsumers(record_concept)


def thesaurus_answer(
    idx: SaturatedIndex,
    concept_lists: Mapping[str, Sequence[str]],
    q: KeywordQuery,
    lex: Lexicon,
) -> set[str]:
    """Records holding, for every query concept, an equal or more specific concept.

    A phrase the lexicon cannot tag makes the query unsatisfiable.
    """
    concepts, failed = tag_query(lex, q)
    if failed:
        log.warning("untaggable phrase(s) in %r: %s", str(q), ", ".join(failed))
        return set()
    unknown = set(concepts) - idx.told.classes
    if unknown:
        raise UnknownSymbolError(unknown)
    return {
        rid
        for rid, have in concept_lists.items()
        if all(any(_below(idx, cd, cq) for cd in have) for cq in concepts)
    }


# ---------------------------------------------------------------------------
# Uniform interface
# ---------------------------------------------------------------------------


class ModellingApproach:
    """A (schema, data, query language) bundle answering queries with record ids."""

    id: str
    query_language: str
    schema: Ontology | None

    @property
    def record_ids(self) -> frozenset[str]:
        raise NotImplementedError

    def parse_query(self, text: str) -> Query:
        if self.query_language == KEYWORD:
            return parse_keyword_query(text)
        return parse_class_expression(text)

    def answer(self, q: Query) -> frozenset[str]:
        raise NotImplementedError

    def evaluator(self) -> Callable[[Query], frozenset[str]]:
        """A memoizing answer function for evaluating many related queries."""
        return self.answer


@dataclass
class TextApproach(ModellingApproach):
    texts: Mapping[str, str]
    id: str = "MA1"
    query_language: str = KEYWORD
    schema: Ontology | None = None

    @cached_property
    def _tokens(self) -> dict[str, list[str]]:
        return {rid: tokenize(t) for rid, t in self.texts.items()}

    @property
    def record_ids(self) -> frozenset[str]:
        return frozenset(self.texts)

    def answer(self, q: KeywordQuery) -> frozenset[str]:
        return frozenset(keyword_answer(self.texts, q))

    def evaluator(self) -> Callable[[KeywordQuery], frozenset[str]]:
        cache: dict[tuple[str, ...], frozenset[str]] = {}
        tokens = self._tokens

        def phrase_hits(p: tuple[str, ...]) -> frozenset[str]:
            hit = cache.get(p)
            if hit is None:
                hit = cache[p] = frozenset(r for r, t in tokens.items() if _contains(t, p))
            return hit

        def run(q: KeywordQuery) -> frozenset[str]:
            out = self.record_ids
            for p in q.phrases:
                out &= phrase_hits(p)
            return out

        return run


@dataclass
class ThesaurusApproach(ModellingApproach):
    index: SaturatedIndex
    concept_lists: Mapping[str, Sequence[str]]
    lexicon: Lexicon
    id: str = "MA2"
    query_language: str = KEYWORD

    @property
    def schema(self) -> Ontology:
        return self.index.told

    @property
    def record_ids(self) -> frozenset[str]:
        return frozenset(self.concept_lists)

    def answer(self, q: KeywordQuery) -> frozenset[str]:
        return frozenset(thesaurus_answer(self.index, self.concept_lists, q, self.lexicon))

    def untagged(self, q: KeywordQuery) -> list[str]:
        return tag_query(self.lexicon, q)[1]

    def evaluator(self) -> Callable[[KeywordQuery], frozenset[str]]:
        cache: dict[str, frozenset[str]] = {}

        def concept_hits(cq: str) -> frozenset[str]:
            hit = cache.get(cq)
            if hit is None:
                hit = cache[cq] = frozenset(
                    rid for rid, have in self.concept_lists.items()
                    if any(_below(self.index, cd, cq) for cd in have)
                )
            return hit

        def run(q: KeywordQuery) -> frozenset[str]:
            concepts, failed = tag_query(self.lexicon, q)
            if failed:
                return frozenset()
            out = self.record_ids
            for c in concepts:
                out &= concept_hits(c)
            return out

        return run


def record_individual(record_id: str) -> str:
    """Abox individual standing for a record (``img-01`` -> ``img_01``)."""
    return record_id.replace("-", "_")


@dataclass
class OntologyApproach(ModellingApproach):
    """Class-expression queries answered by certain answers over schema plus Abox.

    Record individuals are reported by their record id; any other individual
    in the certain answers is reported by its own name, so a query that
    also catches non-image individuals does not equal an image gold set.
    """

    id: str
    ontology: Ontology
    records: Mapping[str, str] = field(default_factory=dict)  # record id -> individual
    query_language: str = CLASS_EXPRESSION
    max_facts: int | None = None

    @property
    def schema(self) -> Ontology:
        return Ontology(self.ontology.classes, self.ontology.roles, frozenset(), self.ontology.tbox)

    @property
    def record_ids(self) -> frozenset[str]:
        return frozenset(self.records)

    @cached_property
    def index(self) -> SaturatedIndex:
        return saturate(self.ontology, self.max_facts)

    @cached_property
    def _ids(self) -> dict[str, str]:
        return {ind: rid for rid, ind in self.records.items()}

    def _to_ids(self, individuals: Iterable[str]) -> frozenset[str]:
        return frozenset(self._ids.get(i, i) for i in individuals)

    def answer(self, q: ClassExpression) -> frozenset[str]:
        return self._to_ids(certain_answers(self.index, q).individuals)

    def evaluator(self) -> Callable[[ClassExpression], frozenset[str]]:
        ev = CanonicalEvaluator(self.index)

        def run(q: ClassExpression) -> frozenset[str]:
            self.index.check_signature(q)
            return self._to_ids(ev.answers(q))

        return run


def ontology_answer(ma: OntologyApproach, q: ClassExpression) -> set[str]:
    return set(ma.answer(q))
