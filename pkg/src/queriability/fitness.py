"""Query fitness: (length, distinct constructors, nesting depth) and orders on it.

Smaller is fitter. Values are computed on the surface form of a query, so
``A ⊓ A`` is longer than ``A`` even though both mean the same.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Union

from .syntax import Atomic, ClassExpression, Conjunction, Existential, KeywordQuery


@dataclass(frozen=True, order=True)
class FitnessValue:
    length: int
    constructors: int
    nesting: int

    def __post_init__(self) -> None:
        if min(self.length, self.constructors, self.nesting) < 0:
            raise ValueError("fitness components must be non-negative")

    def astuple(self) -> tuple[int, int, int]:
        return (self.length, self.constructors, self.nesting)

    def __str__(self) -> str:
        return f"({self.length},{self.constructors},{self.nesting})"


def fitness_of_keyword(q: KeywordQuery) -> FitnessValue:
    n = len(q.phrases)
    return FitnessValue(n, 1 if n >= 2 else 0, 0)


def fitness_of_class_expression(q: ClassExpression) -> FitnessValue:
    length = 0
    kinds: set[str] = set()

    def walk(e: ClassExpression) -> int:
        nonlocal length
        if isinstance(e, Atomic):
            length += 1
            return 0
        if isinstance(e, Existential):
            length += 1
            kinds.add("some")
            return 1 + walk(e.filler)
        if isinstance(e, Conjunction):
            kinds.add("and")
            return max(walk(m) for m in e.members)
        return 0

    nesting = walk(q)
    return FitnessValue(length, len(kinds), nesting)


def fitness_of(q: Union[KeywordQuery, ClassExpression]) -> FitnessValue:
    if isinstance(q, KeywordQuery):
        return fitness_of_keyword(q)
    return fitness_of_class_expression(q)


class Ordering(IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class Lexicographic:
    def key(self, v: FitnessValue) -> tuple[int, int, int]:
        return v.astuple()

    def __str__(self) -> str:
        return "lex"


@dataclass(frozen=True)
class WeightedSum:
    weights: tuple[float, float, float]

    def __post_init__(self) -> None:
        if len(self.weights) != 3 or any(w < 0 for w in self.weights):
            raise ValueError("weighted sum needs three non-negative weights")
        if not any(self.weights):
            raise ValueError("weights must not all be zero")

    def key(self, v: FitnessValue) -> float:
        return sum(w * x for w, x in zip(self.weights, v.astuple()))

    def __str__(self) -> str:
        return "sum:" + ",".join(f"{w:g}" for w in self.weights)


FitnessOrder = Union[Lexicographic, WeightedSum]


def compare(order: FitnessOrder, a: FitnessValue, b: FitnessValue) -> Ordering:
    ka, kb = order.key(a), order.key(b)
    if ka < kb:
        return Ordering.LESS
    if ka > kb:
        return Ordering.GREATER
    return Ordering.EQUAL


def parse_order(text: str) -> FitnessOrder:
    """``lex`` or ``sum:w1,w2,w3``."""
    if text == "lex":
        return Lexicographic()
    if text.startswith("sum:"):
        try:
            weights = tuple(float(w) for w in text[4:].split(","))
        except ValueError:
            raise ValueError(f"bad weights in {text!r}") from None
        if len(weights) != 3:
            raise ValueError(f"expected three weights in {text!r}")
        return WeightedSum(weights)
    raise ValueError(f"unknown fitness order {text!r} (use 'lex' or 'sum:w1,w2,w3')")
