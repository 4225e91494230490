"""Bundle loading and end-to-end evaluation of requests across MA1-MA5."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import yaml

from .backends import (
    Lexicon,
    ModellingApproach,
    OntologyApproach,
    Query,
    TextApproach,
    ThesaurusApproach,
    record_individual,
)
from .fitness import FitnessOrder, FitnessValue, Lexicographic, fitness_of
from .parser import DLSyntaxError, OntologyError, parse_ontology
from .query_space import (
    DEFAULT_MAX_LENGTH,
    DEFAULT_MAX_NESTING,
    BestQueryResult,
    InformationRequest,
    MAX_CANDIDATES_ENV,
    Vocabulary,
    best_queries,
    default_max_candidates,
)
from .reasoner import BudgetExceeded, saturate
from .syntax import ClassAssertion, Ontology, RoleChain

log = logging.getLogger(__name__)

APPROACHES = ("MA1", "MA2", "MA3", "MA4", "MA5")
ABOX_BLOCKS = ("abox1", "abox2", "abox3")
T2_ROLES = ("shows", "hasFinding", "hasLocation", "derivingFrom")
T2_CHAINS = (
    RoleChain("rG", "AM", "hasFinding"),
    RoleChain("rG", "FS", "hasLocation"),
    RoleChain("shows", "hasFinding", "shows"),
    RoleChain("shows", "hasLocation", "shows"),
)

EXACT = "exact"
PARTIAL = "partial"
UNANSWERED = "unanswered"  # no query available for the cell
ERROR = "error"


class BundleError(ValueError):
    """A bundle failed to load or validate."""


class CellError(RuntimeError):
    def __init__(self, request: str, approach: str, cause: Exception) -> None:
        super().__init__(f"{request}/{approach}: {cause}")
        self.request = request
        self.approach = approach
        self.__cause__ = cause


def fixture_path() -> Path:
    """Directory of the bundled desk-scale corpus."""
    return Path(str(resources.files("queriability") / "data" / "fixture"))


# ---------------------------------------------------------------------------
# Bundle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Record:
    id: str
    text: str
    concepts: tuple[str, ...]
    abox1: str
    abox2: str
    abox3: str

    @property
    def individual(self) -> str:
        return record_individual(self.id)


@dataclass
class CorpusBundle:
    records: tuple[Record, ...]
    t1: Ontology
    t2: Ontology
    lexicon: Lexicon
    requests: tuple[InformationRequest, ...]
    vocabularies: Mapping[tuple[str, str], Vocabulary] = field(default_factory=dict)
    search_defaults: Mapping[str, int] = field(default_factory=dict)
    abox_variants: Mapping[str, Ontology] = field(default_factory=dict)

    @property
    def record_ids(self) -> frozenset[str]:
        return frozenset(r.id for r in self.records)

    def request(self, rid: str) -> InformationRequest:
        for r in self.requests:
            if r.id == rid:
                return r
        raise KeyError(f"unknown request {rid!r}")

    @cached_property
    def t1_index(self):
        return saturate(self.t1)

    @cached_property
    def approaches(self) -> dict[str, ModellingApproach]:
        individuals = {r.id: r.individual for r in self.records}
        return {
            "MA1": TextApproach({r.id: r.text for r in self.records}),
            "MA2": ThesaurusApproach(
                self.t1_index, {r.id: list(r.concepts) for r in self.records}, self.lexicon
            ),
            "MA3": OntologyApproach("MA3", self.abox_variants["abox1"], individuals),
            "MA4": OntologyApproach("MA4", self.abox_variants["abox2"], individuals),
            "MA5": OntologyApproach("MA5", self.abox_variants["abox3"], individuals),
        }

    def approach(self, ma: str) -> ModellingApproach:
        try:
            return self.approaches[ma]
        except KeyError:
            raise KeyError(f"unknown approach {ma!r}") from None

    def vocabulary(self, request: str, ma: str) -> Vocabulary:
        v = self.vocabularies.get((request, ma))
        if v is None:
            v = Vocabulary.for_approach(self.approach(ma), **self.search_defaults)
        # an explicit environment cap overrides the bundle's
        if MAX_CANDIDATES_ENV in os.environ:
            v = replace(v, max_candidates=default_max_candidates())
        return v


def _read(root: Path, name: str) -> str:
    path = root / name
    if not path.is_file():
        raise BundleError(f"missing bundle file {path}")
    return path.read_text(encoding="utf-8")


def _parse_ontology(text: str, where: str, base: Ontology | None = None) -> Ontology:
    try:
        return parse_ontology(text, base)
    except (DLSyntaxError, OntologyError) as exc:
        raise BundleError(f"{where}: {exc}") from exc


def _check_t2_extends_t1(t1: Ontology, t2: Ontology) -> None:
    problems = []
    if not t1.classes <= t2.classes or not t1.roles <= t2.roles:
        problems.append("T2 must declare every T1 class and role")
    if not set(t1.tbox) <= set(t2.tbox):
        problems.append("T2 must contain every T1 axiom")
    missing_roles = [r for r in T2_ROLES if r not in t2.roles]
    missing_chains = [c for c in T2_CHAINS if c not in t2.tbox]
    if missing_roles or missing_chains:
        problems.append(
            "T2 must extend T1 with the image-annotation roles and role chains "
            f"(missing roles: {missing_roles or 'none'}; missing chains: "
            f"{[f'{c.first} o {c.second} -> {c.sup}' for c in missing_chains] or 'none'})"
        )
    if problems:
        raise BundleError("; ".join(problems))


def _vocabulary(entry: Mapping, defaults: Mapping[str, int]) -> Vocabulary:
    bounds = dict(defaults)
    for key in ("max_nesting", "max_length", "max_candidates"):
        if key in entry:
            bounds[key] = int(entry[key])
    phrases = tuple(tuple(p.lower().split()) for p in entry.get("phrases", ()))
    return Vocabulary(
        classes=frozenset(entry.get("classes", ())),
        roles=frozenset(entry.get("roles", ())),
        phrases=phrases,
        **bounds,
    )


def load_bundle(path: str | Path | None = None) -> CorpusBundle:
    """Load and cross-validate a bundle directory (default: the shipped fixture)."""
    root = Path(path) if path is not None else fixture_path()
    config = yaml.safe_load(_read(root, "bundle.yaml")) or {}
    files = config.get("files", {})

    t1 = _parse_ontology(_read(root, files.get("t1", "snomed_t1.ont")), "T1")
    t2 = _parse_ontology(_read(root, files.get("t2", "snomed_t2.ont")), "T2")
    _check_t2_extends_t1(t1, t2)

    try:
        lexicon = Lexicon.parse(_read(root, files.get("lexicon", "lexicon.txt")))
    except ValueError as exc:
        raise BundleError(f"lexicon: {exc}") from exc
    unknown = lexicon.classes - t1.classes
    if unknown:
        raise BundleError(f"lexicon maps to classes missing from T1: {', '.join(sorted(unknown))}")

    corpus = yaml.safe_load(_read(root, files.get("corpus", "corpus.yaml"))) or {}
    records = []
    variants = {"abox1": t1, "abox2": t1, "abox3": t2}
    seen: set[str] = set()
    for entry in corpus.get("records", ()):
        rid = str(entry.get("id", "")).strip()
        if not rid:
            raise BundleError("corpus record without id")
        if rid in seen:
            raise BundleError(f"duplicate record id {rid}")
        seen.add(rid)
        for key in ("text", "concepts") + ABOX_BLOCKS:
            if key not in entry:
                raise BundleError(f"record {rid}: missing {key} block")
        concepts = tuple(entry["concepts"] or ())
        bad = set(concepts) - t1.classes
        if bad:
            raise BundleError(f"record {rid}: concepts not in T1: {', '.join(sorted(bad))}")
        ind = record_individual(rid)
        for block in ABOX_BLOCKS:
            variants[block] = _parse_ontology(entry[block], f"record {rid} {block}", variants[block])
            if ind not in variants[block].individuals:
                raise BundleError(f"record {rid} {block}: no assertion about {ind}")
        records.append(
            Record(rid, str(entry["text"]), concepts, entry["abox1"], entry["abox2"], entry["abox3"])
        )
    for block in ("abox1",):
        for a in variants[block].abox:
            if not isinstance(a, ClassAssertion):
                raise BundleError(f"{block} may only contain class assertions")

    ids = {r.id for r in records}
    req_doc = yaml.safe_load(_read(root, files.get("requests", "requests.yaml"))) or {}
    requests = []
    for entry in req_doc.get("requests", ()):
        gold = frozenset(entry.get("gold", ()))
        dangling = gold - ids
        if dangling:
            raise BundleError(f"request {entry.get('id')}: gold ids not in corpus: {sorted(dangling)}")
        published = {
            ma: FitnessValue(*v) for ma, v in (entry.get("published_fitness") or {}).items()
        }
        requests.append(
            InformationRequest(
                str(entry["id"]),
                str(entry.get("description", "")),
                gold,
                {ma: " ".join(str(q).split()) for ma, q in (entry.get("queries") or {}).items()},
                published,
            )
        )

    search = config.get("search", {})
    defaults = {
        "max_nesting": int(search.get("max_nesting", DEFAULT_MAX_NESTING)),
        "max_length": int(search.get("max_length", DEFAULT_MAX_LENGTH)),
        "max_candidates": int(search.get("max_candidates", default_max_candidates())),
    }
    vocabularies = {}
    for entry in search.get("vocabularies", ()):
        key = (str(entry["request"]), str(entry["approach"]))
        vocabularies[key] = _vocabulary(entry, defaults)

    return CorpusBundle(
        tuple(records), t1, t2, lexicon, tuple(requests), vocabularies, defaults, variants
    )


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CellResult:
    request: str
    approach: str
    query: str | None
    fitness: FitnessValue | None
    status: str
    recall: Fraction
    precision: Fraction
    answer: frozenset[str] = frozenset()
    alternatives: tuple[str, ...] = ()
    exhausted_budget: bool = False
    note: str = ""


@dataclass(frozen=True)
class EvaluationReport:
    mode: str
    order: str
    requests: tuple[str, ...]
    approaches: tuple[str, ...]
    cells: tuple[CellResult, ...]
    footnotes: tuple[str, ...] = ()

    def cell(self, request: str, approach: str) -> CellResult:
        for c in self.cells:
            if c.request == request and c.approach == approach:
                return c
        raise KeyError((request, approach))

    @property
    def exhausted(self) -> bool:
        return any(c.exhausted_budget for c in self.cells)

    @property
    def errors(self) -> tuple[CellResult, ...]:
        return tuple(c for c in self.cells if c.status == ERROR)


def recall_precision(answer: frozenset[str], gold: frozenset[str]) -> tuple[Fraction, Fraction]:
    hit = len(answer & gold)
    recall = Fraction(hit, len(gold)) if gold else Fraction(1)
    precision = Fraction(hit, len(answer)) if answer else Fraction(1)
    return recall, precision


def _query_text(q: Query) -> str:
    return str(q) if not isinstance(q, str) else q


def evaluate_cell(
    bundle: CorpusBundle,
    request: InformationRequest | str,
    approach: str,
    query: Query | str,
) -> CellResult:
    if isinstance(request, str):
        request = bundle.request(request)
    ma = bundle.approach(approach)
    try:
        q = ma.parse_query(query) if isinstance(query, str) else query
        answer = ma.answer(q)
    except Exception as exc:
        raise CellError(request.id, approach, exc) from exc
    recall, precision = recall_precision(answer, request.gold)
    status = EXACT if recall == 1 and precision == 1 else PARTIAL
    return CellResult(
        request.id, approach, _query_text(q), fitness_of(q), status, recall, precision, answer
    )


def _missing(request: str, approach: str, note: str) -> CellResult:
    return CellResult(request, approach, None, None, UNANSWERED, Fraction(0), Fraction(1), note=note)


def _searched_cell(
    bundle: CorpusBundle, r: InformationRequest, ma: str, order: FitnessOrder
) -> CellResult:
    v = bundle.vocabulary(r.id, ma)
    res: BestQueryResult = best_queries(r, bundle.approach(ma), v, order)
    if res.queries:
        first, *rest = res.sorted_queries()
        cell = evaluate_cell(bundle, r, ma, first)
        return CellResult(
            cell.request, ma, cell.query, cell.fitness, cell.status, cell.recall, cell.precision,
            cell.answer, tuple(str(q) for q in rest), res.exhausted_budget,
            f"{len(res.queries)} best quer{'y' if len(res.queries) == 1 else 'ies'}"
            f" among {res.examined} candidates",
        )
    why = "candidate cap reached" if res.exhausted_budget else "search space exhausted"
    note = f"no correct query within bounds ({why}, {res.examined} candidates)"
    transcribed = r.queries.get(ma)
    if transcribed is None:
        cell = _missing(r.id, ma, note)
    else:
        cell = evaluate_cell(bundle, r, ma, transcribed)
        note += "; transcribed query shown"
    return CellResult(
        cell.request, ma, cell.query, cell.fitness, cell.status,
        cell.recall, cell.precision, cell.answer, (), res.exhausted_budget, note,
    )


def run_matrix(
    bundle: CorpusBundle,
    mode: str = "transcribed",
    order: FitnessOrder | None = None,
    requests: Sequence[str] | None = None,
    approaches: Sequence[str] = APPROACHES,
) -> EvaluationReport:
    """Evaluate every (request, approach) cell.

    ``transcribed`` evaluates the queries stored with each request;
    ``searched`` looks for best queries within each cell's vocabulary.
    Problems in one cell are recorded on that cell and the run continues.
    """
    if mode not in ("transcribed", "searched"):
        raise ValueError(f"unknown mode {mode!r}")
    order = order or Lexicographic()
    selected = [bundle.request(r) for r in requests] if requests else list(bundle.requests)
    cells = []
    footnotes = []
    for r in selected:
        for ma in approaches:
            try:
                if mode == "searched":
                    cell = _searched_cell(bundle, r, ma, order)
                elif ma not in r.queries:
                    cell = _missing(r.id, ma, "no transcribed query")
                else:
                    cell = evaluate_cell(bundle, r, ma, r.queries[ma])
            except Exception as exc:  # reported per cell
                log.error("%s/%s failed: %s", r.id, ma, exc)
                budget = isinstance(exc.__cause__ or exc, BudgetExceeded)
                cell = CellResult(
                    r.id, ma, None, None, ERROR, Fraction(0), Fraction(0),
                    exhausted_budget=budget, note=str(exc),
                )
            cells.append(cell)
            published = r.published.get(ma)
            if (
                mode == "transcribed"
                and published is not None
                and cell.fitness is not None
                and cell.fitness != published
            ):
                footnotes.append(
                    f"{r.id}/{ma}: computed fitness {cell.fitness} differs from the "
                    f"published {published}; the published length is not reproducible "
                    "by counting name occurrences."
                )
    return EvaluationReport(
        mode, str(order), tuple(r.id for r in selected), tuple(approaches), tuple(cells),
        tuple(footnotes),
    )

