"""Queriability of modelling approaches: EL reasoning, query fitness and
best-query search over a shared record corpus."""

__version__ = "0.1.0"

from .syntax import (  # noqa: E402
    TOP,
    Atomic,
    ClassAssertion,
    Conjunction,
    EquivalentClasses,
    Existential,
    KeywordQuery,
    Ontology,
    RoleAssertion,
    RoleChain,
    SubClassOf,
    SubRoleOf,
    Top,
    conj,
    normalize,
    serialize,
    some,
)
from .parser import (  # noqa: E402
    DLSyntaxError,
    OntologyError,
    parse_class_expression,
    parse_keyword_query,
    parse_ontology,
)
from .reasoner import (  # noqa: E402
    BudgetExceeded,
    CanonicalEvaluator,
    SaturatedIndex,
    UnknownSymbolError,
    certain_answers,
    saturate,
    subsumes,
)
from .fitness import FitnessValue, Lexicographic, WeightedSum, compare, fitness_of  # noqa: E402
from .backends import (  # noqa: E402
    Lexicon,
    ModellingApproach,
    OntologyApproach,
    TextApproach,
    ThesaurusApproach,
)
from .query_space import (  # noqa: E402
    BestQueryResult,
    InformationRequest,
    Vocabulary,
    best_queries,
    correct_queries,
    enumerate_candidates,
)
from .harness import CellResult, CorpusBundle, EvaluationReport, evaluate_cell, load_bundle, run_matrix  # noqa: E402
from .report import render_report  # noqa: E402
