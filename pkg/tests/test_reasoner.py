import random
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from queriability.parser import parse_class_expression, parse_ontology
from queriability.reasoner import (
    BudgetExceeded,
    CanonicalEvaluator,
    UnknownSymbolError,
    certain_answers,
    hierarchy_lines,
    is_normal,
    normalize_tbox,
    saturate,
    subsumes,
)
from queriability.syntax import Atomic, Ontology, SubClassOf, TOP, conj, some

from generators import random_abox, random_expression, random_normalized_ontology, random_ontology
from oracles import naive_saturation, oracle_answers

LUNG = """
class NeoplasmOfLung
class DisorderOfLung
class Disease
class Neoplasm
class LungStructure
role rG
role AM
role FS
subclass DisorderOfLung Disease
equiv NeoplasmOfLung (and DisorderOfLung (some rG (and (some AM Neoplasm) (some FS LungStructure))))
"""

CHAINS = """
class Image
class Neoplasm
class Carcinoma
role shows
role rG
role AM
role hasFinding
subclass Carcinoma Neoplasm
chain rG AM -> hasFinding
chain shows hasFinding -> shows
"""


def q(text):
    return parse_class_expression(text)


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------


def test_definition_normalizes_to_nine_axioms():
    n = normalize_tbox(parse_ontology(LUNG))
    definition_axioms = [ax for ax in n.tbox if ax != SubClassOf(Atomic("DisorderOfLung"), Atomic("Disease"))]
    # hand count: 2 for the left-to-right direction's top level, 2 for the
    # nested filler, 5 for the right-to-left direction
    assert len(definition_axioms) == 9
    assert all(is_normal(ax) for ax in n.tbox)
    fresh = n.classes - parse_ontology(LUNG).classes
    assert fresh and all(c.startswith("__") for c in fresh)


def test_normal_axiom_unchanged():
    o = parse_ontology("class A\nclass B\nsubclass A B")
    assert normalize_tbox(o).tbox == (SubClassOf(Atomic("A"), Atomic("B")),)


def test_atomic_equivalence():
    o = parse_ontology("class A\nclass B\nequiv A B")
    assert set(normalize_tbox(o).tbox) == {
        SubClassOf(Atomic("A"), Atomic("B")),
        SubClassOf(Atomic("B"), Atomic("A")),
    }


def test_normalization_is_conservative():
    o = parse_ontology(LUNG)
    told = saturate(o).classify()
    # subsumptions between original names are as expected
    assert told["NeoplasmOfLung"] == {"NeoplasmOfLung", "DisorderOfLung", "Disease", "top"}
    assert told["Neoplasm"] == {"Neoplasm", "top"}


def test_complex_assertion_normalized():
    o = parse_ontology(LUNG + "individual x\nassert x (and DisorderOfLung (some rG (and (some AM Neoplasm) (some FS LungStructure))))")
    idx = saturate(o)
    assert "NeoplasmOfLung" in idx.subsumers("x")


# ---------------------------------------------------------------------------
# saturation
# ---------------------------------------------------------------------------


def test_chain_derives_direct_edge():
    o = parse_ontology(CHAINS + "individual d\nindividual g\nindividual m\n"
                       "relate d rG g\nrelate g AM m\nassert m Neoplasm")
    idx = saturate(o)
    assert ("d", "hasFinding", "m") in idx.role_edges()


def test_empty_tbox_single_assertion():
    idx = saturate(parse_ontology("class A\nindividual a\nassert a A"))
    assert idx.subsumers("a") == {"A", "top"}
    assert idx.subsumers("A") == {"A", "top"}
    assert idx.role_edges() == set()


def test_reflexive_and_top():
    idx = saturate(parse_ontology(LUNG))
    for c in idx.told.classes:
        assert {c, "top"} <= idx.subsumers(c)


def test_fixpoint_resaturation_adds_nothing():
    rng = random.Random(7)
    for _ in range(20):
        o = random_ontology(rng)
        idx = saturate(o)
        again = saturate(idx.normalized)
        assert again.subsumptions() == idx.subsumptions()
        assert again.role_edges() == idx.role_edges()


@pytest.mark.parametrize("seed", range(25))
def test_matches_naive_oracle(seed):
    o = random_normalized_ontology(random.Random(seed))
    s, e = naive_saturation(o)
    idx = saturate(o)
    assert idx.subsumptions() == s
    assert idx.role_edges() == e


def test_budget_exceeded():
    o = random_normalized_ontology(random.Random(3))
    with pytest.raises(BudgetExceeded):
        saturate(o, max_facts=5)


def test_budget_from_environment(monkeypatch):
    monkeypatch.setenv("QUERIABILITY_MAX_FACTS", "3")
    with pytest.raises(BudgetExceeded, match="QUERIABILITY_MAX_FACTS"):
        saturate(parse_ontology(LUNG))


# ---------------------------------------------------------------------------
# subsumption
# ---------------------------------------------------------------------------


def test_subsumes_examples():
    idx = saturate(parse_ontology(LUNG))
    assert subsumes(idx, Atomic("NeoplasmOfLung"), Atomic("DisorderOfLung"))
    assert not subsumes(idx, Atomic("NeoplasmOfLung"), Atomic("Neoplasm"))
    assert subsumes(idx, Atomic("Neoplasm"), Atomic("Neoplasm"))
    assert subsumes(idx, q("(and (some rG (and (some AM Neoplasm) (some FS LungStructure))) DisorderOfLung)"),
                    Atomic("NeoplasmOfLung"))
    assert subsumes(idx, Atomic("NeoplasmOfLung"), q("(some rG (some AM Neoplasm))"))
    assert not subsumes(idx, q("(some rG (some AM Neoplasm))"), Atomic("NeoplasmOfLung"))
    assert subsumes(idx, Atomic("Neoplasm"), TOP)


def test_subsumes_fixture(bundle):
    idx = bundle.t1_index
    assert subsumes(idx, Atomic("NeoplasmOfLung"), Atomic("DisorderOfLung"))
    assert subsumes(idx, Atomic("NeoplasmOfLung"), Atomic("Neoplasm"))
    assert subsumes(idx, Atomic("RenalCellCarcinoma"), Atomic("Neoplasm"))
    assert not subsumes(idx, Atomic("Neoplasm"), Atomic("Carcinoma"))


def test_unknown_symbols_named():
    idx = saturate(parse_ontology(LUNG))
    with pytest.raises(UnknownSymbolError) as info:
        subsumes(idx, q("(some hasPart Tumour)"), Atomic("Neoplasm"))
    assert info.value.classes == ["Tumour"]
    assert info.value.roles == ["hasPart"]
    assert "Tumour" in str(info.value) and "hasPart" in str(info.value)


# ---------------------------------------------------------------------------
# certain answers
# ---------------------------------------------------------------------------


def test_certain_answers_trivial():
    idx = saturate(parse_ontology("class A\nindividual a\nassert a A"))
    assert certain_answers(idx, Atomic("A")).individuals == {"a"}


def test_certain_answers_through_chains():
    text = CHAINS + ("individual img\nindividual d\nindividual g\nindividual m\n"
                     "assert img Image\nrelate img shows d\nrelate d rG g\nrelate g AM m\n"
                     "assert m Carcinoma")
    idx = saturate(parse_ontology(text))
    ans = certain_answers(idx, q("(and Image (some shows Neoplasm))"))
    assert ans.individuals == {"img"}
    assert ans.query == q("(and Image (some shows Neoplasm))")


def test_certain_answers_use_anonymous_successors():
    text = LUNG + "class Image\nrole shows\nindividual img\nindividual f\n" \
                  "assert img Image\nrelate img shows f\nassert f NeoplasmOfLung"
    idx = saturate(parse_ontology(text))
    assert certain_answers(idx, q("(some shows (some rG (some FS LungStructure)))")).individuals == {"img"}
    assert certain_answers(idx, q("(some shows (some rG (some FS Neoplasm)))")).individuals == set()


def test_r1_over_ma5(bundle):
    ma5 = bundle.approach("MA5")
    assert ma5.answer(q("(and Image (some shows Neoplasm))")) == bundle.request("r1").gold


def test_role_chain_bypass(bundle):
    """img-03 reaches its neoplasm only through shows and then rG o AM."""
    a3 = bundle.abox_variants["abox3"]
    under_t1 = Ontology(a3.classes, a3.roles, a3.declared_individuals, bundle.t1.tbox, a3.abox)
    query = q("(and Image (some shows Neoplasm))")
    assert "img_03" not in certain_answers(saturate(under_t1), query).individuals
    assert "img_03" in certain_answers(bundle.approach("MA5").index, query).individuals


def test_answers_are_data_individuals():
    idx = saturate(parse_ontology("class A\nrole r\nindividual a\nindividual b\nindividual c\n"
                                  "assert a A\nrelate a r b"))
    assert certain_answers(idx, TOP).individuals == {"a", "b"}


def test_internalization_is_cached():
    idx = saturate(parse_ontology(LUNG + "individual x\nassert x NeoplasmOfLung"))
    query = q("(some rG (some AM Neoplasm))")
    certain_answers(idx, query)
    before = len(idx.fresh_definitions)
    certain_answers(idx, q("(some rG (some AM Neoplasm))"))
    assert len(idx.fresh_definitions) == before


def test_concurrent_queries_agree():
    rng = random.Random(11)
    o = random_ontology(rng, n_inds=8, n_axioms=10)
    idx = saturate(o)
    queries = [random_expression(rng, sorted(o.classes), sorted(o.roles), 3) for _ in range(40)]
    expected = [oracle_answers(idx.normalized, e) for e in queries]
    results: dict[int, frozenset] = {}

    def work(k):
        results[k] = certain_answers(idx, queries[k]).individuals

    threads = [threading.Thread(target=work, args=(k,)) for k in range(len(queries))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert [results[k] for k in range(len(queries))] == expected


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_three_routes_agree(seed):
    rng = random.Random(seed)
    o = random_ontology(rng)
    idx = saturate(o)
    query = random_expression(rng, sorted(o.classes), sorted(o.roles), 3)
    fast = CanonicalEvaluator(idx).answers(query)
    assert fast == certain_answers(idx, query).individuals
    assert fast == oracle_answers(idx.normalized, query)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_monotone_in_abox(seed):
    rng = random.Random(seed)
    o = random_ontology(rng)
    query = random_expression(rng, sorted(o.classes), sorted(o.roles), 3)
    extra = random_abox(rng, sorted(o.classes), sorted(o.roles), sorted(o.declared_individuals), 4)
    bigger = o.with_abox(o.abox + tuple(extra), o.declared_individuals)
    small = certain_answers(saturate(o), query).individuals
    assert small <= certain_answers(saturate(bigger), query).individuals


# ---------------------------------------------------------------------------
# classification output
# ---------------------------------------------------------------------------


def test_hierarchy_lines():
    lines = hierarchy_lines(saturate(parse_ontology(LUNG)))
    assert lines[0] == "top"
    assert "  Disease" in lines
    i = lines.index("    DisorderOfLung")
    assert lines[i + 1] == "      NeoplasmOfLung"
    assert not any("__" in line for line in lines)


def test_hierarchy_shows_equivalents():
    lines = hierarchy_lines(saturate(parse_ontology("class A\nclass B\nequiv A B")))
    assert "  A  ≡ B" in lines and "  B  ≡ A" in lines


def test_conj_helper_roundtrip():
    assert conj(Atomic("A")) == Atomic("A")
    assert some("r", "A") == q("(some r A)")
