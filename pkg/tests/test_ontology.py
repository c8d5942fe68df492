import random
import warnings

import pytest

from chanfind.channeldb import load_database
from chanfind.errors import CycleDetected, NoTemplateMatch, QuerySyntaxError, UnknownPredicate, UnmappedFamily
from chanfind.ontology import (
    DEFAULT_TEMPLATES,
    SUBCLASS,
    GraphMapping,
    GraphQuery,
    Pattern,
    Triple,
    TripleStore,
    core_ontology,
    dump_graph,
    evaluate,
    find_ontology,
    load_graph,
    map_channels_to_graph,
    materialize_closure,
    parse_query,
    run_query,
    translate_nl,
)
from chanfind.selector import LexicalOracle

from oracles import brute_force_query, matrix_closure

MAGNET_QUERY = "list the setting PVs for all magnets"

ANSWER_A = sorted([
    "MQB1S01.S", "MQB1S02.S", "MQB1S03.S", "MQB1S04.S",
    "MBH1S01.S", "MBH1S03.S", "MBH1S05.S",
    "MBV1S02.S", "MBV1S04.S", "MBV1S06.S",
])

ANSWER_B = sorted(
    f"{sec}C___{fam}{k}___AC00"
    for sec in ("SR01", "SR02") for fam in ("QF", "QD", "SF", "HCM", "VCM") for k in (1, 2)
)


def _store(*triples):
    return TripleStore(Triple(*t) for t in triples)


# -- closure ------------------------------------------------------------------------

def test_three_node_chain():
    closed = materialize_closure(_store(("A", SUBCLASS, "B"), ("B", SUBCLASS, "C")))
    pairs = {(t.subject, t.object) for t in closed.match(p=SUBCLASS)}
    assert pairs == {("A", "B"), ("B", "C"), ("A", "C"), ("A", "A"), ("B", "B"), ("C", "C")}


def test_closure_is_idempotent(graphs):
    once = materialize_closure(graphs["b"])
    assert materialize_closure(once).triples == once.triples


def test_core_taxonomy_closure_matches_matrix_squaring():
    store = TripleStore(core_ontology())
    closed = materialize_closure(store)
    got = {(t.subject, t.object) for t in closed.match(p=SUBCLASS)}
    assert got == matrix_closure((t.subject, t.object) for t in store.match(p=SUBCLASS))
    assert ("acc:HorizontalCorrector", "acc:Magnet") in got


@pytest.mark.parametrize("seed", range(40))
def test_random_taxonomy_closure_matches_matrix_squaring(seed):
    rng = random.Random(seed)
    nodes = [f"c{i}" for i in range(rng.randint(2, 9))]
    edges = {(rng.choice(nodes), rng.choice(nodes)) for _ in range(rng.randint(1, 14))}
    store = TripleStore(Triple(s, SUBCLASS, o) for s, o in edges)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CycleDetected)
        closed = materialize_closure(store)
    assert {(t.subject, t.object) for t in closed.match(p=SUBCLASS)} == matrix_closure(edges)


def test_cycle_is_reported_but_closed():
    with pytest.warns(CycleDetected):
        closed = materialize_closure(_store(("A", SUBCLASS, "B"), ("B", SUBCLASS, "A")))
    assert {(t.subject, t.object) for t in closed} == {("A", "B"), ("B", "A"), ("A", "A"), ("B", "B")}


def test_closure_only_on_hierarchy_predicates():
    with pytest.raises(ValueError):
        materialize_closure(_store(("a", "acc:hasSignal", "b")), "acc:hasSignal")


# -- evaluation against brute force ----------------------------------------------------

_TERMS = ["e1", "e2", "e3", "e4", "e5", "e6"]
_PREDS = [SUBCLASS, "p:q", "p:r"]


def _random_case(rng):
    triples = {(rng.choice(_TERMS), rng.choice(_PREDS), rng.choice(_TERMS)) for _ in range(rng.randint(0, 30))}
    variables = ["?x", "?y", "?z"][: rng.randint(1, 3)]
    patterns = []
    for _ in range(rng.randint(1, 3)):
        closure = rng.random() < 0.4
        pred = SUBCLASS if closure else rng.choice(_PREDS + ["?p"] if len(variables) < 3 else _PREDS)
        s = rng.choice(variables + _TERMS[:2])
        o = rng.choice(variables + _TERMS[:2])
        patterns.append((s, pred, o, closure))
    used = sorted({t for p in patterns for t in p[:3] if t.startswith("?")})
    if not used:
        patterns.append(("?x", "p:q", "?y", False))
        used = ["?x", "?y"]
    select = rng.sample(used, rng.randint(1, len(used)))
    return triples, select, patterns


@pytest.mark.parametrize("seed", range(200))
def test_evaluation_matches_exhaustive_assignment(seed):
    triples, select, patterns = _random_case(random.Random(seed))
    q = GraphQuery(tuple(select), tuple(Pattern(s, p, o, c) for s, p, o, c in patterns))
    store = TripleStore(Triple(*t) for t in triples)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnknownPredicate)
        assert evaluate(q, store) == brute_force_query(select, patterns, triples)


def test_random_cases_are_not_trivially_empty():
    nonempty = 0
    for seed in range(200):
        triples, select, patterns = _random_case(random.Random(seed))
        nonempty += bool(brute_force_query(select, patterns, triples))
    assert nonempty >= 50


def test_unbound_pattern_over_empty_store():
    with pytest.warns(UnknownPredicate):
        assert run_query("SELECT ?s WHERE { ?s p:q ?o . }", TripleStore()) == []


def test_syntax_error_reports_position():
    with pytest.raises(QuerySyntaxError) as info:
        parse_query("SELECT ?x WHERE { ?x p:q }")
    assert info.value.position == len("SELECT ?x WHERE { ?x p:q ")
    with pytest.raises(QuerySyntaxError):
        parse_query("SELECT ?nope WHERE { ?x p:q ?y . }")


def test_query_text_round_trips():
    q = parse_query("SELECT ?pv WHERE { ?dev a ?cls . ?cls rdfs:subClassOf+ acc:Magnet . ?pv acc:isSetpointOf ?dev . }")
    assert q.closure_flags == (False, True, False)
    assert parse_query(q.text()) == q


# -- mapping ---------------------------------------------------------------------------

def _two_hundred_record_db():
    fams = [{"level": "family", "value": f, "description": f,
             "children": [{"level": "device", "description": "unit",
                           "expand": {"range": {"prefix": "D", "lo": 1, "hi": 20}},
                           "children": [{"level": "suffix", "value": s, "description": s} for s in ("SP", "RB")]}]}
            for f in ("QF", "QD", "HC", "VC", "BPM")]
    return load_database({"schema": {"levels": ["family", "device", "suffix"], "pattern": "{family}:{device}:{suffix}"},
                          "suffixes": {"SP": "Setpoint", "RB": "Readback"}, "tree": fams})


_MAP = GraphMapping("f:", "family", ("family", "device"),
                    {"QF": "acc:Quadrupole", "QD": "acc:Quadrupole", "HC": "acc:Corrector",
                     "VC": "acc:Corrector", "BPM": "acc:BPM"})


def test_three_triples_per_record():
    db = _two_hundred_record_db()
    assert len(db) == 200
    triples = map_channels_to_graph(db, _MAP)
    assert len(triples) == 3 * 200 + len(core_ontology())
    assert Triple("f:QF_D1", "rdf:type", "acc:Quadrupole") in triples
    assert Triple("acc:Quadrupole", SUBCLASS, "acc:Magnet") in triples
    assert map_channels_to_graph(db, _MAP) == triples


def test_empty_database_maps_to_core_only():
    db = load_database({"schema": {"levels": ["family"], "pattern": "{family}"}, "tree": []})
    assert map_channels_to_graph(db, _MAP) == core_ontology()


def test_unmapped_family():
    mapping = GraphMapping("f:", "family", ("family", "device"), {"QF": "acc:Quadrupole"})
    with pytest.raises(UnmappedFamily):
        map_channels_to_graph(_two_hundred_record_db(), mapping)


def test_graph_file_round_trip(graphs):
    text = dump_graph(graphs["a"])
    assert load_graph(text).triples == graphs["a"].triples
    assert all(line.endswith(" .") for line in text.strip().splitlines() if not line.startswith("@"))


# -- natural language to query ------------------------------------------------------------

def test_magnet_query_translates_to_magnet_setpoint_template():
    q = translate_nl(MAGNET_QUERY, DEFAULT_TEMPLATES, LexicalOracle())
    assert Pattern("?cls", SUBCLASS, "acc:Magnet", True) in q.patterns
    assert Pattern("?pv", "acc:isSetpointOf", "?dev") in q.patterns


@pytest.mark.parametrize("graph,answer", [("a", ANSWER_A), ("b", ANSWER_B)])
def test_same_query_returns_each_facility_answer_key(graph, answer, graphs):
    res = find_ontology(MAGNET_QUERY, graphs[graph], LexicalOracle())
    assert sorted(res.channels) == answer


def test_both_facilities_share_the_query_text(graphs):
    qa = translate_nl(MAGNET_QUERY, DEFAULT_TEMPLATES, LexicalOracle(), graphs["a"])
    qb = translate_nl(MAGNET_QUERY, DEFAULT_TEMPLATES, LexicalOracle(), graphs["b"])
    assert qa.text() == qb.text()


def test_nonsense_has_no_template():
    with pytest.raises(NoTemplateMatch):
        translate_nl("warp core plasma", DEFAULT_TEMPLATES, LexicalOracle())


def test_nonsense_abstains_in_finder(graphs):
    res = find_ontology("warp core plasma", graphs["a"], LexicalOracle())
    assert res.channels == [] and res.abstained
