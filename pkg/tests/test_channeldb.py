import json
import random
import time

import pytest
import yaml
from hypothesis import given, settings, strategies as st

from chanfind import synthetic
from chanfind.channeldb import (
    ExpansionSpec,
    HierarchySchema,
    NodeSpec,
    SuffixRole,
    assemble_address,
    expand,
    load_database,
    parse_address,
    validate_channels,
)
from chanfind.errors import DuplicateAddress, EmptyList, MissingLevel, ParseError, RangeError, SchemaError

from oracles import count_records, enumerate_paths


def _schema(levels, pattern, suffixes=None):
    return HierarchySchema.from_config({"levels": levels, "pattern": pattern}, suffixes)


# -- counts ---------------------------------------------------------------------

def test_tutorial_config_has_1050_records_over_four_systems(tutorial_db):
    assert len(tutorial_db) == 1050
    assert [r.value for r in tutorial_db.roots] == ["VAC", "RF", "MAG", "DIAG"]
    assert count_records(synthetic.tutorial_config()["tree"]) == 1050


@pytest.mark.parametrize("ion,thermal", [(4, 0), (3, 1), (2, 2), (0, 4)])
def test_vacuum_device_count_matches_enumerator(ion, thermal):
    cfg = synthetic.vacuum_device_config(ion, thermal)
    db = load_database(cfg)
    assert len(db) == count_records(cfg["tree"])
    assert 145 <= len(db) <= 152


def test_default_vacuum_fixture_is_150(vacuum_db):
    assert len(vacuum_db) == 150


def test_single_leaf_gives_one_record():
    db = load_database({
        "schema": {"levels": ["a"], "pattern": "{a}"},
        "tree": [{"level": "a", "value": "ONLY", "description": "the only channel"}],
    })
    assert [r.address for r in db] == ["ONLY"]


def test_range_over_three_signals_gives_twelve():
    schema = _schema(["dev", "sig"], "{dev}:{sig}")
    node = NodeSpec.from_config({
        "level": "dev", "description": "gauge", "expand": {"range": {"prefix": "GAUGE", "lo": 1, "hi": 4, "pad": 1}},
        "children": [{"level": "sig", "value": s, "description": s} for s in ("P", "T", "I")],
    })
    recs = expand(node, schema)
    assert len(recs) == 12
    assert recs[0].address == "GAUGE1:P" and recs[-1].address == "GAUGE4:I"


def test_padding_is_zero_fill():
    spec = ExpansionSpec.from_config({"range": {"prefix": "Q", "lo": 7, "hi": 10, "pad": 3}})
    assert [v for v, _, _ in spec.instances()] == ["Q007", "Q008", "Q009", "Q010"]


@pytest.mark.parametrize("seed", range(120))
def test_random_config_count_and_paths_match_enumerator(seed):
    cfg = synthetic.random_config(seed)
    db = load_database(cfg)
    assert len(db) == count_records(cfg["tree"])
    assert [r.path for r in db] == enumerate_paths(cfg["tree"])


def test_expansion_errors():
    with pytest.raises(RangeError):
        ExpansionSpec.from_config({"range": {"prefix": "X", "lo": 5, "hi": 4}})
    with pytest.raises(EmptyList):
        ExpansionSpec.from_config({"list": []})


# -- load errors ------------------------------------------------------------------

def test_placeholder_count_mismatch_is_schema_error():
    with pytest.raises(SchemaError):
        load_database({"schema": {"levels": ["a", "b"], "pattern": "{a}"}, "tree": []})


def test_malformed_documents_are_parse_errors():
    with pytest.raises(ParseError):
        load_database("schema: [unclosed")
    with pytest.raises(ParseError):
        load_database("- just a list")
    with pytest.raises(ParseError):
        load_database({"schema": {"levels": ["a"], "pattern": "{a}"}})
    with pytest.raises(ParseError):  # node without a description
        load_database({"schema": {"levels": ["a"], "pattern": "{a}"}, "tree": [{"level": "a", "value": "X"}]})


def test_collision_after_expansion_is_fatal():
    doc = {
        "schema": {"levels": ["a"], "pattern": "{a}"},
        "tree": [
            {"level": "a", "description": "r", "expand": {"range": {"prefix": "X", "lo": 1, "hi": 3}}},
            {"level": "a", "value": "X2", "description": "clash"},
        ],
    }
    with pytest.raises(DuplicateAddress):
        load_database(doc)


def test_json_and_yaml_documents_load_identically():
    cfg = synthetic.vacuum_device_config()
    a = load_database(yaml.safe_dump(cfg))
    b = load_database(json.dumps(cfg))
    assert a.records == b.records


def test_loading_is_deterministic():
    text = yaml.safe_dump(synthetic.tutorial_config())
    assert load_database(text).export_flat() == load_database(text).export_flat()


# -- addresses -------------------------------------------------------------------

def test_full_six_level_substitution():
    schema = _schema(["a", "b", "c", "d", "e", "f"], "{0}-{1}:{2}:{3}:{4}.{5}")
    path = [("a", "SYS"), ("b", "SUB"), ("c", "DEV"), ("d", "SUBDEV"), ("e", "SIG"), ("f", "SP")]
    assert assemble_address(path, schema) == "SYS-SUB:DEV:SUBDEV:SIG.SP"


def test_early_termination_drops_trailing_levels_and_separators(tutorial_db):
    rec = tutorial_db.get("MAG-PSQ:PSQ001:FWVER")
    assert rec is not None
    assert [lv for lv, _ in rec.path] == ["system", "subsystem", "device", "signal"]
    assert rec.suffix_role is SuffixRole.NONE


def test_missing_required_level():
    schema = _schema(["a", {"name": "b", "optional": True}], "{a}.{b}")
    assert assemble_address([("a", "X")], schema) == "X"
    with pytest.raises(MissingLevel):
        assemble_address([("b", "Y")], schema)


def test_round_trip_on_thousand_seeded_records(tutorial_db):
    rng = random.Random(11)
    sample = rng.sample(list(tutorial_db), 1000)
    for r in sample:
        assert parse_address(assemble_address(r.path, tutorial_db.schema), tutorial_db.schema,
                             tutorial_db.by_level) == r.path


@pytest.mark.parametrize("seed", range(0, 120, 7))
def test_round_trip_on_random_schemas(seed):
    db = load_database(synthetic.random_config(seed))
    for r in db:
        assert r.address == assemble_address(r.path, db.schema)
        assert parse_address(r.address, db.schema, db.by_level) == r.path


def test_unparseable_address():
    schema = _schema(["a", "b"], "{a}:{b}")
    with pytest.raises(ParseError):
        parse_address("no-separator", schema)


def test_suffix_role_only_from_vocabulary(tutorial_db):
    for r in tutorial_db:
        last_level, last = r.path[-1]
        if r.suffix_role in (SuffixRole.SETPOINT, SuffixRole.READBACK, SuffixRole.COMMAND):
            assert last_level == "suffix" and last in tutorial_db.schema.suffix_vocabulary
        if last_level != "suffix":
            assert r.suffix_role is SuffixRole.NONE


# -- indexes and validation ---------------------------------------------------------

def test_indexes_consistent_with_records(tutorial_db):
    for r in tutorial_db:
        assert tutorial_db.by_address[r.address] is r
        for kv in r.path:
            assert r in tutorial_db.by_level[kv]
    assert sum(len(v) for v in tutorial_db.by_level.values()) == sum(len(r.path) for r in tutorial_db)


def test_validate_partitions_in_order():
    db = load_database({"schema": {"levels": ["a"], "pattern": "{a}"},
                        "tree": [{"level": "a", "value": "A", "description": "a"}]})
    assert validate_channels(["A", "B"], db) == (["A"], ["B"])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.one_of(st.sampled_from(["VAC-GC:GC001:FWVER", "RF-CAV:CAV002:FREQ.SP", "DIAG-CT:CT005:CHARGE.RB"]),
                          st.text(max_size=12)), max_size=20))
def test_validate_matches_linear_scan(candidates):
    db = load_database(synthetic.tutorial_config())
    addresses = [r.address for r in db.records]
    valid = [c for c in candidates if any(c == a for a in addresses)]
    invalid = [c for c in candidates if not any(c == a for a in addresses)]
    assert validate_channels(candidates, db) == (valid, invalid)


def test_export_flat_has_one_line_per_record(vacuum_db):
    lines = vacuum_db.export_flat().splitlines()
    assert len(lines) == len(vacuum_db)
    assert all(line.count("\t") == 2 for line in lines)


def test_database_is_read_only(tutorial_db):
    with pytest.raises(TypeError):
        tutorial_db.by_address["new"] = None  # type: ignore[index]


def test_expansion_counts_run_fast():
    t0 = time.perf_counter()
    load_database(synthetic.tutorial_config())
    load_database(synthetic.vacuum_device_config())
    assert time.perf_counter() - t0 < 1.0
