import random

import pytest
from hypothesis import given, settings, strategies as st

from chanfind.bench import generate_synthetic_benchmark
from chanfind.errors import EmptyHints, IterationLimitExceeded, UnknownComponent, UnknownTool
from chanfind.explorer import (
    CompositionalAddress,
    Component,
    Limits,
    Weights,
    compose_address,
    find_explorer,
    guess_addresses,
    list_components,
    make_toolset,
    run_react,
    score_row,
    split_hints,
)
from chanfind.react import Action, ScriptedPolicy, run_loop
from chanfind.selector import LexicalOracle

from oracles import ref_score

KEYS = ("facility", "device", "location", "property")


def _table(index):
    return [r.parts for r in index.rows]


def _full_scan(hints, index, weights=(1.0, 0.25, 0.25, 0.25)):
    """Score every row from scratch with the reference scorer."""
    wp, wf, wd, wl = weights
    out = []
    for r in index.rows:
        s = wp * ref_score(hints["property"], f"{r.property} {r.description}")
        for key, w in (("facility", wf), ("device", wd), ("location", wl)):
            if hints.get(key):
                s += w * ref_score(hints[key], getattr(r, key))
        out.append((str(r), round(s, 12)))
    out.sort(key=lambda t: (-t[1], t[0]))
    return out


# -- listings ------------------------------------------------------------------

def test_facility_listing_includes_xfel_diag(xfel_index):
    values = [v for v, _ in list_components("Facility", {}, xfel_index)]
    assert "XFEL.DIAG" in values
    assert values == sorted(set(r[0] for r in _table(xfel_index)))


def test_listings_equal_flat_table_comprehension(xfel_index):
    rng = random.Random(5)
    table = _table(xfel_index)
    for _ in range(200):
        row = rng.choice(table)
        depth = rng.randrange(4)
        prefix = row[:depth]
        level = list(Component)[depth]
        got = [v for v, _ in list_components(level, dict(zip(KEYS, prefix)), xfel_index)]
        assert got == sorted({t[depth] for t in table if t[:depth] == prefix})


def test_single_property_location_lists_one_value():
    from chanfind.explorer import ExplorerIndex

    idx = ExplorerIndex([CompositionalAddress("F", "D", "L", "P", description="only")])
    assert list_components("Property", {"facility": "F", "device": "D", "location": "L"}, idx) == [("P", "")]


def test_unknown_filter_value(xfel_index):
    with pytest.raises(UnknownComponent):
        list_components("Device", {"facility": "NOPE"}, xfel_index)


def test_filters_must_fix_higher_components(xfel_index):
    with pytest.raises(ValueError):
        list_components("Location", {"facility": "XFEL.DIAG"}, xfel_index)


# -- composition -----------------------------------------------------------------

def test_compose_known_quadruple(xfel_index):
    row = xfel_index.rows[0]
    assert compose_address(row, xfel_index) == str(row)


def test_swapping_device_and_location_misses(xfel_index):
    row = xfel_index.rows[0]
    swapped = {"facility": row.facility, "device": row.location, "location": row.device, "property": row.property}
    assert compose_address(swapped, xfel_index) is None


def test_random_quadruples_match_flat_table(xfel_index):
    rng = random.Random(9)
    table = set(_table(xfel_index))
    columns = [sorted({t[i] for t in table}) for i in range(4)]
    hits = 0
    for _ in range(1000):
        quad = tuple(rng.choice(col) for col in columns) if rng.random() < 0.7 else rng.choice(sorted(table))
        got = compose_address(dict(zip(KEYS, quad)), xfel_index)
        assert (got is not None) == (quad in table)
        hits += got is not None
    assert hits > 200


def test_address_serialisation():
    a = CompositionalAddress.parse("XFEL.DIAG/CAMERA/OTRC.55.I1/IMAGE")
    assert str(a) == "XFEL.DIAG/CAMERA/OTRC.55.I1/IMAGE"
    with pytest.raises(ValueError):
        CompositionalAddress("X", "", "L", "P")
    with pytest.raises(ValueError):
        CompositionalAddress.parse("too/few/parts")


# -- fuzzy ranking -------------------------------------------------------------------

def test_camera_image_hint_finds_the_image_property(xfel_index):
    top, _ = guess_addresses({"property": "camera image", "device": "CAMERA"}, 5, xfel_index)[0]
    assert xfel_index.by_address[top].description == "The camera image (8 bit)"


@pytest.mark.parametrize("seed", range(200))
def test_record_matching_every_hint_ranks_first(seed, xfel_index):
    row = random.Random(seed).choice(xfel_index.rows)
    hints = {"facility": row.facility, "device": row.device, "location": row.location,
             "property": f"{row.property} {row.description}"}
    ranked = guess_addresses(hints, 5, xfel_index)
    assert ranked[0][0] == str(row)
    assert ranked[0][1] > ranked[1][1]
    assert ranked == _full_scan(hints, xfel_index)[:5]


_hint_words = st.sampled_from("camera image gain bunch charge XFEL DIAG FLASH BPM OTRC 106 TL coil current "
                              "ion pump voltage klystron power loss threshold Q I1 SA1".split())
_hint = st.lists(_hint_words, min_size=1, max_size=4).map(" ".join)


@settings(max_examples=150, deadline=None)
@given(_hint, st.one_of(st.none(), _hint), st.one_of(st.none(), _hint), st.one_of(st.none(), _hint),
       st.integers(1, 12))
def test_ranking_equals_full_scan(prop, fac, dev, loc, k):
    idx = _xfel_index()
    hints = {"property": prop, "facility": fac, "device": dev, "location": loc}
    got = guess_addresses(hints, k, idx)
    assert got == _full_scan(hints, idx)[:k]
    assert all(a in idx for a, _ in got)


@settings(max_examples=100, deadline=None)
@given(_hint, st.sampled_from(["facility", "device", "location"]), st.integers(0, 227))
def test_correct_component_hint_never_lowers_score(prop, key, i):
    idx = _xfel_index()
    row = idx.rows[i]
    base = score_row(row, {"property": prop})
    boosted = score_row(row, {"property": prop, key: getattr(row, key)})
    assert boosted >= base


def test_property_hint_required(xfel_index):
    with pytest.raises(EmptyHints):
        guess_addresses({"device": "CAMERA"}, 5, xfel_index)
    with pytest.raises(EmptyHints):
        guess_addresses({"property": "  "}, 5, xfel_index)


def test_negative_weights_rejected():
    with pytest.raises(ValueError):
        Weights(device=-0.1)


def test_hint_split():
    assert split_hints("camera image at OTRC.106.TL") == ("camera image", "OTRC.106.TL")
    assert split_hints("XFEL diagnostics camera image", "XFEL.DIAG XFEL diagnostics") == ("camera image", "camera image")


# -- agent loop ---------------------------------------------------------------------

def test_fuzzy_hit_uses_at_most_four_tool_calls(xfel_index):
    row = next(r for r in xfel_index.rows if r.facility == "XFEL.DIAG" and r.property == "IMAGE")
    res = run_react(f"camera image at {row.location}", xfel_index, LexicalOracle())
    tools = [s.tool for s in res.trace]
    assert res.channels == [str(row)]
    assert tools == ["list_facilities", "guess_addresses", "compose_address", "finish"]
    assert len(tools) - 1 <= 4


def test_fallback_descent_respects_path_length(xfel_index):
    res = run_react("XFEL magnets quadrupole magnet coil current measured at position in the injector",
                    xfel_index, LexicalOracle())
    calls = [s.tool for s in res.trace if s.tool != "finish"]
    assert res.channels and len(calls) <= 1 + 1 + 3 + 1
    assert calls[:2] == ["list_facilities", "guess_addresses"]


def test_sixty_query_suite_within_step_envelope(xfel_db, xfel_index):
    cases = generate_synthetic_benchmark(xfel_db, 60, seed=1)
    inside = 0
    for c in cases:
        res = find_explorer(c.query, xfel_index, LexicalOracle())
        steps = sum(len(sr.trace) for sr in res.subresults)
        inside += 4 <= steps <= 12
        assert set(res.channels) <= set(xfel_index.by_address)
    assert inside >= 0.8 * len(cases)


def test_traces_are_deterministic(xfel_index):
    q = "XFEL diagnostics screen camera at position 106 camera amplifier gain"
    a = run_react(q, xfel_index, LexicalOracle())
    b = run_react(q, xfel_index, LexicalOracle())
    assert a.channels == b.channels
    assert [(s.tool, s.args, s.observation) for s in a.trace] == [(s.tool, s.args, s.observation) for s in b.trace]


def test_iteration_limit_abstains_with_partial_trace(xfel_index):
    res = run_react("XFEL magnets coil current", xfel_index, LexicalOracle(), Limits(max_iterations=2))
    assert res.channels == [] and res.abstained
    assert res.error == "IterationLimitExceeded" and len(res.trace) == 2


def _looping_script(query):
    while True:
        yield Action("list_facilities", {}, "again")


def test_loop_raises_on_runaway_policy(xfel_index):
    with pytest.raises(IterationLimitExceeded) as info:
        run_loop("q", make_toolset(xfel_index), ScriptedPolicy(_looping_script), 5)
    assert len(info.value.steps) == 5


def test_unregistered_tool_is_rejected(xfel_index):
    reg = make_toolset(xfel_index)
    with pytest.raises(UnknownTool):
        reg.call("sql_query", {"text": "select *"})

    def script(query):
        yield Action("sql_query", {"text": "select *"})
        yield Action("finish", {"channels": ["made/up/add/ress"]})

    out = run_loop("q", reg, ScriptedPolicy(script))
    assert out.steps[0].observation.startswith("error: UnknownTool")
    assert set(reg.names) == {"list_facilities", "list_devices", "list_locations", "list_properties",
                              "compose_address", "guess_addresses"}


_IDX = {}


def _xfel_index():
    if "i" not in _IDX:
        from chanfind import synthetic
        from chanfind.channeldb import load_database
        from chanfind.explorer import ExplorerIndex

        _IDX["i"] = ExplorerIndex.from_database(load_database(synthetic.xfel_config()))
    return _IDX["i"]
