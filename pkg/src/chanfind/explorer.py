"""Agent exploration of compositional FACILITY/DEVICE/LOCATION/PROPERTY
addresses.

The agent sees the database only through a handful of read-only tools:
listing the values of one component under already-fixed higher
components, composing (and thereby validating) a full address, and a
top-k fuzzy ranking over all addresses. The work plan is hybrid: identify
the facility, try the fuzzy ranking, and fall back to building the
address one component at a time when the ranking is not convincing.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Generator, Iterable, Mapping, Sequence

from .channeldb import ChannelDatabase
from .errors import EmptyHints, IterationLimitExceeded, UnknownComponent
from .react import (
    DEFAULT_MAX_ITERATIONS,
    FINISH,
    Action,
    AgentStep,
    LLMPolicy,
    ScriptedPolicy,
    Tool,
    ToolRegistry,
    run_loop,
)
from .results import FinderResult, SubResult, merge, parallel_map
from .selector import ChoiceRequest, Option, SelectorBackend, choose, decompose
from .text import content_tokens, lexical_score, tokens

DEFAULT_K = 5
SATISFIED_SCORE = 0.6
SATISFIED_MARGIN = 0.1


class Component(str, Enum):
    FACILITY = "Facility"
    DEVICE = "Device"
    LOCATION = "Location"
    PROPERTY = "Property"

    @property
    def index(self) -> int:
        return _ORDER.index(self)

    @classmethod
    def coerce(cls, value: "Component | str") -> "Component":
        if isinstance(value, Component):
            return value
        for c in cls:
            if c.value.lower() == str(value).lower():
                return c
        raise ValueError(f"unknown component level {value!r}")


_ORDER = list(Component)
_KEYS = [c.value.lower() for c in _ORDER]  # "facility", "device", ...


@dataclass(frozen=True)
class CompositionalAddress:
    facility: str
    device: str
    location: str
    property: str
    description: str = field(default="", compare=False)

    def __post_init__(self):
        for key in _KEYS:
            if not getattr(self, key):
                raise ValueError(f"address component {key!r} is empty")

    def __str__(self) -> str:
        return "/".join(self.parts)

    @property
    def parts(self) -> tuple[str, str, str, str]:
        return (self.facility, self.device, self.location, self.property)

    @classmethod
    def parse(cls, text: str, description: str = "") -> "CompositionalAddress":
        parts = text.split("/")
        if len(parts) != 4:
            raise ValueError(f"{text!r} is not FACILITY/DEVICE/LOCATION/PROPERTY")
        return cls(*parts, description=description)


@dataclass(frozen=True)
class Weights:
    property: float = 1.0
    facility: float = 0.25
    device: float = 0.25
    location: float = 0.25

    def __post_init__(self):
        if min(self.property, self.facility, self.device, self.location) < 0:
            raise ValueError("weights must be non-negative")


@dataclass(frozen=True)
class Limits:
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    k: int = DEFAULT_K
    weights: Weights = Weights()

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.k < 1:
            raise ValueError("k must be at least 1")


class ExplorerIndex:
    """Flat table of addresses plus the descriptions of every component value."""

    def __init__(self, rows: Iterable[CompositionalAddress], component_descriptions: Mapping[tuple[str, ...], str] | None = None):
        self.rows = sorted(set(rows), key=str)
        self.by_address = {str(r): r for r in self.rows}
        # keyed by the component's prefix tuple, e.g. ("XFEL.DIAG", "CAMERA")
        self.descriptions = dict(component_descriptions or {})

    @classmethod
    def from_database(cls, db: ChannelDatabase) -> "ExplorerIndex":
        if len(db.schema.levels) != 4:
            raise ValueError("compositional addresses need a four-level schema")
        rows, descs = [], {}
        if db.roots:
            for node in db.iter_nodes():
                values = tuple(v for _, v in node.path)
                descs.setdefault(values, node.description)
                if len(values) == 4 and node.record is not None:
                    rows.append(CompositionalAddress(*values, description=node.description))
        else:
            for r in db:
                values = tuple(v for _, v in r.path)
                desc = r.description.split(" > ")[-1]
                rows.append(CompositionalAddress(*values, description=desc))
                descs.setdefault(values, desc)
        return cls(rows, descs)

    def __len__(self) -> int:
        return len(self.rows)

    def __contains__(self, address: object) -> bool:
        return str(address) in self.by_address

    def describe(self, values: Sequence[str]) -> str:
        return self.descriptions.get(tuple(values), "")


def _check_filters(level: Component, filters: Mapping[str, str]) -> list[str]:
    required = _KEYS[: level.index]
    extra = sorted(set(filters) - set(required))
    if extra:
        raise ValueError(f"{level.value} listings can only be filtered by {required}, not {extra}")
    missing = [k for k in required if not filters.get(k)]
    if missing:
        raise ValueError(f"{level.value} listings need {missing} fixed first")
    return [filters[k] for k in required]


def list_components(level: Component | str, filters: Mapping[str, str], index: ExplorerIndex) -> list[tuple[str, str]]:
    """Sorted, de-duplicated ``(value, description)`` pairs of one component.

    Every higher component must be fixed in ``filters`` (for locations:
    facility and device), so exploration proceeds top-down.
    """
    level = Component.coerce(level)
    prefix = _check_filters(level, {k.lower(): v for k, v in filters.items()})
    for depth in range(1, len(prefix) + 1):
        if not any(r.parts[:depth] == tuple(prefix[:depth]) for r in index.rows):
            raise UnknownComponent(f"no {_KEYS[depth - 1]} {prefix[depth - 1]!r} under {prefix[:depth - 1]}")
    values = sorted({r.parts[level.index] for r in index.rows if r.parts[: level.index] == tuple(prefix)})
    return [(v, index.describe(prefix + [v])) for v in values]


def compose_address(parts: CompositionalAddress | Mapping[str, str], index: ExplorerIndex) -> str | None:
    """The serialized address if it exists, else ``None`` (not found)."""
    if not isinstance(parts, CompositionalAddress):
        parts = CompositionalAddress(**{k: parts[k] for k in _KEYS})
    address = str(parts)
    return address if address in index else None


def score_row(row: CompositionalAddress, hints: Mapping[str, str], weights: Weights = Weights()) -> float:
    """Property-centric score with additive component boosts."""
    total = weights.property * lexical_score(hints["property"], f"{row.property} {row.description}")
    for key, w in (("facility", weights.facility), ("device", weights.device), ("location", weights.location)):
        hint = hints.get(key)
        if hint:
            total += w * lexical_score(hint, getattr(row, key))
    return round(total, 12)


def guess_addresses(hints: Mapping[str, str], k: int, index: ExplorerIndex,
                    weights: Weights = Weights()) -> list[tuple[str, float]]:
    if k < 1:
        raise ValueError("k must be at least 1")
    hints = {key.lower(): v for key, v in hints.items() if v is not None}
    unknown = set(hints) - set(_KEYS)
    if unknown:
        raise ValueError(f"unknown hint fields {sorted(unknown)}")
    if not hints.get("property", "").strip():
        raise EmptyHints("a property hint is required")
    scored = [(str(r), score_row(r, hints, weights)) for r in index.rows]
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored[:k]


def satisfied(ranked: Sequence[tuple[str, float]]) -> bool:
    if not ranked:
        return False
    top = ranked[0][1]
    runner_up = ranked[1][1] if len(ranked) > 1 else 0.0
    return top >= SATISFIED_SCORE and top - runner_up >= SATISFIED_MARGIN - 1e-9


# -- tools -----------------------------------------------------------------

_STR = {"type": "string"}


def make_toolset(index: ExplorerIndex, limits: Limits = Limits()) -> ToolRegistry:
    def lister(level: Component):
        def fn(**filters: str) -> list[dict[str, str]]:
            return [{"value": v, "description": d} for v, d in list_components(level, filters, index)]
        return fn

    def compose(facility: str, device: str, location: str, property: str) -> dict[str, Any]:
        addr = compose_address(CompositionalAddress(facility, device, location, property), index)
        return {"address": addr, "found": addr is not None}

    def guess(property: str, facility: str = "", device: str = "", location: str = "", k: int = limits.k) -> list[dict[str, Any]]:
        hints = {"property": property, "facility": facility, "device": device, "location": location}
        return [
            {"address": a, "score": s, "description": index.by_address[a].description}
            for a, s in guess_addresses(hints, k, index, limits.weights)
        ]

    return ToolRegistry([
        Tool("list_facilities", "list facilities (accelerator + component group)", lister(Component.FACILITY)),
        Tool("list_devices", "list device classes within a facility", lister(Component.DEVICE),
             {"facility": _STR}, ("facility",)),
        Tool("list_locations", "list installation points of a device class", lister(Component.LOCATION),
             {"facility": _STR, "device": _STR}, ("facility", "device")),
        Tool("list_properties", "list properties (with descriptions) at one location", lister(Component.PROPERTY),
             {"facility": _STR, "device": _STR, "location": _STR}, ("facility", "device", "location")),
        Tool("compose_address", "assemble an address and check that it exists", compose,
             {"facility": _STR, "device": _STR, "location": _STR, "property": _STR},
             ("facility", "device", "location", "property")),
        Tool("guess_addresses", "top-k fuzzy ranking of existing addresses from component hints", guess,
             {"property": _STR, "facility": _STR, "device": _STR, "location": _STR,
              "k": {"type": "integer", "minimum": 1}}, ("property",)),
    ])


SYSTEM_PROMPT = """\
You locate channels in a DOOCS-style control system. Every address has four
parts, FACILITY/DEVICE/LOCATION/PROPERTY: the facility joins an accelerator
and a component group (XFEL.DIAG is XFEL diagnostics), the device is a device
class (CAMERA, BPM), the location is the installation point and the property
is the readable or writable parameter, each with a short description.

Work plan:
1. list_facilities and decide which facility the request is about.
2. guess_addresses with your hints for property, facility, device and location.
   If one candidate clearly answers the request, confirm it with
   compose_address and finish.
3. Otherwise build the address step by step: list_devices, list_locations,
   list_properties, then compose_address.
Only finish with addresses that compose_address confirmed. If nothing fits,
finish with an empty list."""


# -- offline agent ------------------------------------------------------------

def _pick(backend: SelectorBackend, query: str, items: Sequence[Mapping[str, str]], what: str,
          glossary: Mapping[str, str]) -> str | None:
    if not items:
        return None
    options = [Option(it["value"], it["value"], it.get("description", "")) for it in items]
    req = ChoiceRequest(f"Choose the {what} the request refers to.", options,
                        allow_abstain=True, query=query, glossary=glossary, min_score=0.0)
    resp = choose(req, backend)
    return None if resp.abstained else resp.selected[0]


_IDENT = re.compile(r"^(?=.*[A-Za-z])(?=.*[0-9])\S+$|^\w+(?:[._:]\w+)+$")


def split_hints(query: str, facility_text: str = "") -> tuple[str, str]:
    """``(property_hint, location_hint)`` for the fuzzy ranking.

    Identifier-like words (``OTRC.55.I1``, ``Q7``) name a location; words
    already explained by the chosen facility are dropped from the property
    hint. Without identifiers the location hint falls back to the property
    hint.
    """
    words = [w.strip(",;()") for w in query.split()]
    idents = [w for w in words if w and _IDENT.match(w)]
    used = tokens(facility_text)
    rest = [t for t in content_tokens(" ".join(w for w in words if w not in idents)) if t not in used]
    prop = " ".join(rest) or " ".join(content_tokens(query)) or query
    return prop, " ".join(idents) or prop


def oracle_script(backend: SelectorBackend, limits: Limits = Limits(), glossary: Mapping[str, str] | None = None):
    gl = dict(glossary or {})

    def script(query: str) -> Generator[Action, Any, None]:
        facilities = yield Action("list_facilities", {}, "Which facility is this about?")
        fac = _pick(backend, query, facilities, "facility", gl)
        fac_text = next((f"{f['value']} {f.get('description', '')}" for f in facilities if f["value"] == fac), "")
        prop, loc = split_hints(query, fac_text)
        args = {"property": prop, "device": prop, "location": loc, "k": limits.k}
        if fac:
            args["facility"] = fac
        ranked = yield Action("guess_addresses", args, "Try the fuzzy ranking first.")
        pairs = [(r["address"], r["score"]) for r in ranked]
        if satisfied(pairs):
            parts = CompositionalAddress.parse(pairs[0][0])
            check = yield Action("compose_address", dict(zip(_KEYS, parts.parts)), "Top candidate stands out; confirm it.")
            if check["found"]:
                yield Action(FINISH, {"channels": [check["address"]]}, "Confirmed.")
                return
        if fac is None:
            yield Action(FINISH, {"channels": []}, "No facility fits the request; abstaining.")
            return
        chosen = {"facility": fac}
        for level, tool in ((Component.DEVICE, "list_devices"), (Component.LOCATION, "list_locations"),
                            (Component.PROPERTY, "list_properties")):
            listing = yield Action(tool, dict(chosen), f"Narrow down the {level.value.lower()}.")
            value = _pick(backend, query, listing, level.value.lower(), gl)
            if value is None:
                yield Action(FINISH, {"channels": []}, f"No {level.value.lower()} fits; abstaining.")
                return
            chosen[level.value.lower()] = value
        check = yield Action("compose_address", dict(chosen), "Assemble and validate.")
        yield Action(FINISH, {"channels": [check["address"]] if check["found"] else []}, "Done.")

    return script


# -- entry point -------------------------------------------------------------

def run_react(query: str, index: ExplorerIndex, backend: SelectorBackend, limits: Limits = Limits(),
              glossary: Mapping[str, str] | None = None) -> SubResult:
    registry = make_toolset(index, limits)
    if backend.kind == "oracle":
        policy = ScriptedPolicy(oracle_script(backend, limits, glossary))
    else:
        policy = LLMPolicy(backend, registry, SYSTEM_PROMPT)
    before = backend.calls_used
    try:
        outcome = run_loop(query, registry, policy, limits.max_iterations)
    except IterationLimitExceeded as exc:
        steps: list[AgentStep] = getattr(exc, "steps", [])
        return SubResult(query, [], True, backend.calls_used - before, steps, "IterationLimitExceeded")
    valid = [c for c in dict.fromkeys(outcome.channels) if c in index]
    return SubResult(query, valid, not valid, backend.calls_used - before, outcome.steps)


def find_explorer(
    query: str,
    db: ChannelDatabase | ExplorerIndex,
    backend: SelectorBackend,
    *,
    split: bool = True,
    limits: Limits = Limits(),
    glossary: Mapping[str, str] | None = None,
) -> FinderResult:
    index = db if isinstance(db, ExplorerIndex) else ExplorerIndex.from_database(db)
    if glossary is None:
        glossary = {} if isinstance(db, ExplorerIndex) else dict(db.glossary)
    start = backend.calls_used
    subqueries = decompose(query, backend) if split else [query]
    results = parallel_map(lambda sq: run_react(sq, index, backend, limits, glossary), subqueries)
    return merge(query, results, backend.calls_used - start, "explore")


def format_trace(steps: Sequence[AgentStep], width: int = 160) -> str:
    lines = []
    for i, s in enumerate(steps, 1):
        obs = s.observation if len(s.observation) <= width else s.observation[: width - 3] + "..."
        lines.append(f"{i:2d}. {s.tool} {json.dumps(s.args, sort_keys=True)}")
        if s.thought:
            lines.append(f"    thought: {s.thought}")
        lines.append(f"    -> {obs}")
    return "\n".join(lines)
