"""Navigation over a middle-layer tree: systems, device families, fields,
channels.

Legacy control-system names are too irregular to reason about directly, so
the agent here never sees them until the last step. It walks a normalised
tree with seven read-only tools. A keyword pass over the request decides
which accelerator systems are involved; the agent prompt then carries only
worked examples from those systems.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Generator, Iterable, Mapping, Sequence

import yaml

from .channeldb import ChannelDatabase, ChannelRecord, HierarchySchema, LevelDef, parse_document
from .errors import IterationLimitExceeded, ParseError, UnknownFamily, UnknownField, UnknownSystem
from .react import FINISH, Action, AgentStep, LLMPolicy, ScriptedPolicy, Tool, ToolRegistry, run_loop
from .results import FinderResult, SubResult, merge, parallel_map
from .selector import ChoiceRequest, Option, SelectorBackend, choose, decompose
from .text import token_list

MAX_EXAMPLES = 8
MML_MAX_ITERATIONS = 20


@dataclass(frozen=True)
class MmlChannel:
    address: str
    device_index: int


@dataclass(frozen=True)
class MmlField:
    name: str
    description: str
    channels: tuple[MmlChannel, ...]


@dataclass(frozen=True)
class MmlFamily:
    name: str
    description: str
    fields: tuple[MmlField, ...]
    # ordering index -> device label (e.g. "[3, 1]" for sector 3, device 1)
    devices: tuple[tuple[int, str], ...] = ()


@dataclass(frozen=True)
class MmlSystem:
    name: str
    description: str
    families: tuple[MmlFamily, ...]


def _unique(names: Iterable[str], what: str) -> None:
    seen: set[str] = set()
    for n in names:
        if n in seen:
            raise ParseError(f"duplicate {what} {n!r}")
        seen.add(n)


class MmlTree:
    def __init__(self, systems: Sequence[MmlSystem], name: str = ""):
        self.systems = tuple(systems)
        self.name = name
        _unique((s.name for s in self.systems), "system")
        for s in self.systems:
            _unique((f.name for f in s.families), f"family in {s.name}")
            for fam in s.families:
                _unique((f.name for f in fam.fields), f"field in {s.name}/{fam.name}")
        self._systems = {s.name: s for s in self.systems}
        addresses = [c.address for _, _, _, c in self.iter_channels()]
        _unique(addresses, "channel address")

    # -- lookups ---------------------------------------------------------

    def system(self, name: str) -> MmlSystem:
        try:
            return self._systems[name]
        except KeyError:
            raise UnknownSystem(f"no system {name!r}; known: {', '.join(sorted(self._systems))}") from None

    def family(self, system: str, family: str) -> MmlFamily:
        for f in self.system(system).families:
            if f.name == family:
                return f
        raise UnknownFamily(f"no family {family!r} in system {system!r}")

    def field(self, system: str, family: str, field_name: str) -> MmlField:
        for f in self.family(system, family).fields:
            if f.name == field_name:
                return f
        raise UnknownField(f"no field {field_name!r} in {system}/{family}")

    def iter_channels(self) -> Iterable[tuple[MmlSystem, MmlFamily, MmlField, MmlChannel]]:
        for s in self.systems:
            for fam in s.families:
                for fld in fam.fields:
                    for c in fld.channels:
                        yield s, fam, fld, c

    def channel_count(self) -> int:
        return sum(1 for _ in self.iter_channels())

    def to_database(self) -> ChannelDatabase:
        """The flat companion database every channel must validate against."""
        schema = HierarchySchema([LevelDef("address", 0)], "{address}")
        records = [
            ChannelRecord(
                c.address,
                f"{s.description} > {fam.description} > {fld.description} > element {c.device_index}",
                (("address", c.address),),
                metadata={"system": s.name, "family": fam.name, "field": fld.name},
            )
            for s, fam, fld, c in self.iter_channels()
        ]
        return ChannelDatabase(schema, records, name=self.name)

    # -- (de)serialisation --------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "systems": [
                {
                    "name": s.name,
                    "description": s.description,
                    "families": [
                        {
                            "name": fam.name,
                            "description": fam.description,
                            "devices": [{"index": i, "name": n} for i, n in fam.devices],
                            "fields": [
                                {
                                    "name": fld.name,
                                    "description": fld.description,
                                    "channels": [{"address": c.address, "index": c.device_index} for c in fld.channels],
                                }
                                for fld in fam.fields
                            ],
                        }
                        for fam in s.families
                    ],
                }
                for s in self.systems
            ],
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "MmlTree":
        try:
            systems = []
            for s in doc["systems"]:
                families = []
                for fam in s.get("families", []):
                    fields = tuple(
                        MmlField(fld["name"], fld.get("description", ""),
                                 tuple(MmlChannel(c["address"], int(c.get("index", 0))) for c in fld.get("channels", [])))
                        for fld in fam.get("fields", [])
                    )
                    devices = tuple((int(d["index"]), str(d.get("name", d["index"]))) for d in fam.get("devices", []))
                    if not devices:
                        idx = sorted({c.device_index for f in fields for c in f.channels})
                        devices = tuple((i, str(i)) for i in idx)
                    families.append(MmlFamily(fam["name"], fam.get("description", ""), fields, devices))
                systems.append(MmlSystem(s["name"], s.get("description", ""), tuple(families)))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed middle-layer tree: {exc!r}") from exc
        return cls(systems, str(doc.get("name", "")))


def load_tree(document: str | Mapping[str, Any]) -> MmlTree:
    return MmlTree.from_dict(parse_document(document))


def load_tree_file(path: str) -> MmlTree:
    with open(path, encoding="utf-8") as fh:
        return load_tree(fh.read())


def dump_tree(tree: MmlTree) -> str:
    return yaml.safe_dump(tree.to_dict(), sort_keys=False, width=120)


# -- the seven tools -----------------------------------------------------------

def _split_path(path: str | Sequence[str]) -> list[str]:
    parts = path.split("/") if isinstance(path, str) else list(path)
    parts = [p for p in parts if p]
    if len(parts) > 3:
        raise ValueError(f"path {path!r} is deeper than system/family/field")
    return parts


class MmlTools:
    """Read-only views over one tree. Every result is sorted."""

    def __init__(self, tree: MmlTree):
        self.tree = tree

    def list_systems(self) -> list[dict[str, str]]:
        return [{"name": s.name, "description": s.description} for s in sorted(self.tree.systems, key=lambda s: s.name)]

    def list_families(self, system: str) -> list[dict[str, Any]]:
        fams = sorted(self.tree.system(system).families, key=lambda f: f.name)
        return [{"name": f.name, "description": f.description, "devices": len(f.devices)} for f in fams]

    def list_fields(self, system: str, family: str) -> list[dict[str, str]]:
        fields = sorted(self.tree.family(system, family).fields, key=lambda f: f.name)
        return [{"name": f.name, "description": f.description} for f in fields]

    def get_channels(self, system: str, family: str, field: str, filter: Any = None) -> list[str]:
        """Channel addresses in device order.

        ``filter`` narrows the result: a string keeps addresses containing
        it, an integer or list of integers keeps those device indices.
        """
        channels = sorted(self.tree.field(system, family, field).channels, key=lambda c: (c.device_index, c.address))
        if filter is None or filter == "" or filter == []:
            return [c.address for c in channels]
        if isinstance(filter, str):
            return [c.address for c in channels if filter in c.address]
        wanted = {int(filter)} if isinstance(filter, int) else {int(i) for i in filter}
        return [c.address for c in channels if c.device_index in wanted]

    def get_indices(self, system: str, family: str, selector: Any = None) -> list[dict[str, Any]]:
        """Device ordering indices of a family, optionally narrowed.

        ``selector`` may be None/"all", a substring of the device label, or
        a list of indices.
        """
        devices = sorted(self.tree.family(system, family).devices)
        if selector is None or selector == "all" or selector == []:
            kept = devices
        elif isinstance(selector, str):
            kept = [d for d in devices if selector in d[1]]
        else:
            wanted = {int(selector)} if isinstance(selector, int) else {int(i) for i in selector}
            kept = [d for d in devices if d[0] in wanted]
        return [{"index": i, "name": n} for i, n in kept]

    def describe(self, path: str | Sequence[str]) -> dict[str, Any]:
        parts = _split_path(path)
        if not parts:
            return {"kind": "tree", "name": self.tree.name, "description": "middle-layer tree",
                    "children": len(self.tree.systems)}
        if len(parts) == 1:
            s = self.tree.system(parts[0])
            return {"kind": "system", "name": s.name, "description": s.description, "children": len(s.families)}
        if len(parts) == 2:
            f = self.tree.family(*parts)
            return {"kind": "family", "name": f.name, "description": f.description, "children": len(f.fields)}
        fld = self.tree.field(*parts)
        return {"kind": "field", "name": fld.name, "description": fld.description, "children": len(fld.channels)}

    def count_channels(self, path: str | Sequence[str] = "") -> int:
        parts = _split_path(path)
        if not parts:
            return self.tree.channel_count()
        if len(parts) == 1:
            return sum(len(fld.channels) for fam in self.tree.system(parts[0]).families for fld in fam.fields)
        if len(parts) == 2:
            return sum(len(fld.channels) for fld in self.tree.family(*parts).fields)
        return len(self.tree.field(*parts).channels)

    def registry(self) -> ToolRegistry:
        s = {"type": "string"}
        sel = {"anyOf": [{"type": "string"}, {"type": "integer"}, {"type": "array", "items": {"type": "integer"}}]}
        return ToolRegistry([
            Tool("list_systems", "list accelerator systems", self.list_systems),
            Tool("list_families", "list device families in a system", self.list_families, {"system": s}, ("system",)),
            Tool("list_fields", "list fields of a device family", self.list_fields,
                 {"system": s, "family": s}, ("system", "family")),
            Tool("get_channels", "channel names of a field, optionally filtered by substring or device indices",
                 self.get_channels, {"system": s, "family": s, "field": s, "filter": sel}, ("system", "family", "field")),
            Tool("get_indices", "device ordering indices of a family", self.get_indices,
                 {"system": s, "family": s, "selector": sel}, ("system", "family")),
            Tool("describe", "description of a system, family or field path (SYS/FAMILY/FIELD)", self.describe,
                 {"path": s}, ("path",)),
            Tool("count_channels", "number of channels below a path", self.count_channels, {"path": s}, ("path",)),
        ])


TOOL_NAMES = ("list_systems", "list_families", "list_fields", "get_channels", "get_indices", "describe", "count_channels")


# -- domain detection ----------------------------------------------------------

@dataclass(frozen=True)
class KeywordMap:
    systems: Mapping[str, tuple[str, ...]]
    query_types: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.systems:
            raise ValueError("keyword map needs at least one system")

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "KeywordMap":
        return cls(
            {k: tuple(v) for k, v in doc["systems"].items()},
            {k: tuple(v) for k, v in (doc.get("query_types") or {}).items()},
        )

    def to_dict(self) -> dict[str, Any]:
        return {"systems": {k: list(v) for k, v in self.systems.items()},
                "query_types": {k: list(v) for k, v in self.query_types.items()}}


def _match_phrases(query: str, table: Mapping[str, Sequence[str]]) -> list[str]:
    """Tags whose keyword phrases occur in ``query`` at token level.

    A phrase matches when every one of its tokens is present in the query,
    in any order. Longer phrases are matched first and claim their tokens,
    so "booster to storage ring" does not also count as "storage ring".
    """
    pool = Counter(token_list(query))
    phrases = sorted(
        ((Counter(token_list(kw)), tag) for tag, kws in table.items() for kw in kws),
        key=lambda p: -sum(p[0].values()),
    )
    hits: set[str] = set()
    for words, tag in phrases:
        if words and all(pool[w] >= n for w, n in words.items()):
            hits.add(tag)
            pool.subtract(words)
    return [t for t in table if t in hits]


def detect_domains(query: str, keyword_map: KeywordMap) -> list[str]:
    """System tags mentioned in the query; all systems when none is."""
    found = _match_phrases(query, keyword_map.systems)
    return found or list(keyword_map.systems)


def detect_query_types(query: str, keyword_map: KeywordMap) -> list[str]:
    return _match_phrases(query, keyword_map.query_types)


def domain_tags(query: str, keyword_map: KeywordMap, library: Sequence[ExampleEntry]) -> list[Any]:
    """Prompt tags for a sub-query: (system, query type) pairs when both are
    detected and the library has such entries, otherwise the systems."""
    systems = detect_domains(query, keyword_map)
    pairs = [(s, q) for s in systems for q in detect_query_types(query, keyword_map)]
    known = {t for e in library for t in e.tags}
    return pairs if any(p in known for p in pairs) else systems


# -- example library and prompts ----------------------------------------------

@dataclass(frozen=True)
class ExampleEntry:
    tags: tuple[tuple[str, str], ...]
    query: str
    tool_sequence: tuple[tuple[str, Mapping[str, Any]], ...]
    answer: tuple[str, ...]

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "ExampleEntry":
        return cls(
            tuple((t[0], t[1]) for t in doc["tags"]),
            doc["query"],
            tuple((step["tool"], dict(step.get("args") or {})) for step in doc["tools"]),
            tuple(doc["answer"]),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "tags": [list(t) for t in self.tags],
            "query": self.query,
            "tools": [{"tool": t, "args": dict(a)} for t, a in self.tool_sequence],
            "answer": list(self.answer),
        }

    def tag_values(self) -> set[str]:
        return {v for pair in self.tags for v in pair}


def load_library(document: str | Mapping[str, Any] | Sequence[Mapping[str, Any]]) -> list[ExampleEntry]:
    doc = yaml.safe_load(document) if isinstance(document, str) else document
    entries = doc["examples"] if isinstance(doc, Mapping) else doc
    return [ExampleEntry.from_dict(e) for e in entries]


def dump_library(library: Sequence[ExampleEntry]) -> str:
    return yaml.safe_dump({"examples": [e.to_dict() for e in library]}, sort_keys=False, width=120)


def replay(entry: ExampleEntry, tools: MmlTools) -> Any:
    """Run an example's tool sequence; returns the last observation."""
    registry = tools.registry()
    result = None
    for name, args in entry.tool_sequence:
        result = registry.call(name, args)
    return result


def select_examples(library: Sequence[ExampleEntry], tags: Iterable[Any], cap: int = MAX_EXAMPLES) -> list[ExampleEntry]:
    if not library:
        raise ValueError("example library is empty")
    wanted = set(tags)
    if not wanted:
        # generic set: the first example of each system, in library order
        seen: set[str] = set()
        generic = []
        for e in library:
            system = e.tags[0][0] if e.tags else ""
            if system not in seen:
                seen.add(system)
                generic.append(e)
        return generic[:cap]
    # a (system, query type) pair matches that exact entry tag; a bare
    # string matches either half of any entry tag
    hits = [(sum(1 for t in wanted if (t in e.tags if isinstance(t, tuple) else t in e.tag_values())),
             len(e.tag_values()), i, e) for i, e in enumerate(library)]
    hits = [h for h in hits if h[0] > 0]
    # more matched tags first, then narrower entries, then library order
    hits.sort(key=lambda h: (-h[0], h[1], h[2]))
    return [h[3] for h in hits[:cap]]


MML_SYSTEM_PROMPT = """\
You find EPICS channels through the accelerator's middle-layer tree
(systems > device families > fields > channels). You can only act through
the listed tools and must never invent a channel name: every answer has to
come from get_channels. Explore from broad to specific and finish with the
channels that answer the request, or with an empty list if none do."""


def _format_example(e: ExampleEntry, max_answers: int = 3) -> list[str]:
    lines = [f"Request: {e.query}"]
    for tool, args in e.tool_sequence:
        lines.append(f"  {tool}({json.dumps(dict(args), sort_keys=True)})")
    shown = ", ".join(e.answer[:max_answers])
    more = f" ... ({len(e.answer)} total)" if len(e.answer) > max_answers else ""
    lines.append(f"  answer: {shown}{more}")
    return lines


def build_agent_prompt(subquery: str, library: Sequence[ExampleEntry], tags: Iterable[Any]) -> str:
    tags = list(tags)
    examples = select_examples(library, tags)
    shown = ", ".join("/".join(t) if isinstance(t, tuple) else t for t in tags)
    lines = [MML_SYSTEM_PROMPT, "", "Tools: " + ", ".join(TOOL_NAMES), ""]
    lines.append(f"Detected domains: {shown or 'none (generic examples)'}")
    lines.append("")
    lines.append("Examples:")
    for e in examples:
        lines.extend(_format_example(e))
    lines.append("")
    lines.append(f"Request: {subquery}")
    return "\n".join(lines) + "\n"


# -- offline agent ----------------------------------------------------------------

def _pick(backend: SelectorBackend, query: str, items: Sequence[Mapping[str, Any]], what: str,
          min_score: float | None = 0.0) -> str | None:
    options = [Option(str(it["name"]), str(it["name"]), str(it.get("description", ""))) for it in items]
    if not options:
        return None
    req = ChoiceRequest(f"Choose the {what} the request refers to.", options, allow_abstain=True,
                        query=query, min_score=min_score)
    resp = choose(req, backend)
    return None if resp.abstained else resp.selected[0]


def oracle_script(backend: SelectorBackend, systems: Sequence[str]):
    def script(query: str) -> Generator[Action, Any, None]:
        listing = yield Action("list_systems", {}, "Start from the systems.")
        candidates = [s for s in listing if s["name"] in systems] or listing
        if len(candidates) == 1:
            system = candidates[0]["name"]
        else:
            system = _pick(backend, query, candidates, "accelerator system")
        if system is None:
            yield Action(FINISH, {"channels": []}, "No system fits.")
            return
        families = yield Action("list_families", {"system": system}, f"Families in {system}.")
        family = _pick(backend, query, families, "device family")
        if family is None:
            yield Action(FINISH, {"channels": []}, "No family fits.")
            return
        fields = yield Action("list_fields", {"system": system, "family": family}, f"Fields of {family}.")
        fld = fields[0]["name"] if len(fields) == 1 else _pick(backend, query, fields, "field")
        if fld is None:
            yield Action(FINISH, {"channels": []}, "No field fits.")
            return
        devices = yield Action("get_indices", {"system": system, "family": family}, "Is a single element meant?")
        chosen = None
        if len(devices) > 1:
            # a request that names no element index matches none and means all of them
            opts = [Option(str(d["index"]), str(d["index"])) for d in devices]
            req = ChoiceRequest("Choose the element index the request names, if any.",
                                opts, allow_abstain=True, query=query, min_score=0.0)
            resp = choose(req, backend)
            if not resp.abstained:
                chosen = [int(resp.selected[0])]
        args: dict[str, Any] = {"system": system, "family": family, "field": fld}
        if chosen:
            args["filter"] = chosen
        channels = yield Action("get_channels", args, "Fetch the channels.")
        yield Action(FINISH, {"channels": list(channels)}, "Done.")

    return script


def find_middlelayer(
    query: str,
    tree: MmlTree,
    backend: SelectorBackend,
    *,
    library: Sequence[ExampleEntry] | None = None,
    keyword_map: KeywordMap | None = None,
    split: bool = True,
    max_iterations: int = MML_MAX_ITERATIONS,
) -> FinderResult:
    if keyword_map is None:
        keyword_map = default_keyword_map()
    if library is None:
        library = default_library(tree)
    tools = MmlTools(tree)
    registry = tools.registry()
    known = {c.address for _, _, _, c in tree.iter_channels()}
    start = backend.calls_used
    subqueries = decompose(query, backend) if split else [query]

    def run(sq: str) -> SubResult:
        systems = detect_domains(sq, keyword_map)
        tags = domain_tags(sq, keyword_map, library)
        prompt = build_agent_prompt(sq, library, tags)
        if backend.kind == "oracle":
            policy = ScriptedPolicy(oracle_script(backend, systems))
        else:
            policy = LLMPolicy(backend, registry, prompt)
        before = backend.calls_used
        try:
            outcome = run_loop(sq, registry, policy, max_iterations)
        except IterationLimitExceeded as exc:
            steps: list[AgentStep] = getattr(exc, "steps", [])
            return SubResult(sq, [], True, backend.calls_used - before, steps, "IterationLimitExceeded")
        valid = [c for c in dict.fromkeys(outcome.channels) if c in known]
        return SubResult(sq, valid, not valid, backend.calls_used - before, outcome.steps)

    return merge(query, parallel_map(run, subqueries), backend.calls_used - start, "mml")


# -- synthetic six-system tree ---------------------------------------------------

_MAGNET_FIELDS = (("Monitor", "magnet current readback"), ("Setpoint", "magnet current setpoint"))
_BPM_FIELDS = (("X", "horizontal beam position"), ("Y", "vertical beam position"))
_SCREEN_FIELDS = (("In", "screen insertion state"), ("Image", "screen camera image"))

# (system, description, sectors, [(family, description, per sector, fields, query type)])
_MML_LAYOUT = [
    ("SR", "storage ring", 12, [
        ("BPM", "beam position monitors", 4, _BPM_FIELDS + (("Sum", "button sum signal"),), "beam-position"),
        ("QF", "focusing quadrupole magnets", 2, _MAGNET_FIELDS, "magnet"),
        ("QD", "defocusing quadrupole magnets", 2, _MAGNET_FIELDS, "magnet"),
        ("HCM", "horizontal corrector magnets", 4, _MAGNET_FIELDS, "magnet"),
        ("VCM", "vertical corrector magnets", 4, _MAGNET_FIELDS, "magnet"),
        ("BEND", "dipole bending magnets", 3, _MAGNET_FIELDS, "magnet"),
        ("SF", "focusing sextupole magnets", 2, _MAGNET_FIELDS, "magnet"),
        ("SD", "defocusing sextupole magnets", 2, _MAGNET_FIELDS, "magnet"),
        ("RF", "radio frequency cavity system", 0, (("Frequency", "master oscillator frequency"),
                                                     ("Voltage", "total cavity voltage")), "rf"),
        ("DCCT", "stored beam current transformer", 0, (("Current", "stored beam current"),
                                                         ("Lifetime", "beam lifetime estimate")), "current"),
        ("TUNE", "betatron tune measurement", 0, (("X", "horizontal betatron tune"), ("Y", "vertical betatron tune")), "beam-position"),
    ]),
    ("BR", "booster ring", 4, [
        ("BPM", "beam position monitors", 2, _BPM_FIELDS, "beam-position"),
        ("QF", "focusing quadrupole magnets", 0, _MAGNET_FIELDS, "magnet"),
        ("QD", "defocusing quadrupole magnets", 0, _MAGNET_FIELDS, "magnet"),
        ("BEND", "dipole bending magnets", 0, _MAGNET_FIELDS, "magnet"),
        ("HCM", "horizontal corrector magnets", 2, _MAGNET_FIELDS, "magnet"),
        ("VCM", "vertical corrector magnets", 2, _MAGNET_FIELDS, "magnet"),
        ("RF", "radio frequency cavity", 0, (("Voltage", "cavity voltage"), ("Phase", "cavity phase")), "rf"),
    ]),
    ("BTS", "booster to storage ring transfer line", 1, [
        ("BPM", "beam position monitors", 6, _BPM_FIELDS, "beam-position"),
        ("Q", "quadrupole magnets", 6, _MAGNET_FIELDS, "magnet"),
        ("HCM", "horizontal corrector magnets", 4, _MAGNET_FIELDS, "magnet"),
        ("VCM", "vertical corrector magnets", 4, _MAGNET_FIELDS, "magnet"),
        ("BEND", "dipole bending magnets", 4, _MAGNET_FIELDS, "magnet"),
        ("TV", "fluorescent screen monitors", 3, _SCREEN_FIELDS, "diagnostics"),
    ]),
    ("LTB", "linac to booster transfer line", 1, [
        ("BPM", "beam position monitors", 4, _BPM_FIELDS, "beam-position"),
        ("Q", "quadrupole magnets", 8, _MAGNET_FIELDS, "magnet"),
        ("HCM", "horizontal corrector magnets", 3, _MAGNET_FIELDS, "magnet"),
        ("VCM", "vertical corrector magnets", 3, _MAGNET_FIELDS, "magnet"),
        ("TV", "fluorescent screen monitors", 4, _SCREEN_FIELDS, "diagnostics"),
        ("ICT", "integrating charge transformers", 2, (("Charge", "bunch charge"),), "current"),
    ]),
    ("GTL", "gun to linac injector line", 1, [
        ("GUN", "thermionic electron gun", 0, (("Bias", "grid bias voltage"), ("Heater", "cathode heater current")), "rf"),
        ("SOL", "focusing solenoid magnets", 4, _MAGNET_FIELDS, "magnet"),
        ("HCM", "horizontal corrector magnets", 2, _MAGNET_FIELDS, "magnet"),
        ("VCM", "vertical corrector magnets", 2, _MAGNET_FIELDS, "magnet"),
        ("ICT", "integrating charge transformers", 1, (("Charge", "bunch charge"),), "current"),
    ]),
    ("LN", "linac", 1, [
        ("KLY", "klystron stations", 2, (("Amplitude", "klystron drive amplitude"), ("Phase", "klystron drive phase")), "rf"),
        ("Q", "quadrupole magnets", 4, _MAGNET_FIELDS, "magnet"),
        ("HCM", "horizontal corrector magnets", 2, _MAGNET_FIELDS, "magnet"),
        ("VCM", "vertical corrector magnets", 2, _MAGNET_FIELDS, "magnet"),
    ]),
]

# magnet readbacks/setpoints use the old analog monitor/control suffixes
_SUFFIX = {"Monitor": "AM", "Setpoint": "AC"}


def _address(system: str, sector: int, family: str, k: int, fld: str) -> str:
    """Heterogeneous legacy-style names, one convention per system."""
    tail = _SUFFIX.get(fld)
    if system == "SR":
        if tail:
            return f"SR{sector:02d}C___{family}{k}___{tail}00"
        if family == "BPM":
            return f"SR{sector:02d}C:BPM{k}:SA:{fld.upper()}"
        return f"SR:{family}:{fld.upper()}"
    if system == "BR":
        if tail:
            return f"BR{sector}_____{family}{k}_{tail}00" if k else f"BR1_____{family}PS__{tail}00"
        if family == "BPM":
            return f"BR{sector}:BPM{k}:{fld}"
        return f"BR:{family}:{fld.lower()}"
    if system == "LN":
        if family == "KLY":
            return f"li:kly{k}:{fld.lower()}"
        return f"LN______{family}{k}__{tail}01"
    if system == "GTL":
        if family == "GUN":
            return f"cmm:gun_{fld.lower()}"
        if family == "ICT":
            return f"GTL_____ICT{k}___charge"
        return f"GTL_____{family}{k}___{tail}00"
    # transfer lines
    if tail:
        return f"{system}_____{family}{k}__{tail}00"
    if family == "BPM":
        return f"{system}:BPM{k}:{fld.lower()}"
    return f"{system}_____{family}{k}___{fld.lower()}"


def synthetic_tree() -> MmlTree:
    systems = []
    for sname, sdesc, n_sectors, families in _MML_LAYOUT:
        fams = []
        for fname, fdesc, per_sector, fields, _ in families:
            if per_sector == 0:
                # one logical device, or (booster ring magnets) one string supply
                devices = [(1, "[1, 1]", 1, 0)]
            else:
                devices = []
                for sec in range(1, n_sectors + 1):
                    for k in range(1, per_sector + 1):
                        devices.append((len(devices) + 1, f"[{sec}, {k}]", sec, k))
            flds = tuple(
                MmlField(fld, fdesc_, tuple(MmlChannel(_address(sname, sec, fname, k, fld), idx)
                                            for idx, _, sec, k in devices))
                for fld, fdesc_ in fields
            )
            fams.append(MmlFamily(fname, fdesc, flds, tuple((idx, label) for idx, label, _, _ in devices)))
        systems.append(MmlSystem(sname, sdesc, tuple(fams)))
    return MmlTree(systems, "mml-synthetic")


def family_query_types() -> dict[tuple[str, str], str]:
    return {(s, f): qt for s, _, _, fams in _MML_LAYOUT for f, _, _, _, qt in fams}


def default_keyword_map() -> KeywordMap:
    """The keyword map shipped with the synthetic tree."""
    from importlib import resources

    text = resources.files("chanfind").joinpath("data/mml_keywords.yaml").read_text(encoding="utf-8")
    return KeywordMap.from_dict(yaml.safe_load(text))


def _system_phrase(tree: MmlTree, system: str) -> str:
    return tree.system(system).description


def default_library(tree: MmlTree | None = None) -> list[ExampleEntry]:
    """Worked examples for every system: one field-wide request and one
    single-element request per family, tagged with the family's query type."""
    tree = tree or synthetic_tree()
    qtypes = family_query_types()
    tools = MmlTools(tree)
    entries = []
    for s in tree.systems:
        for fam in s.families:
            qt = qtypes.get((s.name, fam.name), "general")
            fld = fam.fields[0]
            base = [("list_systems", {}), ("list_families", {"system": s.name}),
                    ("list_fields", {"system": s.name, "family": fam.name})]
            q = f"all {fld.description} values of the {s.description} {fam.description}"
            args = {"system": s.name, "family": fam.name, "field": fld.name}
            entries.append(ExampleEntry(((s.name, qt),), q, tuple(base + [("get_channels", args)]),
                                        tuple(tools.get_channels(**args))))
            if len(fam.devices) > 1:
                idx = fam.devices[-1][0]
                q = f"{fld.description} of {fam.description} element {idx} in the {s.description}"
                args_i = {**args, "filter": [idx]}
                seq = base + [("get_indices", {"system": s.name, "family": fam.name}), ("get_channels", args_i)]
                entries.append(ExampleEntry(((s.name, qt),), q, tuple(seq), tuple(tools.get_channels(**args_i))))
    return entries
