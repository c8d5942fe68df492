"""Ontology-grounded channel finding.

Facts are subject-predicate-object triples. A small core vocabulary says
which device classes exist and how they nest; each facility maps its own
device families and suffix conventions onto that vocabulary. Questions are
answered by a conjunctive graph query, and hierarchy predicates can be
followed transitively with a ``+`` marker, so a query about magnets also
reaches quadrupoles and correctors.

Query subset::

    [PREFIX p: <iri>]*
    SELECT [DISTINCT] (?var+ | *) WHERE { s p o . s p+ o . ... }

``a`` abbreviates ``rdf:type``; literals are double-quoted strings.
"""
from __future__ import annotations

import json
import re
import threading
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, Sequence

from .channeldb import ChannelDatabase, SuffixRole, load_database
from .errors import CycleDetected, NoTemplateMatch, ParseError, QuerySyntaxError, UnknownPredicate, UnmappedFamily
from .results import FinderResult, SubResult
from .selector import ChoiceRequest, Option, SelectorBackend, choose

RDF_TYPE = "rdf:type"
SUBCLASS = "rdfs:subClassOf"
PART_OF = "acc:partOf"
LABEL = "rdfs:label"
HAS_SIGNAL = "acc:hasSignal"
HIERARCHY_PREDICATES = frozenset({SUBCLASS, PART_OF})
CHANNEL_PREFIX = "pv:"

ROLE_PREDICATES = {
    SuffixRole.SETPOINT: "acc:isSetpointOf",
    SuffixRole.READBACK: "acc:isReadbackOf",
    SuffixRole.COMMAND: "acc:isCommandOf",
    SuffixRole.STATUS: "acc:isStatusOf",
    SuffixRole.NONE: "acc:isSignalOf",
}


def is_literal(term: str) -> bool:
    return term.startswith('"')


def literal(text: str) -> str:
    return json.dumps(text)


def literal_value(term: str) -> str:
    return json.loads(term) if is_literal(term) else term


@dataclass(frozen=True, order=True)
class Triple:
    subject: str
    predicate: str
    object: str

    def __post_init__(self):
        for name in ("subject", "predicate", "object"):
            term = getattr(self, name)
            if not isinstance(term, str) or not term.strip():
                raise ValueError(f"triple {name} must be a non-empty term")
        if is_literal(self.subject) or is_literal(self.predicate):
            raise ValueError("literals may only appear in object position")

    def __iter__(self) -> Iterator[str]:
        return iter((self.subject, self.predicate, self.object))

    def line(self) -> str:
        return f"{self.subject} {self.predicate} {self.object} ."


class TripleStore:
    """Immutable set of triples with subject/predicate/object indexes."""

    def __init__(self, triples: Iterable[Triple] = (), prefixes: Mapping[str, str] | None = None):
        self.triples = frozenset(triples)
        self.prefixes = dict(prefixes or {})
        self._by_p: dict[str, set[Triple]] = defaultdict(set)
        self._by_s: dict[str, set[Triple]] = defaultdict(set)
        self._by_o: dict[str, set[Triple]] = defaultdict(set)
        for t in self.triples:
            self._by_p[t.predicate].add(t)
            self._by_s[t.subject].add(t)
            self._by_o[t.object].add(t)
        self._closures: dict[str, frozenset[tuple[str, str]]] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.triples)

    def __contains__(self, t: object) -> bool:
        return t in self.triples

    def __iter__(self) -> Iterator[Triple]:
        return iter(sorted(self.triples))

    @property
    def predicates(self) -> frozenset[str]:
        return frozenset(self._by_p)

    def match(self, s: str | None = None, p: str | None = None, o: str | None = None) -> list[Triple]:
        pools = [ix[k] for ix, k in ((self._by_s, s), (self._by_p, p), (self._by_o, o)) if k is not None]
        if not pools:
            return sorted(self.triples)
        pool = min(pools, key=len)
        return sorted(t for t in pool if (s is None or t.subject == s) and (p is None or t.predicate == p)
                      and (o is None or t.object == o))

    def union(self, triples: Iterable[Triple]) -> "TripleStore":
        return TripleStore(self.triples | frozenset(triples), self.prefixes)

    def closure_pairs(self, predicate: str) -> frozenset[tuple[str, str]]:
        """Reflexive-transitive closure of ``predicate`` over the terms it links."""
        with self._lock:
            cached = self._closures.get(predicate)
        if cached is not None:
            return cached
        pairs = _closure(((t.subject, t.object) for t in self._by_p.get(predicate, ())))
        with self._lock:
            self._closures[predicate] = pairs
        return pairs


def _closure(edges: Iterable[tuple[str, str]]) -> frozenset[tuple[str, str]]:
    succ: dict[str, set[str]] = defaultdict(set)
    nodes: set[str] = set()
    for s, o in edges:
        succ[s].add(o)
        nodes.update((s, o))
    pairs = set()
    for start in nodes:
        seen = {start}
        stack = [start]
        while stack:
            n = stack.pop()
            for m in succ.get(n, ()):
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        pairs.update((start, m) for m in seen)
    return frozenset(pairs)


def _has_cycle(edges: Iterable[tuple[str, str]]) -> bool:
    succ: dict[str, set[str]] = defaultdict(set)
    for s, o in edges:
        if s != o:
            succ[s].add(o)
    state: dict[str, int] = {}

    def visit(n: str) -> bool:
        # iterative DFS would be kinder to deep chains; taxonomies are shallow
        state[n] = 1
        for m in succ.get(n, ()):
            if state.get(m) == 1 or (m not in state and visit(m)):
                return True
        state[n] = 2
        return False

    return any(n not in state and visit(n) for n in list(succ))


def materialize_closure(store: TripleStore, predicate: str = SUBCLASS) -> TripleStore:
    """Store plus every edge of the reflexive-transitive closure of ``predicate``."""
    if predicate not in HIERARCHY_PREDICATES:
        raise ValueError(f"{predicate!r} is not a hierarchy predicate")
    edges = [(t.subject, t.object) for t in store.match(p=predicate)]
    if _has_cycle(edges):
        warnings.warn(CycleDetected(f"cycle in {predicate}; closure collapses it into one class"), stacklevel=2)
    return store.union(Triple(s, predicate, o) for s, o in store.closure_pairs(predicate))


# -- line format -----------------------------------------------------------------

_TERM_RE = re.compile(r'"(?:[^"\\]|\\.)*"|<[^>]*>|[^\s]+')


def load_graph(document: str) -> TripleStore:
    """Parse ``subject predicate object .`` lines (``#`` comments, ``@prefix`` lines)."""
    triples, prefixes = [], {}
    for n, raw in enumerate(document.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        terms = _TERM_RE.findall(line)
        if terms and terms[-1] != "." and terms[-1].endswith(".") and not is_literal(terms[-1]):
            terms[-1:] = [terms[-1][:-1], "."]
        if terms[:1] == ["@prefix"]:
            if len(terms) != 4 or terms[3] != ".":
                raise ParseError(f"line {n}: malformed prefix declaration")
            prefixes[terms[1].rstrip(":")] = terms[2].strip("<>")
            continue
        if len(terms) != 4 or terms[3] != ".":
            raise ParseError(f"line {n}: expected 'subject predicate object .', got {raw!r}")
        s, p, o = terms[:3]
        try:
            triples.append(Triple(s, RDF_TYPE if p == "a" else p, o))
        except ValueError as exc:
            raise ParseError(f"line {n}: {exc}") from exc
    return TripleStore(triples, prefixes)


def load_graph_file(path: str) -> TripleStore:
    with open(path, encoding="utf-8") as fh:
        return load_graph(fh.read())


def dump_graph(store: TripleStore | Iterable[Triple]) -> str:
    prefixes = store.prefixes if isinstance(store, TripleStore) else {}
    lines = [f"@prefix {k}: <{v}> ." for k, v in sorted(prefixes.items())]
    lines.extend(t.line() for t in sorted(store))
    return "\n".join(lines) + "\n"


# -- query language ---------------------------------------------------------------

@dataclass(frozen=True)
class Pattern:
    subject: str
    predicate: str
    object: str
    closure: bool = False

    def terms(self) -> tuple[str, str, str]:
        return (self.subject, self.predicate, self.object)

    def text(self) -> str:
        return f"{self.subject} {self.predicate}{'+' if self.closure else ''} {self.object}"


@dataclass(frozen=True)
class GraphQuery:
    select_vars: tuple[str, ...]
    patterns: tuple[Pattern, ...]
    prefixes: Mapping[str, str] = field(default_factory=dict, compare=False)

    @property
    def closure_flags(self) -> tuple[bool, ...]:
        return tuple(p.closure for p in self.patterns)

    def variables(self) -> list[str]:
        out: list[str] = []
        for p in self.patterns:
            for t in p.terms():
                if is_var(t) and t not in out:
                    out.append(t)
        return out

    def text(self) -> str:
        body = " . ".join(p.text() for p in self.patterns)
        return f"SELECT {' '.join(self.select_vars)} WHERE {{ {body} . }}"


def is_var(term: str) -> bool:
    return term.startswith("?") and len(term) > 1


_QTOKEN_RE = re.compile(r'\s*("(?:[^"\\]|\\.)*"|<[^>]*>|[{}]|[^\s{}]+)')


def _tokenize(text: str) -> list[tuple[str, int]]:
    out, pos = [], 0
    while pos < len(text):
        m = _QTOKEN_RE.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise QuerySyntaxError("unexpected character", pos)
            break
        tok, start = m.group(1), m.start(1)
        pos = m.end()
        # "acc:Magnet." -> "acc:Magnet", "."
        if len(tok) > 1 and tok.endswith(".") and not is_literal(tok) and not tok.startswith("<"):
            out.append((tok[:-1], start))
            out.append((".", start + len(tok) - 1))
        else:
            out.append((tok, start))
    return out


def parse_query(text: str) -> GraphQuery:
    toks = _tokenize(text)
    i = 0

    def peek() -> tuple[str, int]:
        return toks[i] if i < len(toks) else ("", len(text))

    def take(expected: str | None = None) -> tuple[str, int]:
        nonlocal i
        tok, pos = peek()
        if not tok:
            raise QuerySyntaxError(f"unexpected end of query{f', expected {expected!r}' if expected else ''}", pos)
        if expected is not None and tok.upper() != expected:
            raise QuerySyntaxError(f"expected {expected!r}, found {tok!r}", pos)
        i += 1
        return tok, pos

    prefixes: dict[str, str] = {}
    while peek()[0].upper() == "PREFIX":
        take()
        name, pos = take()
        if not name.endswith(":"):
            raise QuerySyntaxError("prefix name must end with ':'", pos)
        iri, pos = take()
        if not (iri.startswith("<") and iri.endswith(">")):
            raise QuerySyntaxError("prefix IRI must be written <...>", pos)
        prefixes[name[:-1]] = iri[1:-1]
    take("SELECT")
    if peek()[0].upper() == "DISTINCT":
        take()  # results are sets anyway
    select: list[str] = []
    star = False
    while peek()[0] and peek()[0].upper() != "WHERE":
        tok, pos = take()
        if tok == "*" and not select:
            star = True
        elif is_var(tok) and not star:
            select.append(tok)
        else:
            raise QuerySyntaxError(f"expected a ?variable, found {tok!r}", pos)
    if not select and not star:
        raise QuerySyntaxError("SELECT needs at least one variable", peek()[1])
    take("WHERE")
    take("{")
    patterns: list[Pattern] = []
    while True:
        tok, pos = peek()
        if tok == "}":
            take()
            break
        if not tok:
            raise QuerySyntaxError("unterminated pattern block, expected '}'", pos)
        s, spos = take()
        p, ppos = take()
        o, opos = take()
        for term, tpos in ((s, spos), (p, ppos), (o, opos)):
            if term in ("{", "}", "."):
                raise QuerySyntaxError(f"expected a term, found {term!r}", tpos)
        closure = False
        if p.endswith("+") and len(p) > 1:
            p, closure = p[:-1], True
        if p == "a":
            p = RDF_TYPE
        if is_literal(s) or is_literal(p):
            raise QuerySyntaxError("literals may only appear in object position", spos if is_literal(s) else ppos)
        if closure and p not in HIERARCHY_PREDICATES:
            raise QuerySyntaxError(f"'+' is only allowed on hierarchy predicates ({', '.join(sorted(HIERARCHY_PREDICATES))})", ppos)
        if closure and is_var(p):
            raise QuerySyntaxError("'+' needs a fixed predicate", ppos)
        patterns.append(Pattern(s, p, o, closure))
        nxt, npos = peek()
        if nxt == ".":
            take()
        elif nxt != "}":
            raise QuerySyntaxError(f"expected '.' or '}}', found {nxt!r}", npos)
    tail, tpos = peek()
    if tail:
        raise QuerySyntaxError(f"unexpected {tail!r} after the pattern block", tpos)
    if not patterns:
        raise QuerySyntaxError("WHERE block has no patterns", len(text))
    q = GraphQuery(tuple(select), tuple(patterns), prefixes)
    if star:
        return GraphQuery(tuple(q.variables()), q.patterns, prefixes)
    known = set(q.variables())
    for v in select:
        if v not in known:
            raise QuerySyntaxError(f"{v} is selected but used in no pattern", text.find(v))
    return q


def _candidates(pat: Pattern, binding: Mapping[str, str], store: TripleStore) -> Iterator[dict[str, str]]:
    s, p, o = (binding.get(t, t) if is_var(t) else t for t in pat.terms())
    if pat.closure:
        for a, b in store.closure_pairs(p):
            if (is_var(s) or a == s) and (is_var(o) or b == o):
                new = {}
                if is_var(s):
                    new[s] = a
                if is_var(o):
                    if o in new and new[o] != b:
                        continue
                    new[o] = b
                yield new
        return
    for t in store.match(None if is_var(s) else s, None if is_var(p) else p, None if is_var(o) else o):
        new: dict[str, str] = {}
        ok = True
        for var, val in ((s, t.subject), (p, t.predicate), (o, t.object)):
            if is_var(var):
                if new.get(var, val) != val:
                    ok = False
                    break
                new[var] = val
        if ok:
            yield new


def _bound_count(pat: Pattern, bound: set[str]) -> int:
    return sum(1 for t in pat.terms() if not is_var(t) or t in bound)


def evaluate(q: GraphQuery, store: TripleStore) -> list[tuple[str, ...]]:
    """All bindings of the selected variables; set semantics, sorted."""
    for pat in q.patterns:
        if not is_var(pat.predicate) and pat.predicate not in store.predicates:
            warnings.warn(UnknownPredicate(f"predicate {pat.predicate!r} does not occur in the graph"), stacklevel=2)
    results: set[tuple[str, ...]] = set()

    def solve(binding: dict[str, str], remaining: list[Pattern]) -> None:
        if not remaining:
            results.add(tuple(binding[v] for v in q.select_vars))
            return
        bound = set(binding)
        # most constrained pattern next
        idx = max(range(len(remaining)), key=lambda k: (_bound_count(remaining[k], bound), -k))
        pat = remaining[idx]
        rest = remaining[:idx] + remaining[idx + 1:]
        for new in _candidates(pat, binding, store):
            solve({**binding, **new}, rest)

    solve({}, list(q.patterns))
    return sorted(results)


def run_query(text: str, store: TripleStore) -> list[tuple[str, ...]]:
    return evaluate(parse_query(text), store)


# -- core ontology and channel mapping ---------------------------------------------

# class -> (parent, label words)
CORE_CLASSES: dict[str, tuple[str | None, str]] = {
    "acc:Device": (None, "device devices equipment"),
    "acc:Magnet": ("acc:Device", "magnet magnets"),
    "acc:Quadrupole": ("acc:Magnet", "quadrupole quadrupoles quad quads"),
    "acc:Dipole": ("acc:Magnet", "dipole dipoles bend bends bending"),
    "acc:Sextupole": ("acc:Magnet", "sextupole sextupoles"),
    "acc:Solenoid": ("acc:Magnet", "solenoid solenoids"),
    "acc:Corrector": ("acc:Magnet", "corrector correctors steering"),
    "acc:HorizontalCorrector": ("acc:Corrector", "horizontal corrector correctors"),
    "acc:VerticalCorrector": ("acc:Corrector", "vertical corrector correctors"),
    "acc:Diagnostic": ("acc:Device", "diagnostic diagnostics instrument instruments"),
    "acc:BPM": ("acc:Diagnostic", "beam position monitor monitors bpm bpms"),
    "acc:CurrentMonitor": ("acc:Diagnostic", "current monitor transformer dcct toroid"),
    "acc:Screen": ("acc:Diagnostic", "screen screens viewer viewers"),
    "acc:BeamLossMonitor": ("acc:Diagnostic", "beam loss monitor monitors blm"),
    "acc:PowerSupply": ("acc:Device", "power supply supplies"),
    "acc:RFDevice": ("acc:Device", "rf radio frequency"),
    "acc:Cavity": ("acc:RFDevice", "cavity cavities"),
    "acc:Klystron": ("acc:RFDevice", "klystron klystrons"),
    "acc:VacuumDevice": ("acc:Device", "vacuum"),
    "acc:Pump": ("acc:VacuumDevice", "pump pumps"),
    "acc:Gauge": ("acc:VacuumDevice", "gauge gauges pressure"),
    "acc:Valve": ("acc:VacuumDevice", "valve valves"),
}

ROLE_LABELS = {
    "acc:isSetpointOf": "setpoint setpoints setting settings set",
    "acc:isReadbackOf": "readback readbacks reading readings read measured",
    "acc:isCommandOf": "command commands trigger",
    "acc:isStatusOf": "status state",
    "acc:isSignalOf": "signal signals channel channels",
}


def core_ontology() -> list[Triple]:
    out = []
    for cls, (parent, label) in CORE_CLASSES.items():
        out.append(Triple(cls, RDF_TYPE, "rdfs:Class"))
        out.append(Triple(cls, LABEL, literal(label)))
        if parent:
            out.append(Triple(cls, SUBCLASS, parent))
    for pred, label in ROLE_LABELS.items():
        out.append(Triple(pred, RDF_TYPE, "acc:SignalRole"))
        out.append(Triple(pred, LABEL, literal(label)))
    out.append(Triple(HAS_SIGNAL, RDF_TYPE, "rdf:Property"))
    return sorted(out)


@dataclass(frozen=True)
class GraphMapping:
    """How one facility's channel database lands in the shared vocabulary.

    ``family_level`` names the hierarchy level whose value is the device
    family; ``device_levels`` are joined into the device identifier.
    ``classes`` maps family -> class; ``roles`` maps suffix role -> role
    predicate (defaults to the core role predicates). ``local_classes``
    declares facility-specific subclasses of core classes.
    """

    namespace: str
    family_level: str
    device_levels: tuple[str, ...]
    classes: Mapping[str, str]
    roles: Mapping[str, str] = field(default_factory=dict)
    local_classes: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "GraphMapping":
        return cls(
            doc["namespace"],
            doc["family_level"],
            tuple(doc["device_levels"]),
            dict(doc["classes"]),
            dict(doc.get("roles") or {}),
            dict(doc.get("local_classes") or {}),
        )

    def role_predicate(self, role: SuffixRole) -> str:
        return self.roles.get(role.value, ROLE_PREDICATES[role])


def channel_term(address: str) -> str:
    return CHANNEL_PREFIX + address


def map_channels_to_graph(db: ChannelDatabase, mapping: GraphMapping, include_core: bool = True) -> list[Triple]:
    """Three triples per record, in record order, after the core ontology:
    ``(device a Class)``, ``(device hasSignal channel)`` and
    ``(channel role-predicate device)``."""
    out = list(core_ontology()) if include_core else []
    out.extend(Triple(local, SUBCLASS, parent) for local, parent in sorted(mapping.local_classes.items()))
    for r in db:
        family = r.value(mapping.family_level)
        if family not in mapping.classes:
            raise UnmappedFamily(f"family {family!r} of {r.address} has no class in the mapping")
        values = [r.value(lv) for lv in mapping.device_levels]
        device = mapping.namespace + "_".join(v for v in values if v)
        chan = channel_term(r.address)
        out.append(Triple(device, RDF_TYPE, mapping.classes[family]))
        out.append(Triple(device, HAS_SIGNAL, chan))
        out.append(Triple(chan, mapping.role_predicate(r.suffix_role), device))
    return out


def build_graph(db: ChannelDatabase, mapping: GraphMapping) -> TripleStore:
    prefixes = {"acc": "urn:acc:", "rdf": "urn:rdf:", "rdfs": "urn:rdfs:", "pv": "urn:pv:",
                mapping.namespace.rstrip(":"): f"urn:{mapping.namespace.rstrip(':')}:"}
    return TripleStore(map_channels_to_graph(db, mapping), prefixes)


# -- natural language to query ----------------------------------------------------

@dataclass(frozen=True)
class QueryTemplate:
    name: str
    description: str
    query: str  # with {class} / {role} slots
    slots: tuple[str, ...]

    def fill(self, **values: str) -> str:
        return self.query.format(**values)


DEFAULT_TEMPLATES = (
    QueryTemplate(
        "role-by-class",
        "list the setting setpoint readback reading pvs channels signals for all devices of a kind",
        "SELECT ?pv WHERE {{ ?dev a ?cls . ?cls rdfs:subClassOf+ {class} . ?pv {role} ?dev . }}",
        ("class", "role"),
    ),
    QueryTemplate(
        "devices-by-class",
        "which devices are there list all devices of a kind",
        "SELECT ?dev WHERE {{ ?dev a ?cls . ?cls rdfs:subClassOf+ {class} . }}",
        ("class",),
    ),
)


def slot_options(store: TripleStore, slot: str) -> list[Option]:
    if slot == "class":
        terms = sorted({t.subject for t in store.match(p=RDF_TYPE, o="rdfs:Class")})
    elif slot == "role":
        terms = sorted({t.subject for t in store.match(p=RDF_TYPE, o="acc:SignalRole")})
    else:
        raise ValueError(f"unknown slot {slot!r}")
    out = []
    for term in terms:
        labels = [literal_value(t.object) for t in store.match(s=term, p=LABEL)]
        out.append(Option(term, term.split(":")[-1], " ".join(labels)))
    return out


def translate_nl(query: str, templates: Sequence[QueryTemplate], backend: SelectorBackend,
                 store: TripleStore | None = None) -> GraphQuery:
    """Pick a template and fill its slots; :class:`NoTemplateMatch` if nothing fits."""
    if not templates:
        raise ValueError("no query templates")
    store = store if store is not None else TripleStore(core_ontology())
    tmpl_opts = [Option(t.name, t.name, t.description) for t in templates]
    resp = choose(ChoiceRequest("Which query template answers the request?", tmpl_opts, query=query), backend)
    if resp.abstained:
        raise NoTemplateMatch(f"no template fits {query!r}")
    template = next(t for t in templates if t.name == resp.selected[0])
    values = {}
    for slot in template.slots:
        opts = slot_options(store, slot)
        if not opts:
            raise NoTemplateMatch(f"the graph offers nothing for the {slot} slot")
        req = ChoiceRequest(f"Fill the {slot} slot of the query.", opts, query=query, min_score=0.0)
        r = choose(req, backend)
        if r.abstained:
            raise NoTemplateMatch(f"nothing in the ontology fits the {slot} slot of {query!r}")
        values[slot] = r.selected[0]
    return parse_query(template.fill(**values))


def channels_of(rows: Iterable[tuple[str, ...]]) -> list[str]:
    out = []
    for row in rows:
        for term in row:
            if term.startswith(CHANNEL_PREFIX):
                out.append(term[len(CHANNEL_PREFIX):])
    return list(dict.fromkeys(out))


def find_ontology(query: str, store: TripleStore, backend: SelectorBackend,
                  templates: Sequence[QueryTemplate] = DEFAULT_TEMPLATES) -> FinderResult:
    start = backend.calls_used
    try:
        gq = translate_nl(query, templates, backend, store)
    except NoTemplateMatch as exc:
        sub = SubResult(query, [], True, backend.calls_used - start, None, str(exc))
        return FinderResult(query, [], [sub], sub.selector_calls, "onto")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnknownPredicate)
        rows = evaluate(gq, store)
    channels = channels_of(rows)
    sub = SubResult(query, channels, not channels, backend.calls_used - start, gq.text())
    return FinderResult(query, channels, [sub], sub.selector_calls, "onto")


# -- two toy facilities sharing the vocabulary ---------------------------------------

def toy_facility_a() -> tuple[ChannelDatabase, GraphMapping]:
    """A short beamline segment with compact family+girder names."""
    def fam(value: str, desc: str, devices: Sequence[str], suffixes: Sequence[tuple[str, str]]):
        return {
            "level": "family", "value": value, "description": desc,
            "children": [{"level": "device", "value": d, "description": f"{desc} {d}",
                          "children": [{"level": "suffix", "value": s, "description": sd} for s, sd in suffixes]}
                         for d in devices],
        }

    magnet = [("S", "setting"), ("M", "measured")]
    doc = {
        "name": "segment-a",
        "schema": {"levels": ["family", "device", "suffix"], "pattern": "{family}{device}.{suffix}"},
        "suffixes": {"S": "Setpoint", "M": "Readback", "XPOS": "Readback", "YPOS": "Readback", "IN": "Command"},
        "tree": [
            fam("MQB", "quadrupole", ["1S01", "1S02", "1S03", "1S04"], magnet),
            fam("MBH", "horizontal corrector", ["1S01", "1S03", "1S05"], magnet),
            fam("MBV", "vertical corrector", ["1S02", "1S04", "1S06"], magnet),
            fam("IPM", "beam position monitor", ["1S01", "1S02", "1S03", "1S04"],
                [("XPOS", "horizontal position"), ("YPOS", "vertical position")]),
            fam("ITV", "viewer", ["1S01", "1S05"], [("IN", "insert")]),
        ],
    }
    mapping = GraphMapping(
        "a:", "family", ("family", "device"),
        {"MQB": "acc:Quadrupole", "MBH": "acc:Corrector", "MBV": "acc:Corrector",
         "IPM": "acc:BPM", "ITV": "acc:Screen"},
    )
    return load_database(doc), mapping


def toy_facility_b() -> tuple[ChannelDatabase, GraphMapping]:
    """A storage-ring arc with sector-prefixed legacy names and local classes."""
    def fam(value: str, desc: str, suffixes: Sequence[tuple[str, str]]):
        return {
            "level": "family", "value": value, "description": desc,
            "children": [{"level": "device", "value": str(k), "description": f"{desc} {k}",
                          "children": [{"level": "suffix", "value": s, "description": sd} for s, sd in suffixes]}
                         for k in (1, 2)],
        }

    magnet = [("AC00", "analog control"), ("AM00", "analog monitor")]
    families = [
        fam("QF", "focusing quadrupole", magnet),
        fam("QD", "defocusing quadrupole", magnet),
        fam("SF", "focusing sextupole", magnet),
        fam("HCM", "horizontal corrector", magnet),
        fam("VCM", "vertical corrector", magnet),
        fam("BPM", "beam position monitor", [("XAM", "horizontal"), ("YAM", "vertical")]),
    ]
    doc = {
        "name": "arc-b",
        "schema": {"levels": ["sector", "family", "device", "suffix"],
                   "pattern": "{sector}C___{family}{device}___{suffix}"},
        "suffixes": {"AC00": "Setpoint", "AM00": "Readback", "XAM": "Readback", "YAM": "Readback"},
        "tree": [{"level": "sector", "value": sec, "description": f"sector {sec[2:]}", "children": families}
                 for sec in ("SR01", "SR02")],
    }
    mapping = GraphMapping(
        "b:", "family", ("sector", "family", "device"),
        {"QF": "b:FocusingQuad", "QD": "b:DefocusingQuad", "SF": "acc:Sextupole",
         "HCM": "acc:HorizontalCorrector", "VCM": "acc:VerticalCorrector", "BPM": "acc:BPM"},
        local_classes={"b:FocusingQuad": "acc:Quadrupole", "b:DefocusingQuad": "acc:Quadrupole"},
    )
    return load_database(doc), mapping


def toy_graphs() -> dict[str, TripleStore]:
    out = {}
    for name, factory in (("a", toy_facility_a), ("b", toy_facility_b)):
        db, mapping = factory()
        out[name] = build_graph(db, mapping)
    return out
