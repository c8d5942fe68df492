"""Channel databases: hierarchy schema, tree expansion, address assembly.

A database document has three required keys::

    schema:
      levels: [{name: system}, {name: subsystem}, {name: suffix, optional: true}]
      pattern: "{system}-{subsystem}.{suffix}"
    suffixes: {SP: Setpoint, RB: Readback}
    tree:
      - level: system
        value: VAC
        description: Vacuum system
        children: [...]

and optional ``name`` and ``glossary`` keys. Nodes may carry an ``expand``
block (``range`` or ``list``) that replicates the node, and its subtree, once
per generated instance.
"""
from __future__ import annotations

import itertools
import re
import string
from dataclasses import dataclass, field, replace
from enum import Enum
from types import MappingProxyType
from typing import Any, Iterable, Iterator, Mapping, Sequence

import yaml

from .errors import (
    DuplicateAddress,
    EmptyList,
    MissingLevel,
    ParseError,
    RangeError,
    SchemaError,
    UnknownPrefix,
)

Path = tuple[tuple[str, str], ...]


class SuffixRole(str, Enum):
    SETPOINT = "Setpoint"
    READBACK = "Readback"
    COMMAND = "Command"
    STATUS = "Status"
    NONE = "None"


_ROLE_NAMES = {r.value.lower(): r for r in SuffixRole}


@dataclass(frozen=True)
class LevelDef:
    name: str
    ordinal: int
    optional: bool = False
    separator_before: str = ""


@dataclass(frozen=True)
class ChannelRecord:
    address: str
    description: str
    path: Path = ()
    name: str | None = None
    suffix_role: SuffixRole = SuffixRole.NONE
    metadata: Mapping[str, str] = field(default_factory=dict, compare=False)

    def value(self, level: str) -> str | None:
        for lvl, val in self.path:
            if lvl == level:
                return val
        return None


class HierarchySchema:
    """Ordered level definitions plus the naming-pattern template."""

    def __init__(
        self,
        levels: Sequence[LevelDef],
        pattern: str,
        suffix_vocabulary: Mapping[str, SuffixRole] | None = None,
        tail: str = "",
    ):
        self.levels = tuple(levels)
        self.pattern = pattern
        self.tail = tail
        self.suffix_vocabulary = MappingProxyType(dict(suffix_vocabulary or {}))
        self._index = {lv.name: lv for lv in self.levels}
        if len(self._index) != len(self.levels):
            raise SchemaError("duplicate level names")
        for i, lv in enumerate(self.levels):
            if lv.ordinal != i:
                raise SchemaError(f"level {lv.name!r} has ordinal {lv.ordinal}, expected {i}")
        seps = {c for lv in self.levels for c in lv.separator_before} | set(tail)
        self._value_re = "[^" + re.escape("".join(sorted(seps))) + "]+" if seps else ".+"

    @classmethod
    def from_config(cls, schema: Mapping[str, Any], suffixes: Mapping[str, str] | None = None) -> "HierarchySchema":
        try:
            level_docs = list(schema["levels"])
            pattern = str(schema["pattern"])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"schema needs 'levels' and 'pattern': {exc}") from None
        names = []
        optional = {}
        for doc in level_docs:
            if isinstance(doc, str):
                doc = {"name": doc}
            names.append(str(doc["name"]))
            optional[names[-1]] = bool(doc.get("optional", False))

        try:
            parts = list(string.Formatter().parse(pattern))
        except ValueError as exc:
            raise SchemaError(f"bad pattern {pattern!r}: {exc}") from None
        placeholders = [p for p in parts if p[1] is not None]
        if len(placeholders) != len(names):
            raise SchemaError(
                f"pattern has {len(placeholders)} placeholders but schema declares {len(names)} levels"
            )
        levels = []
        tail = ""
        for i, (literal, fname, _, _) in enumerate(parts):
            if fname is None:
                tail = literal
                continue
            if fname.isdigit():
                idx = int(fname)
            elif fname in names:
                idx = names.index(fname)
            else:
                raise SchemaError(f"placeholder {{{fname}}} names no level")
            if idx != len(levels):
                raise SchemaError("placeholders must appear in level order")
            levels.append(LevelDef(names[idx], idx, optional[names[idx]], literal))

        roles = {}
        for token, role in (suffixes or {}).items():
            try:
                roles[str(token)] = _ROLE_NAMES[str(role).lower()]
            except KeyError:
                raise SchemaError(f"unknown suffix role {role!r}") from None
        return cls(levels, pattern, roles, tail)

    @property
    def level_names(self) -> tuple[str, ...]:
        return tuple(lv.name for lv in self.levels)

    def level(self, name: str) -> LevelDef:
        try:
            return self._index[name]
        except KeyError:
            raise SchemaError(f"unknown level {name!r}") from None

    def assemble(self, path: Iterable[tuple[str, str]] | Mapping[str, str]) -> str:
        return assemble_address(path, self)

    def parse(self, address: str, known: Mapping[tuple[str, str], Any] | None = None) -> Path:
        return parse_address(address, self, known)

    def role_of(self, path: Path) -> SuffixRole:
        if path and path[-1][0] == self.levels[-1].name:
            return self.suffix_vocabulary.get(path[-1][1], SuffixRole.NONE)
        return SuffixRole.NONE

    def __repr__(self) -> str:
        return f"HierarchySchema({self.pattern!r})"


def assemble_address(path: Iterable[tuple[str, str]] | Mapping[str, str], schema: HierarchySchema) -> str:
    """Substitute path values into the schema pattern.

    Optional levels missing from ``path`` are dropped together with the
    separator that precedes them.
    """
    values = dict(path.items() if isinstance(path, Mapping) else path)
    for name in values:
        schema.level(name)
    out: list[str] = []
    for lv in schema.levels:
        v = values.get(lv.name)
        if not v:
            if not lv.optional:
                raise MissingLevel(f"required level {lv.name!r} absent from path")
            continue
        if out or lv.ordinal == 0:
            out.append(lv.separator_before)
        out.append(v)
    out.append(schema.tail)
    return "".join(out)


def parse_address(
    address: str,
    schema: HierarchySchema,
    known: Mapping[tuple[str, str], Any] | None = None,
) -> Path:
    """Inverse of :func:`assemble_address`.

    When several level subsets fit the address, ``known`` (a mapping keyed by
    ``(level, value)``, e.g. ``ChannelDatabase.by_level``) picks the one whose
    values all exist; remaining ties prefer the parse with the most levels.
    """
    optional = [lv for lv in schema.levels if lv.optional]
    candidates: list[Path] = []
    for r in range(len(optional), -1, -1):
        for absent in itertools.combinations(optional, r):
            absent_names = {lv.name for lv in absent}
            present = [lv for lv in schema.levels if lv.name not in absent_names]
            if not present:
                continue
            rx = []
            for i, lv in enumerate(present):
                if i > 0 or lv.ordinal == 0:
                    rx.append(re.escape(lv.separator_before))
                rx.append(f"({schema._value_re})")
            rx.append(re.escape(schema.tail))
            m = re.fullmatch("".join(rx), address)
            if m:
                candidates.append(tuple((lv.name, v) for lv, v in zip(present, m.groups())))
    if not candidates:
        raise ParseError(f"address {address!r} does not match pattern {schema.pattern!r}")
    if known is not None:
        fitting = [c for c in candidates if all(kv in known for kv in c)]
        if fitting:
            candidates = fitting
    candidates.sort(key=len, reverse=True)
    return candidates[0]


@dataclass(frozen=True)
class ExpansionSpec:
    kind: str  # "list" | "range"
    items: tuple[tuple[str, str | None], ...] = ()
    prefix: str = ""
    lo: int = 0
    hi: int = 0
    pad_width: int = 0
    suffix: str = ""

    def __post_init__(self):
        if self.kind == "range" and self.lo > self.hi:
            raise RangeError(f"range lo={self.lo} > hi={self.hi}")
        if self.kind == "list" and not self.items:
            raise EmptyList("list expansion needs at least one item")
        if self.kind not in ("list", "range"):
            raise ParseError(f"unknown expansion kind {self.kind!r}")

    def __len__(self) -> int:
        return len(self.items) if self.kind == "list" else self.hi - self.lo + 1

    def instances(self) -> list[tuple[str, str | None, int]]:
        """(value, item description or None, 1-based index)"""
        if self.kind == "list":
            return [(v, d, i + 1) for i, (v, d) in enumerate(self.items)]
        return [
            (f"{self.prefix}{str(n).zfill(self.pad_width)}{self.suffix}", None, n)
            for n in range(self.lo, self.hi + 1)
        ]

    @classmethod
    def from_config(cls, doc: Mapping[str, Any]) -> "ExpansionSpec":
        if "range" in doc:
            r = doc["range"]
            return cls(
                "range",
                prefix=str(r.get("prefix", "")),
                lo=int(r["lo"]),
                hi=int(r["hi"]),
                pad_width=int(r.get("pad", r.get("pad_width", 0))),
                suffix=str(r.get("suffix", "")),
            )
        if "list" in doc:
            items = []
            for it in doc["list"] or []:
                if isinstance(it, Mapping):
                    items.append((str(it["value"]), it.get("description")))
                else:
                    items.append((str(it), None))
            return cls("list", items=tuple(items))
        raise ParseError(f"expansion needs 'range' or 'list': {dict(doc)!r}")


@dataclass
class NodeSpec:
    level: str
    value: str
    description: str
    children: list["NodeSpec"] = field(default_factory=list)
    expansion: ExpansionSpec | None = None
    terminal: bool = False
    name: str | None = None
    metadata: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_config(cls, doc: Mapping[str, Any]) -> "NodeSpec":
        if not isinstance(doc, Mapping):
            raise ParseError(f"tree node must be a mapping, got {doc!r}")
        try:
            level = str(doc["level"])
        except KeyError:
            raise ParseError(f"tree node without 'level': {dict(doc)!r}") from None
        expansion = ExpansionSpec.from_config(doc["expand"]) if doc.get("expand") else None
        value = doc.get("value")
        if value is None and expansion is None:
            raise ParseError(f"tree node at level {level!r} has neither value nor expand")
        desc = doc.get("description")
        if not desc:
            raise ParseError(f"node {value!r} at level {level!r} has no description")
        return cls(
            level=level,
            value=str(value) if value is not None else expansion.prefix,
            description=str(desc),
            children=[cls.from_config(c) for c in doc.get("children") or []],
            expansion=expansion,
            terminal=bool(doc.get("terminal", False)),
            name=doc.get("name"),
            metadata={str(k): str(v) for k, v in (doc.get("metadata") or {}).items()},
        )


@dataclass
class TreeNode:
    """A materialised tree node: expansions have been replaced by instances."""

    level: str
    value: str
    description: str
    path: Path
    children: tuple["TreeNode", ...] = ()
    record: ChannelRecord | None = None
    count: int = 0

    @property
    def is_leaf(self) -> bool:
        return not self.children


def _fill(template: str | None, value: str, index: int) -> str | None:
    if template is None:
        return None
    return template.replace("{value}", value).replace("{index}", str(index))


def _instances(node: NodeSpec) -> list[tuple[str, str, str | None]]:
    """(value, description, name) for each copy of ``node``."""
    if node.expansion is None:
        return [(node.value, node.description, node.name)]
    out = []
    for value, item_desc, idx in node.expansion.instances():
        if item_desc:
            desc = item_desc
        elif "{value}" in node.description or "{index}" in node.description:
            desc = _fill(node.description, value, idx)
        else:
            desc = f"{node.description} {value}"
        out.append((value, desc, _fill(node.name, value, idx)))
    return out


def expand(
    node: NodeSpec,
    schema: HierarchySchema,
    prefix_path: Path = (),
    prefix_descriptions: tuple[str, ...] = (),
    metadata: Mapping[str, str] | None = None,
) -> list[ChannelRecord]:
    """All channel records under ``node``, depth-first in document order."""
    records: list[ChannelRecord] = []
    for tn in _materialize(node, schema, prefix_path, prefix_descriptions, dict(metadata or {})):
        records.extend(_records_of(tn))
    return records


def _records_of(tn: TreeNode) -> Iterator[ChannelRecord]:
    if tn.record is not None:
        yield tn.record
    for c in tn.children:
        yield from _records_of(c)


def _materialize(
    node: NodeSpec,
    schema: HierarchySchema,
    prefix_path: Path,
    prefix_descriptions: tuple[str, ...],
    metadata: dict[str, str],
) -> list[TreeNode]:
    lv = schema.level(node.level)
    if prefix_path and schema.level(prefix_path[-1][0]).ordinal >= lv.ordinal:
        raise SchemaError(f"level {node.level!r} cannot follow {prefix_path[-1][0]!r}")
    out = []
    for value, desc, name in _instances(node):
        path = prefix_path + ((node.level, value),)
        descs = prefix_descriptions + (desc,)
        meta = {**metadata, **node.metadata}
        children: list[TreeNode] = []
        for child in node.children:
            children.extend(_materialize(child, schema, path, descs, meta))
        record = None
        if node.terminal or not node.children:
            record = ChannelRecord(
                address=assemble_address(path, schema),
                description=" > ".join(descs),
                path=path,
                name=name,
                suffix_role=schema.role_of(path),
                metadata=MappingProxyType(meta),
            )
        count = (record is not None) + sum(c.count for c in children)
        out.append(TreeNode(node.level, value, desc, path, tuple(children), record, count))
    return out


class ChannelDatabase:
    """Immutable, indexed collection of channel records."""

    def __init__(
        self,
        schema: HierarchySchema,
        records: Sequence[ChannelRecord],
        roots: Sequence[TreeNode] = (),
        name: str = "",
        glossary: Mapping[str, str] | None = None,
    ):
        self.schema = schema
        self.records = tuple(records)
        self.roots = tuple(roots)
        self.name = name
        self.glossary = MappingProxyType(dict(glossary or {}))
        by_address: dict[str, ChannelRecord] = {}
        by_level: dict[tuple[str, str], list[ChannelRecord]] = {}
        for r in self.records:
            if r.address in by_address:
                raise DuplicateAddress(f"address {r.address!r} generated twice")
            by_address[r.address] = r
            for kv in r.path:
                by_level.setdefault(kv, []).append(r)
        self.by_address = MappingProxyType(by_address)
        self.by_level = MappingProxyType({k: tuple(v) for k, v in by_level.items()})
        self._by_name = {r.name: r for r in self.records if r.name}

    @classmethod
    def from_records(cls, records: Iterable[ChannelRecord], schema: HierarchySchema | None = None, name: str = "") -> "ChannelDatabase":
        if schema is None:
            schema = HierarchySchema([LevelDef("address", 0)], "{address}")
        return cls(schema, list(records), name=name)

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, address: object) -> bool:
        return address in self.by_address

    def __iter__(self) -> Iterator[ChannelRecord]:
        return iter(self.records)

    def get(self, address: str) -> ChannelRecord | None:
        return self.by_address.get(address)

    def by_name(self, name: str) -> ChannelRecord | None:
        return self._by_name.get(name)

    def validate(self, candidates: Iterable[str]) -> tuple[list[str], list[str]]:
        return validate_channels(candidates, self)

    def iter_nodes(self) -> Iterator[TreeNode]:
        stack = list(reversed(self.roots))
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children))

    def subtree(self, prefix: Sequence[str]) -> list[TreeNode]:
        """Nodes reached by following ``prefix`` values from the roots."""
        nodes = list(self.roots)
        for i, value in enumerate(prefix):
            matched = [n for n in nodes if n.value == value]
            if not matched:
                raise UnknownPrefix(f"no node {value!r} under prefix {list(prefix[:i])!r}")
            if i == len(prefix) - 1:
                return matched
            nodes = [c for n in matched for c in n.children]
        return nodes

    def export_flat(self) -> str:
        """One record per line: address TAB name TAB description."""
        lines = []
        for r in self.records:
            lines.append("\t".join([r.address, r.name or "", r.description.replace("\t", " ")]))
        return "\n".join(lines) + ("\n" if lines else "")


def validate_channels(candidates: Iterable[str], db: ChannelDatabase) -> tuple[list[str], list[str]]:
    valid, invalid = [], []
    for c in candidates:
        (valid if c in db.by_address else invalid).append(c)
    return valid, invalid


def parse_document(document: str | Mapping[str, Any]) -> Mapping[str, Any]:
    if isinstance(document, Mapping):
        return document
    try:
        doc = yaml.safe_load(document)
    except yaml.YAMLError as exc:
        raise ParseError(f"malformed database document: {exc}") from None
    if not isinstance(doc, Mapping):
        raise ParseError("database document must be a mapping")
    return doc


def load_database(document: str | Mapping[str, Any]) -> ChannelDatabase:
    """Build a database from YAML/JSON text (or an already-parsed mapping)."""
    doc = parse_document(document)
    for key in ("schema", "tree"):
        if key not in doc:
            raise ParseError(f"database document lacks {key!r}")
    schema = HierarchySchema.from_config(doc["schema"], doc.get("suffixes"))
    specs = [NodeSpec.from_config(n) for n in doc["tree"] or []]
    roots: list[TreeNode] = []
    for spec in specs:
        roots.extend(_materialize(spec, schema, (), (), {}))
    records = [r for root in roots for r in _records_of(root)]
    names = doc.get("names") or {}
    if names:
        # names generated after the fact live beside the tree, keyed by address
        records = [replace(r, name=str(names[r.address])) if r.address in names else r for r in records]
    return ChannelDatabase(
        schema,
        records,
        roots,
        name=str(doc.get("name", "")),
        glossary={str(k).lower(): str(v) for k, v in (doc.get("glossary") or {}).items()},
    )


def load_database_file(path: str) -> ChannelDatabase:
    with open(path, encoding="utf-8") as fh:
        return load_database(fh.read())
