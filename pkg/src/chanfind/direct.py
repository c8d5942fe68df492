"""Direct in-context lookup over a complete channel dictionary.

Three stages: split the request into sub-queries, match each sub-query
against the whole dictionary (names and descriptions only; addresses are
resolved afterwards), and validate the resolved addresses against the
database with a bounded correction loop.
"""
from __future__ import annotations

import logging
from typing import Iterable, Mapping

from .channeldb import ChannelDatabase, ChannelRecord
from .errors import DatabaseTooLarge, EmptyDescription
from .results import FinderResult, SubResult, merge, parallel_map
from .selector import ChoiceRequest, Option, SelectorBackend, choose, decompose, propose_names

log = logging.getLogger(__name__)

DIRECT_LIMIT = 2000
COMFORT_LIMIT = 1000
MAX_CORRECTIONS = 2

FRAMING = (
    "You are a channel finder for an accelerator control system. Match the operator request "
    "to channels in the dictionary below. Only return channels that clearly match; "
    "return nothing rather than a doubtful guess."
)


def dictionary_lines(db: ChannelDatabase) -> list[str]:
    return [f"{r.name}: {r.description}" for r in db]


def build_context(db: ChannelDatabase, glossary: Mapping[str, str] | None = None) -> str:
    parts = [FRAMING]
    if glossary:
        parts.append("Facility terminology:\n" + "\n".join(f"{k}: {v}" for k, v in sorted(glossary.items())))
    parts.append("Channel dictionary:\n" + "\n".join(dictionary_lines(db)))
    return "\n\n".join(parts)


def find_direct(
    query: str,
    db: ChannelDatabase,
    backend: SelectorBackend,
    *,
    split: bool = True,
    abstain: bool = True,
    threshold: float | None = None,
    glossary: Mapping[str, str] | None = None,
    direct_limit: int = DIRECT_LIMIT,
) -> FinderResult:
    if len(db) > direct_limit:
        raise DatabaseTooLarge(
            f"{len(db)} channels exceed the in-context limit of {direct_limit}; "
            "use hierarchical navigation or agent exploration instead"
        )
    if len(db) > COMFORT_LIMIT:
        log.warning("%d channels in context; accuracy may degrade above %d", len(db), COMFORT_LIMIT)
    unnamed = [r.address for r in db if not r.name]
    if unnamed:
        raise ValueError(f"{len(unnamed)} records lack names (first: {unnamed[0]}); run generate_names first")

    gl = dict(db.glossary) if glossary is None else dict(glossary)
    start = backend.calls_used
    subqueries = decompose(query, backend) if split else [query]
    context = build_context(db, gl)
    options = [Option(r.name, r.name, r.description) for r in db]

    def match(sq: str) -> SubResult:
        before = backend.calls_used
        rejected: list[str] = []
        valid: list[str] = []
        for _ in range(1 + MAX_CORRECTIONS):
            note = f"\n\nThese names do not exist: {', '.join(rejected)}" if rejected else ""
            req = ChoiceRequest(context + note, options, multi_select=True, allow_abstain=abstain,
                                query=sq, glossary=gl, min_score=threshold)
            resp = choose(req, backend)
            resolved = [db.by_name(n) for n in resp.selected]
            candidates = [r.address if r else n for r, n in zip(resolved, resp.selected)]
            valid, invalid = db.validate(candidates)
            if not invalid:
                break
            rejected.extend(invalid)
        return SubResult(sq, valid, not valid, backend.calls_used - before)

    subresults = parallel_map(match, subqueries)
    return merge(query, subresults, backend.calls_used - start, "direct")


def generate_names(records: Iterable[tuple[str, str]], backend: SelectorBackend) -> dict[str, str]:
    """PascalCase names for (address, legacy description) pairs, unique within the batch."""
    records = list(records)
    for address, desc in records:
        if not desc or not desc.strip():
            raise EmptyDescription(f"record {address!r} has no description")
    proposed = propose_names([d for _, d in records], backend)
    taken: set[str] = set()
    out: dict[str, str] = {}
    for (address, _), name in zip(records, proposed):
        name = name or "Channel"
        candidate, n = name, 1
        while candidate in taken:
            n += 1
            candidate = f"{name}{n}"
        taken.add(candidate)
        out[address] = candidate
    return out


def with_generated_names(db: ChannelDatabase, backend: SelectorBackend) -> ChannelDatabase:
    """Copy of ``db`` whose unnamed records get generated names."""
    unnamed = [r for r in db if not r.name]
    if not unnamed:
        return db
    taken = {r.name for r in db if r.name}
    names = generate_names(((r.address, r.description) for r in unnamed), backend)
    records = []
    for r in db:
        if not r.name:
            name, n = names[r.address], 1
            base = name
            while name in taken:
                n += 1
                name = f"{base}{n}"
            taken.add(name)
            r = ChannelRecord(r.address, r.description, r.path, name, r.suffix_role, r.metadata)
        records.append(r)
    return ChannelDatabase(db.schema, records, db.roots, db.name, db.glossary)

