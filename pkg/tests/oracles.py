"""Reference implementations used as test oracles.

Each one is written from the documented behaviour, deliberately without
calling into the code it checks: a character scanner instead of the
tokenizer regex, a recursive walk over the raw config dict instead of the
materialized tree, numpy matrix squaring instead of graph search, and
exhaustive assignment enumeration instead of the pattern-ordered join.
"""
from __future__ import annotations

import itertools
from typing import Any, Iterable, Mapping, Sequence

import numpy as np


# -- tokenizer -----------------------------------------------------------------

def ref_tokens(text: str) -> list[str]:
    """Scan ``text`` one character at a time.

    Word boundaries fall on non-alphanumerics, on letter/digit changes, on
    a lower-to-upper change, and before the last capital of an acronym run
    that is followed by a lowercase letter ("HTTPServer" -> http, server).
    """
    out: list[str] = []
    cur = ""

    def flush():
        nonlocal cur
        if cur:
            out.append(cur.lower())
        cur = ""

    chars = [c if c.isascii() else " " for c in text]
    for i, c in enumerate(chars):
        if not c.isalnum():
            flush()
            continue
        if cur:
            prev = cur[-1]
            nxt = chars[i + 1] if i + 1 < len(chars) else ""
            if prev.isdigit() != c.isdigit():
                flush()
            elif prev.islower() and c.isupper():
                flush()
            elif prev.isupper() and c.isupper() and nxt.islower():
                flush()
        cur += c
    flush()
    return out


def ref_score(query: str, candidate: str) -> float:
    q = set(ref_tokens(query))
    if not q:
        return 0.0
    return len(q & set(ref_tokens(candidate))) / len(q)


# -- config enumeration -----------------------------------------------------------

def _values(node: Mapping[str, Any]) -> list[str]:
    exp = node.get("expand")
    if not exp:
        return [str(node["value"])]
    if "range" in exp:
        r = exp["range"]
        pad = int(r.get("pad", 0))
        return [f"{r.get('prefix', '')}{str(n).zfill(pad)}{r.get('suffix', '')}"
                for n in range(int(r["lo"]), int(r["hi"]) + 1)]
    return [str(it["value"]) if isinstance(it, Mapping) else str(it) for it in exp["list"]]


def count_records(nodes: Sequence[Mapping[str, Any]]) -> int:
    """Sum over leaves of the product of expansion sizes along the path."""
    total = 0
    for node in nodes:
        kids = node.get("children") or []
        own = 1 if node.get("terminal") or not kids else 0
        total += len(_values(node)) * (own + count_records(kids))
    return total


def enumerate_paths(nodes: Sequence[Mapping[str, Any]], prefix: tuple = ()) -> list[tuple[tuple[str, str], ...]]:
    """Every record path, depth-first in document order."""
    out = []
    for node in nodes:
        kids = node.get("children") or []
        for v in _values(node):
            path = prefix + ((str(node["level"]), v),)
            if node.get("terminal") or not kids:
                out.append(path)
            out.extend(enumerate_paths(kids, path))
    return out


def subtree_counts(nodes: Sequence[Mapping[str, Any]]) -> dict[tuple[str, ...], int]:
    """Records below every value prefix, by filtering the full path list."""
    paths = enumerate_paths(nodes)
    counts: dict[tuple[str, ...], int] = {}
    for p in paths:
        values = tuple(v for _, v in p)
        for i in range(1, len(values) + 1):
            counts[values[:i]] = counts.get(values[:i], 0) + 1
    return counts


# -- transitive closure -------------------------------------------------------------

def matrix_closure(edges: Iterable[tuple[str, str]]) -> set[tuple[str, str]]:
    """Reflexive-transitive closure by repeated boolean squaring."""
    edges = list(edges)
    nodes = sorted({n for e in edges for n in e})
    if not nodes:
        return set()
    ix = {n: i for i, n in enumerate(nodes)}
    m = np.eye(len(nodes), dtype=bool)
    for s, o in edges:
        m[ix[s], ix[o]] = True
    while True:
        nxt = (m.astype(np.int64) @ m.astype(np.int64)) > 0
        if (nxt == m).all():
            break
        m = nxt
    return {(nodes[i], nodes[j]) for i, j in zip(*np.nonzero(m))}


# -- conjunctive query --------------------------------------------------------------

def brute_force_query(select: Sequence[str], patterns: Sequence[tuple[str, str, str, bool]],
                      triples: Iterable[tuple[str, str, str]]) -> list[tuple[str, ...]]:
    """Try every assignment of every variable over every term in the graph."""
    triples = set(triples)
    domain = sorted({t for tr in triples for t in tr})
    variables = sorted({t for p in patterns for t in p[:3] if t.startswith("?")})
    closures = {}
    for _, p, _, closure in patterns:
        if closure and p not in closures:
            closures[p] = matrix_closure((s, o) for s, pp, o in triples if pp == p)
    rows = set()
    for values in itertools.product(domain, repeat=len(variables)):
        env = dict(zip(variables, values))
        ok = True
        for s, p, o, closure in patterns:
            s, p, o = (env.get(t, t) for t in (s, p, o))
            if closure:
                ok = (s, o) in closures[p]
            else:
                ok = (s, p, o) in triples
            if not ok:
                break
        if ok:
            rows.add(tuple(env[v] for v in select))
    return sorted(rows)
