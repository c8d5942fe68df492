"""Tokenisation and the lexical overlap score used by the offline oracle."""
from __future__ import annotations

import re
from functools import lru_cache
from typing import Iterable, Mapping

# acronym run before a capitalised word | capitalised/lower word | acronym | digits
_TOKEN_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|[0-9]+")

STOPWORDS = frozenset(
    """a an the of in on at to for from by with and or is are be
    all any me my our please show give what which where how i""".split()
)


def token_list(text: str) -> list[str]:
    """Lowercase tokens in order of appearance.

    Splits on whitespace and punctuation, on letter/digit boundaries and on
    case transitions inside a word::

        >>> token_list("TerminalVoltageSetPoint")
        ['terminal', 'voltage', 'set', 'point']
        >>> token_list("OTRC.55.I1")
        ['otrc', '55', 'i', '1']
    """
    return [t.lower() for t in _TOKEN_RE.findall(text)]


@lru_cache(maxsize=1 << 16)
def tokens(text: str) -> frozenset[str]:
    return frozenset(token_list(text))


def content_tokens(text: str) -> list[str]:
    return [t for t in token_list(text) if t not in STOPWORDS]


def expand_tokens(toks: Iterable[str], glossary: Mapping[str, str] | None) -> frozenset[str]:
    """Replace glossary terms by the tokens of their expansion."""
    if not glossary:
        return frozenset(toks)
    out: set[str] = set()
    for t in toks:
        if t in glossary:
            out.update(token_list(glossary[t]))
        else:
            out.add(t)
    return frozenset(out)


def overlap(query_tokens: frozenset[str], candidate_text: str) -> float:
    if not query_tokens:
        return 0.0
    return len(query_tokens & tokens(candidate_text)) / len(query_tokens)


def lexical_score(query: str, candidate_text: str) -> float:
    """Fraction of the query's tokens that also occur in ``candidate_text``."""
    return overlap(tokens(query), candidate_text)


def pascal_case(words: Iterable[str]) -> str:
    return "".join(w[:1].upper() + w[1:] for w in words)


@lru_cache(maxsize=1)
def synonym_table() -> dict[str, tuple[str, ...]]:
    """The bundled word -> variants table."""
    import yaml
    from importlib import resources

    raw = resources.files("chanfind").joinpath("data/synonyms.yaml").read_text(encoding="utf-8")
    return {str(k): tuple(str(v) for v in vs) for k, vs in yaml.safe_load(raw).items()}


def default_thesaurus() -> dict[str, str]:
    """Variant -> canonical word, inverted from :func:`synonym_table`."""
    return {v: word for word, variants in synonym_table().items() for v in variants}


_INTENT_VERBS = {
    "set": "Setpoint", "change": "Setpoint", "adjust": "Setpoint", "write": "Setpoint",
    "increase": "Setpoint", "decrease": "Setpoint", "raise": "Setpoint", "lower": "Setpoint",
    "ramp": "Setpoint", "put": "Setpoint", "configure": "Setpoint",
    "read": "Readback", "check": "Readback", "monitor": "Readback", "get": "Readback",
    "measure": "Readback", "display": "Readback", "plot": "Readback", "watch": "Readback",
    "trigger": "Command", "execute": "Command", "reset": "Command", "enable": "Command",
    "disable": "Command", "toggle": "Command",
}


def verb_intent(text: str) -> str | None:
    """Suffix role implied by the leading verb of a request, if any.

    >>> verb_intent("please set the vacuum setpoint")
    'Setpoint'
    >>> verb_intent("check current vacuum pressure")
    'Readback'
    """
    words = content_tokens(text)
    return _INTENT_VERBS.get(words[0]) if words else None
