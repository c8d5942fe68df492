"""The decision boundary between the pipelines and whatever makes decisions.

Every pipeline asks its questions through :func:`choose`, :func:`decompose`,
:func:`complete_structured` and :func:`propose_names`. Two backends answer
them: :class:`LexicalOracle`, a deterministic token-overlap stand-in that
needs no network, and :class:`RemoteLLM`, which speaks the chat-completion
wire protocol with JSON-schema constrained output.
"""
from __future__ import annotations

import json
import logging
import math
import os
import re
import threading
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import jsonschema

from .errors import (
    AuthError,
    BudgetExhausted,
    InvalidAfterRetry,
    SchemaViolationAfterRetry,
    TransportError,
)
from .text import STOPWORDS, content_tokens, default_thesaurus, expand_tokens, token_list

log = logging.getLogger(__name__)

DEFAULT_CALL_BUDGET = 32
DEFAULT_ABSTAIN_THRESHOLD = 0.15


@dataclass(frozen=True)
class Option:
    id: str
    label: str
    description: str = ""

    @property
    def text(self) -> str:
        return f"{self.label} {self.description}"


@dataclass
class ChoiceRequest:
    context: str
    options: Sequence[Option]
    multi_select: bool = False
    allow_abstain: bool = True
    # the text the decision is about; the oracle scores options against it
    query: str = ""
    glossary: Mapping[str, str] = field(default_factory=dict)
    max_select: int | None = None
    # per-request abstention threshold for the oracle (None: backend default)
    min_score: float | None = None

    def __post_init__(self):
        self.options = tuple(self.options)
        if not self.options:
            raise ValueError("ChoiceRequest needs at least one option")
        ids = [o.id for o in self.options]
        if len(set(ids)) != len(ids):
            raise ValueError("option ids must be unique")

    @property
    def ids(self) -> list[str]:
        return [o.id for o in self.options]


@dataclass
class ChoiceResponse:
    selected: list[str] = field(default_factory=list)
    abstained: bool = False
    rationale: str | None = None


class SelectorBackend:
    """Shared call accounting; subclasses supply the ``_`` hooks."""

    kind = "abstract"

    def __init__(self, call_budget: int = DEFAULT_CALL_BUDGET):
        self.call_budget = call_budget
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def calls_used(self) -> int:
        return self._calls

    def charge(self) -> None:
        with self._lock:
            if self._calls >= self.call_budget:
                raise BudgetExhausted(f"selector call budget of {self.call_budget} exhausted")
            self._calls += 1

    def reset(self) -> None:
        with self._lock:
            self._calls = 0

    def spawn(self) -> "SelectorBackend":
        """A fresh backend with the same configuration and an unused budget."""
        raise NotImplementedError

    def _select(self, req: ChoiceRequest) -> ChoiceResponse:
        raise NotImplementedError

    def _split(self, query: str) -> list[str]:
        raise NotImplementedError

    def _names(self, descriptions: Sequence[str]) -> list[str]:
        raise NotImplementedError

    def _complete(self, prompt: str, schema: Mapping[str, Any], system: str | None = None) -> dict[str, Any]:
        raise NotImplementedError(f"{self.kind} backend cannot produce free-form structured documents")


def _sanitize(resp: ChoiceResponse, req: ChoiceRequest) -> tuple[ChoiceResponse, bool]:
    """Clamp a raw response to the request; second item: something was stripped."""
    allowed = set(req.ids)
    raw = list(resp.selected or [])
    seen: set[str] = set()
    kept = []
    for sid in raw:
        if sid in allowed and sid not in seen:
            kept.append(sid)
            seen.add(sid)
    stripped = len(kept) < len(raw)
    if stripped:
        log.warning("stripped out-of-set selections %s", [s for s in raw if s not in allowed])
    limit = 1 if not req.multi_select else req.max_select
    if limit is not None:
        kept = kept[:limit]
    if resp.abstained:
        kept = []
    return ChoiceResponse(kept, bool(resp.abstained) or not kept, resp.rationale), stripped


def choose(req: ChoiceRequest, backend: SelectorBackend) -> ChoiceResponse:
    """Constrained selection: the response never names an option outside ``req``."""
    backend.charge()
    clean, stripped = _sanitize(backend._select(req), req)
    mandatory_empty = not req.allow_abstain and not clean.selected
    if mandatory_empty or (stripped and not clean.selected):
        backend.charge()
        clean, _ = _sanitize(backend._select(req), req)
        if not req.allow_abstain and not clean.selected:
            raise InvalidAfterRetry("backend produced no valid selection for a mandatory choice")
    return clean


def decompose(query: str, backend: SelectorBackend) -> list[str]:
    """Split a multi-target request into atomic sub-queries."""
    query = query.strip()
    if not query:
        raise ValueError("empty query")
    backend.charge()
    parts = [p.strip() for p in backend._split(query) if p and p.strip()]
    return parts or [query]


def complete_structured(
    prompt: str,
    response_schema: Mapping[str, Any],
    backend: SelectorBackend,
    system: str | None = None,
) -> dict[str, Any]:
    backend.charge()
    return backend._complete(prompt, response_schema, system)


def propose_names(descriptions: Sequence[str], backend: SelectorBackend) -> list[str]:
    backend.charge()
    names = backend._names(descriptions)
    if len(names) != len(descriptions):
        raise SchemaViolationAfterRetry("backend returned the wrong number of names")
    return names


# -- deterministic lexical oracle -----------------------------------------

_VERBS = frozenset("set read check get show list monitor plot find display fetch give".split())
_CONJ_RE = re.compile(
    r"\s*,\s*(?:and|or)\s+|\s*,\s*|\s*;\s*|\s+and\s+|\s+or\s+|\s+as well as\s+|\s+plus\s+|\s*&\s*",
    re.IGNORECASE,
)


def split_conjunctions(query: str) -> list[str]:
    """Rule-based splitting on coordinating conjunctions between noun phrases.

    A one-word conjunct borrows the head words of the following conjunct
    ("x and y positions" gives "x positions", "y positions"), and a leading
    verb is carried over to conjuncts that lack one.
    """
    text = " ".join(query.split())
    parts = [p.strip() for p in _CONJ_RE.split(text) if p and p.strip()]
    if len(parts) <= 1:
        return [text]
    words = [p.split() for p in parts]
    for i in range(len(words) - 2, -1, -1):
        if len(words[i]) == 1 and len(words[i + 1]) >= 2 and words[i][0].lower() not in _VERBS:
            head = words[i + 1][1:]
            if words[i + 1][0].lower() in _VERBS:
                head = words[i + 1][2:]
            if head:
                words[i] = words[i] + head
    verb = words[0][0] if words[0][0].lower() in _VERBS and len(words[0]) > 1 else None
    out = []
    for i, w in enumerate(words):
        if verb and i > 0 and w[0].lower() not in _VERBS:
            w = [verb] + w
        out.append(" ".join(w))
    return out


def _singular(tok: str) -> str:
    """Crude plural folding ("setpoints" -> "setpoint"); applied to both
    sides of a comparison, so over-eager cuts ("status") are harmless."""
    if len(tok) > 4 and tok.endswith("ies"):
        return tok[:-3] + "y"
    if len(tok) > 3 and tok.endswith("s") and not tok.endswith("ss"):
        return tok[:-1]
    return tok


class LexicalOracle(SelectorBackend):
    """Deterministic stand-in for a language model.

    Options are scored with the lexical overlap of the request's query
    (stopwords dropped, glossary terms expanded) against
    ``label + description``. Both sides first pass through a thesaurus that
    maps word variants to one canonical word; the bundled one is the
    synonym table under ``data/``. Single selection
    takes the best score with ties broken by option id; multi-selection takes
    every option tied at the best score in presentation order.
    """

    kind = "oracle"

    def __init__(
        self,
        call_budget: int = DEFAULT_CALL_BUDGET,
        abstain_threshold: float = DEFAULT_ABSTAIN_THRESHOLD,
        thesaurus: Mapping[str, str] | None = None,
    ):
        super().__init__(call_budget)
        self.abstain_threshold = abstain_threshold
        self.thesaurus = dict(default_thesaurus() if thesaurus is None else thesaurus)

    def spawn(self) -> "LexicalOracle":
        return LexicalOracle(self.call_budget, self.abstain_threshold, self.thesaurus)

    def _normalize(self, toks: Sequence[str], glossary: Mapping[str, str] | None) -> frozenset[str]:
        th = self.thesaurus
        expanded = expand_tokens([th.get(t, t) for t in toks], glossary)
        return frozenset(th.get(s, s) for s in (_singular(t) for t in expanded))

    def scores(self, req: ChoiceRequest) -> dict[str, float]:
        q = self.query_tokens(req)
        # glossary, thesaurus and plural folding apply to both sides
        out = {}
        for o in req.options:
            cand = self._normalize(token_list(o.text), req.glossary)
            out[o.id] = len(q & cand) / len(q) if q else 0.0
        return out

    def query_tokens(self, req: ChoiceRequest) -> frozenset[str]:
        text = req.query or req.context
        toks = content_tokens(text) or token_list(text)
        return self._normalize(toks, req.glossary)

    def _select(self, req: ChoiceRequest) -> ChoiceResponse:
        scores = self.scores(req)
        best = max(scores.values())
        threshold = self.abstain_threshold if req.min_score is None else req.min_score
        if req.allow_abstain and (best <= 0 or best < threshold):
            return ChoiceResponse([], True, f"best score {best:.3f} below {threshold}")
        if req.multi_select:
            chosen = [o.id for o in req.options if math.isclose(scores[o.id], best)]
        else:
            chosen = [min(i for i, s in scores.items() if math.isclose(s, best))]
        return ChoiceResponse(chosen, False, f"score {best:.3f}")

    def _split(self, query: str) -> list[str]:
        return split_conjunctions(query)

    def _names(self, descriptions: Sequence[str]) -> list[str]:
        docs = [content_tokens(d) for d in descriptions]
        df = Counter(t for toks in docs for t in set(toks))
        n = len(docs)
        names = []
        for toks in docs:
            ranked = sorted(range(len(toks)), key=lambda i: (-math.log(n / df[toks[i]]), i))
            keep = sorted(set(ranked[:4]))
            names.append("".join(toks[i][:1].upper() + toks[i][1:] for i in keep))
        return names


# -- remote chat-completion backend ---------------------------------------

Transport = Callable[[str, Mapping[str, str], Mapping[str, Any], float], tuple[int, Any]]


def _requests_transport(url: str, headers: Mapping[str, str], body: Mapping[str, Any], timeout: float) -> tuple[int, Any]:
    import requests

    try:
        resp = requests.post(url, headers=dict(headers), json=body, timeout=timeout)
    except requests.RequestException as exc:
        raise TransportError(f"POST {url} failed: {exc}") from exc
    try:
        return resp.status_code, resp.json()
    except ValueError:
        return resp.status_code, resp.text


def choice_schema(req: ChoiceRequest) -> dict[str, Any]:
    selected: dict[str, Any] = {"type": "array", "items": {"type": "string", "enum": req.ids}, "uniqueItems": True}
    if not req.multi_select:
        selected["maxItems"] = 1
    elif req.max_select:
        selected["maxItems"] = req.max_select
    return {
        "type": "object",
        "properties": {
            "selected": selected,
            "abstain": {"type": "boolean"},
            "rationale": {"type": "string"},
        },
        "required": ["selected", "abstain"],
        "additionalProperties": False,
    }


SPLIT_SCHEMA = {
    "type": "object",
    "properties": {"subqueries": {"type": "array", "items": {"type": "string", "minLength": 1}, "minItems": 1}},
    "required": ["subqueries"],
    "additionalProperties": False,
}


def _strip_fences(text: str) -> str:
    text = text.strip()
    m = re.fullmatch(r"```(?:json)?\s*(.*?)\s*```", text, re.DOTALL)
    return m.group(1) if m else text


class RemoteLLM(SelectorBackend):
    """Chat-completion client with JSON-schema response format.

    ``url`` and ``api_key`` default to ``CHANFIND_LLM_URL`` and
    ``CHANFIND_LLM_KEY``; the URL is the full completions endpoint.
    ``transport`` is injectable so recorded exchanges can be replayed.
    """

    kind = "llm"

    def __init__(
        self,
        url: str | None = None,
        api_key: str | None = None,
        model: str | None = None,
        transport: Transport | None = None,
        call_budget: int = DEFAULT_CALL_BUDGET,
        timeout: float = 60.0,
    ):
        super().__init__(call_budget)
        self.url = url or os.environ.get("CHANFIND_LLM_URL", "")
        self.api_key = api_key if api_key is not None else os.environ.get("CHANFIND_LLM_KEY", "")
        self.model = model or os.environ.get("CHANFIND_LLM_MODEL", "gpt-4o-mini")
        self.transport = transport or _requests_transport
        self.timeout = timeout
        self._wire_lock = threading.Lock()

    def spawn(self) -> "RemoteLLM":
        return RemoteLLM(self.url, self.api_key, self.model, self.transport, self.call_budget, self.timeout)

    def request_body(self, prompt: str, schema: Mapping[str, Any], system: str | None = None) -> dict[str, Any]:
        messages = []
        if system:
            messages.append({"role": "system", "content": system})
        messages.append({"role": "user", "content": prompt})
        return {
            "model": self.model,
            "messages": messages,
            "temperature": 0,
            "response_format": {
                "type": "json_schema",
                "json_schema": {"name": "response", "schema": dict(schema), "strict": True},
            },
        }

    def _post(self, body: Mapping[str, Any]) -> Any:
        if not self.url:
            raise TransportError("no endpoint configured (set CHANFIND_LLM_URL)")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        # one request in flight per connection
        with self._wire_lock:
            status, payload = self.transport(self.url, headers, body, self.timeout)
        if status in (401, 403):
            raise AuthError(f"endpoint rejected credentials (HTTP {status})")
        if status != 200:
            raise TransportError(f"endpoint returned HTTP {status}")
        return payload

    @staticmethod
    def message_content(payload: Any) -> Any:
        """Pull the assistant message out of a chat-completion response and decode it."""
        if isinstance(payload, str):
            payload = json.loads(payload)
        content = payload["choices"][0]["message"]["content"]
        if isinstance(content, list):  # content-part arrays
            content = "".join(p.get("text", "") for p in content if isinstance(p, Mapping))
        return json.loads(_strip_fences(content))

    def _complete(self, prompt: str, schema: Mapping[str, Any], system: str | None = None) -> dict[str, Any]:
        body = self.request_body(prompt, schema, system)
        last: Exception | None = None
        for _ in range(2):
            payload = self._post(body)
            try:
                doc = self.message_content(payload)
                jsonschema.validate(doc, schema)
                return doc
            except (KeyError, IndexError, TypeError, ValueError, jsonschema.ValidationError) as exc:
                log.warning("response failed validation: %s", exc)
                last = exc
        raise SchemaViolationAfterRetry(f"response did not match schema after retry: {last}")

    def _select(self, req: ChoiceRequest) -> ChoiceResponse:
        lines = [req.context.strip(), ""]
        if req.glossary:
            lines.append("Glossary:")
            lines.extend(f"- {k}: {v}" for k, v in sorted(req.glossary.items()))
            lines.append("")
        if req.query:
            lines.append(f"Request: {req.query}")
        lines.append("Options:")
        lines.extend(f"- {o.id}: {o.label}" + (f" - {o.description}" if o.description else "") for o in req.options)
        lines.append("")
        if req.multi_select:
            lines.append("Select every option that answers the request.")
        else:
            lines.append("Select the single best option.")
        if req.allow_abstain:
            lines.append("If nothing fits, set abstain to true and select nothing; prefer abstaining to guessing.")
        doc = self._complete("\n".join(lines), choice_schema(req),
                             system="You choose among enumerated options. Answer with JSON only.")
        return ChoiceResponse(list(doc.get("selected", [])), bool(doc.get("abstain")), doc.get("rationale"))

    def _split(self, query: str) -> list[str]:
        prompt = (
            "Split the operator request into atomic sub-queries, one per requested quantity. "
            "Return a single-element list if the request asks for one thing.\n\n"
            f"Request: {query}"
        )
        return list(self._complete(prompt, SPLIT_SCHEMA)["subqueries"])

    def _names(self, descriptions: Sequence[str]) -> list[str]:
        schema = {
            "type": "object",
            "properties": {"names": {"type": "array", "items": {"type": "string", "pattern": "^[A-Z][A-Za-z0-9]*$"},
                                     "minItems": len(descriptions), "maxItems": len(descriptions)}},
            "required": ["names"],
            "additionalProperties": False,
        }
        prompt = (
            "For each control-system channel description, extract its salient semantic components "
            "and join them into one PascalCase channel name. Keep the input order.\n\n"
            + "\n".join(f"{i + 1}. {d}" for i, d in enumerate(descriptions))
        )
        return list(self._complete(prompt, schema)["names"])


def make_backend(kind: str, **kwargs: Any) -> SelectorBackend:
    if kind == "oracle":
        return LexicalOracle(**kwargs)
    if kind == "llm":
        return RemoteLLM(**kwargs)
    raise ValueError(f"unknown backend {kind!r} (expected oracle or llm)")


__all__ = [
    "ChoiceRequest",
    "ChoiceResponse",
    "LexicalOracle",
    "Option",
    "RemoteLLM",
    "STOPWORDS",
    "SelectorBackend",
    "choice_schema",
    "choose",
    "complete_structured",
    "decompose",
    "make_backend",
    "propose_names",
    "split_conjunctions",
]
