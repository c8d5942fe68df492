"""Benchmark cases, scoring, runs and synthetic suite generation."""
from __future__ import annotations

import json
import random
import re
import time
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Any, Callable, Iterable, Mapping, Sequence

import yaml

from .channeldb import ChannelDatabase
from .errors import ChanfindError, ConfigError
from .results import parallel_map
from .selector import SelectorBackend, make_backend
from .sources import PARADIGMS, Finder, load_source, make_finder
from .text import content_tokens, token_list

DIFFICULTIES = ("verbatim", "paraphrase", "adversarial")


class MatchMode(str, Enum):
    EXACT_SET = "ExactSet"
    SUPERSET = "Superset"
    ANY_OF = "AnyOf"

    @classmethod
    def coerce(cls, value: "MatchMode | str") -> "MatchMode":
        return value if isinstance(value, MatchMode) else cls(value)


@dataclass(frozen=True)
class BenchmarkCase:
    id: str
    query: str
    expected: frozenset[str]
    mode: MatchMode = MatchMode.EXACT_SET

    def __post_init__(self):
        object.__setattr__(self, "expected", frozenset(self.expected))
        object.__setattr__(self, "mode", MatchMode.coerce(self.mode))
        # an empty ExactSet means "the finder should abstain"
        if not self.expected and self.mode is not MatchMode.EXACT_SET:
            raise ValueError(f"case {self.id}: {self.mode.value} needs a non-empty expected set")

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "query": self.query, "expected": sorted(self.expected), "mode": self.mode.value}

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "BenchmarkCase":
        return cls(str(doc["id"]), doc["query"], frozenset(doc.get("expected") or ()), doc.get("mode", "ExactSet"))


def score_case(returned: Iterable[str], expected: Iterable[str], mode: MatchMode | str) -> bool:
    got, want = set(returned), set(expected)
    mode = MatchMode.coerce(mode)
    if mode is MatchMode.EXACT_SET:
        return got == want
    if mode is MatchMode.SUPERSET:
        return want <= got
    return bool(got & want)


@dataclass
class CaseResult:
    id: str
    returned: list[str]
    correct: bool
    selector_calls: int
    wall_time: float
    error: str | None = None


@dataclass
class RunReport:
    suite: str
    paradigm: str
    backend: str
    per_case: list[CaseResult] = field(default_factory=list)
    synthetic: bool = True

    @property
    def accuracy(self) -> float | None:
        if not self.per_case:
            return None
        return sum(c.correct for c in self.per_case) / len(self.per_case)

    @property
    def call_histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(c.selector_calls for c in self.per_case).items()))

    def to_dict(self, timing: bool = False) -> dict[str, Any]:
        cases = []
        for c in self.per_case:
            row: dict[str, Any] = {"id": c.id, "returned": c.returned, "correct": c.correct,
                                   "selector_calls": c.selector_calls}
            if c.error:
                row["error"] = c.error
            if timing:
                row["wall_time"] = round(c.wall_time, 6)
            cases.append(row)
        out: dict[str, Any] = {
            "suite": self.suite,
            "synthetic": self.synthetic,
            "paradigm": self.paradigm,
            "backend": self.backend,
            "cases": len(self.per_case),
            "correct": sum(c.correct for c in self.per_case),
            "accuracy": None if self.accuracy is None else round(self.accuracy, 6),
            "call_histogram": {str(k): v for k, v in self.call_histogram.items()},
            "per_case": cases,
        }
        if timing:
            out["total_wall_time"] = round(sum(c.wall_time for c in self.per_case), 6)
        return out

    def to_json(self, timing: bool = False) -> str:
        """Serialized report. Wall times vary run to run, so they are left
        out unless ``timing`` is set; without them two runs over the same
        cases, config and backend produce identical bytes."""
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True) + "\n"

    def summary(self) -> str:
        acc = "n/a" if self.accuracy is None else f"{self.accuracy:.1%}"
        n = len(self.per_case)
        return f"{self.suite}: {sum(c.correct for c in self.per_case)}/{n} correct ({acc}), paradigm {self.paradigm}"


@dataclass
class FinderConfig:
    paradigm: str
    source: Any
    backend: SelectorBackend
    options: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "FinderConfig":
        paradigm = doc.get("paradigm")
        if paradigm not in PARADIGMS:
            raise ConfigError(f"paradigm must be one of {', '.join(PARADIGMS)}, got {paradigm!r}")
        if "db" not in doc:
            raise ConfigError("finder config needs a 'db' source")
        try:
            backend = make_backend(doc.get("backend", "oracle"), **dict(doc.get("backend_options") or {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return cls(paradigm, load_source(str(doc["db"]), paradigm), backend, dict(doc.get("options") or {}))

    def finder(self) -> Finder:
        return make_finder(self.paradigm, self.source, self.options)


def run_benchmark(cases: Sequence[BenchmarkCase], config: FinderConfig, *, suite: str = "benchmark",
                  synthetic: bool = True, parallelism: int = 1,
                  clock: Callable[[], float] = time.perf_counter) -> RunReport:
    """Every case runs on a fresh backend (fresh call budget); a failing case
    is scored wrong and recorded, never aborting the run."""
    if not isinstance(config, FinderConfig):
        raise ConfigError("run_benchmark needs a FinderConfig")
    finder = config.finder()

    def run(case: BenchmarkCase) -> CaseResult:
        backend = config.backend.spawn()
        t0 = clock()
        try:
            result = finder(case.query, backend)
            returned, error = list(result.channels), None
        except (ChanfindError, ValueError) as exc:
            returned, error = [], f"{type(exc).__name__}: {exc}"
        elapsed = clock() - t0
        return CaseResult(case.id, returned, score_case(returned, case.expected, case.mode),
                          backend.calls_used, elapsed, error)

    results = parallel_map(run, list(cases), max_workers=max(1, parallelism))
    results.sort(key=lambda r: r.id)
    return RunReport(suite, config.paradigm, config.backend.kind, results, synthetic)


# -- case files ------------------------------------------------------------------

def dump_cases(cases: Sequence[BenchmarkCase], suite: str = "", meta: Mapping[str, Any] | None = None) -> str:
    doc = {"suite": suite, **dict(meta or {}), "cases": [c.to_dict() for c in cases]}
    return yaml.safe_dump(doc, sort_keys=False, width=120, allow_unicode=True)


@dataclass
class CaseSuite:
    name: str
    cases: list[BenchmarkCase]
    synthetic: bool = False


def load_cases(document: str) -> CaseSuite:
    """A case file: either a bare list of cases or a mapping with ``cases``
    plus optional ``suite`` and ``synthetic`` keys."""
    doc = yaml.safe_load(document)
    if isinstance(doc, list):
        return CaseSuite("", [BenchmarkCase.from_dict(d) for d in doc])
    if not isinstance(doc, Mapping) or "cases" not in doc:
        raise ConfigError("case file needs a list of cases or a 'cases' key")
    cases = [BenchmarkCase.from_dict(d) for d in doc["cases"] or []]
    return CaseSuite(str(doc.get("suite") or ""), cases, bool(doc.get("synthetic", False)))


def load_cases_file(path: str) -> CaseSuite:
    with open(path, encoding="utf-8") as fh:
        return load_cases(fh.read())


# -- synthetic suites ---------------------------------------------------------------

def default_synonyms() -> dict[str, list[str]]:
    text = resources.files("chanfind").joinpath("data/synonyms.yaml").read_text(encoding="utf-8")
    return {k: list(v) for k, v in yaml.safe_load(text).items()}


@dataclass(frozen=True)
class Target:
    text: str
    expected: frozenset[str]
    mode: MatchMode = MatchMode.EXACT_SET


_CONNECTIVES = {"and", "or"}


def _record_text(description: str) -> str:
    """A record's path description as one request. Per-level prose often
    lists alternatives ("set or write"); those commas and conjunctions are
    dropped so the decomposer does not read one record as several requests."""
    words = re.sub(r"[,;:]", " ", description.replace(" > ", " ")).split()
    return " ".join(w for w in words if w.lower() not in _CONNECTIVES)


def database_targets(db: ChannelDatabase) -> list[Target]:
    """One target per record whose wording singles it out: no other record's
    name and description contain all of its description's content words."""
    texts = [(r, frozenset(content_tokens(_record_text(r.description)))) for r in db]
    full = [frozenset(token_list(f"{r.name or ''} {_record_text(r.description)}")) for r in db]
    out = []
    for i, (r, toks) in enumerate(texts):
        if not toks:
            continue
        if any(j != i and toks <= other for j, other in enumerate(full)):
            continue
        out.append(Target(_record_text(r.description), frozenset({r.address})))
    return out


def tree_targets(tree: Any) -> list[Target]:
    """Field-wide and single-element requests over a middle-layer tree."""
    out = []
    for s in tree.systems:
        for fam in s.families:
            for fld in fam.fields:
                base = f"{fld.description} of the {fam.description} in the {s.description}"
                out.append(Target(base, frozenset(c.address for c in fld.channels)))
                if len(fld.channels) > 1:
                    for c in fld.channels:
                        text = f"{fld.description} of {fam.description} element {c.device_index} in the {s.description}"
                        out.append(Target(text, frozenset({c.address})))
    return out


def _paraphrase(text: str, rng: random.Random, synonyms: Mapping[str, Sequence[str]]) -> str:
    words = token_list(text)
    swappable = [i for i, w in enumerate(words) if w in synonyms]
    if swappable:
        i = rng.choice(swappable)
        words[i] = rng.choice(list(synonyms[words[i]]))
    rng.shuffle(words)
    return " ".join(words)


def _adversarial(text: str, rng: random.Random, vocabulary: Sequence[str]) -> str:
    words = text.split()
    for _ in range(2):
        words.insert(rng.randrange(len(words) + 1), rng.choice(vocabulary))
    return " ".join(words)


def generate_synthetic_benchmark(source: Any, n: int, seed: int, difficulty: str = "verbatim", *,
                                 synonyms: Mapping[str, Sequence[str]] | None = None,
                                 prefix: str = "case") -> list[BenchmarkCase]:
    """``n`` cases drawn (with a seeded RNG) from the source's identifiable
    targets; expected sets come from the generating records."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if difficulty not in DIFFICULTIES:
        raise ValueError(f"difficulty must be one of {', '.join(DIFFICULTIES)}")
    targets = database_targets(source) if isinstance(source, ChannelDatabase) else tree_targets(source)
    if not targets:
        raise ValueError("source has no identifiable records to build cases from")
    rng = random.Random(seed)
    picks = rng.sample(range(len(targets)), n) if n <= len(targets) else [rng.randrange(len(targets)) for _ in range(n)]
    syn = default_synonyms() if synonyms is None else synonyms
    vocabulary = sorted({w for t in targets for w in content_tokens(t.text) if not w.isdigit()})
    cases = []
    for k, idx in enumerate(picks):
        t = targets[idx]
        if difficulty == "verbatim":
            text = t.text
        elif difficulty == "paraphrase":
            text = _paraphrase(t.text, rng, syn)
        else:
            text = _adversarial(t.text, rng, vocabulary)
        cases.append(BenchmarkCase(f"{prefix}-{k + 1:03d}", text, t.expected, t.mode))
    return cases
