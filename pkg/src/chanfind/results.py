"""Result types shared by the finder pipelines."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence, TypeVar

T = TypeVar("T")


@dataclass
class SubResult:
    query: str
    channels: list[str] = field(default_factory=list)
    abstained: bool = False
    selector_calls: int = 0
    trace: Any = None
    error: str | None = None


@dataclass
class FinderResult:
    query: str
    channels: list[str]
    subresults: list[SubResult]
    selector_calls: int
    paradigm: str = ""

    @property
    def abstained(self) -> bool:
        return not self.channels

    def to_dict(self) -> dict[str, Any]:
        return {
            "query": self.query,
            "paradigm": self.paradigm,
            "channels": list(self.channels),
            "abstained": self.abstained,
            "selector_calls": self.selector_calls,
            "subqueries": [
                {"query": s.query, "channels": s.channels, "abstained": s.abstained, "error": s.error}
                for s in self.subresults
            ],
        }


def merge(query: str, subresults: Sequence[SubResult], selector_calls: int, paradigm: str) -> FinderResult:
    """Order-stable union of sub-query channels."""
    seen: set[str] = set()
    channels = []
    for sr in subresults:
        for c in sr.channels:
            if c not in seen:
                seen.add(c)
                channels.append(c)
    return FinderResult(query, channels, list(subresults), selector_calls, paradigm)


def parallel_map(fn: Callable[[T], Any], items: Sequence[T], max_workers: int = 8) -> list[Any]:
    """``map`` over a thread pool; results keep input order."""
    if len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(max_workers, len(items))) as pool:
        return list(pool.map(fn, items))
