"""Constrained descent through the hierarchy, one level per selector call.

At every node the selector sees only the node's children (plus a stop
option when the node is itself a channel), so a path can never leave the
tree. Selecting several options branches the search; each branch explores
the remaining levels on its own.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .channeldb import ChannelDatabase, Path, SuffixRole, TreeNode, assemble_address
from .results import FinderResult, SubResult, merge, parallel_map
from .selector import ChoiceRequest, Option, SelectorBackend, choose, decompose
from .text import verb_intent

STOP = "(stop here)"
DEFAULT_BRANCH_CAP = 4


@dataclass
class NavStep:
    level: str
    at: Path
    options: list[str]
    selected: list[str]
    branched: bool
    backtrack: bool = False


@dataclass
class NavTrace:
    query: str
    steps: list[NavStep] = field(default_factory=list)
    paths: list[Path] = field(default_factory=list)

    @property
    def selector_calls(self) -> int:
        return len(self.steps)

    @property
    def abstained(self) -> bool:
        return not self.paths

    def format(self) -> str:
        lines = [f"query: {self.query}"]
        for s in self.steps:
            where = "/".join(v for _, v in s.at) or "<root>"
            tag = " (backtrack)" if s.backtrack else ""
            chosen = ", ".join(s.selected) if s.selected else "<abstain>"
            lines.append(f"  [{s.level}] at {where}: {len(s.options)} options -> {chosen}{tag}")
        lines.append(f"  selector calls: {self.selector_calls}, paths: {len(self.paths)}")
        return "\n".join(lines)


@dataclass
class _Branch:
    paths: list[Path]
    steps: list[NavStep]
    dead: bool


class Navigator:
    def __init__(
        self,
        db: ChannelDatabase,
        backend: SelectorBackend,
        branch_cap: int = DEFAULT_BRANCH_CAP,
        glossary: Mapping[str, str] | None = None,
        abstain: bool = True,
    ):
        self.db = db
        self.backend = backend
        self.branch_cap = branch_cap
        self.abstain = abstain
        self.glossary = dict(db.glossary if glossary is None else glossary)

    def navigate(self, subquery: str) -> NavTrace:
        if not self.db.roots:
            raise ValueError("database has no tree to navigate")
        branch = self._descend(subquery, self.db.roots, None, top=True, may_backtrack=True)
        return NavTrace(subquery, branch.steps, [] if branch.dead else branch.paths)

    def _request(self, subquery: str, nodes: Sequence[TreeNode], parent: TreeNode | None, top: bool,
                 exclude: frozenset[str] = frozenset()) -> tuple[ChoiceRequest, str] | None:
        nodes = [n for n in nodes if n.value not in exclude]
        offer_stop = parent is not None and parent.record is not None and STOP not in exclude
        # a leading set/read/command verb decides between suffix siblings
        intent = verb_intent(subquery)
        matching = [n for n in nodes if n.record is not None and n.record.suffix_role.value == intent]
        if intent and matching:
            nodes = [n for n in nodes if n.record is None or n.record.suffix_role.value in (intent, "None", "Status")]
            offer_stop = offer_stop and parent.record.suffix_role.value == intent
        options = [Option(n.value, n.value, n.description) for n in nodes]
        if offer_stop:
            options.append(Option(STOP, STOP, f"the channel is {parent.value} itself; {parent.description}"))
        if not options:
            return None
        levels = sorted({n.level for n in nodes})
        level = "/".join(levels)
        where = " > ".join(v for _, v in parent.path) if parent is not None else "the top of the hierarchy"
        context = (
            f"Navigating the channel hierarchy for the request below. Current position: {where}. "
            f"Choose the {level} option(s) that lead to the requested channel(s). "
            "Choose several only if the request really targets several."
        )
        # a lone option below the top level is not a decision the query can veto
        forced = not top and len(options) == 1
        return ChoiceRequest(
            context, options, multi_select=True, allow_abstain=self.abstain and not forced, query=subquery,
            glossary=self.glossary, max_select=self.branch_cap,
            # below the top level any overlap counts; a zero score is a dead end
            min_score=None if top else 0.0,
        ), level

    def _descend(self, subquery: str, nodes: Sequence[TreeNode], parent: TreeNode | None,
                 top: bool, may_backtrack: bool) -> _Branch:
        built = self._request(subquery, nodes, parent, top)
        assert built is not None
        req, level = built
        resp = choose(req, self.backend)
        at = parent.path if parent is not None else ()
        step = NavStep(level, at, req.ids, list(resp.selected), len(resp.selected) > 1)
        if resp.abstained:
            return _Branch([], [step], True)
        result = self._follow(subquery, nodes, parent, resp.selected, may_backtrack)
        steps = [step] + result.steps
        if result.dead and may_backtrack:
            # one level up, once per path: re-ask without the options that died
            retry = self._request(subquery, nodes, parent, top, exclude=frozenset(resp.selected))
            if retry is not None:
                req2, _ = retry
                resp2 = choose(req2, self.backend)
                steps.append(NavStep(level, at, req2.ids, list(resp2.selected), len(resp2.selected) > 1, True))
                if not resp2.abstained:
                    again = self._follow(subquery, nodes, parent, resp2.selected, False)
                    return _Branch(again.paths, steps + again.steps, again.dead)
        return _Branch(result.paths, steps, result.dead)

    def _follow(self, subquery: str, nodes: Sequence[TreeNode], parent: TreeNode | None,
                selected: Sequence[str], may_backtrack: bool) -> _Branch:
        by_value = {n.value: n for n in nodes}

        def explore(sid: str) -> _Branch:
            if sid == STOP:
                return _Branch([parent.path], [], False)
            node = by_value[sid]
            if node.is_leaf:
                return _Branch([node.path], [], False)
            return self._descend(subquery, node.children, node, top=False, may_backtrack=may_backtrack)

        branches = parallel_map(explore, list(selected))
        paths = [p for b in branches if not b.dead for p in b.paths]
        steps = [s for b in branches for s in b.steps]
        return _Branch(paths, steps, all(b.dead for b in branches))


def navigate(subquery: str, db: ChannelDatabase, backend: SelectorBackend, branch_cap: int = DEFAULT_BRANCH_CAP) -> NavTrace:
    return Navigator(db, backend, branch_cap).navigate(subquery)


def find_hierarchical(
    query: str,
    db: ChannelDatabase,
    backend: SelectorBackend,
    *,
    split: bool = True,
    branch_cap: int = DEFAULT_BRANCH_CAP,
    abstain: bool = True,
) -> FinderResult:
    start = backend.calls_used
    subqueries = decompose(query, backend) if split else [query]
    nav = Navigator(db, backend, branch_cap, abstain=abstain)

    def run(sq: str) -> SubResult:
        trace = nav.navigate(sq)
        addresses = [assemble_address(p, db.schema) for p in trace.paths]
        valid, _ = db.validate(addresses)
        valid = _honor_intent(sq, valid, db)
        return SubResult(sq, valid, not valid, trace.selector_calls, trace)

    subresults = parallel_map(run, subqueries)
    return merge(query, subresults, backend.calls_used - start, "tree")


_DIRECTIONAL = {SuffixRole.SETPOINT, SuffixRole.READBACK, SuffixRole.COMMAND}


def _honor_intent(subquery: str, addresses: list[str], db: ChannelDatabase) -> list[str]:
    """Drop opposite-direction suffixes picked up by side branches, provided
    at least one channel of the requested direction was found."""
    intent = verb_intent(subquery)
    if intent is None:
        return addresses
    roles = {a: db.get(a).suffix_role for a in addresses}
    if not any(r.value == intent for r in roles.values()):
        return addresses
    return [a for a in addresses if roles[a].value == intent or roles[a] not in _DIRECTIONAL]
