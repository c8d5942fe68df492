"""A small ReAct loop: a policy proposes an action, a tool runs, the
observation goes back to the policy.

Two policies drive the loop. :class:`ScriptedPolicy` wraps a generator
that yields actions and receives raw tool results; the offline agents are
written this way, with every judgement call routed through the selector
backend. :class:`LLMPolicy` asks the backend for a structured
``{thought, action}`` document at every turn.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable, Generator, Mapping, Sequence

from .errors import BudgetExhausted, ChanfindError, IterationLimitExceeded, UnknownTool
from .selector import SelectorBackend, complete_structured

FINISH = "finish"
DEFAULT_MAX_ITERATIONS = 20


@dataclass
class AgentStep:
    thought: str
    tool: str
    args: dict[str, Any]
    observation: str


@dataclass(frozen=True)
class Action:
    tool: str
    args: Mapping[str, Any] = field(default_factory=dict)
    thought: str = ""


@dataclass(frozen=True)
class Tool:
    name: str
    description: str
    fn: Callable[..., Any]
    params: Mapping[str, Any] = field(default_factory=dict)  # name -> JSON schema
    required: tuple[str, ...] = ()

    def args_schema(self) -> dict[str, Any]:
        return {
            "type": "object",
            "properties": dict(self.params),
            "required": list(self.required),
            "additionalProperties": False,
        }


class ToolRegistry:
    """The closed set of tools an agent may call. Nothing else is reachable."""

    def __init__(self, tools: Sequence[Tool]):
        self.tools = {t.name: t for t in tools}
        if FINISH in self.tools:
            raise ValueError(f"{FINISH!r} is reserved")

    @property
    def names(self) -> list[str]:
        return list(self.tools)

    def call(self, name: str, args: Mapping[str, Any]) -> Any:
        tool = self.tools.get(name)
        if tool is None:
            raise UnknownTool(f"no tool named {name!r}; available: {', '.join(self.tools)}")
        return tool.fn(**dict(args))

    def describe(self) -> str:
        lines = []
        for t in self.tools.values():
            params = ", ".join(f"{p}{'' if p in t.required else '?'}" for p in t.params)
            lines.append(f"- {t.name}({params}): {t.description}")
        lines.append(f"- {FINISH}(channels): stop and return the listed channel addresses")
        return "\n".join(lines)

    def action_schema(self) -> dict[str, Any]:
        variants = [
            {
                "type": "object",
                "properties": {"tool": {"type": "string", "enum": [t.name]}, "args": t.args_schema()},
                "required": ["tool", "args"],
                "additionalProperties": False,
            }
            for t in self.tools.values()
        ]
        variants.append({
            "type": "object",
            "properties": {
                "tool": {"type": "string", "enum": [FINISH]},
                "args": {
                    "type": "object",
                    "properties": {"channels": {"type": "array", "items": {"type": "string"}}},
                    "required": ["channels"],
                    "additionalProperties": False,
                },
            },
            "required": ["tool", "args"],
            "additionalProperties": False,
        })
        return {
            "type": "object",
            "properties": {"thought": {"type": "string"}, "action": {"anyOf": variants}},
            "required": ["thought", "action"],
            "additionalProperties": False,
        }


def render(result: Any) -> str:
    """Observation text for a tool result."""
    if isinstance(result, str):
        return result
    return json.dumps(result, sort_keys=True, default=str)


class Policy:
    def start(self, query: str) -> None:
        raise NotImplementedError

    def next_action(self, steps: Sequence[AgentStep], last_result: Any) -> Action:
        raise NotImplementedError


Script = Callable[[str], Generator[Action, Any, None]]


class ScriptedPolicy(Policy):
    def __init__(self, script: Script):
        self.script = script
        self._gen: Generator[Action, Any, None] | None = None

    def start(self, query: str) -> None:
        self._gen = self.script(query)
        self._primed = False

    def next_action(self, steps: Sequence[AgentStep], last_result: Any) -> Action:
        assert self._gen is not None, "start() first"
        try:
            if not self._primed:
                self._primed = True
                return next(self._gen)
            return self._gen.send(last_result)
        except StopIteration:
            return Action(FINISH, {"channels": []}, "nothing more to try")


class LLMPolicy(Policy):
    def __init__(self, backend: SelectorBackend, registry: ToolRegistry, system_prompt: str):
        self.backend = backend
        self.registry = registry
        self.system_prompt = system_prompt
        self.query = ""

    def start(self, query: str) -> None:
        self.query = query

    def prompt(self, steps: Sequence[AgentStep]) -> str:
        lines = ["Tools:", self.registry.describe(), "", f"Request: {self.query}"]
        for i, s in enumerate(steps, 1):
            lines.append(f"Step {i}: thought: {s.thought}")
            lines.append(f"  action: {s.tool} {json.dumps(s.args, sort_keys=True)}")
            lines.append(f"  observation: {s.observation}")
        lines.append("Decide the next action.")
        return "\n".join(lines)

    def next_action(self, steps: Sequence[AgentStep], last_result: Any) -> Action:
        doc = complete_structured(self.prompt(steps), self.registry.action_schema(), self.backend, self.system_prompt)
        action = doc["action"]
        return Action(action["tool"], action.get("args", {}), doc.get("thought", ""))


@dataclass
class LoopOutcome:
    channels: list[str]
    steps: list[AgentStep]
    error: str | None = None

    @property
    def tool_calls(self) -> int:
        return sum(1 for s in self.steps if s.tool != FINISH)


def run_loop(query: str, registry: ToolRegistry, policy: Policy,
             max_iterations: int = DEFAULT_MAX_ITERATIONS) -> LoopOutcome:
    """Run until the policy finishes; raises :class:`IterationLimitExceeded`
    (carrying the partial trace as ``.steps``) when it never does."""
    if max_iterations < 1:
        raise ValueError("max_iterations must be at least 1")
    policy.start(query)
    steps: list[AgentStep] = []
    result: Any = None
    while len(steps) < max_iterations:
        action = policy.next_action(steps, result)
        args = dict(action.args)
        if action.tool == FINISH:
            steps.append(AgentStep(action.thought, FINISH, args, "done"))
            return LoopOutcome([str(c) for c in args.get("channels", [])], steps)
        try:
            result = registry.call(action.tool, args)
            observation = render(result)
        except BudgetExhausted:
            raise
        except ChanfindError as exc:  # unknown tool, unknown component, ...
            result, observation = exc, f"error: {type(exc).__name__}: {exc}"
        except TypeError as exc:  # bad arguments from the policy
            result, observation = exc, f"error: bad arguments: {exc}"
        steps.append(AgentStep(action.thought, action.tool, args, observation))
    exc = IterationLimitExceeded(f"no answer within {max_iterations} steps")
    exc.steps = steps  # type: ignore[attr-defined]
    raise exc
