"""``chanfind`` command line: one subcommand per paradigm plus bench,
inspect, repl and gen.

Exit status is 0 when channels were found, 2 when the finder abstained and
1 on any error.
"""
from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence, TextIO

import click
import yaml

from .channeldb import ChannelDatabase, TreeNode, load_database
from .errors import ChanfindError, ConfigError
from .results import FinderResult
from .selector import SelectorBackend, make_backend
from .sources import (
    BUILTIN_NAMES,
    DEFAULT_SOURCE,
    PARADIGMS,
    builtin_document,
    describer,
    load_source,
    make_finder,
)

EXIT_OK, EXIT_ERROR, EXIT_ABSTAIN = 0, 1, 2
BACKENDS = ("oracle", "llm")


@dataclass
class Settings:
    """Values from ``--config``; command-line flags take precedence."""

    backend: str = "oracle"
    backend_options: dict[str, Any] = field(default_factory=dict)
    sources: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_SOURCE))
    options: dict[str, dict[str, Any]] = field(default_factory=dict)
    paradigm: str = "tree"
    as_json: bool = False

    @classmethod
    def load(cls, path: str | None, as_json: bool = False) -> "Settings":
        s = cls(as_json=as_json)
        if not path:
            return s
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh) or {}
        if not isinstance(doc, Mapping):
            raise ConfigError(f"{path}: config must be a mapping")
        unknown = set(doc) - {"backend", "backend_options", "sources", "options", "paradigm"}
        if unknown:
            raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
        s.backend = str(doc.get("backend", s.backend))
        s.backend_options = dict(doc.get("backend_options") or {})
        s.sources.update({str(k): str(v) for k, v in (doc.get("sources") or {}).items()})
        s.options = {str(k): dict(v or {}) for k, v in (doc.get("options") or {}).items()}
        s.paradigm = str(doc.get("paradigm", s.paradigm))
        if s.paradigm not in PARADIGMS:
            raise ConfigError(f"{path}: paradigm must be one of {', '.join(PARADIGMS)}")
        return s

    def make_backend(self, kind: str | None = None) -> SelectorBackend:
        try:
            return make_backend(kind or self.backend, **self.backend_options)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def source_for(self, paradigm: str, override: str | None = None) -> str:
        return override or self.sources.get(paradigm) or DEFAULT_SOURCE[paradigm]


class _Group(click.Group):
    """Turns library errors into a one-line message and exit status 1."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except (ChanfindError, OSError, yaml.YAMLError) as exc:
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            ctx.exit(EXIT_ERROR)


# -- output helpers --------------------------------------------------------------

def trace_text(result: FinderResult) -> str:
    from .explorer import format_trace
    from .hierarchical import NavTrace

    lines = []
    for sr in result.subresults:
        lines.append(f"sub-query: {sr.query}")
        t = sr.trace
        if isinstance(t, NavTrace):
            lines.append(t.format())
        elif isinstance(t, list) and t:
            lines.append(format_trace(t))
        elif isinstance(t, str):
            lines.append(t)
        tail = f"  selector calls: {sr.selector_calls}"
        if sr.error:
            tail += f", error: {sr.error}"
        lines.append(tail)
    return "\n".join(lines)


def render_result(result: FinderResult, describe: Callable[[str], str], *, as_json: bool, trace: bool) -> str:
    if as_json:
        doc = result.to_dict()
        doc["descriptions"] = {a: describe(a) for a in result.channels}
        if trace:
            doc["trace"] = trace_text(result)
        return json.dumps(doc, indent=2, sort_keys=True)
    lines = [f"{a}  {describe(a)}".rstrip() for a in result.channels]
    if result.abstained:
        lines.append("no matching channels (abstained)")
    if trace:
        lines.append(trace_text(result))
    return "\n".join(lines)


def _finish(result: FinderResult, source: Any, settings: Settings, trace: bool) -> None:
    click.echo(render_result(result, describer(source), as_json=settings.as_json, trace=trace))
    sys.exit(EXIT_ABSTAIN if result.abstained else EXIT_OK)


def _find(ctx: click.Context, paradigm: str, source_spec: str | None, query: str, backend: str | None,
          trace: bool, **options: Any) -> None:
    settings: Settings = ctx.obj
    source = load_source(settings.source_for(paradigm, source_spec), paradigm)
    opts = {**settings.options.get(paradigm, {}), **{k: v for k, v in options.items() if v is not None}}
    finder = make_finder(paradigm, source, opts)
    _finish(finder(query, settings.make_backend(backend)), source, settings, trace)


# -- inspection ------------------------------------------------------------------

@dataclass(frozen=True)
class NodeSummary:
    level: str
    value: str
    description: str
    count: int
    depth: int


def _count(node: TreeNode) -> int:
    n = 1 if node.record is not None else 0
    return n + sum(_count(c) for c in node.children)


def summarize(db: ChannelDatabase, prefix: Sequence[str] = (), depth: int = 1) -> tuple[int, list[NodeSummary]]:
    """Channel total under ``prefix`` and the nodes ``depth`` levels below it."""
    if prefix:
        tops = db.subtree(prefix)
        total = sum(_count(n) for n in tops)
        frontier = [c for n in tops for c in n.children]
    else:
        total, frontier = len(db), list(db.roots)
    rows: list[NodeSummary] = []

    def walk(nodes: Sequence[TreeNode], d: int) -> None:
        for n in nodes:
            rows.append(NodeSummary(n.level, n.value, n.description, _count(n), d))
            if d + 1 < depth:
                walk(n.children, d + 1)

    walk(frontier, 0)
    return total, rows


def inspect_text(db: ChannelDatabase, prefix: Sequence[str] = (), depth: int = 1) -> str:
    if prefix:
        nodes = db.subtree(prefix)
        if len(nodes) == 1 and nodes[0].is_leaf and nodes[0].record is not None:
            r = nodes[0].record
            lines = [f"address: {r.address}", f"name: {r.name or '-'}", f"description: {r.description}",
                     f"role: {r.suffix_role.value}"]
            lines += [f"  {lvl}: {val}" for lvl, val in r.path]
            return "\n".join(lines)
    total, rows = summarize(db, prefix, depth)
    where = "/".join(prefix) or "(root)"
    lines = [f"{where}: {total} channels"]
    for row in rows:
        pad = "  " * (row.depth + 1)
        lines.append(f"{pad}{row.value}  [{row.level}]  {row.count}  {row.description}")
    return "\n".join(lines)


# -- REPL ------------------------------------------------------------------------

REPL_HELP = """commands:
  :paradigm NAME   switch paradigm (direct, tree, explore, mml, onto)
  :trace on|off    show the decision trace after each answer
  :quit            leave
anything else is a query"""


class Repl:
    """Line-oriented session; the loaded sources are never modified."""

    def __init__(self, settings: Settings, paradigm: str, backend: str | None = None,
                 source: str | None = None, out: TextIO | None = None):
        self.settings = settings
        self.backend = settings.make_backend(backend)
        self.trace = False
        self.out = out or sys.stdout
        self._overrides = {paradigm: source} if source else {}
        self._finders: dict[str, tuple[Any, Any]] = {}
        self.paradigm = paradigm
        self._load(paradigm)

    def _load(self, paradigm: str) -> None:
        if paradigm not in PARADIGMS:
            raise ConfigError(f"unknown paradigm {paradigm!r}; choose from {', '.join(PARADIGMS)}")
        if paradigm not in self._finders:
            spec = self.settings.source_for(paradigm, self._overrides.get(paradigm))
            source = load_source(spec, paradigm)
            finder = make_finder(paradigm, source, self.settings.options.get(paradigm, {}))
            self._finders[paradigm] = (source, finder)
        self.paradigm = paradigm

    def say(self, text: str) -> None:
        print(text, file=self.out)

    def handle(self, line: str) -> bool:
        """Process one input line; False once the session should end."""
        line = line.strip()
        if not line:
            return True
        if line.startswith(":"):
            cmd, _, arg = line[1:].partition(" ")
            arg = arg.strip()
            if cmd in ("quit", "q", "exit"):
                return False
            if cmd == "paradigm":
                if not arg:
                    self.say(f"paradigm: {self.paradigm}")
                else:
                    try:
                        self._load(arg)
                        self.say(f"paradigm: {self.paradigm}")
                    except ChanfindError as exc:
                        self.say(f"error: {exc}")
            elif cmd == "trace":
                if arg not in ("on", "off", ""):
                    self.say("usage: :trace on|off")
                else:
                    self.trace = (arg or ("off" if self.trace else "on")) == "on"
                    self.say(f"trace: {'on' if self.trace else 'off'}")
            elif cmd == "help":
                self.say(REPL_HELP)
            else:
                self.say(f"unknown command :{cmd} (try :help)")
            return True
        source, finder = self._finders[self.paradigm]
        try:
            result = finder(line, self.backend.spawn())
        except (ChanfindError, ValueError) as exc:
            self.say(f"error: {type(exc).__name__}: {exc}")
            return True
        self.say(render_result(result, describer(source), as_json=self.settings.as_json, trace=self.trace))
        return True

    def run(self, lines: TextIO, prompt: bool = False) -> None:
        while True:
            if prompt:
                self.out.write(f"chanfind[{self.paradigm}]> ")
                self.out.flush()
            line = lines.readline()
            if not line or not self.handle(line):
                break


# -- commands --------------------------------------------------------------------

backend_option = click.option("--backend", type=click.Choice(BACKENDS), default=None,
                              help="Decision backend (default from config, else oracle).")
trace_option = click.option("--trace", is_flag=True, help="Print the decision trace.")
query_option = click.option("--query", "-q", required=True, help="Natural-language request.")


@click.group(cls=_Group)
@click.option("--config", type=click.Path(exists=True, dir_okay=False), help="YAML settings file.")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
@click.version_option(package_name="artifact", prog_name="chanfind")
@click.pass_context
def main(ctx: click.Context, config: str | None, as_json: bool) -> None:
    """Find control-system channels from plain-language requests."""
    ctx.obj = Settings.load(config, as_json)


@main.command()
@click.option("--db", help="Database file or builtin:NAME.")
@query_option
@backend_option
@trace_option
@click.pass_context
def direct(ctx, db, query, backend, trace):
    """Look the request up against the whole channel dictionary."""
    _find(ctx, "direct", db, query, backend, trace)


@main.command()
@click.option("--db", help="Database file or builtin:NAME.")
@query_option
@backend_option
@trace_option
@click.option("--branch-cap", type=int, default=None, help="Most options followed at one level.")
@click.pass_context
def tree(ctx, db, query, backend, trace, branch_cap):
    """Descend the naming hierarchy one level at a time."""
    _find(ctx, "tree", db, query, backend, trace, branch_cap=branch_cap)


@main.command()
@click.option("--db", help="Database file or builtin:NAME.")
@query_option
@backend_option
@trace_option
@click.option("--k", type=int, default=None, help="Candidates returned by guess_addresses.")
@click.option("--max-iterations", type=int, default=None)
@click.pass_context
def explore(ctx, db, query, backend, trace, k, max_iterations):
    """Let a tool-using agent explore the address components."""
    _find(ctx, "explore", db, query, backend, trace, k=k, max_iterations=max_iterations)


@main.command()
@click.option("--tree", "tree_file", help="Middle-layer tree file or builtin:mml.")
@query_option
@backend_option
@trace_option
@click.option("--library", type=click.Path(exists=True, dir_okay=False), help="Example library file.")
@click.option("--keywords", type=click.Path(exists=True, dir_okay=False), help="Keyword map file.")
@click.pass_context
def mml(ctx, tree_file, query, backend, trace, library, keywords):
    """Navigate a middle-layer tree with the seven read-only tools."""
    from .middlelayer import KeywordMap, load_library

    options: dict[str, Any] = {}
    if library:
        with open(library, encoding="utf-8") as fh:
            options["library"] = load_library(fh.read())
    if keywords:
        with open(keywords, encoding="utf-8") as fh:
            options["keyword_map"] = KeywordMap.from_dict(yaml.safe_load(fh))
    _find(ctx, "mml", tree_file, query, backend, trace, **options)


@main.command()
@click.option("--graph", help="Triple file or builtin:onto-a / builtin:onto-b.")
@click.option("--query", "-q", help="Natural-language request.")
@click.option("--sparql", help="Graph query to run as-is.")
@backend_option
@trace_option
@click.pass_context
def onto(ctx, graph, query, sparql, backend, trace):
    """Answer from a triple graph through query templates."""
    from .ontology import run_query

    if bool(query) == bool(sparql):
        raise click.UsageError("give exactly one of --query or --sparql")
    if query:
        _find(ctx, "onto", graph, query, backend, trace)
    settings: Settings = ctx.obj
    store = load_source(settings.source_for("onto", graph), "onto")
    rows = run_query(sparql, store)
    if settings.as_json:
        click.echo(json.dumps({"rows": [list(r) for r in rows]}, indent=2))
    else:
        for r in rows:
            click.echo("\t".join(r))
        if not rows:
            click.echo("no results")
    sys.exit(EXIT_OK if rows else EXIT_ABSTAIN)


@main.command()
@click.option("--cases", required=True, type=click.Path(exists=True, dir_okay=False), help="Case file.")
@click.option("--paradigm", type=click.Choice(PARADIGMS), required=True)
@click.option("--db", help="Source for the paradigm (file or builtin:NAME).")
@backend_option
@click.option("--report", type=click.Path(dir_okay=False), help="Write the JSON report here.")
@click.option("--parallelism", type=int, default=1, show_default=True)
@click.option("--timing", is_flag=True, help="Include wall-clock times in the report.")
@click.pass_context
def bench(ctx, cases, paradigm, db, backend, report, parallelism, timing):
    """Run a case file and score it."""
    from .bench import FinderConfig, load_cases_file, run_benchmark

    settings: Settings = ctx.obj
    loaded = load_cases_file(cases)
    source = load_source(settings.source_for(paradigm, db), paradigm)
    config = FinderConfig(paradigm, source, settings.make_backend(backend), settings.options.get(paradigm, {}))
    rep = run_benchmark(loaded.cases, config, suite=loaded.name or os.path.basename(cases),
                        synthetic=loaded.synthetic, parallelism=parallelism)
    text = rep.to_json(timing=timing)
    if report:
        with open(report, "w", encoding="utf-8") as fh:
            fh.write(text)
    if settings.as_json:
        click.echo(text, nl=False)
    else:
        click.echo(rep.summary())
        click.echo("selector calls: " + ", ".join(f"{k}x{v}" for k, v in rep.call_histogram.items()))


@main.command()
@click.option("--db", help="Database file or builtin:NAME (default builtin:tutorial).")
@click.option("--depth", type=int, default=1, show_default=True, help="Levels listed below the prefix.")
@click.argument("prefix", nargs=-1)
@click.pass_context
def inspect(ctx, db, prefix, depth):
    """Show the tree under PREFIX (level values, outermost first) with channel counts."""
    settings: Settings = ctx.obj
    database = load_source(settings.source_for("tree", db), "tree")
    if not isinstance(database, ChannelDatabase):
        raise ConfigError("inspect needs a channel database")
    if settings.as_json:
        total, rows = summarize(database, prefix, depth)
        click.echo(json.dumps({"prefix": list(prefix), "channels": total,
                               "nodes": [r.__dict__ for r in rows]}, indent=2))
    else:
        click.echo(inspect_text(database, prefix, depth))


@main.command()
@click.option("--paradigm", type=click.Choice(PARADIGMS), default=None)
@click.option("--db", "source", help="Source for the starting paradigm.")
@backend_option
@click.pass_context
def repl(ctx, paradigm, source, backend):
    """Interactive session: one query per line, :help for commands."""
    settings: Settings = ctx.obj
    session = Repl(settings, paradigm or settings.paradigm, backend, source, out=sys.stdout)
    stdin = click.get_text_stream("stdin")
    session.run(stdin, prompt=stdin.isatty())


@main.group()
def gen():
    """Generate databases, names and benchmark case files."""


@gen.command("db")
@click.argument("name", type=click.Choice(BUILTIN_NAMES))
@click.option("--out", type=click.Path(dir_okay=False), help="Output file (default stdout).")
def gen_db(name, out):
    """Write a built-in data set in its file format."""
    _write(builtin_document(name), out)


@gen.command("cases")
@click.option("--source", required=True, help="File or builtin:NAME the cases are drawn from.")
@click.option("--paradigm", type=click.Choice(PARADIGMS), default="tree", show_default=True,
              help="Decides how a source file is read.")
@click.option("--n", "count", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--difficulty", type=click.Choice(["verbatim", "paraphrase", "adversarial"]), default="verbatim",
              show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
def gen_cases(source, paradigm, count, seed, difficulty, out):
    """Write a synthetic case file with known answers."""
    from .bench import dump_cases, generate_synthetic_benchmark

    src = load_source(source, paradigm)
    try:
        cases = generate_synthetic_benchmark(src, count, seed, difficulty)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    suite = f"synthetic-{difficulty}-{count}"
    _write(dump_cases(cases, suite, {"synthetic": True, "source": source, "seed": seed}), out)


@gen.command("names")
@click.option("--db", "db_file", required=True, type=click.Path(exists=True, dir_okay=False))
@backend_option
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
def gen_names(ctx, db_file, backend, out):
    """Add generated names for unnamed records to a database file."""
    from .direct import with_generated_names

    settings: Settings = ctx.obj
    with open(db_file, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    named = with_generated_names(load_database(doc), settings.make_backend(backend))
    names = dict(doc.get("names") or {})
    names.update({r.address: r.name for r in named if r.name})
    doc["names"] = names
    _write(yaml.safe_dump(doc, sort_keys=False, width=120, allow_unicode=True), out)


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":  # pragma: no cover
    main()
