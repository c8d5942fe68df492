"""Named data sources and the per-paradigm finder factory.

A source is either a file path or ``builtin:<name>``; the built-ins are the
synthetic fixtures generated in :mod:`chanfind.synthetic`,
:mod:`chanfind.middlelayer` and :mod:`chanfind.ontology`.
"""
from __future__ import annotations

import os
from functools import lru_cache
from typing import Any, Callable, Mapping

from .channeldb import ChannelDatabase, load_database, load_database_file
from .errors import ConfigError
from .results import FinderResult
from .selector import SelectorBackend

PARADIGMS = ("direct", "tree", "explore", "mml", "onto")

Finder = Callable[[str, SelectorBackend], FinderResult]


def _builtin_databases() -> dict[str, Callable[[], Any]]:
    from . import synthetic as syn

    return {
        "tutorial": lambda: load_database(syn.tutorial_config()),
        "tutorial-x10": lambda: load_database(syn.tutorial_config(10)),
        "vacuum": lambda: load_database(syn.vacuum_device_config()),
        "fel": lambda: _named(load_database(syn.fel_config())),
        "fel-raw": lambda: load_database(syn.fel_config()),
        "xfel": lambda: load_database(syn.xfel_config()),
    }


def _named(db: ChannelDatabase) -> ChannelDatabase:
    # the legacy dictionary ships without names; they are generated once,
    # offline, the same way an operator would before first use
    from .direct import with_generated_names
    from .selector import LexicalOracle

    return with_generated_names(db, LexicalOracle(call_budget=1))


def _builtin_other() -> dict[str, Callable[[], Any]]:
    from .middlelayer import synthetic_tree
    from .ontology import toy_graphs

    return {
        "mml": synthetic_tree,
        "onto-a": lambda: toy_graphs()["a"],
        "onto-b": lambda: toy_graphs()["b"],
    }


BUILTIN_NAMES = ("tutorial", "tutorial-x10", "vacuum", "fel", "fel-raw", "xfel", "mml", "onto-a", "onto-b")
DEFAULT_SOURCE = {"direct": "builtin:fel", "tree": "builtin:tutorial", "explore": "builtin:xfel",
                  "mml": "builtin:mml", "onto": "builtin:onto-a"}


@lru_cache(maxsize=None)
def _load_builtin(name: str) -> Any:
    table = {**_builtin_databases(), **_builtin_other()}
    if name not in table:
        raise ConfigError(f"unknown built-in source {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    return table[name]()


def load_source(spec: str, paradigm: str) -> Any:
    """Database, middle-layer tree or triple store for ``paradigm``."""
    if paradigm not in PARADIGMS:
        raise ConfigError(f"unknown paradigm {paradigm!r}; choose from {', '.join(PARADIGMS)}")
    if spec.startswith("builtin:"):
        return _load_builtin(spec.split(":", 1)[1])
    if not os.path.exists(spec):
        raise ConfigError(f"no such file: {spec}")
    if paradigm == "mml":
        from .middlelayer import load_tree_file

        return load_tree_file(spec)
    if paradigm == "onto":
        from .ontology import load_graph_file

        return load_graph_file(spec)
    return load_database_file(spec)


def make_finder(paradigm: str, source: Any, options: Mapping[str, Any] | None = None) -> Finder:
    opts = dict(options or {})
    if paradigm == "direct":
        from .direct import find_direct

        _expect(source, ChannelDatabase, paradigm)
        unnamed = sum(1 for r in source if not r.name)
        if unnamed:
            raise ConfigError(f"{unnamed} records lack names; run `chanfind gen names` on the database first")
        return lambda q, b: find_direct(q, source, b, **opts)
    if paradigm == "tree":
        from .hierarchical import find_hierarchical

        _expect(source, ChannelDatabase, paradigm)
        return lambda q, b: find_hierarchical(q, source, b, **opts)
    if paradigm == "explore":
        from .explorer import ExplorerIndex, Limits, find_explorer

        _expect(source, ChannelDatabase, paradigm)
        index = ExplorerIndex.from_database(source)
        limits = Limits(k=int(opts.pop("k", 5)), max_iterations=int(opts.pop("max_iterations", 20)))
        glossary = dict(source.glossary)
        return lambda q, b: find_explorer(q, index, b, limits=limits, glossary=glossary, **opts)
    if paradigm == "mml":
        from .middlelayer import MmlTree, default_library, find_middlelayer

        _expect(source, MmlTree, paradigm)
        library = opts.pop("library", None) or default_library(source)
        return lambda q, b: find_middlelayer(q, source, b, library=library, **opts)
    if paradigm == "onto":
        from .ontology import TripleStore, find_ontology

        _expect(source, TripleStore, paradigm)
        return lambda q, b: find_ontology(q, source, b, **opts)
    raise ConfigError(f"unknown paradigm {paradigm!r}; choose from {', '.join(PARADIGMS)}")


def _expect(source: Any, kind: type, paradigm: str) -> None:
    if not isinstance(source, kind):
        raise ConfigError(f"the {paradigm} paradigm needs a {kind.__name__}, got {type(source).__name__}")


def builtin_document(name: str) -> str:
    """A built-in source serialised in the matching file format."""
    import yaml

    from . import synthetic as syn

    configs = {
        "tutorial": syn.tutorial_config,
        "tutorial-x10": lambda: syn.tutorial_config(10),
        "vacuum": syn.vacuum_device_config,
        "fel": syn.fel_config,
        "fel-raw": syn.fel_config,
        "xfel": syn.xfel_config,
    }
    if name in configs:
        doc = dict(configs[name]())
        if name == "fel":
            doc["names"] = {r.address: r.name for r in _load_builtin("fel")}
        return yaml.safe_dump(doc, sort_keys=False, width=120, allow_unicode=True)
    if name == "mml":
        from .middlelayer import dump_tree

        return dump_tree(_load_builtin(name))
    if name in ("onto-a", "onto-b"):
        from .ontology import dump_graph

        return dump_graph(_load_builtin(name))
    raise ConfigError(f"unknown built-in source {name!r}; choose from {', '.join(BUILTIN_NAMES)}")


def describer(source: Any) -> Callable[[str], str]:
    """Address -> short human description for whatever ``source`` is."""
    from .middlelayer import MmlTree
    from .ontology import ROLE_LABELS, TripleStore

    if isinstance(source, MmlTree):
        source = source.to_database()
    if isinstance(source, ChannelDatabase):
        db = source
        return lambda a: db.get(a).description if db.get(a) else ""
    if isinstance(source, TripleStore):
        store = source

        def describe(address: str) -> str:
            for t in store.match(s=f"pv:{address}"):
                if t.predicate in ROLE_LABELS:
                    return f"{ROLE_LABELS[t.predicate].split()[0]} of {t.object}"
            return ""

        return describe
    return lambda a: ""
