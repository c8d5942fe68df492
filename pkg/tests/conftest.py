from __future__ import annotations

import pytest

from chanfind import synthetic
from chanfind.channeldb import load_database
from chanfind.explorer import ExplorerIndex
from chanfind.middlelayer import synthetic_tree
from chanfind.ontology import toy_graphs
from chanfind.selector import LexicalOracle
from chanfind.sources import load_source


@pytest.fixture(scope="session")
def tutorial_db():
    return load_database(synthetic.tutorial_config())


@pytest.fixture(scope="session")
def tutorial_x10_db():
    return load_database(synthetic.tutorial_config(10))


@pytest.fixture(scope="session")
def vacuum_db():
    return load_database(synthetic.vacuum_device_config())


@pytest.fixture(scope="session")
def fel_db():
    """The FEL dictionary with generated names."""
    return load_source("builtin:fel", "direct")


@pytest.fixture(scope="session")
def xfel_db():
    return load_database(synthetic.xfel_config())


@pytest.fixture(scope="session")
def xfel_index(xfel_db):
    return ExplorerIndex.from_database(xfel_db)


@pytest.fixture(scope="session")
def mml_tree():
    return synthetic_tree()


@pytest.fixture(scope="session")
def graphs():
    return toy_graphs()


@pytest.fixture
def oracle():
    return LexicalOracle()


_VERDICTS = pytest.StashKey[dict]()


@pytest.fixture
def verdict(request):
    """Record a one-line pass/fail for an acceptance criterion."""
    store = request.config.stash.setdefault(_VERDICTS, {})

    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        store[number] = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
        print(store[number])

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_VERDICTS, {})
    if store:
        terminalreporter.section("acceptance")
        for n in sorted(store):
            terminalreporter.write_line(store[n])
