"""Map plain-language operator requests to control-system channel addresses.

Four ways of finding channels share one database model and one decision
boundary (:mod:`chanfind.selector`):

* :func:`find_direct` puts the whole named dictionary in front of the selector;
* :func:`find_hierarchical` walks the naming hierarchy level by level;
* :func:`find_explorer` and :func:`find_middlelayer` run tool-using agents;
* :func:`find_ontology` fills graph-query templates over a triple store.

Every paradigm validates its answer against the ground-truth data, so an
address that does not exist is never returned.
"""
from .channeldb import ChannelDatabase, ChannelRecord, HierarchySchema, SuffixRole, load_database, load_database_file
from .direct import find_direct
from .errors import ChanfindError
from .explorer import find_explorer
from .hierarchical import find_hierarchical
from .middlelayer import MmlTree, find_middlelayer, load_tree, load_tree_file
from .ontology import TripleStore, find_ontology, load_graph, load_graph_file
from .results import FinderResult, SubResult
from .selector import LexicalOracle, RemoteLLM, SelectorBackend, make_backend

__version__ = "0.1.0"

__all__ = [
    "ChanfindError",
    "ChannelDatabase",
    "ChannelRecord",
    "FinderResult",
    "HierarchySchema",
    "LexicalOracle",
    "MmlTree",
    "RemoteLLM",
    "SelectorBackend",
    "SubResult",
    "SuffixRole",
    "TripleStore",
    "find_direct",
    "find_explorer",
    "find_hierarchical",
    "find_middlelayer",
    "find_ontology",
    "load_database",
    "load_database_file",
    "load_graph",
    "load_graph_file",
    "load_tree",
    "load_tree_file",
    "make_backend",
]
