"""Rule-driven extraction of structured data from XML and zipped office documents."""

from .context import Block, EngineConfig, Event, ExtractionContext
from .docmodel import (
    DocumentTree,
    Fragment,
    Node,
    load_document,
    load_office_container,
    load_xml,
    resolve_style,
    text_of,
)
from .engine import apply_inner, build_blocks, run
from .errors import LoadError, PathSyntaxError, RuleBlocksError, RuleSetError, SetupError
from .pathlang import parse_path, parse_write_path
from .rulemodel import Registry, RuleSet, default_registry, load_ruleset, parse_params, register_builtin
from .xmlout import OutputCursor, new_cursor, serialize

__version__ = "0.1.0"

__all__ = [
    "Block",
    "DocumentTree",
    "EngineConfig",
    "Event",
    "ExtractionContext",
    "Fragment",
    "LoadError",
    "Node",
    "OutputCursor",
    "PathSyntaxError",
    "Registry",
    "RuleBlocksError",
    "RuleSet",
    "RuleSetError",
    "SetupError",
    "apply_inner",
    "build_blocks",
    "default_registry",
    "load_document",
    "load_office_container",
    "load_ruleset",
    "load_xml",
    "new_cursor",
    "parse_params",
    "parse_path",
    "parse_write_path",
    "register_builtin",
    "resolve_style",
    "run",
    "serialize",
    "text_of",
]
