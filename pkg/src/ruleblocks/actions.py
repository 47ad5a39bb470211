"""Action extension points.

An action fires on a block and receives the current user object. Rule-set
hooks use the same registry: ``pre`` creates the user object for an inner
rule set, ``post`` writes it back to the parent.
"""

from __future__ import annotations

from typing import Any, Callable, Mapping

from .context import Block, ExtractionContext
from .selectors import SelectorSpec


class Action:
    """Base class for rule actions.

    ``perform`` may return a replacement user object; when it does, the
    rule's inner rule set (if any) inherits that object instead.
    """

    def perform(self, block: Block, user_object: Any, ctx: ExtractionContext) -> Any:
        raise NotImplementedError


class PreAction:
    def pre(self, parent: Any, block: Block | None, ctx: ExtractionContext) -> Any:
        raise NotImplementedError


class PostAction:
    def post(self, parent: Any, child: Any, block: Block | None, ctx: ExtractionContext) -> None:
        raise NotImplementedError


ActionFactory = Callable[[Mapping[str, str], "SelectorSpec | None"], Any]


def parse_bool(value: str, name: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError(f"parameter {name!r} must be true or false, got {value!r}")


def check_params(params: Mapping[str, str], required=(), optional=()) -> None:
    missing = [k for k in required if k not in params]
    if missing:
        raise ValueError(f"missing parameter(s): {', '.join(missing)}")
    unknown = sorted(set(params) - set(required) - set(optional))
    if unknown:
        raise ValueError(f"unknown parameter(s): {', '.join(unknown)}")
