"""Test plugin: an action that always fails, recording the stack depth it saw."""

from ruleblocks.actions import Action

DEPTHS = []


class Explode(Action):
    def __init__(self, params, source=None):
        pass

    def perform(self, block, user_object, ctx):
        DEPTHS.append(len(ctx.stack))
        raise RuntimeError("deliberate failure")


def register(registry):
    registry.register_action("harness.explode", Explode)
