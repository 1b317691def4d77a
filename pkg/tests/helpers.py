import random

from floodmesh.node import NodeConfig
from floodmesh.simnet import LinkParams, ScriptEvent, World
from floodmesh.telemetry import EventKind
from floodmesh.wire import NodeName


def random_layout(rng: random.Random, n: int) -> dict[int, tuple[float, float, float]]:
    """n nodes scattered on a 100 m square with 20-45 m radios."""
    ids = rng.sample(range(1, 10_000), n)
    return {i: (rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(20, 45)) for i in ids}


def world_from_layout(layout, config=None, link=None, seed=42) -> World:
    w = World(link or LinkParams(), config or NodeConfig(), seed)
    for i, (x, y, r) in layout.items():
        w.add_node(NodeName(i), x, y, r)
    return w


def chain(n: int, spacing: float = 10, radio: float = 15, **kw) -> World:
    return world_from_layout({i + 1: (i * spacing, 0.0, radio) for i in range(n)}, **kw)


def inject(w: World, node: int, line: str, at: int = 0) -> None:
    w.add_event(ScriptEvent(at, NodeName(node), "serial", line))


def records(w: World, kind: EventKind, node: int | None = None):
    return [r for r in w.log if r.kind is kind and (node is None or r.node.number == node)]
