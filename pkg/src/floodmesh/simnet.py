"""Deterministic round-based stand-in for the Wi-Fi medium.

Every round starts with a listen window in which each up node handles
its pending serial input.  After ``cycle_period_ms`` plus one mode-switch
delay the nodes take turns, in name order, transmitting the head of their
outbound queue; each exchange is a blocking request/reply that runs the
receiver's request handler immediately and adds the link latency to the
clock.  A second mode-switch delay closes the round.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .node import Node, NodeConfig
from .telemetry import EventKind, EventLog, EventRecord, Metrics, summarize
from .wire import MSG_TAG, MessageId, NodeName, WireError

# Printable ASCII minus the field delimiter: what a body may contain.
BODY_ALPHABET = "".join(chr(c) for c in range(0x20, 0x7F) if chr(c) != "|")
HEX_DIGITS = "0123456789abcdef"


@dataclass
class LinkParams:
    loss: float = 0.0
    corrupt: float = 0.0
    latency_ms: int = 10

    def __post_init__(self) -> None:
        if not 0.0 <= self.loss <= 1.0:
            raise ValueError(f"loss {self.loss} outside [0, 1]")
        if not 0.0 <= self.corrupt <= 1.0:
            raise ValueError(f"corrupt {self.corrupt} outside [0, 1]")
        if self.latency_ms < 0:
            raise ValueError(f"latency {self.latency_ms} is negative")


@dataclass
class SimNode:
    state: Node
    x: float
    y: float
    range: float
    up: bool = True
    pending_inbox: list[str] = field(default_factory=list)
    pending_serial: list[str] = field(default_factory=list)

    @property
    def name(self) -> NodeName:
        return self.state.name


@dataclass(frozen=True)
class ScriptEvent:
    at_ms: int
    node: NodeName
    kind: str  # serial | move | down | up
    line: str = ""
    x: float = 0.0
    y: float = 0.0


@dataclass
class TrafficGenerator:
    node: NodeName
    target: NodeName
    period_ms: int
    body: str
    next_fire_ms: int = -1

    def __post_init__(self) -> None:
        if self.period_ms <= 0:
            raise ValueError("traffic period must be positive")
        if self.next_fire_ms < 0:
            self.next_fire_ms = self.period_ms


class _Radio:
    __slots__ = ("world", "name")

    def __init__(self, world: World, name: NodeName):
        self.world = world
        self.name = name

    def scan(self) -> list[NodeName]:
        return self.world.scan(self.name)

    def exchange(self, dst: NodeName, payload: str) -> str | None:
        return self.world.exchange(self.name, dst, payload)


def _payload_id(payload: str) -> MessageId | None:
    if not payload.startswith(MSG_TAG):
        return None
    try:
        return MessageId.parse(payload[len(MSG_TAG):].split("|", 1)[0])
    except WireError:
        return None


class World:
    def __init__(
        self,
        link: LinkParams | None = None,
        config: NodeConfig | None = None,
        seed: int = 42,
    ):
        self.link = link or LinkParams()
        self.config = config or NodeConfig()
        self.seed = seed
        self.rng = random.Random(seed)
        self.clock_ms = 0
        self.rounds = 0
        self.nodes: dict[NodeName, SimNode] = {}
        self.script: list[ScriptEvent] = []
        self.generators: list[TrafficGenerator] = []
        self.log = EventLog()
        self._next_script = 0

    # ----------------------------------------------------------- building

    def add_node(self, name: NodeName, x: float, y: float, range: float) -> SimNode:
        if name in self.nodes:
            raise ValueError(f"duplicate node {name}")
        state = Node(name, self.config, sink=self._sink_for(name))
        sim = SimNode(state, float(x), float(y), float(range))
        self.nodes[name] = sim
        self._record(name, EventKind.NODE_UP, None, "boot")
        return sim

    def add_event(self, e: ScriptEvent) -> None:
        if e.node not in self.nodes:
            raise KeyError(f"script event references unknown node {e.node}")
        self.script.append(e)
        # Stable: equal times keep insertion order.
        self.script[self._next_script:] = sorted(self.script[self._next_script:], key=lambda s: s.at_ms)

    def add_generator(self, g: TrafficGenerator) -> None:
        for ref in (g.node, g.target):
            if ref not in self.nodes:
                raise KeyError(f"traffic generator references unknown node {ref}")
        self.generators.append(g)

    def node(self, name: NodeName | str | int) -> Node:
        return self.nodes[as_name(name)].state

    def _sink_for(self, name: NodeName):
        def sink(kind: EventKind, msg: MessageId | None, detail: str) -> None:
            self._record(name, kind, msg, detail)

        return sink

    def _record(self, name: NodeName, kind: EventKind, msg: MessageId | None, detail: str) -> None:
        self.log.record(EventRecord(self.clock_ms, name, kind, msg, detail))

    # -------------------------------------------------------------- medium

    def in_range(self, a: SimNode, b: SimNode) -> bool:
        return math.hypot(a.x - b.x, a.y - b.y) <= min(a.range, b.range)

    def scan(self, who: NodeName) -> list[NodeName]:
        me = self.nodes[who]
        found = [
            other.name
            for other in self.nodes.values()
            if other.name != who and other.up and self.in_range(me, other)
        ]
        return sorted(found, key=lambda n: n.raw)

    def exchange(self, src: NodeName, dst: NodeName, payload: str) -> str | None:
        """One blocking connect/send/reply; ``None`` is a link failure."""
        a, b = self.nodes[src], self.nodes.get(dst)
        if b is None or not (a.up and b.up and self.in_range(a, b)):
            return None
        self._record(src, EventKind.TRANSMITTED, _payload_id(payload), f"to={dst}")
        self.clock_ms += self.link.latency_ms
        lost = self.rng.random() < self.link.loss
        corrupted = self.rng.random() < self.link.corrupt
        if lost:
            return None
        if corrupted:
            payload = self._corrupt(payload)
        return b.state.handle_request(payload)

    def _corrupt(self, payload: str) -> str:
        """Substitute one body character; the crc digits when the body is empty."""
        parts = payload.split("|")
        if len(parts) != 5:
            i = self.rng.randrange(len(payload))
            return payload[:i] + "\x00" + payload[i + 1:]
        index, alphabet = (3, BODY_ALPHABET) if parts[3] else (4, HEX_DIGITS)
        field_text = parts[index]
        i = self.rng.randrange(len(field_text))
        old = field_text[i].lower() if index == 4 else field_text[i]
        new = self.rng.choice([c for c in alphabet if c != old])
        parts[index] = field_text[:i] + new + field_text[i + 1:]
        return "|".join(parts)

    # ---------------------------------------------------------- scripting

    def apply_event(self, e: ScriptEvent) -> None:
        sim = self.nodes[e.node]
        if e.kind == "serial":
            sim.pending_serial.append(e.line)
        elif e.kind == "move":
            sim.x, sim.y = float(e.x), float(e.y)
        elif e.kind == "down":
            sim.up = False
            sim.pending_inbox.clear()
            self._record(e.node, EventKind.NODE_DOWN, None, "")
        elif e.kind == "up":
            sim.up = True
            sim.pending_inbox.clear()
            sim.state.reset()
            self._record(e.node, EventKind.NODE_UP, None, "reboot")
        else:
            raise ValueError(f"unknown script event kind {e.kind!r}")

    def inject_serial(self, name: NodeName | str | int, line: str) -> None:
        self.nodes[as_name(name)].pending_serial.append(line)

    def _apply_due(self) -> None:
        due: list[tuple[int, int, int, object]] = []
        while self._next_script < len(self.script) and self.script[self._next_script].at_ms <= self.clock_ms:
            e = self.script[self._next_script]
            due.append((e.at_ms, 0, self._next_script, e))
            self._next_script += 1
        for gi, g in enumerate(self.generators):
            while g.next_fire_ms <= self.clock_ms:
                due.append((g.next_fire_ms, 1, gi, g))
                g.next_fire_ms += g.period_ms
        due.sort(key=lambda d: d[:3])
        for _, _, _, item in due:
            if isinstance(item, ScriptEvent):
                self.apply_event(item)
            else:
                sim = self.nodes[item.node]
                if sim.up:
                    sim.pending_serial.append(f"{item.target.raw}@{item.body}")

    # ---------------------------------------------------------------- run

    @property
    def round_ms(self) -> int:
        """Nominal round length, excluding per-exchange latency."""
        return self.config.cycle_period_ms + 2 * self.config.mode_switch_delay_ms

    def step(self) -> list[EventRecord]:
        mark = len(self.log)
        self._apply_due()
        active = sorted((s for s in self.nodes.values() if s.up), key=lambda s: s.name.raw)
        for sim in active:
            inbox, serial = sim.pending_inbox, sim.pending_serial
            sim.pending_inbox, sim.pending_serial = [], []
            sim.state.listen(inbox, serial)
        self.clock_ms += self.config.cycle_period_ms + self.config.mode_switch_delay_ms
        for sim in active:
            sim.state.transmit(_Radio(self, sim.name))
        self.clock_ms += self.config.mode_switch_delay_ms
        self.rounds += 1
        return self.log[mark:]

    def run(self, duration_ms: int) -> tuple[EventLog, Metrics]:
        """Step while a whole nominal round still fits inside ``duration_ms``."""
        if duration_ms <= 0:
            raise ValueError("duration must be positive")
        while self.clock_ms + self.round_ms <= duration_ms:
            self.step()
        return self.log, summarize(self.log)

    def run_rounds(self, n: int) -> list[EventRecord]:
        mark = len(self.log)
        for _ in range(n):
            self.step()
        return self.log[mark:]


def as_name(name: NodeName | str | int) -> NodeName:
    if isinstance(name, NodeName):
        return name
    if isinstance(name, int):
        return NodeName(name)
    return NodeName.parse(name if name.startswith("Node") else "Node" + name)
