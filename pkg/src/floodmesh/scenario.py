"""Line-oriented scenario files.

One directive per line, ``#`` starts a comment::

    node id=52126 x=0 y=0 range=50
    radio loss=0 corrupt=0 latency=10
    config ttl=8 cycle=1000 retention=30
    at t=0 node=14754480 serial="Node52126@set_led=6"
    at t=5000 node=1592748 move x=500 y=0
    at t=9000 node=1592748 down
    traffic node=14754480 target=52126 period=5000 body="set_led=3"
    run duration=60000 seed=42

Node ids are the bare digits; the ``Node`` prefix is implied.
"""

from __future__ import annotations

import dataclasses
import shlex
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .node import NodeConfig
from .simnet import LinkParams, ScriptEvent, TrafficGenerator, World
from .wire import NodeName, WireError

DEFAULT_DURATION_MS = 60_000
DEFAULT_SEED = 42

# Scenario key -> NodeConfig field.
CONFIG_KEYS = {
    "ttl": "ttl_default",
    "cycle": "cycle_period_ms",
    "retention": "sended_retention_cycles",
    "switch": "mode_switch_delay_ms",
    "retries": "broken_retry_limit",
    "cap": "per_queue_cap",
    "global_cap": "global_cap",
}


class ScenarioError(ValueError):
    def __init__(self, lineno: int, reason: str, source: str = "<scenario>"):
        super().__init__(f"{source}:{lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason
        self.source = source


@dataclass(frozen=True)
class NodeSpec:
    name: NodeName
    x: float
    y: float
    range: float


@dataclass
class Scenario:
    nodes: list[NodeSpec] = field(default_factory=list)
    link: LinkParams = field(default_factory=LinkParams)
    script: list[ScriptEvent] = field(default_factory=list)
    generators: list[TrafficGenerator] = field(default_factory=list)
    duration_ms: int = DEFAULT_DURATION_MS
    seed: int = DEFAULT_SEED
    overrides: dict[str, int] = field(default_factory=dict)

    def config(self) -> NodeConfig:
        return NodeConfig(**self.overrides)

    def build(self, seed: int | None = None) -> World:
        world = World(self.link, self.config(), self.seed if seed is None else seed)
        for spec in self.nodes:
            world.add_node(spec.name, spec.x, spec.y, spec.range)
        for e in self.script:
            world.add_event(e)
        for g in self.generators:
            world.add_generator(dataclasses.replace(g))
        return world


class _Line:
    """Tokens of one directive line with typed accessors."""

    def __init__(self, lineno: int, tokens: list[str]):
        self.lineno = lineno
        self.directive = tokens[0]
        self.words: list[str] = []
        self.pairs: dict[str, str] = {}
        for tok in tokens[1:]:
            key, sep, value = tok.partition("=")
            if sep:
                if key in self.pairs:
                    raise self.error(f"repeated key {key!r}")
                self.pairs[key] = value
            else:
                self.words.append(tok)

    def error(self, reason: str) -> ScenarioError:
        return ScenarioError(self.lineno, reason)

    def expect(self, required: set[str], optional: set[str] = frozenset()) -> None:
        missing = required - self.pairs.keys()
        if missing:
            raise self.error(f"{self.directive}: missing {', '.join(sorted(missing))}")
        unknown = self.pairs.keys() - required - optional
        if unknown:
            raise self.error(f"{self.directive}: unknown key {', '.join(sorted(unknown))}")

    def int(self, key: str) -> int:
        value = self.pairs[key]
        try:
            return int(value)
        except ValueError:
            raise self.error(f"{key}={value!r} is not an integer") from None

    def float(self, key: str) -> float:
        value = self.pairs[key]
        try:
            return float(value)
        except ValueError:
            raise self.error(f"{key}={value!r} is not a number") from None

    def node(self, key: str) -> NodeName:
        value = self.pairs[key]
        if not (value.isascii() and value.isdigit()):
            raise self.error(f"{key}={value!r} must be bare decimal digits")
        try:
            return NodeName.parse("Node" + value)
        except WireError as exc:
            raise self.error(str(exc)) from None


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    try:
        return _parse(text)
    except ScenarioError as exc:
        raise ScenarioError(exc.lineno, exc.reason, source) from None


def _parse(text: str) -> Scenario:
    sc = Scenario()
    seen: dict[str, int] = {}
    node_lines: dict[NodeName, int] = {}
    refs: list[tuple[int, NodeName]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        try:
            tokens = shlex.split(raw, comments=True)
        except ValueError as exc:
            raise ScenarioError(lineno, f"cannot tokenize: {exc}") from None
        if not tokens:
            continue
        ln = _Line(lineno, tokens)
        d = ln.directive

        if d in ("radio", "run", "config"):
            if d in seen:
                raise ln.error(f"second {d} directive (first on line {seen[d]})")
            seen[d] = lineno

        if d == "node":
            ln.expect({"id", "x", "y", "range"})
            name = ln.node("id")
            if name in node_lines:
                raise ln.error(f"duplicate node {name} (first on line {node_lines[name]})")
            node_lines[name] = lineno
            sc.nodes.append(NodeSpec(name, ln.float("x"), ln.float("y"), ln.float("range")))
        elif d == "radio":
            ln.expect(set(), {"loss", "corrupt", "latency"})
            loss = ln.float("loss") if "loss" in ln.pairs else 0.0
            corrupt = ln.float("corrupt") if "corrupt" in ln.pairs else 0.0
            latency = ln.int("latency") if "latency" in ln.pairs else 10
            try:
                sc.link = LinkParams(loss, corrupt, latency)
            except ValueError as exc:
                raise ln.error(str(exc)) from None
        elif d == "config":
            ln.expect(set(), set(CONFIG_KEYS))
            for key, attr in CONFIG_KEYS.items():
                if key in ln.pairs:
                    value = ln.int(key)
                    if value <= 0:
                        raise ln.error(f"{key} must be positive")
                    sc.overrides[attr] = value
        elif d == "run":
            ln.expect(set(), {"duration", "seed"})
            if "duration" in ln.pairs:
                sc.duration_ms = ln.int("duration")
                if sc.duration_ms <= 0:
                    raise ln.error("duration must be positive")
            if "seed" in ln.pairs:
                sc.seed = ln.int("seed")
        elif d == "at":
            sc.script.append(_parse_at(ln))
            refs.append((lineno, sc.script[-1].node))
        elif d == "traffic":
            ln.expect({"node", "target", "period", "body"})
            period = ln.int("period")
            if period <= 0:
                raise ln.error("period must be positive")
            g = TrafficGenerator(ln.node("node"), ln.node("target"), period, ln.pairs["body"])
            sc.generators.append(g)
            refs += [(lineno, g.node), (lineno, g.target)]
        else:
            raise ln.error(f"unknown directive {d!r}")

    for lineno, name in refs:
        if name not in node_lines:
            raise ScenarioError(lineno, f"reference to undeclared node {name.number}")
    return sc


def _parse_at(ln: _Line) -> ScriptEvent:
    base = {"t", "node"}
    words = ln.words
    if "serial" in ln.pairs:
        if words:
            raise ln.error(f"unexpected {' '.join(words)!r} after serial")
        ln.expect(base | {"serial"})
        kind = "serial"
    elif words == ["move"]:
        ln.expect(base | {"x", "y"})
        kind = "move"
    elif words in (["down"], ["up"]):
        ln.expect(base)
        kind = words[0]
    else:
        raise ln.error("at: expected serial=..., move x= y=, down or up")
    t = ln.int("t")
    if t < 0:
        raise ln.error("t must be non-negative")
    return ScriptEvent(
        at_ms=t,
        node=ln.node("node"),
        kind=kind,
        line=ln.pairs.get("serial", ""),
        x=ln.float("x") if kind == "move" else 0.0,
        y=ln.float("y") if kind == "move" else 0.0,
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), source=str(path))


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped inside the package (``three_node.scn``, ...)."""
    return Path(str(resources.files("floodmesh") / "scenarios" / name))


def bundled_scenarios() -> list[str]:
    return sorted(p.name for p in resources.files("floodmesh").joinpath("scenarios").iterdir() if p.name.endswith(".scn"))
