"""Self-organising flood mesh: wire codec, node state machine and simulator."""

__version__ = "0.1.0"

from .node import LedState, Node, NodeConfig
from .scenario import Scenario, ScenarioError, load_scenario, parse_scenario
from .simnet import LinkParams, ScriptEvent, TrafficGenerator, World
from .telemetry import EventKind, EventLog, EventRecord, Metrics, read_log, summarize, write_log
from .wire import Message, MessageId, NodeName, ReplyStatus, WireError

__all__ = [
    "EventKind", "EventLog", "EventRecord", "LedState", "LinkParams", "Message", "MessageId",
    "Metrics", "Node", "NodeConfig", "NodeName", "ReplyStatus", "Scenario", "ScenarioError",
    "ScriptEvent", "TrafficGenerator", "WireError", "World", "load_scenario", "parse_scenario",
    "read_log", "summarize", "write_log",
]
