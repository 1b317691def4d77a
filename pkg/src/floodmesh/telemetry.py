"""Simulation event log, its line format, and aggregate delivery metrics.

One record per line, fields always in the same order::

    t=1120 node=Node52126 kind=delivered msg=01N14754480 detail="ttl=8 to_send=0 sended=1"

``msg=-`` marks a record without a message id.  The detail string is
double-quoted with backslash escapes for ``"``, ``\\`` and newlines.
"""

from __future__ import annotations

import enum
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator

from .wire import MessageId, NodeName, WireError


class EventKind(str, enum.Enum):
    ORIGINATED = "originated"
    TRANSMITTED = "transmitted"
    RECEIVED_OK = "received_ok"
    RECEIVED_DUPLICATE = "received_duplicate"
    RECEIVED_BROKEN = "received_broken"
    RECEIVED_EXPIRED = "received_expired"
    DELIVERED = "delivered"
    FORWARDED = "forwarded"
    QUEUE_OVERFLOW = "queue_overflow"
    CONSOLE = "console"
    NODE_DOWN = "node_down"
    NODE_UP = "node_up"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class EventRecord:
    t_ms: int
    node: NodeName
    kind: EventKind
    msg: MessageId | None = None
    detail: str = ""


class LogFormatError(ValueError):
    def __init__(self, lineno: int, reason: str):
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno


class EventLog:
    """Append-only, time-ordered list of :class:`EventRecord`."""

    def __init__(self, records: Iterable[EventRecord] = ()):
        self._records: list[EventRecord] = []
        for r in records:
            self.record(r)

    def record(self, e: EventRecord) -> None:
        if self._records and e.t_ms < self._records[-1].t_ms:
            raise ValueError(
                f"event at t={e.t_ms} precedes last recorded t={self._records[-1].t_ms}"
            )
        self._records.append(e)

    def __iter__(self) -> Iterator[EventRecord]:
        return iter(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def __getitem__(self, i):
        return self._records[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventLog):
            return NotImplemented
        return self._records == other._records

    def of_kind(self, *kinds: EventKind) -> list[EventRecord]:
        return [r for r in self._records if r.kind in kinds]


# ---------------------------------------------------------------- line format

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r"}


def _quote(text: str) -> str:
    return '"' + "".join(_ESCAPES.get(c, c) for c in text) + '"'


def _unquote(text: str, lineno: int) -> str:
    out = []
    it = iter(text)
    for c in it:
        if c == "\\":
            nxt = next(it, None)
            if nxt not in _UNESCAPES:
                raise LogFormatError(lineno, f"bad escape \\{nxt or ''}")
            out.append(_UNESCAPES[nxt])
        elif c == '"':
            raise LogFormatError(lineno, "unescaped quote inside detail")
        else:
            out.append(c)
    return "".join(out)


def format_record(e: EventRecord) -> str:
    msg = e.msg.render() if e.msg is not None else "-"
    return f"t={e.t_ms} node={e.node.raw} kind={e.kind.value} msg={msg} detail={_quote(e.detail)}"


_LINE_RE = re.compile(
    r'^t=(?P<t>\S*) node=(?P<node>\S*) kind=(?P<kind>\S*) msg=(?P<msg>\S*) detail="(?P<detail>.*)"$'
)


def parse_record(line: str, lineno: int = 1) -> EventRecord:
    m = _LINE_RE.match(line)
    if m is None:
        for key in ("t", "node", "kind", "msg", "detail"):
            if f"{key}=" not in line:
                raise LogFormatError(lineno, f"missing {key} field")
        raise LogFormatError(lineno, "fields out of order or malformed")
    if not m["t"].isdigit():
        raise LogFormatError(lineno, f"t={m['t']!r} is not a non-negative integer")
    try:
        node = NodeName.parse(m["node"])
        msg = None if m["msg"] == "-" else MessageId.parse(m["msg"])
    except WireError as exc:
        raise LogFormatError(lineno, str(exc)) from None
    try:
        kind = EventKind(m["kind"])
    except ValueError:
        raise LogFormatError(lineno, f"unknown kind {m['kind']!r}") from None
    return EventRecord(int(m["t"]), node, kind, msg, _unquote(m["detail"], lineno))


def write_log(log: Iterable[EventRecord], destination: str | Path | IO[str]) -> None:
    if isinstance(destination, (str, Path)):
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            write_log(log, fh)
        return
    for e in log:
        destination.write(format_record(e) + "\n")


def read_log(source: str | Path | IO[str]) -> EventLog:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="\n") as fh:
            return read_log(fh)
    log = EventLog()
    for lineno, line in enumerate(source, start=1):
        line = line.rstrip("\n")
        record = parse_record(line, lineno)
        try:
            log.record(record)
        except ValueError as exc:
            raise LogFormatError(lineno, str(exc)) from None
    return log


# ------------------------------------------------------------------- metrics

_KV_RE = re.compile(r"(\w+)=(\S+)")


def detail_fields(detail: str) -> dict[str, str]:
    """``key=value`` tokens embedded in a record's detail text."""
    return dict(_KV_RE.findall(detail))


@dataclass(frozen=True)
class LatencyStats:
    count: int = 0
    min: float = 0.0
    mean: float = 0.0
    max: float = 0.0
    p95: float = 0.0

    @classmethod
    def of(cls, samples: list[int]) -> LatencyStats:
        if not samples:
            return cls()
        ordered = sorted(samples)
        # Nearest-rank percentile.
        rank = max(1, math.ceil(0.95 * len(ordered)))
        return cls(
            count=len(ordered),
            min=float(ordered[0]),
            mean=sum(ordered) / len(ordered),
            max=float(ordered[-1]),
            p95=float(ordered[rank - 1]),
        )


@dataclass(frozen=True)
class Metrics:
    originated: int
    delivered: int
    delivery_ratio: float
    latency_ms: LatencyStats
    duplicates: int
    transmissions: int
    hops: dict[int, int] = field(default_factory=dict)
    queue_high_water: dict[str, dict[str, int]] = field(default_factory=dict)

    def to_lines(self) -> list[str]:
        lines = [
            f"delivery_ratio={self.delivery_ratio:.6f}",
            f"originated={self.originated}",
            f"delivered={self.delivered}",
            f"latency_count={self.latency_ms.count}",
            f"latency_min_ms={self.latency_ms.min:.1f}",
            f"latency_mean_ms={self.latency_ms.mean:.1f}",
            f"latency_max_ms={self.latency_ms.max:.1f}",
            f"latency_p95_ms={self.latency_ms.p95:.1f}",
            f"duplicates={self.duplicates}",
            f"transmissions={self.transmissions}",
        ]
        lines += [f"hops.{h}={n}" for h, n in sorted(self.hops.items())]
        for node in sorted(self.queue_high_water):
            for queue, size in sorted(self.queue_high_water[node].items()):
                lines.append(f"queue_high_water.{node}.{queue}={size}")
        return lines

    def dump(self) -> str:
        return "\n".join(self.to_lines()) + "\n"


def summarize(log: Iterable[EventRecord]) -> Metrics:
    """Aggregate delivery statistics from a finished (or running) log.

    A node "exists" when it has any record in the log; the simulator
    writes a ``node_up`` record for every node at start-up, so silent
    nodes still count as valid addressees.
    """
    nodes: set[str] = set()
    origin: dict[MessageId, tuple[int, str, int]] = {}
    first_delivery: dict[MessageId, int] = {}
    hops: Counter[int] = Counter()
    duplicates = transmissions = 0
    high_water: dict[str, dict[str, int]] = {}

    for e in log:
        nodes.add(e.node.raw)
        fields = detail_fields(e.detail) if e.kind is not EventKind.CONSOLE else {}
        for queue in ("to_send", "sended"):
            if queue in fields:
                marks = high_water.setdefault(e.node.raw, {"to_send": 0, "sended": 0})
                marks[queue] = max(marks[queue], int(fields[queue]))

        if e.kind is EventKind.ORIGINATED and e.msg is not None:
            origin.setdefault(e.msg, (e.t_ms, fields.get("to", ""), int(fields.get("ttl", 8))))
        elif e.kind is EventKind.DELIVERED and e.msg is not None:
            if e.msg not in first_delivery and e.msg in origin:
                first_delivery[e.msg] = e.t_ms
                initial_ttl = origin[e.msg][2]
                hops[initial_ttl - int(fields.get("ttl", initial_ttl))] += 1
        elif e.kind is EventKind.RECEIVED_DUPLICATE:
            duplicates += 1
        elif e.kind is EventKind.TRANSMITTED:
            transmissions += 1

    addressable = [mid for mid, (_, to, _) in origin.items() if to in nodes]
    delivered = [mid for mid in addressable if mid in first_delivery]
    ratio = len(delivered) / len(addressable) if addressable else 0.0
    latencies = [first_delivery[mid] - origin[mid][0] for mid in delivered]
    return Metrics(
        originated=len(origin),
        delivered=len(delivered),
        delivery_ratio=ratio,
        latency_ms=LatencyStats.of(latencies),
        duplicates=duplicates,
        transmissions=transmissions,
        hops=dict(hops),
        queue_high_water=high_water,
    )
