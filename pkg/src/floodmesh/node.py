"""Per-node protocol state machine.

Each duty cycle a node first listens (as an access point) and answers
every inbound datagram with an ``ST:`` reply, handles lines typed on its
serial console, then switches to client mode and pushes the head of its
``to_send`` queue to every neighbour it can see.  A head that reached at
least one neighbour moves to ``sended``, where it lives for a fixed number
of cycles so returning copies are recognised as duplicates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol

from .store import NO_EXPIRY, AddResult, CapacityPool, MessageQueue
from .telemetry import EventKind
from .wire import (
    DEFAULT_TTL,
    BodyError,
    Message,
    MessageId,
    NodeName,
    ReplyStatus,
    WireError,
    check_body,
    new_message,
    parse,
    parse_reply,
    relay_copy,
    render_path,
    serialize,
    verify_crc,
)

WARN_PREFIX = "![WARN] "

EventSink = Callable[[EventKind, "MessageId | None", str], None]


@dataclass
class NodeConfig:
    ttl_default: int = DEFAULT_TTL
    sended_retention_cycles: int = 30
    per_queue_cap: int = 100
    global_cap: int = 198
    broken_retry_limit: int = 3
    cycle_period_ms: int = 1000
    mode_switch_delay_ms: int = 100

    def __post_init__(self) -> None:
        for name, value in vars(self).items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class LedState:
    red: bool = False
    yellow: bool = False
    green: bool = False

    @classmethod
    def from_code(cls, code: int) -> LedState:
        if not 0 <= code <= 7:
            raise ValueError(f"set_led code {code} outside 0..7")
        return cls(red=bool(code & 1), yellow=bool(code & 2), green=bool(code & 4))

    def describe(self) -> str:
        lit = [name for name, on in (("Red", self.red), ("Yellow", self.yellow), ("Green", self.green)) if on]
        if not lit:
            return "*All OFF"
        return "*" + " and ".join(lit) + " ON"


class RadioPort(Protocol):
    def scan(self) -> list[NodeName]: ...

    def exchange(self, dst: NodeName, payload: str) -> str | None:
        """Send ``payload`` to ``dst``; ``None`` means the link failed."""
        ...


@dataclass
class CycleReport:
    console: list[str] = field(default_factory=list)
    replies: list[str] = field(default_factory=list)
    sent: int = 0


def _discard(kind: EventKind, msg: MessageId | None, detail: str) -> None:
    pass


class Node:
    def __init__(
        self, name: NodeName, config: NodeConfig | None = None, sink: EventSink | None = None
    ):
        self.name = name
        self.config = config or NodeConfig()
        self.sink = sink or _discard
        self.console: list[str] = []
        self.reset()

    def reset(self) -> None:
        """Reboot: all RAM state is lost, including the sequence counter."""
        self.seq = 0
        self.pool = CapacityPool(self.config.global_cap)
        self.to_send = MessageQueue(self.config.per_queue_cap, NO_EXPIRY, self.pool)
        self.sended = MessageQueue(
            self.config.per_queue_cap, self.config.sended_retention_cycles, self.pool
        )
        self.led = LedState()

    # -------------------------------------------------------------- output

    def _say(self, line: str) -> None:
        self.console.append(line)
        self.sink(EventKind.CONSOLE, None, line)

    def _warn(self, text: str) -> None:
        self._say(WARN_PREFIX + text)

    def _sizes(self) -> str:
        return f"to_send={self.to_send.size} sended={self.sended.size}"

    def _enqueue(self, queue: MessageQueue, m: Message) -> bool:
        result = queue.add(m)
        if result is AddResult.ACCEPTED:
            return True
        qname = "to_send" if queue is self.to_send else "sended"
        self._warn(f"{qname} overflow ({result.value} limit), dropped {m.id}")
        self.sink(EventKind.QUEUE_OVERFLOW, m.id, f"queue={qname} limit={result.value} {self._sizes()}")
        return False

    # ------------------------------------------------------------- inbound

    def is_known(self, msg_id: MessageId) -> bool:
        return self.sended.search(msg_id) or self.to_send.search(msg_id)

    def handle_request(self, line: str) -> str:
        """Answer one inbound datagram line with its ``ST:`` reply."""
        try:
            m = parse(line)
        except WireError as exc:
            self.sink(EventKind.RECEIVED_BROKEN, None, f"unparseable: {exc}")
            return ReplyStatus.BROKEN.wire
        if not verify_crc(m):
            self.sink(EventKind.RECEIVED_BROKEN, m.id, f"crc mismatch via={m.media}")
            return ReplyStatus.BROKEN.wire

        if self.is_known(m.id):
            self._say(">[DUPLICATE:] " + render_path(m))
            self.sink(EventKind.RECEIVED_DUPLICATE, m.id, f"via={m.media} ttl={m.ttl}")
            return ReplyStatus.DUBPLICATE.wire

        if m.ttl <= 0:
            self.sink(EventKind.RECEIVED_EXPIRED, m.id, f"via={m.media} ttl={m.ttl}")
            return ReplyStatus.EXPIRED.wire

        if m.to == self.name:
            self.sink(EventKind.RECEIVED_OK, m.id, f"addressee via={m.media}")
            self._say(">[MyMessage:] " + render_path(m))
            self.execute_command(m.body)
            self._enqueue(self.sended, m)
            self.sink(EventKind.DELIVERED, m.id, f"ttl={m.ttl} {self._sizes()}")
            return ReplyStatus.OK.wire

        if self._enqueue(self.to_send, relay_copy(m, self.name)):
            self.sink(EventKind.RECEIVED_OK, m.id, f"relay via={m.media} {self._sizes()}")
        return ReplyStatus.OK.wire

    # -------------------------------------------------------------- serial

    def handle_serial(self, line: str) -> None:
        line = line.rstrip("\r\n")
        target, sep, command = line.partition("@")
        if not sep:
            self._warn(f"expected Node<id>@<command> or this@<command>, got {line!r}")
            return
        if target == "this":
            self.execute_command(command)
            return
        try:
            addressee = NodeName.parse(target)
            check_body(command)
        except BodyError as exc:
            self._warn(f"rejected message body: {exc}")
            return
        except WireError as exc:
            self._warn(f"bad addressee: {exc}")
            return

        self.seq += 1
        m = new_message(self.name, self.seq, addressee, command, ttl=self.config.ttl_default)
        if self._enqueue(self.to_send, m):
            self._say("<[Will send:] " + render_path(m))
            self.sink(EventKind.ORIGINATED, m.id, f"to={addressee} ttl={m.ttl} {self._sizes()}")

    def execute_command(self, cmd: str) -> None:
        cmd = cmd.strip()
        if cmd == "get_id":
            self._say(self.name.raw)
        elif cmd == "get_send":
            self._show(self.to_send)
        elif cmd == "get_sended":
            self._show(self.sended)
        elif cmd.partition("=")[0].strip() == "set_led":
            key, sep, arg = cmd.partition("=")
            arg = arg.strip()
            if not sep or not (arg.isascii() and arg.isdigit()) or int(arg) > 7:
                self._warn(f"set_led expects a code 0..7, got {arg!r}")
                return
            self._say(self.apply_set_led(int(arg)).describe())
        else:
            self._warn(f"unknown command {cmd!r}")

    def apply_set_led(self, code: int) -> LedState:
        self.led = LedState.from_code(code)
        return self.led

    def _show(self, queue: MessageQueue) -> None:
        lines, count = queue.show_all()
        for line in lines:
            self._say(line)
        self._say(f"[Count: {count}]")

    # ------------------------------------------------------------ outbound

    def send_round(self, radio: RadioPort) -> int:
        head = self.to_send.select_first()
        if head is None:
            return 0
        payload = serialize(head)
        for dst in radio.scan():
            if dst == self.name:
                continue
            for _ in range(1 + self.config.broken_retry_limit):
                reply = radio.exchange(dst, payload)
                if reply is None:
                    break
                try:
                    status = parse_reply(reply)
                except WireError:
                    break
                if status is not ReplyStatus.BROKEN:
                    self.to_send.sent += 1
                    break
        return self.to_send.sent

    def finish_round(self) -> None:
        sent = self.to_send.sent
        if sent > 0:
            self._say(f">[To {sent} sent]")
            head = self.to_send.select_first()
            self._enqueue(self.sended, head)
            self.to_send.destroy_first()
            self.to_send.sent = 0
            self.sink(EventKind.FORWARDED, head.id, f"sent={sent} {self._sizes()}")
        self.sended.timer_tick()

    # --------------------------------------------------------------- cycle

    def listen(self, inbound: list[str], serial: list[str]) -> list[str]:
        replies = [self.handle_request(line) for line in inbound]
        for line in serial:
            self.handle_serial(line)
        return replies

    def transmit(self, radio: RadioPort) -> int:
        sent = self.send_round(radio)
        self.finish_round()
        return sent

    def run_cycle(self, radio: RadioPort, inbound: list[str], serial: list[str]) -> CycleReport:
        mark = len(self.console)
        replies = self.listen(inbound, serial)
        sent = self.transmit(radio)
        return CycleReport(console=self.console[mark:], replies=replies, sent=sent)
