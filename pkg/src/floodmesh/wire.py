"""Datagram and reply wire formats.

A mesh datagram travels as a single text line::

    MSG:<seq>N<origin>|<from>/<media>/<to>|<ttl>|<body>|<crc>

and every datagram is answered with one of four ``ST:`` reply lines.
The checksum is CRC-32/IEEE over ``from + to + media + id + body``; the
ttl is deliberately outside its coverage so relays can decrement it and
reseal without touching anything else.
"""

from __future__ import annotations

import enum
import zlib
from dataclasses import dataclass, replace

NODE_PREFIX = "Node"
MSG_TAG = "MSG:"
REPLY_TAG = "ST:"
DEFAULT_TTL = 8
MAX_BODY_LEN = 32
UINT32_MAX = 0xFFFFFFFF


class WireError(ValueError):
    """A line or field that does not match the wire grammar."""

    def __init__(self, message: str, segment: str | None = None):
        super().__init__(message)
        self.segment = segment


class BodyError(WireError):
    pass


def _check_uint32(value: int, what: str) -> int:
    if not 0 <= value <= UINT32_MAX:
        raise WireError(f"{what} {value} outside unsigned 32-bit range", what)
    return value


@dataclass(frozen=True, order=True)
class NodeName:
    number: int

    def __post_init__(self) -> None:
        _check_uint32(self.number, "node number")

    @classmethod
    def parse(cls, raw: str) -> NodeName:
        if not raw.startswith(NODE_PREFIX):
            raise WireError(f"node name {raw!r} lacks the {NODE_PREFIX!r} prefix", "name")
        digits = raw[len(NODE_PREFIX):]
        if not (1 <= len(digits) <= 10 and digits.isascii() and digits.isdigit()):
            raise WireError(f"node name {raw!r} must end in 1-10 decimal digits", "name")
        if len(digits) > 1 and digits[0] == "0":
            raise WireError(f"node name {raw!r} has leading zeros", "name")
        return cls(int(digits))

    @property
    def raw(self) -> str:
        return f"{NODE_PREFIX}{self.number}"

    def __str__(self) -> str:
        return self.raw


@dataclass(frozen=True, order=True)
class MessageId:
    seq: int
    origin: int

    def __post_init__(self) -> None:
        _check_uint32(self.seq, "seq")
        _check_uint32(self.origin, "origin")

    @classmethod
    def parse(cls, text: str) -> MessageId:
        seq, sep, origin = text.partition("N")
        if not sep or not (seq.isascii() and seq.isdigit()) or not (origin.isascii() and origin.isdigit()):
            raise WireError(f"message id {text!r} is not <digits>N<digits>", "id")
        return cls(int(seq), int(origin))

    def render(self) -> str:
        # Both halves padded to width 2 so ids like "01N02" survive a round trip.
        return f"{self.seq:02d}N{self.origin:02d}"

    def __str__(self) -> str:
        return self.render()


def check_body(body: str) -> str:
    """Return ``body`` unchanged or raise :class:`BodyError`.

    Bodies are printable ASCII without the ``|`` delimiter, at most 32
    characters long.
    """
    if len(body) > MAX_BODY_LEN:
        raise BodyError(f"body is {len(body)} characters, limit is {MAX_BODY_LEN}", "body")
    for ch in body:
        if ch == "|":
            raise BodyError("body contains delimiter '|'", "body")
        if ch in "\r\n":
            raise BodyError("body contains a line break", "body")
        if not " " <= ch <= "~":
            raise BodyError(f"body contains non-printable character {ch!r}", "body")
    return body


@dataclass(frozen=True)
class Message:
    id: MessageId
    sender: NodeName
    media: NodeName
    to: NodeName
    ttl: int
    body: str
    crc: int = 0

    def crc_input(self) -> bytes:
        text = self.sender.raw + self.to.raw + self.media.raw + self.id.render() + self.body
        return text.encode("ascii")


def compute_crc(m: Message) -> int:
    return zlib.crc32(m.crc_input()) & UINT32_MAX


def seal(m: Message) -> Message:
    return replace(m, crc=compute_crc(m))


def verify_crc(m: Message) -> bool:
    return m.crc == compute_crc(m)


def new_message(
    origin: NodeName, seq: int, addressee: NodeName, body: str, ttl: int = DEFAULT_TTL
) -> Message:
    """Build a freshly sealed datagram originated by ``origin``."""
    check_body(body)
    m = Message(
        id=MessageId(seq, origin.number),
        sender=origin,
        media=origin,
        to=addressee,
        ttl=ttl,
        body=body,
    )
    return seal(m)


def relay_copy(m: Message, via: NodeName) -> Message:
    """The copy a relay re-broadcasts: one hop spent, ``via`` as last hop."""
    return seal(replace(m, media=via, ttl=m.ttl - 1))


def serialize(m: Message) -> str:
    path = f"{m.sender.raw}/{m.media.raw}/{m.to.raw}"
    return f"{MSG_TAG}{m.id.render()}|{path}|{m.ttl}|{m.body}|{m.crc:08x}"


def _parse_int(text: str, segment: str) -> int:
    body = text[1:] if text[:1] == "-" else text
    if not (body.isascii() and body.isdigit()):
        raise WireError(f"{segment} {text!r} is not a decimal integer", segment)
    return int(text)


def parse(line: str) -> Message:
    """Parse a ``MSG:`` line into a :class:`Message`.

    The checksum is read but not verified; see :func:`verify_crc`.
    """
    if not line.startswith(MSG_TAG):
        raise WireError(f"not a {MSG_TAG} line: {line[:16]!r}", "tag")
    parts = line[len(MSG_TAG):].split("|")
    if len(parts) != 5:
        raise WireError(f"expected 5 '|'-separated segments, got {len(parts)}", "segments")
    id_text, path_text, ttl_text, body, crc_text = parts

    msg_id = MessageId.parse(id_text)
    names = path_text.split("/")
    if len(names) != 3:
        raise WireError(f"path segment has {len(names)} names, expected 3", "path")
    sender, media, to = (NodeName.parse(n) for n in names)

    ttl = _parse_int(ttl_text, "ttl")
    if not -128 <= ttl <= 127:
        raise WireError(f"ttl {ttl} outside signed 8-bit range", "ttl")
    check_body(body)

    if not 1 <= len(crc_text) <= 8:
        raise WireError(f"crc {crc_text!r} must be 1-8 hex digits", "crc")
    if not all(c in "0123456789abcdefABCDEF" for c in crc_text):
        raise WireError(f"crc {crc_text!r} is not hexadecimal", "crc")

    return Message(
        id=msg_id, sender=sender, media=media, to=to, ttl=ttl, body=body, crc=int(crc_text, 16)
    )


def render_path(m: Message) -> str:
    return f"{m.sender.raw} -> {m.media.raw} -> {m.to.raw} ({m.ttl}) {m.body}"


class ReplyStatus(enum.Enum):
    OK = "OK"
    BROKEN = "BROKEN"
    EXPIRED = "EXPIRED"
    # Spelling is part of the wire protocol.
    DUBPLICATE = "DUBPLICATE"

    @property
    def wire(self) -> str:
        return REPLY_TAG + self.value


def serialize_reply(status: ReplyStatus) -> str:
    return status.wire


def parse_reply(line: str) -> ReplyStatus:
    if not line.startswith(REPLY_TAG):
        raise WireError(f"not a {REPLY_TAG} line: {line[:16]!r}", "tag")
    token = line[len(REPLY_TAG):]
    try:
        return ReplyStatus(token)
    except ValueError:
        raise WireError(f"unknown reply token {token!r}", "status") from None
