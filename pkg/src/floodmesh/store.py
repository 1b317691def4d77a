"""FIFO message queues with per-entry lifetimes and shared capacity limits."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Iterator

from .wire import Message, MessageId, render_path

DEFAULT_QUEUE_CAP = 100
DEFAULT_GLOBAL_CAP = 198
# to_send entries never expire.
NO_EXPIRY = 2**31 - 1


class AddResult(enum.Enum):
    ACCEPTED = "accepted"
    FULL_QUEUE = "per-queue"
    FULL_POOL = "global"

    def __bool__(self) -> bool:
        return self is AddResult.ACCEPTED


@dataclass
class QueueEntry:
    message: Message
    timer: int


class CapacityPool:
    """Upper bound on the combined size of every queue registered with it."""

    def __init__(self, global_cap: int = DEFAULT_GLOBAL_CAP):
        self.global_cap = global_cap
        self._queues: list[MessageQueue] = []

    def register(self, queue: MessageQueue) -> None:
        self._queues.append(queue)

    def total(self) -> int:
        return sum(q.size for q in self._queues)


class MessageQueue:
    def __init__(
        self,
        cap: int = DEFAULT_QUEUE_CAP,
        lifetime: int = NO_EXPIRY,
        pool: CapacityPool | None = None,
    ):
        self.cap = cap
        self.lifetime = lifetime
        self.pool = pool
        self.sent = 0
        self._entries: deque[QueueEntry] = deque()
        if pool is not None:
            pool.register(self)

    @property
    def size(self) -> int:
        return len(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[QueueEntry]:
        return iter(self._entries)

    def add(self, m: Message) -> AddResult:
        if self.size >= self.cap:
            return AddResult.FULL_QUEUE
        if self.pool is not None and self.pool.total() >= self.pool.global_cap:
            return AddResult.FULL_POOL
        self._entries.append(QueueEntry(m, self.lifetime))
        return AddResult.ACCEPTED

    def select_first(self) -> Message | None:
        return self._entries[0].message if self._entries else None

    def destroy_first(self) -> None:
        if self._entries:
            self._entries.popleft()

    def search(self, msg_id: MessageId) -> bool:
        return any(e.message.id == msg_id for e in self._entries)

    def timer_tick(self) -> int:
        """Expire the head if its timer ran out, then age every survivor.

        At most one entry leaves per call, so an expired entry behind a
        live head waits its turn.
        """
        removed = 0
        if self._entries and self._entries[0].timer <= 0:
            self._entries.popleft()
            removed = 1
        for entry in self._entries:
            entry.timer -= 1
        return removed

    def show_all(self) -> tuple[list[str], int]:
        return [render_path(e.message) for e in self._entries], self.size

    def clear(self) -> None:
        self._entries.clear()
        self.sent = 0
