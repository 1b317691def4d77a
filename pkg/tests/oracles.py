"""Independent reference implementations used to check the package.

Nothing here imports from floodmesh.
"""

from __future__ import annotations

import math
from collections import deque


def crc32_bitwise(data: bytes) -> int:
    """CRC-32/IEEE one bit at a time, straight from the polynomial definition."""
    poly = 0xEDB88320  # 0x04C11DB7 bit-reversed
    crc = 0xFFFFFFFF
    for byte in data:
        crc ^= byte
        for _ in range(8):
            if crc & 1:
                crc = (crc >> 1) ^ poly
            else:
                crc >>= 1
    return crc ^ 0xFFFFFFFF


def visibility_graph(nodes: dict[int, tuple[float, float, float]]) -> dict[int, set[int]]:
    """Adjacency from (x, y, range): linked when distance <= both radii."""
    adj = {n: set() for n in nodes}
    ids = sorted(nodes)
    for i, a in enumerate(ids):
        ax, ay, ar = nodes[a]
        for b in ids[i + 1:]:
            bx, by, br = nodes[b]
            if math.sqrt((ax - bx) ** 2 + (ay - by) ** 2) <= min(ar, br):
                adj[a].add(b)
                adj[b].add(a)
    return adj


def bfs_distances(adj: dict[int, set[int]], start: int) -> dict[int, int]:
    dist = {start: 0}
    frontier = deque([start])
    while frontier:
        u = frontier.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                frontier.append(v)
    return dist


class ListQueueModel:
    """Plain-list model of the bounded FIFO with head-only expiry."""

    def __init__(self, cap: int, lifetime: int):
        self.cap = cap
        self.lifetime = lifetime
        self.items: list[list] = []  # [key, timer]

    def add(self, key) -> bool:
        if len(self.items) >= self.cap:
            return False
        self.items.append([key, self.lifetime])
        return True

    def first(self):
        return self.items[0][0] if self.items else None

    def destroy(self) -> None:
        if self.items:
            del self.items[0]

    def search(self, key) -> bool:
        for k, _ in self.items:
            if k == key:
                return True
        return False

    def tick(self) -> int:
        removed = 0
        if self.items and self.items[0][1] <= 0:
            del self.items[0]
            removed = 1
        for item in self.items:
            item[1] -= 1
        return removed
