import random
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from floodmesh.store import AddResult, CapacityPool, MessageQueue
from floodmesh.wire import MessageId, NodeName, new_message, relay_copy, render_path
from oracles import ListQueueModel

ORIGIN = NodeName(2)
DEST = NodeName(9)


def msg(seq: int, body: str = "x"):
    return new_message(ORIGIN, seq, DEST, body)


def timers(q: MessageQueue) -> list[int]:
    return [e.timer for e in q]


class TestFifo:
    def test_add_to_empty(self):
        q = MessageQueue()
        a = msg(1)
        assert q.add(a) is AddResult.ACCEPTED
        assert q.size == 1 and q.select_first() == a

    def test_order(self):
        q = MessageQueue()
        a, b = msg(1), msg(2)
        q.add(a)
        q.add(b)
        assert q.select_first() == a
        q.destroy_first()
        assert q.select_first() == b and q.size == 1

    def test_empty(self):
        q = MessageQueue()
        assert q.select_first() is None
        q.destroy_first()
        assert q.size == 0

    def test_search_by_id_only(self):
        q = MessageQueue()
        original = msg(1)
        q.add(relay_copy(original, NodeName(5)))
        assert q.search(original.id)
        assert not q.search(MessageId(2, 2))
        assert not MessageQueue().search(original.id)

    def test_show_all(self):
        q = MessageQueue()
        assert q.show_all() == ([], 0)
        a, b, c = msg(1, "a"), msg(2, "b"), msg(3, "c")
        for m in (a, b, c):
            q.add(m)
        q.destroy_first()
        assert q.show_all() == ([render_path(b), render_path(c)], 2)


class TestCapacity:
    def test_per_queue_cap(self):
        q = MessageQueue(cap=100)
        for i in range(100):
            assert q.add(msg(i))
        assert q.add(msg(100)) is AddResult.FULL_QUEUE
        assert q.size == 100

    def test_global_cap(self):
        pool = CapacityPool(198)
        to_send = MessageQueue(100, pool=pool)
        sended = MessageQueue(100, lifetime=30, pool=pool)
        for i in range(100):
            to_send.add(msg(i))
        for i in range(98):
            assert sended.add(msg(1000 + i))
        assert pool.total() == 198
        assert sended.add(msg(2000)) is AddResult.FULL_POOL
        assert sended.size == 98

    def test_rejection_is_falsy(self):
        assert not AddResult.FULL_POOL and not AddResult.FULL_QUEUE and AddResult.ACCEPTED


class TestTimer:
    def test_head_only_trace(self):
        # Hand trace: remove expired head, then age survivors.
        q = MessageQueue()
        q.add(msg(1))
        q.add(msg(2))
        q._entries[0].timer, q._entries[1].timer = 1, 5
        assert q.timer_tick() == 0 and timers(q) == [0, 4]
        assert q.timer_tick() == 1 and timers(q) == [3]

    def test_empty_tick(self):
        assert MessageQueue().timer_tick() == 0

    def test_single_removal_per_call(self):
        q = MessageQueue(lifetime=0)
        for i in range(3):
            q.add(msg(i))
        q._entries[2].timer = 4
        assert q.timer_tick() == 1
        assert q.size == 2 and timers(q) == [-1, 3]

    @given(st.integers(0, 40), st.lists(st.integers(0, 5), max_size=8))
    def test_expiry_bound(self, lifetime, waits):
        """Uniform-lifetime entry leaves within lifetime + size-at-insertion ticks."""
        q = MessageQueue(lifetime=lifetime)
        seq = 0
        for w in waits:
            seq += 1
            q.add(msg(seq))
            for _ in range(w):
                q.timer_tick()
        seq += 1
        target = msg(seq)
        q.add(target)
        bound = lifetime + q.size
        for _ in range(bound):
            q.timer_tick()
        assert not q.search(target.id)


class TestModelEquivalence:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_ops(self, seed):
        rng = random.Random(seed)
        pool = CapacityPool(10**6)
        q = MessageQueue(cap=20, lifetime=7, pool=pool)
        model = ListQueueModel(cap=20, lifetime=7)
        next_seq = 0
        for _ in range(10_000):
            op = rng.random()
            if op < 0.4:
                next_seq += 1
                m = msg(next_seq)
                assert bool(q.add(m)) == model.add(m.id)
            elif op < 0.55:
                q.destroy_first()
                model.destroy()
            elif op < 0.75:
                probe = MessageId(rng.randint(0, next_seq + 1), ORIGIN.number)
                assert q.search(probe) == model.search(probe)
            else:
                assert q.timer_tick() == model.tick()
            first = q.select_first()
            assert (first.id if first else None) == model.first()
            assert q.size == len(model.items) <= 20
            assert [e.message.id for e in q] == [k for k, _ in model.items]
            assert timers(q) == [t for _, t in model.items]

    @given(st.lists(st.sampled_from(["add", "destroy", "tick"]), max_size=200))
    def test_capacity_never_violated(self, ops):
        pool = CapacityPool(15)
        a = MessageQueue(cap=10, lifetime=3, pool=pool)
        b = MessageQueue(cap=10, lifetime=3, pool=pool)
        seq = 0
        for i, op in enumerate(ops):
            q = a if i % 3 else b
            if op == "add":
                seq += 1
                q.add(msg(seq))
            elif op == "destroy":
                q.destroy_first()
            else:
                q.timer_tick()
            assert a.size <= 10 and b.size <= 10 and a.size + b.size <= 15


def test_clear_resets_sent():
    q = MessageQueue()
    q.add(msg(1))
    q.sent = 3
    q.clear()
    assert q.size == 0 and q.sent == 0


def test_entry_holds_relay_copy_unchanged():
    q = MessageQueue()
    m = replace(msg(1), ttl=3)
    q.add(m)
    assert q.select_first() is m
