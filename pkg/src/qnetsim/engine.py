"""Deterministic discrete-event core: clock, event queue, seeded RNG streams.

Time is integer nanoseconds throughout. Events with equal fire time run in
insertion order (FIFO tie-break), so a scenario plus a seed fully determines
the execution.
"""
from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import QNetSimError


@dataclass
class RunStats:
    events_processed: int
    final_time: int


def _stream_entropy(seed: int, stream_id: str) -> int:
    digest = hashlib.sha256(f"{seed}:{stream_id}".encode()).digest()
    return int.from_bytes(digest[:16], "little")


def make_rng(seed: int, stream_id: str) -> np.random.Generator:
    """Independent, platform-stable generator for one (seed, stream) pair.

    Philox is counter-based, so draws depend only on the derived key and the
    draw index: adding a new consumer elsewhere never shifts this stream.
    """
    ss = np.random.SeedSequence(entropy=_stream_entropy(seed, stream_id))
    return np.random.Generator(np.random.Philox(ss))


class Engine:
    """Single-threaded event loop. One instance per simulation scenario."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._now = 0
        self._seq = 0
        self._heap: list[tuple[int, int, Callable[[], None]]] = []
        self._cancelled: set[int] = set()
        self._finalized = False
        self._rngs: dict[str, np.random.Generator] = {}
        self.events_processed = 0

    def now(self) -> int:
        return self._now

    def rng(self, stream_id: str) -> np.random.Generator:
        gen = self._rngs.get(stream_id)
        if gen is None:
            gen = make_rng(self.seed, stream_id)
            self._rngs[stream_id] = gen
        return gen

    def schedule(self, delay_ns: int, action: Callable[[], None]) -> int:
        if self._finalized:
            raise QNetSimError("engine finalized; cannot schedule")
        delay_ns = int(delay_ns)
        if delay_ns < 0:
            raise ValueError(f"negative delay: {delay_ns}")
        event_id = self._seq
        self._seq += 1
        heapq.heappush(self._heap, (self._now + delay_ns, event_id, action))
        return event_id

    def cancel(self, event_id: int) -> None:
        self._cancelled.add(event_id)

    def run(self, until: Optional[int] = None) -> RunStats:
        processed = 0
        while self._heap:
            fire_at, event_id, action = self._heap[0]
            if until is not None and fire_at > until:
                break
            heapq.heappop(self._heap)
            if event_id in self._cancelled:
                self._cancelled.discard(event_id)
                continue
            self._now = fire_at
            action()
            processed += 1
        self.events_processed += processed
        return RunStats(events_processed=processed, final_time=self._now)

    def finalize(self) -> None:
        self._finalized = True
