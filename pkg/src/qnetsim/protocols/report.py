"""Run reports shared by all protocol workloads."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


class PhaseTracker:
    """Contiguous named intervals; durations always sum to completion time."""

    def __init__(self, clock):
        self._clock = clock
        self._marks: list[tuple[str, int]] = []
        self._end: Optional[int] = None

    def enter(self, name: str) -> None:
        self._marks.append((name, self._clock()))

    def finish(self) -> None:
        self._end = self._clock()

    def durations(self) -> dict[str, int]:
        if not self._marks:
            return {}
        end = self._end if self._end is not None else self._clock()
        out: dict[str, int] = {}
        for (name, start), (_, nxt) in zip(self._marks, self._marks[1:] + [("", end)]):
            out[name] = out.get(name, 0) + (nxt - start)
        return out


@dataclass
class ProtocolReport:
    workload: str
    success: bool
    final_fidelity: Optional[float]
    completion_time_ns: int
    phases: dict = field(default_factory=dict)
    counters: dict = field(default_factory=dict)
    trace_path: Optional[str] = None
    failure_phase: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def phase_sum(self) -> int:
        return sum(self.phases.values())
