"""Global qubit identity and partition tracking: the single source of truth.

Every live qubit belongs to exactly one partition; a partition's member order
maps one-to-one onto its state's qubit indices. Multi-qubit gates across
partitions merge them (lower partition id takes the lower joint indices);
measurement factors the qubit out immediately and kills its handle.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DeadHandleError, QNetSimError
from .states import QuantumState, gate, init_plus, init_zeros

IN_FLIGHT = "in-flight"


@dataclass(eq=False)
class QubitHandle:
    id: int
    label: str
    node: str
    alive: bool = True

    def __repr__(self):
        state = "live" if self.alive else "dead"
        return f"<qubit {self.id} {self.label!r}@{self.node} {state}>"


@dataclass
class Partition:
    id: int
    members: list[QubitHandle]
    state: QuantumState

    def index_of(self, handle: QubitHandle) -> int:
        return self.members.index(handle)


@dataclass(frozen=True)
class PartitionView:
    id: int
    size: int
    labels: tuple[str, ...]


class StateRegistry:
    def __init__(
        self,
        backend: str,
        trace=None,
        max_qubits: Optional[int] = None,
        check_invariants: bool = False,
    ):
        self.backend = backend
        self.trace = trace
        self.max_qubits = max_qubits
        self.check_invariants = check_invariants
        self.on_change = None  # test hook: called after every mutating op
        self._next_qubit = itertools.count()
        self._next_partition = itertools.count()
        self._partitions: dict[int, Partition] = {}
        self._home: dict[int, int] = {}  # qubit id -> partition id
        self._labels: set[tuple[str, str]] = set()

    def partition_snapshot(self) -> set[frozenset]:
        """Live partitions as label sets (for replay cross-checks)."""
        return {
            frozenset(h.label for h in part.members)
            for part in self._partitions.values()
        }

    # -- lifecycle -------------------------------------------------------------

    def create_qubit(self, node: str, label: str, initial: str = "plus") -> QubitHandle:
        if (node, label) in self._labels:
            raise QNetSimError(f"duplicate qubit label {label!r} on node {node!r}")
        self._labels.add((node, label))
        if initial == "plus":
            state = init_plus(1, self.backend, self.max_qubits)
        elif initial == "zero":
            state = init_zeros(1, self.backend, self.max_qubits)
        else:
            raise ValueError(f"unknown initial state {initial!r}")
        handle = QubitHandle(next(self._next_qubit), label, node)
        pid = next(self._next_partition)
        self._partitions[pid] = Partition(pid, [handle], state)
        self._home[handle.id] = pid
        if self.trace is not None:
            self.trace.init_qubit(node, label)
        self._check()
        return handle

    def create_block(
        self, node: str, labels: list[str], initial: str = "plus"
    ) -> list[QubitHandle]:
        """One n-qubit partition in a single allocation (cluster workloads)."""
        for label in labels:
            if (node, label) in self._labels:
                raise QNetSimError(f"duplicate qubit label {label!r} on node {node!r}")
        maker = init_plus if initial == "plus" else init_zeros
        state = maker(len(labels), self.backend, self.max_qubits)
        handles = [QubitHandle(next(self._next_qubit), lab, node) for lab in labels]
        pid = next(self._next_partition)
        self._partitions[pid] = Partition(pid, list(handles), state)
        for h in handles:
            self._labels.add((node, h.label))
            self._home[h.id] = pid
        if self.trace is not None:
            for h in handles:
                self.trace.init_qubit(node, h.label)
        self._check()
        return handles

    # -- lookups -----------------------------------------------------------------

    def _partition(self, handle: QubitHandle) -> Partition:
        if not handle.alive:
            raise DeadHandleError(f"{handle!r} was already released")
        return self._partitions[self._home[handle.id]]

    def partition_of(self, handle: QubitHandle) -> PartitionView:
        part = self._partition(handle)
        return PartitionView(part.id, len(part.members), tuple(h.label for h in part.members))

    def live_qubits(self) -> int:
        return len(self._home)

    # -- operations ---------------------------------------------------------------

    def apply_joint(self, kind: str, handles: list[QubitHandle]) -> None:
        parts = []
        for h in handles:
            part = self._partition(h)
            if part not in parts:
                parts.append(part)
        if len(parts) > 1:
            part = self._merge(sorted(parts, key=lambda p: p.id))
            if self.trace is not None:
                self.trace.entangle([h.label for h in handles])
        else:
            part = parts[0]
        idx = [part.index_of(h) for h in handles]
        part.state.apply_gate(gate(kind, *idx))
        if self.trace is not None:
            self.trace.apply_gate(kind, [h.label for h in handles])
        self._check()

    def _merge(self, parts: list[Partition]) -> Partition:
        base = parts[0]
        for other in parts[1:]:
            base.state = base.state.tensor(other.state)
            base.members.extend(other.members)
            for h in other.members:
                self._home[h.id] = base.id
            del self._partitions[other.id]
        return base

    def measure_and_release(
        self,
        handle: QubitHandle,
        basis: str,
        rng: Optional[np.random.Generator] = None,
        record: bool = True,
    ) -> int:
        part = self._partition(handle)
        idx = part.index_of(handle)
        outcome = part.state.measure_remove(idx, basis, rng)
        self._release(part, handle)
        if self.trace is not None and record:
            self.trace.measure(handle.node, handle.label, basis, outcome)
        self._check()
        return outcome

    def lose_qubit(self, handle: QubitHandle, rng=None) -> None:
        """Erasure: a Z measurement with discarded outcome, then release.

        Exact in distribution for the erasure channel on every backend.
        """
        self.measure_and_release(handle, "Z", rng, record=False)

    def _release(self, part: Partition, handle: QubitHandle) -> None:
        part.members.remove(handle)
        handle.alive = False
        del self._home[handle.id]
        self._labels.discard((handle.node, handle.label))
        if not part.members:
            del self._partitions[part.id]

    # -- fidelity helpers -----------------------------------------------------------

    def joint_state(self, handles: list[QubitHandle]) -> tuple[QuantumState, list[int]]:
        """Partition state holding all handles plus their qubit indices."""
        part = self._partition(handles[0])
        for h in handles[1:]:
            if self._partition(h) is not part:
                raise QNetSimError("handles span multiple partitions")
        return part.state, [part.index_of(h) for h in handles]

    def fidelity(self, handles: list[QubitHandle], reference: QuantumState) -> float:
        """Fidelity of the joint state of `handles` against a reference whose
        qubit i corresponds to handles[i]. The handles must exhaust their
        partition."""
        state, idx = self.joint_state(handles)
        if len(handles) != state.n:
            raise QNetSimError("reference fidelity needs the full partition")
        probe = state.copy()
        # permute partition order into handle order with SWAP gates
        pos = list(range(state.n))  # original index -> current position
        for i, orig in enumerate(idx):
            cur = pos[orig]
            if cur != i:
                probe.apply_gate(gate("SWAP", cur, i))
                for other, p in enumerate(pos):
                    if p == i:
                        pos[other] = cur
                        break
                pos[orig] = i
        return probe.fidelity(reference)

    # -- invariants --------------------------------------------------------------

    def _check(self) -> None:
        if self.on_change is not None:
            self.on_change()
        if not self.check_invariants:
            return
        total = sum(len(p.members) for p in self._partitions.values())
        assert total == len(self._home), "partition sizes out of sync with live qubits"
        for pid, part in self._partitions.items():
            assert part.state.n == len(part.members), f"partition {pid} size mismatch"
            for h in part.members:
                assert self._home[h.id] == pid and h.alive
