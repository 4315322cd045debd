"""NDJSON event traces: one JSON object per line, fixed key order per kind.

The format is append-only and replayable: a topology header first, then
lifecycle events whose fold reconstructs the entanglement partitioning at any
timestamp. Timestamps are integer nanoseconds; no floats anywhere, so equal
seeds give byte-identical files.
"""
from __future__ import annotations

import io
import json
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import TraceOrderError

TRACE_SUFFIX = ".q2trace"

EVENT_KINDS = (
    "topology",
    "init_qubit",
    "entangle",
    "apply_gate",
    "send_qubit",
    "deliver_qubit",
    "lose_qubit",
    "measure",
    "classical_send",
    "classical_deliver",
    "classical_drop",
    "protocol_phase",
)


def _compact(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"))


class TraceWriter:
    """Single-writer NDJSON sink bound to a simulation clock."""

    def __init__(self, sink, clock: Callable[[], int]):
        if sink == "-":
            self._fh = sys.stdout
            self._owns = False
        elif isinstance(sink, (str,)):
            self._fh = open(sink, "w", encoding="utf-8")
            self._owns = True
        else:
            self._fh = sink
            self._owns = False
        self._clock = clock
        self._wrote_topology = False
        self._wrote_any = False

    def close(self) -> None:
        if self._owns:
            self._fh.close()

    def _emit(self, obj: dict) -> None:
        if not self._wrote_topology:
            raise TraceOrderError("topology header must be the first trace event")
        self._fh.write(_compact(obj) + "\n")
        self._wrote_any = True

    def write_topology(self, nodes, quantum_links, classical_links) -> None:
        if self._wrote_topology:
            raise TraceOrderError("topology header already written")
        if self._wrote_any:
            raise TraceOrderError("topology header must precede all events")
        obj = {
            "t": self._clock(),
            "ev": "topology",
            "nodes": list(nodes),
            "quantum_links": [list(l) for l in quantum_links],
            "classical_links": [list(l) for l in classical_links],
        }
        self._wrote_topology = True
        self._fh.write(_compact(obj) + "\n")
        self._wrote_any = True

    # -- event vocabulary --------------------------------------------------

    def init_qubit(self, node: str, qubit: str) -> None:
        self._emit({"t": self._clock(), "ev": "init_qubit", "node": node, "qubit": qubit})

    def entangle(self, qubits: list[str]) -> None:
        self._emit({"t": self._clock(), "ev": "entangle", "qubits": list(qubits)})

    def apply_gate(self, kind: str, qubits: list[str]) -> None:
        self._emit({"t": self._clock(), "ev": "apply_gate", "gate": kind, "qubits": list(qubits)})

    def send_qubit(self, qubit: str, src: str, dst: str) -> None:
        self._emit({"t": self._clock(), "ev": "send_qubit", "qubit": qubit, "from": src, "to": dst})

    def deliver_qubit(self, qubit: str, node: str) -> None:
        self._emit({"t": self._clock(), "ev": "deliver_qubit", "qubit": qubit, "node": node})

    def lose_qubit(self, qubit: str) -> None:
        self._emit({"t": self._clock(), "ev": "lose_qubit", "qubit": qubit})

    def measure(self, node: str, qubit: str, basis: str, outcome: int) -> None:
        self._emit(
            {
                "t": self._clock(),
                "ev": "measure",
                "node": node,
                "qubit": qubit,
                "basis": basis,
                "outcome": int(outcome),
            }
        )

    def classical_send(self, src: str, dst: str, kind: str, size: int) -> None:
        self._emit(
            {"t": self._clock(), "ev": "classical_send", "from": src, "to": dst, "kind": kind, "size": int(size)}
        )

    def classical_deliver(self, src: str, dst: str, kind: str) -> None:
        self._emit({"t": self._clock(), "ev": "classical_deliver", "from": src, "to": dst, "kind": kind})

    def classical_drop(self, src: str, dst: str, kind: str) -> None:
        self._emit({"t": self._clock(), "ev": "classical_drop", "from": src, "to": dst, "kind": kind})

    def protocol_phase(self, phase: str) -> None:
        self._emit({"t": self._clock(), "ev": "protocol_phase", "phase": phase})


# -- reading / folding ---------------------------------------------------------


def read_trace(source) -> list[dict]:
    """Parse NDJSON; raises ValueError naming the offending line."""
    if isinstance(source, str):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
    events = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            events.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed trace line {lineno}: {exc}") from None
    return events


@dataclass
class FoldState:
    """Entanglement partitioning implied by a trace prefix."""

    partitions: list[set] = field(default_factory=list)
    in_flight: dict = field(default_factory=dict)  # qubit -> (from, to)
    location: dict = field(default_factory=dict)  # qubit -> node

    def live_partitions(self) -> set[frozenset]:
        return {frozenset(p) for p in self.partitions if p}

    def _find(self, qubit: str) -> Optional[set]:
        for p in self.partitions:
            if qubit in p:
                return p
        return None

    def apply(self, ev: dict) -> None:
        kind = ev["ev"]
        if kind == "init_qubit":
            self.partitions.append({ev["qubit"]})
            self.location[ev["qubit"]] = ev["node"]
        elif kind == "entangle":
            merged: set = set()
            for q in ev["qubits"]:
                p = self._find(q)
                if p is not None:
                    self.partitions.remove(p)
                    merged |= p
                else:
                    merged.add(q)
            self.partitions.append(merged)
        elif kind in ("measure", "lose_qubit"):
            q = ev["qubit"]
            p = self._find(q)
            if p is not None:
                p.discard(q)
                if not p:
                    self.partitions.remove(p)
            self.location.pop(q, None)
            self.in_flight.pop(q, None)
        elif kind == "send_qubit":
            self.in_flight[ev["qubit"]] = (ev["from"], ev["to"])
            self.location.pop(ev["qubit"], None)
        elif kind == "deliver_qubit":
            self.in_flight.pop(ev["qubit"], None)
            self.location[ev["qubit"]] = ev["node"]

    def entanglement_graph(self) -> dict:
        """Canonical clique graph over live qubits (viewer fixture format)."""
        vertices = sorted(q for p in self.partitions for q in p)
        edges = []
        for p in self.partitions:
            mem = sorted(p)
            for i in range(len(mem)):
                for j in range(i + 1, len(mem)):
                    edges.append([mem[i], mem[j]])
        return {"vertices": vertices, "edges": sorted(edges)}


def fold_trace(events: list[dict]) -> FoldState:
    state = FoldState()
    for ev in events:
        state.apply(ev)
    return state


def canonical_graph_json(graph: dict) -> str:
    """Byte-stable serialization used for cross-component golden fixtures."""
    obj = {
        "vertices": sorted(graph["vertices"]),
        "edges": sorted([sorted(e) for e in graph["edges"]]),
    }
    return _compact(obj)
