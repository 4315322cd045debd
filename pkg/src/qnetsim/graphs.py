"""Graph-state calculus: local complementation, vertex deletion, and the
single-qubit Pauli measurement rules, with conversion to backend states.

Value semantics: every operation returns a new graph. Outcome encoding is
0 for the +1 eigenvalue, 1 for the -1 eigenvalue. A Y measurement on vertex
a turns |G> into the graph state of tau_a(G) - a on the survivors, up to
outcome-dependent single-qubit corrections on the old neighbors of a:
S-dagger on each neighbor for outcome 0, S for outcome 1. A Z measurement
deletes the vertex; outcome 1 leaves a Z correction on each neighbor.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable

from .states import QuantumState, gate, init_plus, init_zeros

Vertex = Hashable


@dataclass(frozen=True)
class EntGraph:
    """Undirected simple graph over hashable, sortable vertex labels."""

    _adj: dict

    @classmethod
    def from_edges(cls, vertices: Iterable[Vertex], edges: Iterable[tuple] = ()) -> "EntGraph":
        adj: dict = {v: frozenset() for v in vertices}
        g = cls(adj)
        for u, v in edges:
            g = g.with_edge(u, v)
        return g

    @classmethod
    def path(cls, vertices: list) -> "EntGraph":
        return cls.from_edges(vertices, zip(vertices, vertices[1:]))

    # -- accessors ---------------------------------------------------------

    @property
    def vertices(self) -> frozenset:
        return frozenset(self._adj)

    def neighbors(self, v: Vertex) -> frozenset:
        self._require(v)
        return self._adj[v]

    def edges(self) -> frozenset:
        out = set()
        for u, nbrs in self._adj.items():
            for v in nbrs:
                out.add(frozenset((u, v)))
        return frozenset(out)

    def edge_list(self) -> list[tuple]:
        return sorted(tuple(sorted(e)) for e in self.edges())

    def has_edge(self, u: Vertex, v: Vertex) -> bool:
        return v in self._adj.get(u, frozenset())

    def __len__(self) -> int:
        return len(self._adj)

    def __contains__(self, v: Vertex) -> bool:
        return v in self._adj

    def __eq__(self, other) -> bool:
        return isinstance(other, EntGraph) and self._adj == other._adj

    def __hash__(self):
        return hash(frozenset((v, n) for v, n in self._adj.items()))

    def _require(self, v: Vertex) -> None:
        if v not in self._adj:
            raise KeyError(f"unknown vertex {v!r}")

    # -- pure transformations ------------------------------------------------

    def with_edge(self, u: Vertex, v: Vertex) -> "EntGraph":
        self._require(u)
        self._require(v)
        if u == v:
            raise ValueError("self-loops are not allowed")
        adj = dict(self._adj)
        adj[u] = adj[u] | {v}
        adj[v] = adj[v] | {u}
        return EntGraph(adj)

    def local_complement(self, a: Vertex) -> "EntGraph":
        """Complement the subgraph induced on the neighborhood of a."""
        self._require(a)
        nbrs = self._adj[a]
        adj = dict(self._adj)
        for u in nbrs:
            adj[u] = (adj[u] ^ (nbrs - {u})) | {a}
        return EntGraph(adj)

    def delete_vertex(self, a: Vertex) -> "EntGraph":
        self._require(a)
        adj = {v: nbrs - {a} for v, nbrs in self._adj.items() if v != a}
        return EntGraph(adj)


@dataclass(frozen=True)
class CorrectionPlan:
    """Single-qubit Clifford fix-ups owed to the measured vertex's neighbors."""

    vertex: Vertex
    basis: str
    outcome: int
    corrections: dict

    def gates_for(self, v: Vertex) -> tuple[str, ...]:
        return self.corrections.get(v, ())


def measure_pauli_rule(g: EntGraph, a: Vertex, basis: str, outcome: int) -> tuple[EntGraph, CorrectionPlan]:
    """Symbolic effect of measuring Pauli Y or Z on vertex a of |G>."""
    if basis == "Y":
        nbrs = g.neighbors(a)
        after = g.local_complement(a).delete_vertex(a)
        fix = ("Sdg",) if outcome == 0 else ("S",)
        plan = {v: fix for v in nbrs}
    elif basis == "Z":
        nbrs = g.neighbors(a)
        after = g.delete_vertex(a)
        plan = {v: ("Z",) for v in nbrs} if outcome == 1 else {}
    elif basis == "X":
        raise ValueError("X-basis rule is out of scope (needs a special-neighbor choice)")
    else:
        raise ValueError(f"invalid measurement basis: {basis!r}")
    return after, CorrectionPlan(a, basis, outcome, plan)


def vertex_order(g: EntGraph) -> list:
    return sorted(g.vertices)


def graph_to_state(g: EntGraph, backend: str, max_qubits=None) -> QuantumState:
    """|+>^n with a CZ per edge; qubit i is the i-th vertex in sorted order."""
    order = vertex_order(g)
    if not order:
        return init_zeros(0, backend, max_qubits)
    index = {v: i for i, v in enumerate(order)}
    state = init_plus(len(order), backend, max_qubits)
    for u, v in g.edge_list():
        state.apply_gate(gate("CZ", index[u], index[v]))
    return state
