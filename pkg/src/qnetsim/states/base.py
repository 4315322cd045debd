"""Backend-independent state interface plus shared measurement plumbing.

Qubit ordering is little-endian everywhere: qubit 0 is the least significant
bit of a computational-basis index. Measurement outcomes use 0 for the +1
eigenvalue and 1 for the -1 eigenvalue.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from ..errors import BackendMismatchError, CapacityError
from .gates import BASIS_TO_Z, Gate, gate

# Fail-fast qubit limits for the dense representations; both grow so steeply
# that anything larger would thrash long before finishing.
DEFAULT_KET_MAX = 30
DEFAULT_DM_MAX = 15

NORM_TOL = 1e-9
_PROB_SNAP = 1e-12


@dataclass(frozen=True)
class NoiseMap:
    kind: str
    p: float

    def __post_init__(self):
        if self.kind != "depolarizing":
            raise ValueError(f"unsupported noise map: {self.kind}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"probability out of range: {self.p}")


def depolarizing(p: float) -> NoiseMap:
    return NoiseMap("depolarizing", p)


@dataclass(frozen=True)
class ClusterSpec:
    """Rectangular lattice, row-major qubit order: (x, y) -> x*cols + y."""

    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("cluster dimensions must be >= 1")

    @property
    def n(self) -> int:
        return self.rows * self.cols

    def index(self, x: int, y: int) -> int:
        return x * self.cols + y

    def edges(self) -> Iterator[tuple[int, int]]:
        """Nearest-neighbor couplings, horizontal then vertical."""
        for x in range(self.rows):
            for y in range(self.cols):
                if x + 1 < self.rows:
                    yield self.index(x, y), self.index(x + 1, y)
                if y + 1 < self.cols:
                    yield self.index(x, y), self.index(x, y + 1)


def snap_probability(p: float) -> float:
    """Clamp float fuzz so Clifford outcome probabilities are exact.

    Keeps measurement draws aligned across backends: every backend sees the
    same 0 / 0.5 / 1 for stabilizer circuits and consumes the same number of
    RNG draws.
    """
    for exact in (0.0, 0.5, 1.0):
        if abs(p - exact) < _PROB_SNAP:
            return exact
    return min(max(p, 0.0), 1.0)


class QuantumState:
    """Common quantum-state contract; backends mutate in place."""

    backend: str

    @property
    def n(self) -> int:
        raise NotImplementedError

    def copy(self) -> "QuantumState":
        raise NotImplementedError

    def apply_gate(self, g: Gate) -> None:
        raise NotImplementedError

    def z_prob_one(self, qubit: int) -> float:
        """Born probability of outcome 1 for a Z measurement of `qubit`."""
        raise NotImplementedError

    def collapse_z(self, qubit: int, outcome: int) -> None:
        raise NotImplementedError

    def collapse_z_remove(self, qubit: int, outcome: int) -> None:
        """Collapse and drop the qubit; higher indices shift down."""
        raise NotImplementedError

    def tensor(self, other: "QuantumState") -> "QuantumState":
        raise NotImplementedError

    def discard(self, qubit: int) -> None:
        raise NotImplementedError

    def fidelity(self, reference: "QuantumState") -> float:
        raise NotImplementedError

    # -- shared logic ------------------------------------------------------

    def _check_qubit(self, qubit: int) -> None:
        if not 0 <= qubit < self.n:
            raise IndexError(f"qubit {qubit} out of range for n={self.n}")

    def _rotate(self, qubit: int, kinds: tuple[str, ...]) -> None:
        for kind in kinds:
            self.apply_gate(gate(kind, qubit))

    def _sample_z(self, qubit: int, rng: Optional[np.random.Generator]) -> int:
        p1 = snap_probability(self.z_prob_one(qubit))
        if p1 == 0.0:
            return 0
        if p1 == 1.0:
            return 1
        if rng is None:
            raise ValueError("rng required: outcome is not deterministic")
        return 1 if rng.random() < p1 else 0

    def measure(self, qubit: int, basis: str, rng=None) -> int:
        """Projective measurement; the qubit stays, collapsed in place."""
        self._check_qubit(qubit)
        to_z, from_z = _basis_rotation(basis)
        self._rotate(qubit, to_z)
        outcome = self._sample_z(qubit, rng)
        self.collapse_z(qubit, outcome)
        self._rotate(qubit, from_z)
        return outcome

    def measure_remove(self, qubit: int, basis: str, rng=None) -> int:
        """Measure then drop the qubit from the state."""
        self._check_qubit(qubit)
        to_z, _ = _basis_rotation(basis)
        self._rotate(qubit, to_z)
        outcome = self._sample_z(qubit, rng)
        self.collapse_z_remove(qubit, outcome)
        return outcome

    def depolarize(self, qubit: int, p: float, rng=None) -> None:
        """Single-qubit depolarizing channel.

        Density matrices apply the map exactly; pure-state backends use the
        trajectory unraveling (probability 3p/4 of a uniform non-identity
        Pauli), which reproduces the map in expectation.
        """
        self._check_qubit(qubit)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability out of range: {p}")
        if p == 0.0:
            return
        if rng is None:
            raise ValueError("rng required for trajectory sampling")
        if rng.random() < 0.75 * p:
            kind = ("X", "Y", "Z")[rng.integers(3)]
            self.apply_gate(gate(kind, qubit))

    def apply_noise(self, noise: NoiseMap, qubit: int, rng=None) -> None:
        self.depolarize(qubit, noise.p, rng)

    def evaluate_all(self, rng=None) -> str:
        """Z-measure every qubit in index order, dropping each; returns bits."""
        bits = []
        while self.n:
            bits.append(self.measure_remove(0, "Z", rng))
        return "".join(str(b) for b in bits)

    def _require_same_backend(self, other: "QuantumState") -> None:
        if self.backend != other.backend:
            raise BackendMismatchError(
                f"cannot combine {self.backend} with {other.backend}"
            )


def _basis_rotation(basis: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
    try:
        return BASIS_TO_Z[basis]
    except KeyError:
        raise ValueError(f"invalid measurement basis: {basis!r}") from None


def check_capacity(n: int, limit: int, backend: str) -> None:
    if n > limit:
        raise CapacityError(
            f"{backend} backend limited to {limit} qubits (requested {n})"
        )
