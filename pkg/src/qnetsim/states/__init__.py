"""Quantum-state backends behind one interface.

Backends are selected by name: "ket" (state vector), "dm" (density matrix),
"stab" (stabilizer tableau).
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .base import (
    DEFAULT_DM_MAX,
    DEFAULT_KET_MAX,
    ClusterSpec,
    NoiseMap,
    QuantumState,
    depolarizing,
    snap_probability,
)
from .dm import DmState
from .gates import Gate, gate
from .ket import KetState
from .stab import StabState

BACKENDS = ("ket", "dm", "stab")

_CLASSES = {"ket": KetState, "dm": DmState, "stab": StabState}

_DEFAULT_CAPS = {"ket": DEFAULT_KET_MAX, "dm": DEFAULT_DM_MAX, "stab": None}


def _cls(backend: str):
    try:
        return _CLASSES[backend]
    except KeyError:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}") from None


def init_zeros(n: int, backend: str, max_qubits: Optional[int] = None) -> QuantumState:
    cls = _cls(backend)
    kwargs = {} if max_qubits is None else {"max_qubits": max_qubits}
    return cls.zeros(n, **kwargs)


def init_plus(n: int, backend: str, max_qubits: Optional[int] = None) -> QuantumState:
    """|+><+|^n in the chosen representation."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cls = _cls(backend)
    kwargs = {} if max_qubits is None else {"max_qubits": max_qubits}
    return cls.plus(n, **kwargs)


def bell_pair(backend: str) -> QuantumState:
    """|Phi+> = (|00> + |11>)/sqrt(2)."""
    state = init_zeros(2, backend)
    state.apply_gate(gate("H", 0))
    state.apply_gate(gate("CNOT", 0, 1))
    return state


def prepare_cluster(
    spec: ClusterSpec, backend: str, max_qubits: Optional[int] = None
) -> QuantumState:
    """CZ-entangled rectangular lattice on |+>^n; CZs commute so edge order
    is irrelevant to the result."""
    state = init_plus(spec.n, backend, max_qubits)
    for a, b in spec.edges():
        state.apply_gate(gate("CZ", a, b))
    return state


def erase_qubit_event(rng: np.random.Generator, p: float) -> bool:
    """One erasure-channel draw: True means the transmitted qubit is lost."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"loss probability out of range: {p}")
    if p == 0.0:
        return False
    if p == 1.0:
        return True
    return bool(rng.random() < p)


def default_capacity(backend: str) -> Optional[int]:
    return _DEFAULT_CAPS[backend]


__all__ = [
    "BACKENDS",
    "ClusterSpec",
    "DmState",
    "Gate",
    "KetState",
    "NoiseMap",
    "QuantumState",
    "StabState",
    "bell_pair",
    "default_capacity",
    "depolarizing",
    "erase_qubit_event",
    "gate",
    "init_plus",
    "init_zeros",
    "prepare_cluster",
    "snap_probability",
]
