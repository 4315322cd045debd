"""Clifford gate set shared by all backends."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_S2 = 1.0 / np.sqrt(2.0)

MATRIX_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
}

TWO_QUBIT = ("CZ", "CNOT", "SWAP")
GATE_KINDS = tuple(MATRIX_1Q) + TWO_QUBIT


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind: {self.kind}")
        arity = 2 if self.kind in TWO_QUBIT else 1
        if len(self.targets) != arity:
            raise ValueError(f"{self.kind} takes {arity} target(s), got {self.targets}")
        if self.kind in TWO_QUBIT and self.targets[0] == self.targets[1]:
            raise ValueError(f"{self.kind} targets must differ")


def gate(kind: str, *targets: int) -> Gate:
    return Gate(kind, tuple(int(t) for t in targets))


# Rotations U with U Z U^dag = basis, used to measure in X/Y by measuring Z.
# to_z is applied before the Z measurement, from_z restores the frame after.
BASIS_TO_Z = {
    "Z": ((), ()),
    "X": (("H",), ("H",)),
    "Y": (("Sdg", "H"), ("H", "S")),
}
