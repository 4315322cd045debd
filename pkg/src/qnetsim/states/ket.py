"""State-vector backend: 2^n complex amplitudes, little-endian indexing."""
from __future__ import annotations

import numpy as np

from ..errors import EntangledDiscardError
from .base import DEFAULT_KET_MAX, NORM_TOL, QuantumState, check_capacity
from .gates import MATRIX_1Q, Gate


class KetState(QuantumState):
    backend = "ket"

    def __init__(self, vec: np.ndarray, max_qubits: int = DEFAULT_KET_MAX):
        vec = np.asarray(vec, dtype=complex).ravel()
        n = int(vec.size).bit_length() - 1
        if vec.size != 1 << n:
            raise ValueError(f"amplitude count {vec.size} is not a power of two")
        check_capacity(n, max_qubits, "ket")
        self._vec = vec
        self._n = n
        self.max_qubits = max_qubits

    @classmethod
    def zeros(cls, n: int, max_qubits: int = DEFAULT_KET_MAX) -> "KetState":
        check_capacity(n, max_qubits, "ket")
        vec = np.zeros(1 << n, dtype=complex)
        vec[0] = 1.0
        return cls(vec, max_qubits)

    @classmethod
    def plus(cls, n: int, max_qubits: int = DEFAULT_KET_MAX) -> "KetState":
        check_capacity(n, max_qubits, "ket")
        vec = np.full(1 << n, 2.0 ** (-n / 2), dtype=complex)
        return cls(vec, max_qubits)

    @property
    def n(self) -> int:
        return self._n

    @property
    def vector(self) -> np.ndarray:
        return self._vec

    def copy(self) -> "KetState":
        return KetState(self._vec.copy(), self.max_qubits)

    def norm_error(self) -> float:
        return abs(float(np.sum(np.abs(self._vec) ** 2)) - 1.0)

    # -- gates ---------------------------------------------------------------

    def _axes(self, qubit: int) -> tuple[int, int]:
        # (outer, inner) block sizes around the qubit axis
        return 1 << (self._n - 1 - qubit), 1 << qubit

    def apply_gate(self, g: Gate) -> None:
        for t in g.targets:
            self._check_qubit(t)
        if g.kind in MATRIX_1Q:
            self._apply_1q(MATRIX_1Q[g.kind], g.targets[0])
        else:
            self._apply_2q(g.kind, g.targets[0], g.targets[1])

    def _apply_1q(self, u: np.ndarray, qubit: int) -> None:
        outer, inner = self._axes(qubit)
        arr = self._vec.reshape(outer, 2, inner)
        self._vec = np.matmul(u, arr).reshape(-1)

    def _view4(self, qa: int, qb: int) -> np.ndarray:
        # 5-axis view with explicit axes for qubits qa > qb
        hi = 1 << (self._n - 1 - qa)
        mid = 1 << (qa - qb - 1)
        lo = 1 << qb
        return self._vec.reshape(hi, 2, mid, 2, lo)

    def _apply_2q(self, kind: str, a: int, b: int) -> None:
        if kind == "CZ":
            qa, qb = max(a, b), min(a, b)
            self._view4(qa, qb)[:, 1, :, 1, :] *= -1.0
        elif kind == "CNOT":
            control, target = a, b
            qa, qb = max(a, b), min(a, b)
            arr = self._view4(qa, qb)
            if control > target:
                lo, hi = arr[:, 1, :, 0, :].copy(), arr[:, 1, :, 1, :].copy()
                arr[:, 1, :, 0, :], arr[:, 1, :, 1, :] = hi, lo
            else:
                lo, hi = arr[:, 0, :, 1, :].copy(), arr[:, 1, :, 1, :].copy()
                arr[:, 0, :, 1, :], arr[:, 1, :, 1, :] = hi, lo
        elif kind == "SWAP":
            qa, qb = max(a, b), min(a, b)
            arr = self._view4(qa, qb)
            x, y = arr[:, 0, :, 1, :].copy(), arr[:, 1, :, 0, :].copy()
            arr[:, 0, :, 1, :], arr[:, 1, :, 0, :] = y, x
        else:  # pragma: no cover
            raise ValueError(kind)

    # -- measurement ----------------------------------------------------------

    def z_prob_one(self, qubit: int) -> float:
        outer, inner = self._axes(qubit)
        arr = self._vec.reshape(outer, 2, inner)
        return float(np.sum(np.abs(arr[:, 1, :]) ** 2))

    def collapse_z(self, qubit: int, outcome: int) -> None:
        outer, inner = self._axes(qubit)
        arr = self._vec.reshape(outer, 2, inner)
        keep = np.sqrt(np.sum(np.abs(arr[:, outcome, :]) ** 2))
        if keep < NORM_TOL:
            raise ValueError("collapse onto zero-probability outcome")
        arr[:, 1 - outcome, :] = 0.0
        self._vec /= keep

    def collapse_z_remove(self, qubit: int, outcome: int) -> None:
        outer, inner = self._axes(qubit)
        arr = self._vec.reshape(outer, 2, inner)
        kept = arr[:, outcome, :].ravel()
        keep = np.sqrt(np.sum(np.abs(kept) ** 2))
        if keep < NORM_TOL:
            raise ValueError("collapse onto zero-probability outcome")
        self._vec = kept / keep
        self._n -= 1

    # -- structure -------------------------------------------------------------

    def tensor(self, other: QuantumState) -> "KetState":
        self._require_same_backend(other)
        assert isinstance(other, KetState)
        check_capacity(self._n + other._n, self.max_qubits, "ket")
        # self occupies the low bits, so it is the second kron factor
        return KetState(np.kron(other._vec, self._vec), self.max_qubits)

    def discard(self, qubit: int) -> None:
        self._check_qubit(qubit)
        outer, inner = self._axes(qubit)
        arr = self._vec.reshape(outer, 2, inner)
        s0 = arr[:, 0, :].ravel()
        s1 = arr[:, 1, :].ravel()
        n0 = float(np.sum(np.abs(s0) ** 2))
        n1 = float(np.sum(np.abs(s1) ** 2))
        if n1 < NORM_TOL:
            kept = s0
        elif n0 < NORM_TOL:
            kept = s1
        else:
            overlap = abs(np.vdot(s0, s1)) ** 2
            if abs(overlap - n0 * n1) > NORM_TOL:
                raise EntangledDiscardError(
                    f"qubit {qubit} is entangled; measure it first"
                )
            kept = s0
        norm = np.sqrt(np.sum(np.abs(kept) ** 2))
        self._vec = kept / norm
        self._n -= 1

    # -- comparison -------------------------------------------------------------

    def to_ket(self) -> "KetState":
        return self.copy()

    def fidelity(self, reference: QuantumState) -> float:
        ref = _reference_vector(reference)
        if ref.size != self._vec.size:
            raise ValueError("qubit-count mismatch in fidelity")
        return float(abs(np.vdot(ref, self._vec)) ** 2)


def _reference_vector(reference: QuantumState) -> np.ndarray:
    to_ket = getattr(reference, "to_ket", None)
    if to_ket is None:
        raise TypeError(f"cannot use {reference.backend} state as pure reference")
    return to_ket().vector
