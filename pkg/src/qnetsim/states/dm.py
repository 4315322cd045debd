"""Density-matrix backend: 2^n x 2^n Hermitian matrix, exact channel maps."""
from __future__ import annotations

import numpy as np

from .base import DEFAULT_DM_MAX, NORM_TOL, QuantumState, check_capacity
from .gates import MATRIX_1Q, Gate
from .ket import KetState, _reference_vector


class DmState(QuantumState):
    backend = "dm"

    def __init__(self, rho: np.ndarray, max_qubits: int = DEFAULT_DM_MAX):
        rho = np.asarray(rho, dtype=complex)
        dim = rho.shape[0]
        n = int(dim).bit_length() - 1
        if rho.shape != (dim, dim) or dim != 1 << n:
            raise ValueError(f"bad density-matrix shape: {rho.shape}")
        check_capacity(n, max_qubits, "dm")
        self._rho = rho
        self._n = n
        self.max_qubits = max_qubits

    @classmethod
    def from_ket(cls, ket: KetState, max_qubits: int = DEFAULT_DM_MAX) -> "DmState":
        v = ket.vector
        return cls(np.outer(v, v.conj()), max_qubits)

    @classmethod
    def zeros(cls, n: int, max_qubits: int = DEFAULT_DM_MAX) -> "DmState":
        check_capacity(n, max_qubits, "dm")
        rho = np.zeros((1 << n, 1 << n), dtype=complex)
        rho[0, 0] = 1.0
        return cls(rho, max_qubits)

    @classmethod
    def plus(cls, n: int, max_qubits: int = DEFAULT_DM_MAX) -> "DmState":
        check_capacity(n, max_qubits, "dm")
        rho = np.full((1 << n, 1 << n), 2.0 ** (-n), dtype=complex)
        return cls(rho, max_qubits)

    @property
    def n(self) -> int:
        return self._n

    @property
    def matrix(self) -> np.ndarray:
        return self._rho

    def copy(self) -> "DmState":
        return DmState(self._rho.copy(), self.max_qubits)

    def trace_error(self) -> float:
        return abs(float(np.trace(self._rho).real) - 1.0)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self._rho - self._rho.conj().T)))

    # -- gates ---------------------------------------------------------------

    def _axes(self, qubit: int) -> tuple[int, int]:
        return 1 << (self._n - 1 - qubit), 1 << qubit

    def apply_gate(self, g: Gate) -> None:
        for t in g.targets:
            self._check_qubit(t)
        if g.kind in MATRIX_1Q:
            self._conjugate_1q(MATRIX_1Q[g.kind], g.targets[0])
        else:
            self._apply_2q(g.kind, g.targets[0], g.targets[1])

    def _conjugate_1q(self, u: np.ndarray, qubit: int) -> None:
        dim = 1 << self._n
        outer, inner = self._axes(qubit)
        rows = self._rho.reshape(outer, 2, inner * dim)
        rho = np.matmul(u, rows).reshape(dim, dim)
        cols = rho.reshape(dim * outer, 2, inner)
        self._rho = np.matmul(u.conj(), cols).reshape(dim, dim)

    def _view6(self, qa: int, qb: int, axis: int) -> np.ndarray:
        """Six-axis view exposing qubits qa > qb on the row or column side."""
        hi = 1 << (self._n - 1 - qa)
        mid = 1 << (qa - qb - 1)
        lo = 1 << qb
        dim = 1 << self._n
        if axis == 0:
            return self._rho.reshape(hi, 2, mid, 2, lo * dim)
        return self._rho.reshape(dim * hi, 2, mid, 2, lo)

    def _apply_2q(self, kind: str, a: int, b: int) -> None:
        # CZ/CNOT/SWAP are real and self-inverse: conjugation acts identically
        # (element-wise) on the row and on the column axis
        qa, qb = max(a, b), min(a, b)
        for axis in (0, 1):
            arr = self._view6(qa, qb, axis)
            if kind == "CZ":
                arr[:, 1, :, 1, :] *= -1.0
            elif kind == "CNOT":
                control_is_high = a > b
                if control_is_high:
                    lo, hi = arr[:, 1, :, 0, :].copy(), arr[:, 1, :, 1, :].copy()
                    arr[:, 1, :, 0, :], arr[:, 1, :, 1, :] = hi, lo
                else:
                    lo, hi = arr[:, 0, :, 1, :].copy(), arr[:, 1, :, 1, :].copy()
                    arr[:, 0, :, 1, :], arr[:, 1, :, 1, :] = hi, lo
            elif kind == "SWAP":
                x, y = arr[:, 0, :, 1, :].copy(), arr[:, 1, :, 0, :].copy()
                arr[:, 0, :, 1, :], arr[:, 1, :, 0, :] = y, x
            else:  # pragma: no cover
                raise ValueError(kind)

    # -- measurement ----------------------------------------------------------

    def z_prob_one(self, qubit: int) -> float:
        outer, inner = self._axes(qubit)
        diag = np.einsum("ii->i", self._rho).reshape(outer, 2, inner)
        return float(diag[:, 1, :].real.sum())

    def _project(self, qubit: int, outcome: int) -> float:
        dim = 1 << self._n
        outer, inner = self._axes(qubit)
        rows = self._rho.reshape(outer, 2, inner * dim)
        rows[:, 1 - outcome, :] = 0.0
        cols = self._rho.reshape(dim, outer, 2, inner)
        cols[:, :, 1 - outcome, :] = 0.0
        prob = float(np.trace(self._rho).real)
        if prob < NORM_TOL:
            raise ValueError("collapse onto zero-probability outcome")
        return prob

    def collapse_z(self, qubit: int, outcome: int) -> None:
        self._rho /= self._project(qubit, outcome)

    def collapse_z_remove(self, qubit: int, outcome: int) -> None:
        prob = self._project(qubit, outcome)
        self._trace_out(qubit)
        self._rho /= prob

    def _trace_out(self, qubit: int) -> None:
        outer, inner = self._axes(qubit)
        six = self._rho.reshape(outer, 2, inner, outer, 2, inner)
        self._rho = (six[:, 0, :, :, 0, :] + six[:, 1, :, :, 1, :]).reshape(
            1 << (self._n - 1), 1 << (self._n - 1)
        )
        self._n -= 1

    # -- channels ---------------------------------------------------------------

    def depolarize(self, qubit: int, p: float, rng=None) -> None:
        """Exact map: rho -> (1-p) rho + p I/2 (x) tr_q rho."""
        self._check_qubit(qubit)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability out of range: {p}")
        if p == 0.0:
            return
        acc = (1.0 - 0.75 * p) * self._rho
        for pauli in ("X", "Y", "Z"):
            twirl = self.copy()
            twirl._conjugate_1q(MATRIX_1Q[pauli], qubit)
            acc += 0.25 * p * twirl._rho
        self._rho = acc

    # -- structure -------------------------------------------------------------

    def tensor(self, other: QuantumState) -> "DmState":
        self._require_same_backend(other)
        assert isinstance(other, DmState)
        check_capacity(self._n + other._n, self.max_qubits, "dm")
        return DmState(np.kron(other._rho, self._rho), self.max_qubits)

    def discard(self, qubit: int) -> None:
        self._check_qubit(qubit)
        self._trace_out(qubit)

    def fidelity(self, reference: QuantumState) -> float:
        if isinstance(reference, DmState):
            if reference._n != self._n:
                raise ValueError("qubit-count mismatch in fidelity")
            return float(np.trace(self._rho @ reference._rho).real)
        ref = _reference_vector(reference)
        if ref.size != 1 << self._n:
            raise ValueError("qubit-count mismatch in fidelity")
        return float(np.real(ref.conj() @ (self._rho @ ref)))
