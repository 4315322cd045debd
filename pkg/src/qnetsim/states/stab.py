"""Stabilizer backend: destabilizer/stabilizer generator tableau.

The tableau keeps n destabilizer and n stabilizer rows over uint8 bit
matrices. Measured qubits are factored out by swapping their column (and the
spent generator pair) to the end of the live window and shrinking it, so a
discard costs O(n) instead of a full re-canonicalization. A logical-to-
physical column map hides the swaps from callers: qubit indices behave as if
higher indices simply shift down on removal.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import CapacityError, EntangledDiscardError
from .base import QuantumState
from .gates import BASIS_TO_Z, Gate
from . import kernels
from .ket import KetState

_KET_CONVERT_MAX = 20


class StabState(QuantumState):
    backend = "stab"

    def __init__(self, xs, zs, rs, xd, zd, col=None, log=None, m=None):
        self._xs = xs
        self._zs = zs
        self._rs = rs
        self._xd = xd
        self._zd = zd
        self._m = xs.shape[0] if m is None else m
        cap = xs.shape[0]
        self._col = np.arange(cap, dtype=np.int64) if col is None else col
        self._log = np.arange(cap, dtype=np.int64) if log is None else log

    @classmethod
    def _blank(cls, n: int) -> tuple[np.ndarray, ...]:
        # Fortran order: gate updates and measurement scans walk whole columns
        # (one qubit, all generators), so the column axis must be contiguous.
        shape = (n, n)
        return (
            np.zeros(shape, dtype=np.uint8, order="F"),
            np.zeros(shape, dtype=np.uint8, order="F"),
            np.zeros(n, dtype=np.uint8),
            np.zeros(shape, dtype=np.uint8, order="F"),
            np.zeros(shape, dtype=np.uint8, order="F"),
        )

    @classmethod
    def zeros(cls, n: int, max_qubits: Optional[int] = None) -> "StabState":
        xs, zs, rs, xd, zd = cls._blank(n)
        np.fill_diagonal(zs, 1)  # stabilizers Z_i
        np.fill_diagonal(xd, 1)  # destabilizers X_i
        return cls(xs, zs, rs, xd, zd)

    @classmethod
    def plus(cls, n: int, max_qubits: Optional[int] = None) -> "StabState":
        xs, zs, rs, xd, zd = cls._blank(n)
        np.fill_diagonal(xs, 1)  # stabilizers X_i
        np.fill_diagonal(zd, 1)  # destabilizers Z_i
        return cls(xs, zs, rs, xd, zd)

    @property
    def n(self) -> int:
        return self._m

    def copy(self) -> "StabState":
        xs, zs, rs, xd, zd = self._logical_arrays()
        return StabState(xs, zs, rs, xd, zd)

    def _logical_arrays(self) -> tuple[np.ndarray, ...]:
        """Compact copies with columns in logical qubit order."""
        m = self._m
        cols = self._col[:m]
        return (
            np.asfortranarray(self._xs[:m][:, cols]),
            np.asfortranarray(self._zs[:m][:, cols]),
            self._rs[:m].copy(),
            np.asfortranarray(self._xd[:m][:, cols]),
            np.asfortranarray(self._zd[:m][:, cols]),
        )

    def stabilizer_generators(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(x, z, sign) bit matrices of the current generators, logical order."""
        xs, zs, rs, _, _ = self._logical_arrays()
        return xs, zs, rs

    # -- gates ---------------------------------------------------------------

    def apply_gate(self, g: Gate) -> None:
        for t in g.targets:
            self._check_qubit(t)
        m = self._m
        phys = tuple(int(self._col[t]) for t in g.targets)
        xs, zs, rs = self._xs[:m], self._zs[:m], self._rs[:m]
        xd, zd = self._xd[:m], self._zd[:m]
        kind = g.kind
        if kind == "I":
            return
        if kind == "H":
            (c,) = phys
            rs ^= xs[:, c] & zs[:, c]
            for a in (xs, zs), (xd, zd):
                tmp = a[0][:, c].copy()
                a[0][:, c] = a[1][:, c]
                a[1][:, c] = tmp
        elif kind == "S":
            (c,) = phys
            rs ^= xs[:, c] & zs[:, c]
            zs[:, c] ^= xs[:, c]
            zd[:, c] ^= xd[:, c]
        elif kind == "Sdg":
            (c,) = phys
            rs ^= xs[:, c] & (zs[:, c] ^ 1)
            zs[:, c] ^= xs[:, c]
            zd[:, c] ^= xd[:, c]
        elif kind == "X":
            (c,) = phys
            rs ^= zs[:, c]
        elif kind == "Y":
            (c,) = phys
            rs ^= xs[:, c] ^ zs[:, c]
        elif kind == "Z":
            (c,) = phys
            rs ^= xs[:, c]
        elif kind == "CNOT":
            a, b = phys
            rs ^= xs[:, a] & zs[:, b] & (xs[:, b] ^ zs[:, a] ^ 1)
            xs[:, b] ^= xs[:, a]
            zs[:, a] ^= zs[:, b]
            xd[:, b] ^= xd[:, a]
            zd[:, a] ^= zd[:, b]
        elif kind == "CZ":
            a, b = phys
            rs ^= xs[:, a] & xs[:, b] & (zs[:, a] ^ zs[:, b])
            zs[:, a] ^= xs[:, b]
            zs[:, b] ^= xs[:, a]
            zd[:, a] ^= xd[:, b]
            zd[:, b] ^= xd[:, a]
        elif kind == "SWAP":
            a, b = phys
            for arr in (xs, zs, xd, zd):
                tmp = arr[:, a].copy()
                arr[:, a] = arr[:, b]
                arr[:, b] = tmp
        else:  # pragma: no cover
            raise ValueError(kind)

    # -- measurement ----------------------------------------------------------

    def _anti_rows(self, c: int) -> np.ndarray:
        return np.nonzero(self._xs[: self._m, c])[0]

    def z_prob_one(self, qubit: int) -> float:
        c = int(self._col[qubit])
        if self._anti_rows(c).size:
            return 0.5
        _, _, sign = self._deterministic_product(c)
        return float(sign)

    def _deterministic_product(self, c: int):
        m = self._m
        rows_t = np.nonzero(self._xd[:m, c])[0]
        px, pz, sign = kernels.row_product(
            self._xs[:m, :m], self._zs[:m, :m], self._rs[:m], rows_t
        )
        return rows_t, (px, pz), sign

    def _chp_update(self, c: int, outcome: int) -> int:
        """Random-outcome branch of the CHP measurement; returns pivot row."""
        m = self._m
        anti = self._anti_rows(c)
        p = int(anti[0])
        xp = self._xs[p, :m].copy()
        zp = self._zs[p, :m].copy()
        rp = int(self._rs[p])
        kernels.mul_into_rows(
            self._xs[:m, :m], self._zs[:m, :m], self._rs[:m], anti[1:], xp, zp, rp
        )
        rows_d = np.nonzero(self._xd[:m, c])[0]
        kernels.xor_into_rows(self._xd[:m, :m], self._zd[:m, :m], rows_d, xp, zp)
        self._xd[p, :m] = xp
        self._zd[p, :m] = zp
        self._xs[p, :m] = 0
        self._zs[p, :m] = 0
        self._zs[p, c] = 1
        self._rs[p] = outcome
        return p

    def collapse_z(self, qubit: int, outcome: int) -> None:
        c = int(self._col[qubit])
        if self._anti_rows(c).size:
            self._chp_update(c, outcome)
            return
        _, _, sign = self._deterministic_product(c)
        if sign != outcome:
            raise ValueError("collapse onto zero-probability outcome")

    def collapse_z_remove(self, qubit: int, outcome: int) -> None:
        """Collapse + drop without materializing the spent generator pair.

        The stabilizer row that becomes +/-Z_q and its destabilizer partner
        are deleted immediately, so only their sign bit is ever needed.
        """
        c = int(self._col[qubit])
        m = self._m
        anti = self._anti_rows(c)
        if anti.size:
            p = int(anti[0])
            xp = self._xs[p, :m].copy()
            zp = self._zs[p, :m].copy()
            rp = int(self._rs[p])
            kernels.mul_into_rows(
                self._xs[:m, :m], self._zs[:m, :m], self._rs[:m], anti[1:], xp, zp, rp
            )
            rows_d = np.nonzero(self._xd[:m, c])[0]
            rows_d = rows_d[rows_d != p]
            kernels.xor_into_rows(self._xd[:m, :m], self._zd[:m, :m], rows_d, xp, zp)
            self._rs[p] = outcome
        else:
            rows_t, _, sign = self._deterministic_product(c)
            if sign != outcome:
                raise ValueError("collapse onto zero-probability outcome")
            p = int(rows_t[0])
            self._rs[p] = sign
            # keep the symplectic pairing consistent with replacing row p by
            # the product of the rows in rows_t
            xdp = self._xd[p, :m].copy()
            zdp = self._zd[p, :m].copy()
            kernels.xor_into_rows(self._xd[:m, :m], self._zd[:m, :m], rows_t[1:], xdp, zdp)
            rows_x = np.nonzero(self._xd[:m, c])[0]
            rows_x = rows_x[rows_x != p]
            kernels.xor_into_rows(self._xd[:m, :m], self._zd[:m, :m], rows_x, xdp, zdp)
        # clear the qubit's Z support from every kept stabilizer row
        rows_z = np.nonzero(self._zs[:m, c])[0]
        rows_z = rows_z[rows_z != p]
        self._rs[rows_z] ^= self._rs[p]
        self._zs[rows_z, c] = 0
        self._drop_generator_and_column(p, c, qubit)

    def _drop_generator_and_column(self, p: int, c: int, qubit: int) -> None:
        m = self._m
        last = m - 1
        if p != last:
            for arr in (self._xs, self._zs, self._xd, self._zd):
                arr[p, :m] = arr[last, :m]
            self._rs[p] = self._rs[last]
        if c != last:
            for arr in (self._xs, self._zs, self._xd, self._zd):
                arr[:m, c] = arr[:m, last]
            moved = int(self._log[last])
            self._col[moved] = c
            self._log[c] = moved
        self._col[qubit : m - 1] = self._col[qubit + 1 : m].copy()
        live_log = self._log[: m - 1]
        live_log[live_log > qubit] -= 1
        self._m = m - 1

    # -- structure -------------------------------------------------------------

    def tensor(self, other: QuantumState) -> "StabState":
        self._require_same_backend(other)
        assert isinstance(other, StabState)
        a = self._logical_arrays()
        b = other._logical_arrays()
        na, nb = self._m, other._m
        xs, zs, rs, xd, zd = StabState._blank(na + nb)
        for dst, src_a, src_b in zip((xs, zs, xd, zd), a[:2] + a[3:], b[:2] + b[3:]):
            dst[:na, :na] = src_a
            dst[na:, na:] = src_b
        rs[:na] = a[2]
        rs[na:] = b[2]
        return StabState(xs, zs, rs, xd, zd)

    def discard(self, qubit: int) -> None:
        """Drop a qubit that is in a product single-qubit stabilizer state.

        The qubit is unentangled exactly when some Pauli on it alone commutes
        with every generator, i.e. the measurement in that basis would be
        deterministic.
        """
        self._check_qubit(qubit)
        m = self._m
        c = int(self._col[qubit])
        xcol = self._xs[:m, c]
        zcol = self._zs[:m, c]
        if not xcol.any():
            rotation: tuple[str, ...] = ()
        elif not zcol.any():
            rotation = BASIS_TO_Z["X"][0]
        elif not (xcol ^ zcol).any():
            rotation = BASIS_TO_Z["Y"][0]
        else:
            raise EntangledDiscardError(f"qubit {qubit} is entangled; measure it first")
        for kind in rotation:
            self.apply_gate(Gate(kind, (qubit,)))
        outcome = int(self.z_prob_one(qubit))
        self.collapse_z_remove(qubit, outcome)

    # -- comparison -------------------------------------------------------------

    def to_ket(self, max_qubits: int = _KET_CONVERT_MAX) -> KetState:
        n = self._m
        if n > max_qubits:
            raise CapacityError(f"stabilizer-to-ket conversion limited to {max_qubits} qubits")
        if n == 0:
            return KetState(np.ones(1, dtype=complex))
        # find one basis state with nonzero amplitude by greedy collapse
        probe = self.copy()
        index = 0
        for q in range(n):
            p1 = probe.z_prob_one(q)
            outcome = 0 if p1 == 0.5 else int(p1)
            probe.collapse_z(q, outcome)
            index |= outcome << q
        vec = np.zeros(1 << n, dtype=complex)
        vec[index] = 1.0
        xs, zs, rs = self.stabilizer_generators()
        idx = np.arange(1 << n, dtype=np.uint64)
        for i in range(n):
            xint = _bits_to_int(xs[i])
            zint = _bits_to_int(zs[i])
            iexp = int(np.sum(xs[i] & zs[i], dtype=np.int64)) % 4
            parity = (np.bitwise_count(idx & np.uint64(zint)) & 1).astype(np.int64)
            phase = (1j**iexp) * (1.0 - 2.0 * parity) * (-1.0 if rs[i] else 1.0)
            moved = (phase * vec)[(idx ^ np.uint64(xint)).astype(np.int64)]
            vec = 0.5 * (vec + moved)
        norm = np.linalg.norm(vec)
        if norm < 1e-12:  # pragma: no cover - would indicate a tableau bug
            raise RuntimeError("projector annihilated the seed state")
        vec /= norm
        first = np.flatnonzero(np.abs(vec) > 1e-12)[0]
        vec *= np.exp(-1j * np.angle(vec[first]))
        return KetState(vec, max_qubits=max(max_qubits, n))

    def canonical_form(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Unique RREF of the stabilizer group with signs; basis for equality.

        First pass pivots on X bits column by column; rows left below the
        X-rank are then pure-Z and get their own RREF pass.
        """
        xs, zs, rs, _, _ = self._logical_arrays()
        m = self._m
        rank = 0
        for bits in (xs, zs):
            for j in range(m):
                if rank == m:
                    break
                pivots = np.nonzero(bits[rank:, j])[0]
                if pivots.size == 0:
                    continue
                p = rank + int(pivots[0])
                if p != rank:
                    for arr in (xs, zs):
                        arr[[p, rank]] = arr[[rank, p]]
                    rs[[p, rank]] = rs[[rank, p]]
                others = np.nonzero(bits[:, j])[0]
                others = others[others != rank]
                kernels.mul_into_rows(
                    xs, zs, rs, others, xs[rank].copy(), zs[rank].copy(), int(rs[rank])
                )
                rank += 1
        return xs, zs, rs

    def equals_up_to_phase(self, other: "StabState") -> bool:
        if self._m != other._m:
            return False
        a = self.canonical_form()
        b = other.canonical_form()
        return all(np.array_equal(x, y) for x, y in zip(a, b))

    def contains_pauli(self, xbits, zbits, sign: int = 0) -> bool:
        """Is (-1)^sign W(x, z) an element of the stabilizer group?

        Reduces the candidate against the canonical generators; membership
        means it cancels completely with a matching sign.
        """
        ax = np.asarray(xbits, dtype=np.uint8).reshape(1, -1).copy()
        az = np.asarray(zbits, dtype=np.uint8).reshape(1, -1).copy()
        ar = np.array([sign], dtype=np.uint8)
        one = np.array([0], dtype=np.int64)
        cx, cz, cr = self.canonical_form()
        for i in range(self._m):
            lead_x = np.nonzero(cx[i])[0]
            if lead_x.size:
                hit = ax[0, lead_x[0]]
            else:
                lead_z = np.nonzero(cz[i])[0]
                if lead_z.size == 0:
                    continue
                hit = az[0, lead_z[0]]
            if hit:
                kernels.mul_into_rows(ax, az, ar, one, cx[i], cz[i], int(cr[i]))
        return not ax.any() and not az.any() and ar[0] == 0

    def fidelity(self, reference: QuantumState) -> float:
        if isinstance(reference, StabState):
            if reference.n != self.n:
                raise ValueError("qubit-count mismatch in fidelity")
            if self.equals_up_to_phase(reference):
                return 1.0
            if self.n <= _KET_CONVERT_MAX:
                return self.to_ket().fidelity(reference.to_ket())
            raise CapacityError(
                "fidelity of unequal stabilizer states needs ket conversion (n <= 20)"
            )
        if self.n > _KET_CONVERT_MAX:
            raise CapacityError("stabilizer fidelity vs dense reference needs n <= 20")
        return self.to_ket().fidelity(reference)


def _bits_to_int(bits: np.ndarray) -> int:
    out = 0
    for j, b in enumerate(bits):
        if b:
            out |= 1 << j
    return out
