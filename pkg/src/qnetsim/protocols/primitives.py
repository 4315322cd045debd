"""Bell-state measurement and the matching Pauli correction table.

The convention pair is fixed jointly: bsm() on a fresh |Phi+> yields (0, 0),
and applying pauli_correction(b1, b2) to the far qubit always restores |Phi+>
(checked end to end by the fidelity-1 invariants).
"""
from __future__ import annotations

from typing import Callable

from ..fabric import Network
from ..registry import QubitHandle

CORRECTION_TABLE = {
    (0, 0): (),
    (0, 1): ("X",),
    (1, 0): ("Z",),
    (1, 1): ("Z", "X"),
}


def pauli_correction(b1: int, b2: int) -> tuple[str, ...]:
    """Gates for the receiving qubit given the two BSM bits."""
    return CORRECTION_TABLE[(int(b1), int(b2))]


def accumulate_bits(pairs) -> tuple[int, int]:
    """XOR-fold BSM outcomes along a swapping chain."""
    b1 = b2 = 0
    for a, b in pairs:
        b1 ^= a
        b2 ^= b
    return b1, b2


def bsm(
    net: Network,
    node: str,
    h1: QubitHandle,
    h2: QubitHandle,
    then: Callable[[int, int], None],
) -> None:
    """CNOT(h1->h2), H(h1), Z-measure both, with gate timings applied.

    `then(b1, b2)` fires when the second measurement completes.
    """

    def after_cnot() -> None:
        net.local_gate(node, "H", [h1], then=after_h)

    def after_h() -> None:
        net.local_measure(node, h1, "Z", then=after_m1)

    def after_m1(b1: int) -> None:
        net.local_measure(node, h2, "Z", then=lambda b2: then(b1, b2))

    net.local_gate(node, "CNOT", [h1, h2], then=after_cnot)


def apply_corrections(
    net: Network,
    node: str,
    handle: QubitHandle,
    gates: tuple[str, ...],
    then: Callable[[], None],
) -> None:
    """Apply single-qubit corrections sequentially, honoring gate timings."""
    if not gates:
        net.engine.schedule(0, then)
        return
    head, rest = gates[0], gates[1:]
    net.local_gate(node, head, [handle], then=lambda: apply_corrections(net, node, handle, rest, then))
