import numpy as np
import pytest

from qnetsim.engine import make_rng
from qnetsim.states import gate

ONE_QUBIT = ("H", "S", "Sdg", "X", "Y", "Z")
TWO_QUBIT = ("CZ", "CNOT", "SWAP")


def random_clifford_ops(rng, n, depth, two_qubit_frac=0.4):
    """Random Clifford circuit as a list of gates."""
    ops = []
    for _ in range(depth):
        if n >= 2 and rng.random() < two_qubit_frac:
            a, b = rng.choice(n, size=2, replace=False)
            ops.append(gate(str(rng.choice(TWO_QUBIT)), int(a), int(b)))
        else:
            ops.append(gate(str(rng.choice(ONE_QUBIT)), int(rng.integers(n))))
    return ops


@pytest.fixture
def rng():
    return make_rng(20260810, "tests")
